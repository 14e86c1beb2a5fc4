import sys

from ixmon.cli import main

sys.exit(main())
