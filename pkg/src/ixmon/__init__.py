"""IXP traffic telemetry toolkit.

Subpackages provide a synthetic feed simulator (``ixmon.simulate``), payload
extractors for the three feed formats (``ixmon.extract``, ``ixmon.digitize``),
an append-only sample store (``ixmon.store``), a fault-tolerant polling
collector (``ixmon.collector``), and the statistics suite (``ixmon.analytics``).
"""

__version__ = "0.1.0"
