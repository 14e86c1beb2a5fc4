from ixmon.simulate.model import EventSpec, TrafficModel, generate_series
from ixmon.simulate.render import PlotConfig, ladder_ymax, render_api, render_html, render_plot
from ixmon.simulate.server import FeedServer, serve

__all__ = [
    "EventSpec",
    "TrafficModel",
    "generate_series",
    "PlotConfig",
    "ladder_ymax",
    "render_api",
    "render_html",
    "render_plot",
    "FeedServer",
    "serve",
]
