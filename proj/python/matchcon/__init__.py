"""Simulation and certification toolkit for networks of identical DC/AC
converters under matching control.

The heavy lifting lives in the compiled extension; this package re-exports
its full surface.
"""

from ._matchcon import *  # noqa: F401,F403
from ._matchcon import __doc__  # noqa: F401

__version__ = "0.1.0"
