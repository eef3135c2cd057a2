"""Small-message communication breakdown toolkit.

Analytical injection/latency models, a transmission-pipeline simulator,
PCIe-trace estimators, and what-if optimization sweeps over a measured
per-component timing set.
"""

from ._msgpath import *  # noqa: F401,F403
from ._msgpath import __doc__ as _core_doc  # noqa: F401

__version__ = "0.1.0"
