"""Pose-trajectory anomaly detection: multi-timescale bidirectional prediction."""

import os

if os.environ.get("MTP_CORE_FROM_BUILD"):
    # Test harness points PYTHONPATH at the build tree, where the extension
    # sits next to (not inside) this package.
    from _core import *  # noqa: F401,F403
    from _core import __doc__ as _core_doc
else:
    from ._core import *  # noqa: F401,F403
    from ._core import __doc__ as _core_doc

__version__ = "0.1.0"
