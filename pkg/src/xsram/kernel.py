"""Select the integration kernel: compiled extension if built, else numpy.

Set ``XSRAM_PURE_PYTHON=1`` to force the numpy fallback.
"""

import os

from . import _kernel_py

if os.environ.get("XSRAM_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernel_py
else:
    try:
        from . import _kernel as _impl
    except ImportError:  # extension not built
        _impl = _kernel_py

integrate = _impl.integrate
IMPL = _impl.IMPL
