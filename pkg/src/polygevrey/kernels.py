"""Backend selection for the numeric kernels.

The compiled extension is used when it was built and importable; otherwise
the numpy versions are used. Setting ``POLYGEVREY_PURE=1`` forces numpy.
"""

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("POLYGEVREY_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"

horner_eval = _impl.horner_eval
dft_direct = _impl.dft_direct
pompeiu_sum = _impl.pompeiu_sum
kernel_sum = _impl.kernel_sum

__all__ = ["BACKEND", "horner_eval", "dft_direct", "pompeiu_sum", "kernel_sum"]
