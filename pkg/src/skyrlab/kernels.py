"""Backend selection for the hot kernels.

The environment variable ``SKYRLAB_BACKEND`` picks the implementation:

* unset or ``"numba"`` -- numba-compiled kernels (falls back to numpy with
  a warning if numba cannot be imported);
* ``"numpy"`` -- pure-numpy kernels, always available.

``BACKEND`` records the active choice so benchmarks and logs can report
it.  Both backends implement the same signatures and agree to 1e-12; the
test suite cross-checks them.
"""

import os
import warnings

_requested = os.environ.get("SKYRLAB_BACKEND", "").strip().lower()
if _requested not in ("", "numba", "numpy"):
    raise ValueError(
        f"SKYRLAB_BACKEND={_requested!r} not understood (use 'numba' or 'numpy')"
    )

if _requested == "numpy":
    from . import kernels_numpy as _impl
    BACKEND = "numpy"
else:
    try:
        from . import kernels_numba as _impl
        BACKEND = "numba"
    except ImportError:
        if _requested == "numba":
            raise
        warnings.warn("numba unavailable, using pure-numpy kernels", stacklevel=2)
        from . import kernels_numpy as _impl
        BACKEND = "numpy"

ham_apply = _impl.ham_apply
site_sigma_apply = _impl.site_sigma_apply
pauli_string_expect = _impl.pauli_string_expect
