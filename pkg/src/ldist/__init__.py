"""Value distribution of Dirichlet L-functions against the random Euler product model."""

import numba as _nb

# numba's TBB layer warns on older TBB builds; the OpenMP layer is always present
if _nb.config.THREADING_LAYER == "default":
    _nb.config.THREADING_LAYER = "omp"

__version__ = "0.1.0"
