"""Fixed quadrature rules shared by the compiled and pure-Python backends."""

import functools

import numpy as np
from scipy.special import roots_jacobi

# Gauss-Kronrod 7/15 abscissae (positive half) and weights.
_XGK = (
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
)
_WGK = (
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
)
_WG = (
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
)

# 15 nodes in ascending order on [-1, 1]
GK_NODES = np.array([-x for x in _XGK[:7]] + [0.0] + list(_XGK[6::-1]))
GK_WK = np.array(list(_WGK[:7]) + [_WGK[7]] + list(_WGK[6::-1]))
GK_WG = np.zeros(15)
GK_WG[[1, 3, 5, 7, 9, 11, 13]] = [_WG[0], _WG[1], _WG[2], _WG[3], _WG[2], _WG[1], _WG[0]]

PROFILE_JACOBI_ORDER = 24
PROFILE_LEGENDRE_ORDER = 16
LOG_PANEL_WIDTH = 1.0
# beyond this point the profile tail is summed from the expansion of
# (1 + 1/v)^(-N/2); terms shrink like SERIES_SPLIT^-j
SERIES_SPLIT = 4.0
SERIES_TERMS = 40


@functools.lru_cache(maxsize=64)
def jacobi_unit(n, beta):
    """Nodes/weights on [0,1] for weight t^beta, exact for degree 2n-1."""
    x, w = roots_jacobi(n, 0.0, beta)
    t = 0.5 * (1.0 + x)
    w = w * 0.5 ** (beta + 1.0)
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w


@functools.lru_cache(maxsize=8)
def legendre_unit(n):
    x, w = np.polynomial.legendre.leggauss(n)
    t = 0.5 * (1.0 + x)
    w = 0.5 * w
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w


def profile_rules(s):
    tj, wj = jacobi_unit(PROFILE_JACOBI_ORDER, float(s) - 1.0)
    tl, wl = legendre_unit(PROFILE_LEGENDRE_ORDER)
    return tj, wj, tl, wl
