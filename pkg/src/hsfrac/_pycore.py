"""Pure numpy implementation of the hot kernels (fallback backend)."""

import math

import numpy as np

from ._rules import GK_WG, GK_WK, LOG_PANEL_WIDTH, SERIES_SPLIT, SERIES_TERMS

_EPS = np.finfo(float).eps
_UFLOW = np.finfo(float).tiny


def gk15_reduce(fvals, half_widths):
    """Kronrod value and QUADPACK-style error estimate for each panel row."""
    f = np.asarray(fvals, dtype=float)
    h = np.asarray(half_widths, dtype=float)
    resk = f @ GK_WK
    resg = f @ GK_WG
    resabs = np.abs(f) @ GK_WK
    resasc = np.abs(f - 0.5 * resk[:, None]) @ GK_WK
    ah = np.abs(h)
    value = resk * h
    err = np.abs((resk - resg) * h)
    resabs = resabs * ah
    resasc = resasc * ah
    mask = (resasc != 0.0) & (err != 0.0)
    scaled = np.ones_like(err)
    scaled[mask] = np.minimum(1.0, (200.0 * err[mask] / resasc[mask]) ** 1.5)
    err = np.where(mask, resasc * scaled, err)
    floor = 50.0 * _EPS * resabs
    err = np.where(resabs > _UFLOW / (50.0 * _EPS), np.maximum(floor, err), err)
    return value, err


def _series_tail(psi, s, hn):
    """int_S^psi v^(s-1) (1+v)^(-hn) dv termwise in powers of 1/v."""
    out = np.zeros_like(psi)
    c = 1.0
    lp, ls = np.log(psi), math.log(SERIES_SPLIT)
    for j in range(SERIES_TERMS):
        e = s - hn - j
        if e == 0.0:
            out += c * (lp - ls)
        elif abs(e) < 0.5:
            # psi^e - S^e loses digits when e is near 0
            out += c * math.exp(e * ls) * np.expm1(e * (lp - ls)) / e
        else:
            out += c * (np.exp(e * lp) - math.exp(e * ls)) / e
        c *= (-hn - j) / (j + 1)
    return out


def profile_batch(psi, s, N, tj, wj, tl, wl):
    """int_0^psi v^(s-1) (1+v)^(-N/2) dv for every entry of psi."""
    psi = np.asarray(psi, dtype=float)
    flat = psi.ravel()
    out = np.zeros_like(flat)
    hn = 0.5 * N
    pos = flat > 0.0
    a = np.minimum(flat[pos], 1.0)
    inner = (1.0 + a[:, None] * tj[None, :]) ** (-hn) @ wj
    out[pos] = a**s * inner
    big = flat > 1.0
    if np.any(big):
        L = np.log(np.minimum(flat[big], SERIES_SPLIT))
        n_pan = np.maximum(1, np.ceil(L / LOG_PANEL_WIDTH)).astype(int)
        h = L / n_pan
        p = np.arange(n_pan.max())
        live = p[None, :] < n_pan[:, None]
        w = (p[None, :, None] + tl[None, None, :]) * h[:, None, None]
        vals = np.exp(s * w - hn * (w + np.log1p(np.exp(-w))))
        panel = (vals @ wl) * live
        out[big] += h * panel.sum(axis=1)
    far = flat > SERIES_SPLIT
    if np.any(far):
        out[far] += _series_tail(flat[far], s, hn)
    return out.reshape(psi.shape)
