"""Pure numpy implementations of the hot grid kernels.

These mirror ``_kernels.pyx`` one for one and are used when the compiled
extension is unavailable or disabled.
"""
import numpy as np

_CHUNK = 1 << 18


def _sheared(xs, ps, shear):
    xs = np.asarray(xs, dtype=float)
    ps = np.asarray(ps, dtype=float)
    return xs[:, None] - shear * ps[None, :], ps[None, :]


def cat_grid(xs, ps, x0, p0, shear, scale):
    X, P = _sheared(xs, ps, shear)
    out = (np.exp(-(P - p0) ** 2 - (X - x0) ** 2)
           + np.exp(-(P + p0) ** 2 - (X + x0) ** 2)
           + 2.0 * np.exp(-X * X - P * P) * np.cos(2.0 * (p0 * X - P * x0)))
    out *= scale / np.pi
    return out


def gauss_grid(xs, ps, x0, p0, shear, scale):
    X, P = _sheared(xs, ps, shear)
    return (scale / np.pi) * np.exp(-(P - p0) ** 2 - (X - x0) ** 2)


def bilinear(values, x_min, dx, p_min, dp, x, p):
    """Bilinear interpolation of ``values`` at (x, p); zero outside the window."""
    nx, np_ = values.shape
    fi = (x - x_min) / dx
    fj = (p - p_min) / dp
    inside = (fi >= 0.0) & (fi <= nx - 1) & (fj >= 0.0) & (fj <= np_ - 1)
    i = np.minimum(np.floor(np.where(inside, fi, 0.0)).astype(np.intp), nx - 2)
    j = np.minimum(np.floor(np.where(inside, fj, 0.0)).astype(np.intp), np_ - 2)
    a = np.where(inside, fi, 0.0) - i
    b = np.where(inside, fj, 0.0) - j
    v = ((1.0 - a) * ((1.0 - b) * values[i, j] + b * values[i, j + 1])
         + a * ((1.0 - b) * values[i + 1, j] + b * values[i + 1, j + 1]))
    return np.where(inside, v, 0.0)


def line_integrals(values, x_min, dx, p_min, dp, q, u, wu, c, s):
    """For each q, the weighted sum over u of W(q c - u s, q s + u c)."""
    values = np.ascontiguousarray(values, dtype=float)
    q = np.asarray(q, dtype=float)
    u = np.asarray(u, dtype=float)
    wu = np.asarray(wu, dtype=float)
    out = np.empty(q.size)
    rows = max(1, _CHUNK // max(u.size, 1))
    for start in range(0, q.size, rows):
        qq = q[start:start + rows, None]
        v = bilinear(values, x_min, dx, p_min, dp, qq * c - u[None, :] * s,
                     qq * s + u[None, :] * c)
        out[start:start + rows] = v @ wu
    return out
