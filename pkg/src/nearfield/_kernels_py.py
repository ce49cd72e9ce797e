"""Pure numpy implementation of the hot correlation kernels.

Mirrors ``_kernels_c.pyx`` function for function; used when the compiled
extension is unavailable or ``NEARFIELD_PURE_PYTHON=1`` is set.
"""

import numpy as np

# rows per chunk so a chunk of phases stays around a few MB
_CHUNK_ELEMS = 1 << 18


def _distances(ex, ez2, x, y):
    dx = x[:, None] - ex[None, :]
    return np.sqrt(dx * dx + (y * y)[:, None] + ez2[None, :])


def correlate(ex, ez, weights, k, r, phi):
    """Return ``sum_n w_n exp(+j k d_n(r_m, phi_m))`` for every point m.

    ``d_n`` is the exact distance from element n at (ex_n, 0, ez_n) to the
    plane point (r cos phi, r sin phi, 0). With ``weights = a(p_hat)`` this
    is ``a(p_m)^H a(p_hat)``.
    """
    ex = np.asarray(ex, dtype=np.float64)
    ez2 = np.asarray(ez, dtype=np.float64) ** 2
    w = np.asarray(weights, dtype=np.complex128)
    r = np.atleast_1d(np.asarray(r, dtype=np.float64))
    phi = np.atleast_1d(np.asarray(phi, dtype=np.float64))
    x, y = r * np.cos(phi), r * np.sin(phi)
    out = np.empty(r.shape[0], dtype=np.complex128)
    step = max(1, _CHUNK_ELEMS // max(1, ex.shape[0]))
    for s in range(0, r.shape[0], step):
        d = _distances(ex, ez2, x[s : s + step], y[s : s + step])
        out[s : s + step] = np.exp(1j * k * d) @ w
    return out


def pair_gains(ex, ez, k, r1, phi1, r2, phi2):
    """Relative gain ``|a(p1)^H a(p2)|^2 / N^2`` for paired positions."""
    ex = np.asarray(ex, dtype=np.float64)
    ez2 = np.asarray(ez, dtype=np.float64) ** 2
    r1, phi1, r2, phi2 = (np.atleast_1d(np.asarray(v, dtype=np.float64)) for v in (r1, phi1, r2, phi2))
    n = ex.shape[0]
    out = np.empty(r1.shape[0], dtype=np.float64)
    step = max(1, _CHUNK_ELEMS // max(1, n))
    for s in range(0, r1.shape[0], step):
        sl = slice(s, s + step)
        d1 = _distances(ex, ez2, r1[sl] * np.cos(phi1[sl]), r1[sl] * np.sin(phi1[sl]))
        d2 = _distances(ex, ez2, r2[sl] * np.cos(phi2[sl]), r2[sl] * np.sin(phi2[sl]))
        acc = np.exp(1j * k * (d1 - d2)).sum(axis=1)
        out[sl] = (acc.real**2 + acc.imag**2) / (n * n)
    return out
