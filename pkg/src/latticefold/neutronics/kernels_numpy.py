"""Pure numpy/LAPACK fallback for the two-group diffusion kernel.

Same contract as kernels_numba.solve_two_group; used when numba is
unavailable or when LATTICEFOLD_KERNEL=numpy.  Assembly is vectorized
and the banded factorization defers to scipy's LAPACK bindings, so the
per-iteration arithmetic matches the JIT path to rounding error.
"""

import numpy as np
from scipy.linalg import cho_solve_banded, cholesky_banded

STATUS_OK = 0
STATUS_NO_CONVERGENCE = 1
STATUS_DEGENERATE = 2


def _band_factor(matN, xs, h, d_col, r_col):
    N = matN.shape[0]
    n = N * N
    D = xs[matN, d_col]
    diag = xs[matN, r_col].copy()

    c_east = 2.0 * D[:, :-1] * D[:, 1:] / (D[:, :-1] + D[:, 1:]) / (h * h)
    c_south = 2.0 * D[:-1, :] * D[1:, :] / (D[:-1, :] + D[1:, :]) / (h * h)
    diag[:, :-1] += c_east
    diag[:, 1:] += c_east
    diag[:-1, :] += c_south
    diag[1:, :] += c_south

    ab = np.zeros((N + 1, n))
    ab[0] = diag.ravel()
    east = np.zeros((N, N))
    east[:, :-1] = c_east
    ab[1] = -east.ravel()
    south = np.zeros((N, N))
    south[:-1, :] = c_south
    ab[N] = -south.ravel()
    return cholesky_banded(ab, lower=True)


def solve_two_group(mat, xs, m, pitch, k_tol, src_tol, max_iter):
    """Power iteration for the dominant (k, flux) pair of one layout."""
    N = mat.shape[0] * m
    n = N * N
    h = pitch / m
    matN = np.repeat(np.repeat(mat, m, axis=0), m, axis=1)

    xs_r = xs.copy()
    xs_r[:, 2] += xs[:, 6]
    try:
        cb1 = _band_factor(matN, xs_r, h, 0, 2)
        cb2 = _band_factor(matN, xs_r, h, 1, 3)
    except np.linalg.LinAlgError:
        return 0.0, np.zeros((N, N)), 0, STATUS_DEGENERATE

    nsf1 = xs[matN, 4].ravel()
    nsf2 = xs[matN, 5].ravel()
    s12 = xs[matN, 6].ravel()

    src = nsf1 + nsf2
    total = src.sum()
    if total <= 0.0:
        return 0.0, np.zeros((N, N)), 0, STATUS_DEGENERATE
    src = src * (n / total)

    k = 1.0
    status = STATUS_NO_CONVERGENCE
    it = 0
    phi1 = phi2 = np.zeros(n)
    while it < max_iter:
        it += 1
        phi1 = cho_solve_banded((cb1, True), src / k)
        phi2 = cho_solve_banded((cb2, True), s12 * phi1)
        s_new = nsf1 * phi1 + nsf2 * phi2
        total_new = s_new.sum()
        k_new = k * total_new / n
        s_norm = s_new * (n / total_new)
        err = np.abs(s_norm - src).max()
        smax = s_norm.max()
        src = s_norm
        dk = abs(k_new - k)
        k = k_new
        if dk < k_tol and err < src_tol * smax:
            status = STATUS_OK
            break

    power = (nsf1 * phi1 + nsf2 * phi2).reshape(N, N)
    return k, power, it, status
