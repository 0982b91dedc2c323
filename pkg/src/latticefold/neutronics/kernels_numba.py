"""JIT-compiled two-group diffusion kernel.

Mesh-centered finite differences on an (17*m) x (17*m) grid with
harmonic-mean face coupling and reflective boundaries.  Each group
operator is SPD and banded (bandwidth = grid side), so it is factored
once per layout with a banded Cholesky; the outer power iteration then
only performs triangular solves.

The factor is kept in two band layouts so both substitution sweeps run
contiguous inner loops: row_t[i, d] = L[i, i-d] feeds the forward pass,
col_t[j, d] = L[j+d, j] the backward pass.  The dot-product kernels
carry reassociation/FMA fast-math flags so LLVM vectorizes the
reductions; that perturbs rounding by ~1e-15, far below every solver
tolerance, and stays bit-deterministic run to run.

Status codes returned by solve_two_group: 0 = converged,
1 = iteration limit, 2 = degenerate material (non-SPD operator or zero
fission source).
"""

import numpy as np
from numba import njit

STATUS_OK = 0
STATUS_NO_CONVERGENCE = 1
STATUS_DEGENERATE = 2


@njit(cache=True, fastmath={'contract', 'reassoc', 'nsz'})
def _band_cholesky(diag, east, south, N, row_t, col_t):
    # A is the 5-point operator: `diag` plus -east (right neighbor) and
    # -south (next row) couplings, raveled over an N x N grid.
    # Returns False if a pivot is <= 0.
    n = N * N
    bw = N
    for j in range(n):
        lo = j - bw
        if lo < 0:
            lo = 0
        s = diag[j]
        for d in range(1, j - lo + 1):
            v = row_t[j, d]
            s -= v * v
        if s <= 0.0:
            return False
        piv = np.sqrt(s)
        row_t[j, 0] = piv
        imax = j + bw
        if imax > n - 1:
            imax = n - 1
        for i in range(j + 1, imax + 1):
            if i == j + 1 and (j + 1) % N != 0:
                s = -east[j]
            elif i == j + N:
                s = -south[j]
            else:
                s = 0.0
            klo = i - bw
            if klo < lo:
                klo = lo
            for k in range(klo, j):
                s -= row_t[i, i - k] * row_t[j, j - k]
            row_t[i, i - j] = s / piv
    for j in range(n):
        dmax = bw
        if j + dmax > n - 1:
            dmax = n - 1 - j
        for d in range(dmax + 1):
            col_t[j, d] = row_t[j + d, d]
    return True


@njit(cache=True, fastmath={'contract', 'reassoc', 'nsz'})
def _band_solve(row_t, col_t, bw, b, x):
    # L L^T x = b via forward then backward substitution.
    n = b.shape[0]
    for i in range(n):
        dmax = bw
        if dmax > i:
            dmax = i
        s = b[i]
        for d in range(1, dmax + 1):
            s -= row_t[i, d] * x[i - d]
        x[i] = s / row_t[i, 0]
    for i in range(n - 1, -1, -1):
        dmax = bw
        if i + dmax > n - 1:
            dmax = n - 1 - i
        s = x[i]
        for d in range(1, dmax + 1):
            s -= col_t[i, d] * x[i + d]
        x[i] = s / col_t[i, 0]


@njit(cache=True)
def _assemble_group(matN, xs, h, d_col, r_col, diag, east, south):
    # Face couplings (harmonic-mean diffusion / h^2) and removal diagonal.
    N = matN.shape[0]
    h2 = h * h
    for i in range(N):
        for j in range(N):
            col = i * N + j
            dp = xs[matN[i, j], d_col]
            acc = xs[matN[i, j], r_col]
            if j + 1 < N:
                dq = xs[matN[i, j + 1], d_col]
                c = 2.0 * dp * dq / (dp + dq) / h2
                acc += c
                east[col] = c
            else:
                east[col] = 0.0
            if j - 1 >= 0:
                dq = xs[matN[i, j - 1], d_col]
                acc += 2.0 * dp * dq / (dp + dq) / h2
            if i + 1 < N:
                dq = xs[matN[i + 1, j], d_col]
                c = 2.0 * dp * dq / (dp + dq) / h2
                acc += c
                south[col] = c
            else:
                south[col] = 0.0
            if i - 1 >= 0:
                dq = xs[matN[i - 1, j], d_col]
                acc += 2.0 * dp * dq / (dp + dq) / h2
            diag[col] = acc


@njit(cache=True)
def solve_two_group(mat, xs, m, pitch, k_tol, src_tol, max_iter):
    """Power iteration for the dominant (k, flux) pair of one layout.

    mat  : (17, 17) uint8 material codes (0 fuel, 1 gd, 2 guide tube)
    xs   : (3, 7) table [d1, d2, sa1, sa2, nu_sf1, nu_sf2, ss12]
    Returns (k_eff, cell power density (N, N), iterations, status).
    """
    n_pin = mat.shape[0]
    N = n_pin * m
    n = N * N
    h = pitch / m

    matN = np.empty((N, N), dtype=np.uint8)
    for i in range(N):
        for j in range(N):
            matN[i, j] = mat[i // m, j // m]

    # Removal: group 1 loses to absorption + downscatter, group 2 to absorption.
    xs_r = xs.copy()
    for mm in range(xs.shape[0]):
        xs_r[mm, 2] = xs[mm, 2] + xs[mm, 6]

    diag = np.empty(n)
    east = np.empty(n)
    south = np.empty(n)
    row1 = np.zeros((n, N + 1))
    col1 = np.zeros((n, N + 1))
    row2 = np.zeros((n, N + 1))
    col2 = np.zeros((n, N + 1))

    _assemble_group(matN, xs_r, h, 0, 2, diag, east, south)
    if not _band_cholesky(diag, east, south, N, row1, col1):
        return 0.0, np.zeros((N, N)), 0, STATUS_DEGENERATE
    _assemble_group(matN, xs_r, h, 1, 3, diag, east, south)
    if not _band_cholesky(diag, east, south, N, row2, col2):
        return 0.0, np.zeros((N, N)), 0, STATUS_DEGENERATE

    nsf1 = np.empty(n)
    nsf2 = np.empty(n)
    s12 = np.empty(n)
    for i in range(N):
        for j in range(N):
            col = i * N + j
            mm = matN[i, j]
            nsf1[col] = xs[mm, 4]
            nsf2[col] = xs[mm, 5]
            s12[col] = xs[mm, 6]

    src = nsf1 + nsf2
    total = src.sum()
    if total <= 0.0:
        return 0.0, np.zeros((N, N)), 0, STATUS_DEGENERATE
    src *= n / total

    phi1 = np.empty(n)
    phi2 = np.empty(n)
    b = np.empty(n)
    k = 1.0
    status = STATUS_NO_CONVERGENCE
    it = 0
    while it < max_iter:
        it += 1
        for idx in range(n):
            b[idx] = src[idx] / k
        _band_solve(row1, col1, N, b, phi1)
        for idx in range(n):
            b[idx] = s12[idx] * phi1[idx]
        _band_solve(row2, col2, N, b, phi2)

        total_new = 0.0
        for idx in range(n):
            b[idx] = nsf1[idx] * phi1[idx] + nsf2[idx] * phi2[idx]
        for idx in range(n):
            total_new += b[idx]
        k_new = k * total_new / n

        scale = n / total_new
        err = 0.0
        smax = 0.0
        for idx in range(n):
            s_norm = b[idx] * scale
            d = abs(s_norm - src[idx])
            if d > err:
                err = d
            if s_norm > smax:
                smax = s_norm
            src[idx] = s_norm
        dk = abs(k_new - k)
        k = k_new
        if dk < k_tol and err < src_tol * smax:
            status = STATUS_OK
            break

    power = np.empty((N, N))
    for i in range(N):
        for j in range(N):
            col = i * N + j
            power[i, j] = nsf1[col] * phi1[col] + nsf2[col] * phi2[col]
    return k, power, it, status
