"""numpy versions of the solver kernels; same signatures as the compiled module."""

from __future__ import annotations

import numpy as np


def flux_residual(phi_faces: np.ndarray, R: np.ndarray, h: float) -> np.ndarray:
    """F[i, j] = Φ_i(face j+1) − Φ_i(face j) − h R[j]."""
    return phi_faces[:, 1:] - phi_faces[:, :-1] - h * R[None, :]


def banded_jacobian(g_faces: np.ndarray, R: np.ndarray, h: float, t: float) -> np.ndarray:
    """Jacobian of flux_residual in solve_banded layout, unknowns interleaved j*k + i.

    g_faces[i, f] is dΦ_i/dD at face f (faces 0 and n are boundary faces and
    carry no unknown). Bandwidth is k on both sides.
    """
    k, nf = g_faces.shape
    n = nf - 1
    N = k * n
    ab = np.zeros((2 * k + 1, N))
    cols = np.arange(N)
    i_idx = cols % k
    j_idx = cols // k
    right = g_faces[i_idx, j_idx + 1] / h
    left = g_faces[i_idx, j_idx] / h
    # right face (j+1/2) involves u_{j+1} and u_j; left face (j−1/2) u_j and u_{j−1}
    right = np.where(j_idx < n - 1, right, 0.0)
    left = np.where(j_idx > 0, left, 0.0)
    # diagonal
    ab[k, :] = -right - left + h * t * R[j_idx]
    # coupling between classes at the same node
    for off in range(1, k):
        rows = cols[: N - off]
        same = (rows // k) == ((rows + off) // k)
        vals = np.where(same, h * t * R[rows // k], 0.0)
        ab[k - off, off:] = vals  # A[r, r+off]
        ab[k + off, : N - off] = vals  # A[r+off, r]
    # neighbours: A[r, r+k] = right face of row r; A[r+k, r] = left face of row r+k
    ab[0, k:] = right[: N - k]
    ab[2 * k, : N - k] = left[k:]
    return ab


def legendre(a: np.ndarray, u: np.ndarray, p: np.ndarray, chunk: int = 512) -> tuple[np.ndarray, np.ndarray]:
    """max_j (p a_j − u_j) and its argmax, by brute force in chunks."""
    out = np.empty(p.shape[0])
    arg = np.empty(p.shape[0], dtype=np.int64)
    for s in range(0, p.shape[0], chunk):
        block = p[s : s + chunk, None] * a[None, :] - u[None, :]
        arg[s : s + chunk] = np.argmax(block, axis=1)
        out[s : s + chunk] = block[np.arange(block.shape[0]), arg[s : s + chunk]]
    return out, arg
