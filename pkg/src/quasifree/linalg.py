"""Hermitian matrix algebra for the two fixed sizes used here (2x2 and 4x4).

Matrices are plain complex ``numpy`` arrays. ``hermitian`` is the validating
constructor; the remaining functions assume its output. Eigenvalues use the
closed-form quadratic for 2x2 input and a cyclic complex Jacobi sweep for 4x4.
Both accept stacked input of shape ``(..., n, n)``.
"""
import numpy as np

from .errors import ConvergenceError, NotPSD, Singular, StructureError

HERMITICITY_TOL = 1e-12
PSD_TOL = 1e-10
JACOBI_TOL = 1e-13
_MAX_SWEEPS = 50
_DIMS = (2, 4)

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def dagger(M):
    return np.conj(np.swapaxes(M, -1, -2))


def hermitian(M, check=True):
    """Return ``M`` as a validated, exactly Hermitian complex array.

    The input is symmetrized as ``(M + M^H)/2`` so that round-off from
    integrators does not leak into later steps. With ``check`` set, an
    asymmetry above ``HERMITICITY_TOL`` raises ``StructureError`` instead.
    """
    M = np.array(M, dtype=complex)
    if M.ndim < 2 or M.shape[-1] != M.shape[-2] or M.shape[-1] not in _DIMS:
        raise StructureError(f"expected a 2x2 or 4x4 matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise StructureError("matrix has non-finite entries")
    if check:
        asym = np.max(np.abs(M - dagger(M)))
        if asym > HERMITICITY_TOL:
            raise StructureError(f"matrix is not Hermitian (asymmetry {asym:.3g})")
    H = 0.5 * (M + dagger(M))
    idx = np.arange(H.shape[-1])
    H[..., idx, idx] = H[..., idx, idx].real
    return H


def scale(M):
    """Magnitude used by the relative tolerances: ``1 + max |M_ij|``."""
    return 1.0 + np.max(np.abs(M), axis=(-2, -1))


def _eigvals_2x2(M):
    a = M[..., 0, 0].real
    d = M[..., 1, 1].real
    mean = 0.5 * (a + d)
    radius = np.hypot(0.5 * (a - d), np.abs(M[..., 0, 1]))
    return np.stack([mean - radius, mean + radius], axis=-1)


def _jacobi(M):
    """Cyclic Jacobi diagonalization of a stack of Hermitian matrices.

    Returns the rotated (diagonal) stack and the accumulated unitaries.
    """
    n = M.shape[-1]
    batch = M.shape[:-2]
    A = M.reshape(-1, n, n).astype(complex, copy=True)
    V = np.broadcast_to(np.eye(n, dtype=complex), A.shape).copy()
    norm = np.linalg.norm(A, axis=(-2, -1))
    offmask = ~np.eye(n, dtype=bool)
    rows = np.arange(A.shape[0])

    for _ in range(_MAX_SWEEPS):
        off = np.sqrt(np.sum(np.abs(A[:, offmask]) ** 2, axis=-1))
        if np.all(off <= JACOBI_TOL * norm):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[:, p, q]
                mag = np.abs(apq)
                active = mag > 1e-30 * norm
                if not np.any(active):
                    continue
                safe = np.where(active, mag, 1.0)
                phase = np.where(active, apq / safe, 1.0)
                theta = (A[:, q, q].real - A[:, p, p].real) / (2.0 * safe)
                sign = np.where(theta >= 0, 1.0, -1.0)
                t = sign / (np.abs(theta) + np.sqrt(1.0 + theta * theta))
                t = np.where(active, t, 0.0)
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                R = np.broadcast_to(np.eye(n, dtype=complex), A.shape).copy()
                R[rows, p, p] = c
                R[rows, p, q] = s
                R[rows, q, p] = -s * np.conj(phase)
                R[rows, q, q] = c * np.conj(phase)
                A = dagger(R) @ A @ R
                V = V @ R
    else:
        off = np.sqrt(np.sum(np.abs(A[:, offmask]) ** 2, axis=-1))
        if np.any(off > JACOBI_TOL * norm):
            raise ConvergenceError("Jacobi sweep did not converge")
    return A.reshape(batch + (n, n)), V.reshape(batch + (n, n))


def eigh(M):
    """Eigenvalues (ascending) and unit eigenvectors (columns) of Hermitian ``M``."""
    M = np.asarray(M, dtype=complex)
    D, V = _jacobi(M)
    w = np.diagonal(D, axis1=-2, axis2=-1).real
    order = np.argsort(w, axis=-1)
    w = np.take_along_axis(w, order, axis=-1)
    V = np.take_along_axis(V, order[..., None, :], axis=-1)
    return w, V


def eigenvalues_hermitian(M):
    """Ascending real eigenvalues of a (stack of) 2x2 or 4x4 Hermitian matrices."""
    M = np.asarray(M, dtype=complex)
    if M.shape[-1] == 2:
        return _eigvals_2x2(M)
    w = np.diagonal(_jacobi(M)[0], axis1=-2, axis2=-1).real
    return np.sort(w, axis=-1)


def min_eigenvalue(M):
    return eigenvalues_hermitian(M)[..., 0]


def is_psd(M, tol=PSD_TOL):
    """True iff the smallest eigenvalue is at least ``-tol * (1 + max |M_ij|)``."""
    if tol < 0:
        raise ValueError("tol must be non-negative")
    return bool(min_eigenvalue(M) >= -tol * scale(M))


def sqrt_psd(M, tol=PSD_TOL):
    """Unique positive semidefinite square root.

    Eigenvalues in ``[-tol*scale, 0)`` are clamped to zero, which is what
    boundary (rank-deficient) correlation matrices need.
    """
    M = np.asarray(M, dtype=complex)
    w, V = eigh(M)
    if w[0] < -tol * scale(M):
        raise NotPSD(f"matrix is not positive semidefinite (min eigenvalue {w[0]:.3g})")
    root = np.sqrt(np.clip(w, 0.0, None))
    return hermitian((V * root) @ dagger(V), check=False)


def determinant(M):
    M = np.asarray(M, dtype=complex)
    if M.shape[-1] == 2:
        return (M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]).real
    return float(np.prod(eigenvalues_hermitian(M)))


def inverse(M):
    """Inverse of a Hermitian matrix; ``Singular`` when the determinant is negligible."""
    M = np.asarray(M, dtype=complex)
    n = M.shape[-1]
    det = determinant(M)
    if abs(det) <= 1e-12 * (1.0 + np.linalg.norm(M)) ** n:
        raise Singular(f"matrix is singular (det {det:.3g})")
    if n == 2:
        adj = np.array([[M[1, 1], -M[0, 1]], [-M[1, 0], M[0, 0]]])
        return hermitian(adj / det, check=False)
    w, V = eigh(M)
    return hermitian((V / w) @ dagger(V), check=False)


def blocks(M):
    """Split a 4x4 matrix into its 2x2 blocks ``(M11, M12, M21, M22)``."""
    return M[:2, :2], M[:2, 2:], M[2:, :2], M[2:, 2:]


def schur_complement_upper(M):
    """``M11 - M12 M22^{-1} M21`` for a 4x4 Hermitian matrix."""
    M = np.asarray(M, dtype=complex)
    if M.shape != (4, 4):
        raise StructureError(f"expected a 4x4 matrix, got shape {M.shape}")
    M11, M12, M21, M22 = blocks(M)
    return hermitian(M11 - M12 @ inverse(M22) @ M21, check=False)
