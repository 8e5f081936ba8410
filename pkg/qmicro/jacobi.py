"""Cyclic Jacobi diagonalization for small dense Hermitian matrices."""

import numpy as np

from qmicro.errors import InternalConsistencyError
from qmicro.logging_utils import get_logger

logger = get_logger(__name__)


def off_norm(a: np.ndarray) -> float:
    """Frobenius norm of the off-diagonal part."""
    return float(np.linalg.norm(a - np.diag(np.diag(a))))


def jacobi_eigenvalues(
    matrix: np.ndarray, rel_tol: float = 1e-14, max_sweeps: int = 100
) -> np.ndarray:
    """
    Eigenvalues of a Hermitian matrix by cyclic Jacobi rotations.

    Each (p, q) step first removes the phase of ``a[p, q]`` with a diagonal
    unitary and then applies a real plane rotation that annihilates it.

    Args:
        matrix (np.ndarray): Square Hermitian matrix (real or complex).
        rel_tol (float): Stop once the off-diagonal Frobenius norm falls below
            ``rel_tol`` times its initial value.
        max_sweeps (int): Upper bound on full cyclic sweeps.

    Returns:
        np.ndarray: Real eigenvalues in ascending order.

    Raises:
        InternalConsistencyError: If the sweeps do not converge.
    """
    a = np.array(matrix, dtype=complex)
    n = a.shape[0]
    initial = off_norm(a)
    # rounding floor: rotations leave O(eps * |A|) residue behind
    floor = 4.0 * np.finfo(float).eps * float(np.linalg.norm(a))
    target = max(rel_tol * initial, floor)
    sweeps = 0
    while off_norm(a) > target:
        if sweeps >= max_sweeps:
            raise InternalConsistencyError(
                f"Jacobi iteration did not converge in {max_sweeps} sweeps"
            )
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag == 0.0:
                    continue
                phase = apq / mag
                # make a[p, q] real and positive
                a[:, q] *= np.conj(phase)
                a[q, :] *= phase
                a[p, q] = mag
                a[q, p] = mag
                app, aqq = a[p, p].real, a[q, q].real
                theta = (aqq - app) / (2.0 * mag)
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = 0.0
                a[q, p] = 0.0
    logger.debug("Jacobi converged after %d sweeps (dimension %d)", sweeps, n)
    return np.sort(np.diag(a).real)
