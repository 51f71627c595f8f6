"""Two-qubit Pauli algebra.

Bloch-vector observables, Pauli correlator decompositions of 4x4 Hermitian
operators, density-matrix sanity checks, and a dependency-free Jacobi
eigensolver used everywhere a smallest eigenvalue is needed.

All 9-component coefficient/correlator vectors use the fixed row order
(xx, xy, xz, yx, yy, yz, zx, zy, zz), i.e. index 3*i + j for Pauli pair
(sigma_i, sigma_j).
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "SIGMA_X",
    "SIGMA_Y",
    "SIGMA_Z",
    "IDENTITY_2",
    "PAULI_PAIR_LABELS",
    "JacobiConvergenceError",
    "bloch_from_angles",
    "observable_from_bloch",
    "pauli_coeffs_from_operator",
    "operator_from_pauli_coeffs",
    "min_eigenvalue",
    "check_state",
    "correlator_vector",
]

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)

PAULI_PAIR_LABELS = ("xx", "xy", "xz", "yx", "yy", "yz", "zx", "zy", "zz")

_SIGMAS = (SIGMA_X, SIGMA_Y, SIGMA_Z)
# sigma_i (x) sigma_j stacked in the fixed row order above.
_PAULI_PAIRS = np.stack([np.kron(si, sj) for si in _SIGMAS for sj in _SIGMAS])

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-12
POSITIVITY_TOL = 1e-10
# Residual single-body/identity content above this means the operator is not
# a pure two-body correlator combination.
CORRELATOR_CONTENT_TOL = 1e-10
JACOBI_SWEEP_TOL = 1e-13
_JACOBI_MAX_SWEEPS = 60


class JacobiConvergenceError(RuntimeError):
    """The cyclic Jacobi iteration failed to reach its sweep tolerance."""


def bloch_from_angles(theta: float, phi: float) -> np.ndarray:
    """Map spherical angles to the unit Bloch vector (cos t, sin t cos p, sin t sin p).

    Args:
        theta: polar angle in radians (any real; taken modulo its period).
        phi: azimuthal angle in radians.

    Returns:
        Array of shape (3,) with unit Euclidean norm.
    """
    st = np.sin(theta)
    return np.array([np.cos(theta), st * np.cos(phi), st * np.sin(phi)])


def observable_from_bloch(n) -> np.ndarray:
    """Build the dichotomic observable n . sigma for a unit direction n.

    Args:
        n: length-3 real direction; must have unit norm within 1e-12.

    Returns:
        2x2 complex Hermitian matrix with eigenvalues +1 and -1.

    Raises:
        ValueError: if the direction is not normalized.
    """
    n = np.asarray(n, dtype=float)
    if n.shape != (3,):
        raise ValueError(f"Bloch vector must have shape (3,), got {n.shape}")
    norm = float(np.linalg.norm(n))
    if abs(norm - 1.0) > 1e-12:
        raise ValueError(f"invalid direction: |n| = {norm!r}, expected 1")
    return n[0] * SIGMA_X + n[1] * SIGMA_Y + n[2] * SIGMA_Z


def _check_hermitian(h: np.ndarray, dim: int, what: str) -> np.ndarray:
    h = np.asarray(h, dtype=complex)
    if h.shape != (dim, dim):
        raise ValueError(f"{what} must be {dim}x{dim}, got shape {h.shape}")
    if np.max(np.abs(h - h.conj().T)) > HERMITICITY_TOL:
        raise ValueError(f"{what} is not Hermitian within {HERMITICITY_TOL}")
    return h


def pauli_coeffs_from_operator(h_op) -> np.ndarray:
    """Project a 4x4 Hermitian operator onto the two-body Pauli basis.

    Coefficient convention: h_ij = Tr((sigma_i x sigma_j) H) / 4, so that
    H = sum_ij h_ij sigma_i x sigma_j holds exactly for pure correlator
    operators.

    Args:
        h_op: 4x4 Hermitian matrix with no identity or single-body content.

    Returns:
        Array of shape (9,) in the fixed row order.

    Raises:
        ValueError: if the operator is not Hermitian, or carries identity or
            single-body components above 1e-10.
    """
    h_op = _check_hermitian(h_op, 4, "operator")
    ident = np.trace(h_op).real / 4.0
    if abs(ident) > CORRELATOR_CONTENT_TOL:
        raise ValueError(
            f"not a correlator operator: identity component {ident!r}"
        )
    for s in _SIGMAS:
        one_a = np.trace(np.kron(s, IDENTITY_2) @ h_op).real / 4.0
        one_b = np.trace(np.kron(IDENTITY_2, s) @ h_op).real / 4.0
        if abs(one_a) > CORRELATOR_CONTENT_TOL or abs(one_b) > CORRELATOR_CONTENT_TOL:
            raise ValueError(
                "not a correlator operator: single-body component "
                f"({one_a!r}, {one_b!r})"
            )
    return np.einsum("kab,ba->k", _PAULI_PAIRS, h_op).real / 4.0


def operator_from_pauli_coeffs(h) -> np.ndarray:
    """Assemble sum_ij h_ij sigma_i x sigma_j from a 9-component vector."""
    h = np.asarray(h, dtype=float)
    if h.shape != (9,):
        raise ValueError(f"coefficient vector must have shape (9,), got {h.shape}")
    return np.einsum("k,kab->ab", h, _PAULI_PAIRS)


def _jacobi_min_eig_symmetric(m: np.ndarray) -> float:
    """Smallest eigenvalue of a real symmetric matrix by cyclic Jacobi sweeps."""
    a = m.copy()
    n = a.shape[0]
    tol = JACOBI_SWEEP_TOL * max(1.0, float(np.linalg.norm(a)))
    for _ in range(_JACOBI_MAX_SWEEPS):
        off = np.sqrt(2.0 * np.sum(np.tril(a, -1) ** 2))
        if off <= tol:
            return float(np.min(np.diag(a)))
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                rp, rq = a[p].copy(), a[q].copy()
                a[p] = c * rp - s * rq
                a[q] = s * rp + c * rq
                cp, cq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * cp - s * cq
                a[:, q] = s * cp + c * cq
                a[p, q] = 0.0
                a[q, p] = 0.0
    raise JacobiConvergenceError(
        f"Jacobi sweeps did not reach off-diagonal norm {tol!r}"
    )


def min_eigenvalue(h_op) -> float:
    """Smallest eigenvalue of a 4x4 Hermitian operator.

    Uses cyclic Jacobi on the 8x8 real-symmetric embedding
    [[Re H, -Im H], [Im H, Re H]], whose spectrum is that of H doubled.

    Raises:
        ValueError: if the input is not Hermitian within 1e-12.
    """
    h_op = _check_hermitian(h_op, 4, "operator")
    a, b = h_op.real, h_op.imag
    embedded = np.block([[a, -b], [b, a]])
    return _jacobi_min_eig_symmetric(embedded)


def check_state(rho) -> np.ndarray:
    """Validate a two-qubit density matrix and return it as a complex array.

    Accepts Hermitian (1e-12), unit-trace (1e-12) matrices whose smallest
    eigenvalue is >= -1e-10 (floating-point slack for CPTP evolution).

    Raises:
        ValueError: describing the first failed check.
    """
    rho = _check_hermitian(rho, 4, "state")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise ValueError(f"state trace is {tr!r}, expected 1")
    lam = min_eigenvalue(rho)
    if lam < -POSITIVITY_TOL:
        raise ValueError(f"state has negative eigenvalue {lam!r}")
    return rho


def correlator_vector(rho) -> np.ndarray:
    """Two-body Pauli correlators c_ij = Tr(rho sigma_i x sigma_j).

    Args:
        rho: valid two-qubit density matrix.

    Returns:
        Array of shape (9,) in the fixed row order; entries lie in [-1, 1]
        up to floating-point slack.
    """
    rho = check_state(rho)
    return np.einsum("kab,ba->k", _PAULI_PAIRS, rho).real
