"""Linear map between inequality coefficients and Bell-operator coefficients.

For measurement settings theta the transfer matrix T(theta) satisfies
T . alpha = h, where alpha are the correlator coefficients of the inequality
and h the Pauli coefficients of the Bell operator built from the same
settings. Rows follow the fixed Pauli-pair order of :mod:`bellbounce.pauli`;
columns are lexicographic in the setting pair (x1, x2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bell import BellCoeffs, Scenario
from .pauli import bloch_from_angles, observable_from_bloch

__all__ = [
    "MeasurementSettings",
    "TransferMatrix",
    "LinearSolveError",
    "build_transfer_matrix",
    "bell_operator",
    "solve_alpha",
    "null_space_basis",
    "quantum_value_from_data",
    "RESIDUAL_RTOL",
    "RANK_RCOND",
]

# Consistency gate for solved systems: ||T a - h|| <= RESIDUAL_RTOL * max(1, ||h||).
RESIDUAL_RTOL = 1e-8
# Relative singular-value cutoff for rank decisions and pseudo-inversion.
RANK_RCOND = 1e-10


class LinearSolveError(RuntimeError):
    """T . alpha = h could not be solved to tolerance (rank or residual)."""


@dataclass(frozen=True)
class MeasurementSettings:
    """Bloch angles of each party's observables.

    party_a: array (m1, 2) of (theta, phi) rows.
    party_b: array (m2, 2) of (gamma, phi_prime) rows.
    """

    party_a: np.ndarray
    party_b: np.ndarray

    def __post_init__(self):
        for name in ("party_a", "party_b"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 1:
                raise ValueError(f"{name} must be an (m, 2) angle array, got {v.shape}")
            if not np.all(np.isfinite(v)):
                raise ValueError(f"{name} angles must be finite")
            v = v.copy()
            v.flags.writeable = False
            object.__setattr__(self, name, v)

    @property
    def m1(self) -> int:
        return self.party_a.shape[0]

    @property
    def m2(self) -> int:
        return self.party_b.shape[0]

    def scenario(self) -> Scenario:
        return Scenario(self.m1, self.m2)

    def bloch_a(self) -> np.ndarray:
        return np.stack([bloch_from_angles(t, p) for t, p in self.party_a])

    def bloch_b(self) -> np.ndarray:
        return np.stack([bloch_from_angles(t, p) for t, p in self.party_b])

    def to_vector(self) -> np.ndarray:
        """Flatten to (theta_A0, phi_A0, ..., gamma_B0, phi'_B0, ...)."""
        return np.concatenate([self.party_a.ravel(), self.party_b.ravel()])

    @classmethod
    def from_vector(cls, m1: int, m2: int, vec) -> "MeasurementSettings":
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (2 * (m1 + m2),):
            raise ValueError(
                f"expected {2 * (m1 + m2)} angles for ({m1}, {m2}), got {vec.shape}"
            )
        return cls(vec[: 2 * m1].reshape(m1, 2), vec[2 * m1 :].reshape(m2, 2))


@dataclass(frozen=True)
class TransferMatrix:
    """The 9 x (m1*m2) matrix linking alpha to Pauli coefficients."""

    matrix: np.ndarray
    m1: int
    m2: int

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (9, self.m1 * self.m2):
            raise ValueError(f"transfer matrix shape {m.shape} != (9, {self.m1 * self.m2})")
        m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)


def build_transfer_matrix(ms: MeasurementSettings) -> TransferMatrix:
    """T[3i+j, x1*m2+x2] = nA[x1, i] * nB[x2, j] for the settings' Bloch vectors."""
    na = ms.bloch_a()
    nb = ms.bloch_b()
    t = np.einsum("ai,bj->ijab", na, nb).reshape(9, ms.m1 * ms.m2)
    return TransferMatrix(t, ms.m1, ms.m2)


def bell_operator(ms: MeasurementSettings, bc: BellCoeffs) -> np.ndarray:
    """Sum alpha[x1,x2] A_x1 (x) B_x2 as an explicit 4x4 Hermitian matrix.

    Built directly from the observables, independently of the transfer
    matrix, so the two construction paths can be cross-checked.
    """
    if (ms.m1, ms.m2) != bc.alpha.shape:
        raise ValueError(
            f"settings ({ms.m1}, {ms.m2}) do not match alpha {bc.alpha.shape}"
        )
    ops_a = [observable_from_bloch(n) for n in ms.bloch_a()]
    ops_b = [observable_from_bloch(n) for n in ms.bloch_b()]
    out = np.zeros((4, 4), dtype=complex)
    for x1 in range(ms.m1):
        for x2 in range(ms.m2):
            out += bc.alpha[x1, x2] * np.kron(ops_a[x1], ops_b[x2])
    return out


def _as_h_vector(h) -> np.ndarray:
    h = np.asarray(h, dtype=float)
    if h.shape != (9,):
        raise ValueError(f"h must have shape (9,), got {h.shape}")
    return h


def residual_norm(t: TransferMatrix, alpha_flat: np.ndarray, h: np.ndarray) -> float:
    return float(np.linalg.norm(t.matrix @ alpha_flat - h))


def solve_alpha(t: TransferMatrix, h, mode: str = "min_norm") -> BellCoeffs:
    """Solve T . alpha = h for the inequality coefficients.

    Args:
        t: transfer matrix of the settings.
        h: 9-component Pauli coefficient vector.
        mode: "unique" for the invertible 9-column case (exact solve plus one
            iterative-refinement step), "min_norm" for the SVD least-squares
            solution of minimal Euclidean norm (cutoff 1e-10 relative).

    Returns:
        BellCoeffs over the transfer matrix's scenario.

    Raises:
        ValueError: on a malformed mode or a unique-mode call without 9 columns.
        LinearSolveError: if T is numerically rank-deficient in unique mode, or
            the residual exceeds 1e-8 * max(1, ||h||) (h not representable).
    """
    h = _as_h_vector(h)
    n = t.matrix.shape[1]
    if mode == "unique":
        if n != 9:
            raise ValueError(f"unique mode needs 9 columns, transfer matrix has {n}")
        s = np.linalg.svd(t.matrix, compute_uv=False)
        if s[-1] <= RANK_RCOND * s[0]:
            raise LinearSolveError("transfer matrix is numerically rank-deficient")
        alpha = np.linalg.solve(t.matrix, h)
        alpha += np.linalg.solve(t.matrix, h - t.matrix @ alpha)
    elif mode == "min_norm":
        u, s, vt = np.linalg.svd(t.matrix, full_matrices=False)
        keep = s > RANK_RCOND * (s[0] if s.size else 0.0)
        coeffs = np.where(keep, np.divide(u.T @ h, s, where=keep, out=np.zeros_like(s)), 0.0)
        alpha = vt.T @ coeffs
    else:
        raise ValueError(f"unknown solve mode {mode!r}")
    res = residual_norm(t, alpha, h)
    if not np.isfinite(res) or res > RESIDUAL_RTOL * max(1.0, float(np.linalg.norm(h))):
        raise LinearSolveError(
            f"inconsistent system: residual {res!r} for these settings"
        )
    return BellCoeffs(Scenario(t.m1, t.m2), alpha.reshape(t.m1, t.m2))


def null_space_basis(t: TransferMatrix) -> list[np.ndarray]:
    """Orthonormal basis of {v : T v = 0}, flattened in column order.

    The basis has m1*m2 - rank(T) vectors; rank uses the same relative
    singular-value cutoff as :func:`solve_alpha`.
    """
    u, s, vt = np.linalg.svd(t.matrix, full_matrices=True)
    cutoff = RANK_RCOND * (s[0] if s.size else 0.0)
    rank = int(np.sum(s > cutoff))
    return [vt[k].copy() for k in range(rank, t.matrix.shape[1])]


def quantum_value_from_data(c, t: TransferMatrix, bc: BellCoeffs) -> float:
    """Evaluate c . T . alpha for measured Pauli correlators c."""
    c = np.asarray(c, dtype=float)
    if c.shape != (9,):
        raise ValueError(f"correlator vector must have shape (9,), got {c.shape}")
    if np.max(np.abs(c)) > 1.0 + 1e-9:
        raise ValueError("correlator entries must lie in [-1, 1]")
    if (t.m1, t.m2) != bc.alpha.shape:
        raise ValueError(
            f"transfer matrix ({t.m1}, {t.m2}) does not match alpha {bc.alpha.shape}"
        )
    return float(c @ (t.matrix @ bc.alpha.ravel()))
