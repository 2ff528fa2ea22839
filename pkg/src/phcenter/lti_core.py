"""Complex state-space models, transfer/Popov evaluation and structural checks."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import DimensionError, NotHermitian, SingularShift

HERMITIAN_RTOL = 1e-12
RANK_RTOL = 1e-10
STABILITY_MARGIN = 1e-10
SHIFT_RESIDUAL_RTOL = 1e-8


def as_complex_matrix(M, name="matrix") -> np.ndarray:
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    if M.ndim != 2:
        raise DimensionError(f"{name} must be two-dimensional, got shape {M.shape}")
    return M


def hermitian(M, name="matrix", rtol=HERMITIAN_RTOL) -> np.ndarray:
    """Return the Hermitian part of ``M`` after checking it is Hermitian to ``rtol``.

    Small asymmetries from round-off are removed; anything beyond
    ``rtol * max(1, ||M||_F)`` raises :class:`NotHermitian`.
    """
    M = as_complex_matrix(M, name)
    if M.shape[0] != M.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {M.shape}")
    dev = np.linalg.norm(M - M.conj().T)
    if dev > rtol * max(1.0, np.linalg.norm(M)):
        raise NotHermitian(f"{name} is not Hermitian (||M - M^H||_F = {dev:.3e})")
    return 0.5 * (M + M.conj().T)


def sym(M: np.ndarray) -> np.ndarray:
    """Hermitian part ``(M + M^H) / 2``."""
    return 0.5 * (M + M.conj().T)


def eigh_sqrt(M: np.ndarray, inverse=False) -> np.ndarray:
    """Hermitian square root (or inverse square root) of a positive definite matrix."""
    w, V = np.linalg.eigh(sym(M))
    if w[0] <= 0:
        raise np.linalg.LinAlgError("matrix is not positive definite")
    d = w ** (-0.5 if inverse else 0.5)
    return sym((V * d) @ V.conj().T)


@dataclass(frozen=True)
class SystemModel:
    """Complex realization ``{A, B, C, D}`` of ``x' = Ax + Bu, y = Cx + Du``.

    Real data is stored as complex with zero imaginary part.  Setting
    ``require_minimal`` or ``require_full_port_rank`` adds the corresponding
    rank checks at construction.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    require_minimal: bool = field(default=False, compare=False)
    require_full_port_rank: bool = field(default=False, compare=False)

    def __post_init__(self):
        A = as_complex_matrix(self.A, "A")
        B = as_complex_matrix(self.B, "B")
        C = as_complex_matrix(self.C, "C")
        D = as_complex_matrix(self.D, "D")
        n, m = A.shape[0], D.shape[0]
        if n < 1 or m < 1:
            raise DimensionError("need n >= 1 and m >= 1")
        expected = {"A": (n, n), "B": (n, m), "C": (m, n), "D": (m, m)}
        for name, M in zip("ABCD", (A, B, C, D)):
            if M.shape != expected[name]:
                raise DimensionError(
                    f"{name} has shape {M.shape}, expected {expected[name]}"
                )
        for name, M in zip("ABCD", (A, B, C, D)):
            M.setflags(write=False)
            object.__setattr__(self, name, M)
        if self.require_minimal:
            mm = is_minimal(self)
            if not (mm.controllable and mm.observable):
                raise DimensionError(f"model is not minimal: {mm}")
        if self.require_full_port_rank:
            rb = _numerical_rank(B)
            rc = _numerical_rank(C)
            if rb != m or rc != m:
                raise DimensionError(f"rank B = {rb}, rank C = {rc}, expected {m}")

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.D.shape[0]

    @property
    def S(self) -> np.ndarray:
        """``D + D^H``, the limit of the Popov function at infinity."""
        return self.D + self.D.conj().T

    @classmethod
    def scalar(cls, a, b, c, d) -> "SystemModel":
        return cls([[a]], [[b]], [[c]], [[d]])

    def transform(self, T: np.ndarray) -> "SystemModel":
        """State-space transformation ``x_T = T x``."""
        T = as_complex_matrix(T, "T")
        Tinv_A = np.linalg.solve(T.T, self.A.T).T  # A T^{-1}
        Tinv_C = np.linalg.solve(T.T, self.C.T).T  # C T^{-1}
        return SystemModel(T @ Tinv_A, T @ self.B, Tinv_C, self.D)

    def is_real(self) -> bool:
        return all(not np.any(M.imag) for M in (self.A, self.B, self.C, self.D))


def _numerical_rank(M: np.ndarray, rtol=RANK_RTOL) -> int:
    s = np.linalg.svd(M, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def _shifted_solve(A: np.ndarray, B: np.ndarray, s: complex) -> np.ndarray:
    n = A.shape[0]
    shifted = s * np.eye(n) - A
    try:
        Z = np.linalg.solve(shifted, B)
    except np.linalg.LinAlgError as exc:
        raise SingularShift(f"sI - A is singular at s = {s}") from exc
    nB = np.linalg.norm(B)
    resid = np.linalg.norm(shifted @ Z - B)
    if not np.all(np.isfinite(Z)) or resid > SHIFT_RESIDUAL_RTOL * nB:
        raise SingularShift(f"shifted solve residual {resid:.3e} at s = {s}")
    if nB > 0 and 1.0 / np.linalg.cond(shifted) < np.finfo(float).eps:
        raise SingularShift(f"s = {s} is numerically an eigenvalue of A")
    return Z


def transfer_eval(model: SystemModel, s: complex) -> np.ndarray:
    """Evaluate ``T(s) = D + C (sI - A)^{-1} B`` via a linear solve."""
    Z = _shifted_solve(model.A, model.B, complex(s))
    return model.D + model.C @ Z


def popov_eval(model: SystemModel, omega: float) -> np.ndarray:
    """Popov function on the imaginary axis, ``T(iw)^H + T(iw)``."""
    T = transfer_eval(model, 1j * float(omega))
    return T.conj().T + T


class Minimality(NamedTuple):
    controllable: bool
    observable: bool


def _krylov_rank_full(A: np.ndarray, B: np.ndarray) -> bool:
    n = A.shape[0]
    blocks = [B]
    for _ in range(n - 1):
        blocks.append(A @ blocks[-1])
    return _numerical_rank(np.hstack(blocks)) == n


def is_minimal(model: SystemModel) -> Minimality:
    """Controllability of ``(A, B)`` and observability of ``(A, C)`` by Krylov rank."""
    A, B, C = model.A, model.B, model.C
    return Minimality(
        controllable=_krylov_rank_full(A, B),
        observable=_krylov_rank_full(A.conj().T, C.conj().T),
    )


def is_asymptotically_stable(A) -> bool:
    A = as_complex_matrix(A, "A")
    return bool(np.max(np.linalg.eigvals(A).real) < -STABILITY_MARGIN)
