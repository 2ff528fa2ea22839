"""The KYP matrix W(X), the Riccati operator, the Hamiltonian matrix and extremal solutions."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (
    DimensionError,
    ImaginaryAxisEigenvalue,
    NotPSD,
    SingularS,
    SubspaceExtractionFailed,
)
from .lti_core import (
    SystemModel,
    hermitian,
    is_asymptotically_stable,
    is_minimal,
    sym,
)

S_RCOND = 1e-12
MEMBERSHIP_TOL = 1e-10
IMAG_AXIS_RTOL = 1e-8
RANK_RTOL = 1e-10
SUBSPACE_COND_MAX = 1e12


def _check_X(model: SystemModel, X) -> np.ndarray:
    X = hermitian(X, "X")
    if X.shape != (model.n, model.n):
        raise DimensionError(f"X has shape {X.shape}, expected {(model.n, model.n)}")
    return X


def assemble_W(model: SystemModel, X) -> np.ndarray:
    """Block matrix ``[[-XA - A^H X, C^H - XB], [C - B^H X, D + D^H]]``."""
    X = _check_X(model, X)
    A, B, C = model.A, model.B, model.C
    top_left = -X @ A - A.conj().T @ X
    off = C.conj().T - X @ B
    W = np.block([[top_left, off], [off.conj().T, model.S]])
    return sym(W)


def _S_inverse_apply(model: SystemModel, rhs: np.ndarray) -> np.ndarray:
    S = sym(model.S)
    w = np.linalg.eigvalsh(S)
    if w[0] <= S_RCOND * max(w[-1], 0.0) or w[-1] <= 0:
        raise SingularS(f"S = D + D^H is not positive definite (eigenvalues {w})")
    return scipy.linalg.cho_solve(scipy.linalg.cho_factor(S), rhs)


def riccati_residual(model: SystemModel, X) -> np.ndarray:
    """``Ricc(X) = -XA - A^H X - (C^H - XB) S^{-1} (C - B^H X)``."""
    X = _check_X(model, X)
    A = model.A
    G = model.C - model.B.conj().T @ X
    return sym(-X @ A - A.conj().T @ X - G.conj().T @ _S_inverse_apply(model, G))


@dataclass(frozen=True)
class KypEvaluation:
    """W(X) with the feedback ``F``, Riccati value ``P`` and closed loop ``A_F``."""

    X: np.ndarray
    W: np.ndarray
    S: np.ndarray
    F: np.ndarray
    P: np.ndarray
    A_F: np.ndarray


def evaluate(model: SystemModel, X) -> KypEvaluation:
    X = _check_X(model, X)
    W = assemble_W(model, X)
    S = sym(model.S)
    F = _S_inverse_apply(model, model.C - model.B.conj().T @ X)
    P = sym(-model.A.conj().T @ X - X @ model.A - F.conj().T @ S @ F)
    return KypEvaluation(X=X, W=W, S=S, F=F, P=P, A_F=model.A - model.B @ F)


def hamiltonian_matrix(model: SystemModel, shift: float = 0.0) -> np.ndarray:
    """Hamiltonian matrix of the Riccati equation ``Ricc(X) = shift * I``."""
    A, B, C = model.A, model.B, model.C
    SinvC = _S_inverse_apply(model, C)
    SinvBh = _S_inverse_apply(model, B.conj().T)
    Ac = A - B @ SinvC
    lower_left = C.conj().T @ SinvC + shift * np.eye(model.n)
    return np.block([[Ac, -B @ SinvBh], [lower_left, -Ac.conj().T]])


def hamiltonian_pairing_error(H: np.ndarray) -> float:
    """Largest distance from an eigenvalue ``l`` of H to the nearest ``-conj(l)``.

    Hamiltonian spectra are symmetric about the imaginary axis, so this should
    be at round-off level.
    """
    ev = np.linalg.eigvals(H)
    mirrored = -ev.conj()
    return float(max(np.min(np.abs(mirrored - e)) for e in ev))


@dataclass(frozen=True)
class ExtremalPair:
    X_minus: np.ndarray
    X_plus: np.ndarray
    closed_loop_spectra: tuple = field(default=())
    riccati_residuals: tuple = field(default=())


def _solution_from_subspace(H: np.ndarray, n: int, which: str) -> np.ndarray:
    T, Z, sdim = scipy.linalg.schur(H, output="complex", sort=which)
    if sdim != n:
        raise SubspaceExtractionFailed(
            f"{which} invariant subspace has dimension {sdim}, expected {n}"
        )
    U1, U2 = Z[:n, :n], Z[n:, :n]
    if np.linalg.cond(U1) > SUBSPACE_COND_MAX:
        raise SubspaceExtractionFailed("basis block U1 is ill-conditioned")
    # basis is [I; -X] up to a right factor
    X = -np.linalg.solve(U1.T, U2.T).T
    return sym(X)


def _riccati_pair(model: SystemModel, shift: float = 0.0):
    H = hamiltonian_matrix(model, shift)
    ev = np.linalg.eigvals(H)
    scale = np.linalg.norm(H, 2)
    if np.min(np.abs(ev.real)) <= IMAG_AXIS_RTOL * scale:
        raise ImaginaryAxisEigenvalue(
            "Hamiltonian matrix has eigenvalues on the imaginary axis; "
            "the system is not strictly passive"
        )
    n = model.n
    return _solution_from_subspace(H, n, "lhp"), _solution_from_subspace(H, n, "rhp")


def shifted_riccati_pair(model: SystemModel, shift: float):
    """Stabilizing and anti-stabilizing solutions of ``Ricc(X) = shift * I``.

    For ``shift > 0`` small enough both solutions have ``W(X) > 0``; they are
    used to build strictly feasible starting points.
    """
    return _riccati_pair(model, shift)


def extremal_solutions(model: SystemModel) -> ExtremalPair:
    """Minimal and maximal Riccati solutions from the stable/antistable subspaces of H."""
    mm = is_minimal(model)
    if not (mm.controllable and mm.observable):
        warnings.warn(f"model is not minimal ({mm}); extremal solutions may be unreliable")
    X_minus, X_plus = _riccati_pair(model)
    spectra = tuple(np.linalg.eigvals(evaluate(model, X).A_F) for X in (X_minus, X_plus))
    residuals = tuple(
        float(np.linalg.norm(riccati_residual(model, X))) for X in (X_minus, X_plus)
    )
    pair = ExtremalPair(X_minus, X_plus, spectra, residuals)
    _verify_extremal(model, pair)
    return pair


def _verify_extremal(model: SystemModel, pair: ExtremalPair):
    gap = np.linalg.eigvalsh(pair.X_plus - pair.X_minus)[0]
    if gap < -1e-8 * max(1.0, np.linalg.norm(pair.X_plus, 2)):
        raise SubspaceExtractionFailed(f"X_plus - X_minus is indefinite ({gap:.3e})")
    lo, hi = pair.closed_loop_spectra
    if np.max(lo.real) >= 0 or np.min(hi.real) <= 0:
        raise SubspaceExtractionFailed("closed-loop spectra are not separated")
    nA = np.linalg.norm(model.A)
    for X, r in zip((pair.X_minus, pair.X_plus), pair.riccati_residuals):
        if r > 1e-6 * max(1.0, np.linalg.norm(X) * nA):
            raise SubspaceExtractionFailed(f"Riccati residual {r:.3e} too large")


def spectral_factor(model: SystemModel, X, rtol=RANK_RTOL):
    """Factor ``W(X) = [L M]^H [L M]`` with as many rows as the numerical rank of W(X).

    Returns ``(L, M)`` with ``L`` of shape ``(r, n)`` and ``M`` of shape ``(r, m)``.
    """
    W = assemble_W(model, X)
    w, V = np.linalg.eigh(W)
    lmax = max(w[-1], 0.0)
    if w[0] < -rtol * max(lmax, 1.0):
        raise NotPSD(f"W(X) has negative eigenvalue {w[0]:.3e}")
    keep = w > rtol * lmax
    factor = np.sqrt(np.clip(w[keep], 0.0, None))[:, None] * V[:, keep].conj().T
    n = model.n
    return factor[:, :n], factor[:, n:]


@dataclass(frozen=True)
class SolutionSetMembership:
    in_X: bool
    in_X_pd: bool
    in_X_pdpd: bool
    margin: float
    x_margin: float


def membership(model: SystemModel, X, tol=MEMBERSHIP_TOL) -> SolutionSetMembership:
    """Classify ``X`` against ``W(X) >= 0``, ``X > 0`` and ``W(X) > 0``.

    ``margin`` is ``lambda_min(W(X))`` and ``x_margin`` is ``lambda_min(X)``.
    """
    X = _check_X(model, X)
    W = assemble_W(model, X)
    margin = float(np.linalg.eigvalsh(W)[0])
    x_margin = float(np.linalg.eigvalsh(X)[0])
    thr = tol * max(1.0, np.linalg.norm(W, 2))
    xthr = tol * max(1.0, np.linalg.norm(X, 2))
    in_X = margin >= -thr
    in_X_pd = in_X and x_margin > xthr
    in_X_pdpd = in_X_pd and margin > thr
    return SolutionSetMembership(in_X, in_X_pd, in_X_pdpd, margin, x_margin)


@dataclass
class PassivityDiagnostics:
    strict: bool
    S_positive_definite: bool
    asymptotically_stable: bool
    no_imaginary_hamiltonian_eigs: bool
    minimal: bool
    min_abs_real_hamiltonian_eig: float | None = None
    failed: list = field(default_factory=list)


CLAUSE_S = "S = D + D^H positive definite"
CLAUSE_STABLE = "A asymptotically stable"
CLAUSE_HAM = "Hamiltonian imaginary-axis eigenvalues"


def check_strict_passivity(model: SystemModel) -> PassivityDiagnostics:
    """Strict passivity test: ``S > 0``, A asymptotically stable, and no
    Hamiltonian eigenvalues within ``1e-8 ||H||`` of the imaginary axis.

    Minimality is reported but does not enter the verdict.
    """
    w = np.linalg.eigvalsh(sym(model.S))
    s_ok = bool(w[0] > S_RCOND * max(w[-1], 0.0) and w[-1] > 0)
    stable = is_asymptotically_stable(model.A)
    mm = is_minimal(model)
    ham_ok = False
    min_re = None
    if s_ok:
        H = hamiltonian_matrix(model)
        ev = np.linalg.eigvals(H)
        min_re = float(np.min(np.abs(ev.real)))
        ham_ok = bool(min_re > IMAG_AXIS_RTOL * np.linalg.norm(H, 2))
    failed = []
    if not s_ok:
        failed.append(CLAUSE_S)
    if not stable:
        failed.append(CLAUSE_STABLE)
    if not ham_ok:
        failed.append(CLAUSE_HAM)
    return PassivityDiagnostics(
        strict=not failed,
        S_positive_definite=s_ok,
        asymptotically_stable=stable,
        no_imaginary_hamiltonian_eigs=ham_ok,
        minimal=bool(mm.controllable and mm.observable),
        min_abs_real_hamiltonian_eig=min_re,
        failed=failed,
    )
