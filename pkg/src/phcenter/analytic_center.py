"""Log-det barriers on the KYP solution set and their analytic centers.

Two barriers are supported:

* ``STANDARD``: ``b(X) = -log det W(X)``
* ``PORT_HAMILTONIAN``: ``-log det W(X) + log det X``, i.e. minus the log-determinant
  of ``W(X) diag(X^{-1}, I)``, defined for ``X > 0``.

Centers are computed with a damped Newton method on the real coordinates of
Hermitian matrices (dimension ``n**2``).
"""

from __future__ import annotations

import enum
import math
import os
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.linalg

from .errors import (
    ImaginaryAxisEigenvalue,
    Infeasible,
    MaxIterations,
    NotStrictlyPassive,
    SubspaceExtractionFailed,
)
from .kyp import (
    _check_X,
    assemble_W,
    check_strict_passivity,
    evaluate,
    extremal_solutions,
    shifted_riccati_pair,
)
from .lti_core import SystemModel, is_minimal, sym

DEFAULT_TOL = 1e-9
DEFAULT_MAX_ITER = 200
ARMIJO_C = 1e-4
ARMIJO_RHO = 0.5


class BarrierKind(enum.Enum):
    STANDARD = "standard"
    PORT_HAMILTONIAN = "ph"

    @classmethod
    def parse(cls, value) -> "BarrierKind":
        if isinstance(value, cls):
            return value
        aliases = {"std": "standard", "porthamiltonian": "ph", "port_hamiltonian": "ph"}
        v = str(value).lower()
        return cls(aliases.get(v, v))


def default_tolerance() -> float:
    """Center tolerance, overridable through ``PHCENTER_TOL``."""
    raw = os.environ.get("PHCENTER_TOL")
    return float(raw) if raw else DEFAULT_TOL


def hermitian_basis(n: int) -> np.ndarray:
    """Orthonormal basis (Frobenius inner product) of the real space of n x n Hermitian matrices.

    Ordered as diagonal units, then symmetric real pairs, then imaginary
    antisymmetric pairs over the strict upper triangle. Shape ``(n*n, n, n)``.
    """
    basis = np.zeros((n * n, n, n), dtype=complex)
    k = 0
    for i in range(n):
        basis[k, i, i] = 1.0
        k += 1
    r = 1.0 / math.sqrt(2.0)
    iu, ju = np.triu_indices(n, 1)
    for i, j in zip(iu, ju):
        basis[k, i, j] = basis[k, j, i] = r
        k += 1
    for i, j in zip(iu, ju):
        basis[k, i, j] = 1j * r
        basis[k, j, i] = -1j * r
        k += 1
    return basis


def hermitian_coords(G: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """Coordinates ``<E_k, G>`` of a Hermitian matrix in ``basis``."""
    return np.einsum("kij,ij->k", basis.conj(), G).real


def frobenius_inner(X: np.ndarray, Y: np.ndarray) -> float:
    return float(np.real(np.vdot(X, Y)))


def _cholesky(M: np.ndarray, what: str) -> np.ndarray:
    try:
        return scipy.linalg.cholesky(sym(M), lower=True)
    except np.linalg.LinAlgError as exc:
        raise Infeasible(f"{what} is not positive definite") from exc


def _logdet_chol(L: np.ndarray) -> float:
    return 2.0 * float(np.sum(np.log(np.abs(np.diag(L)))))


def barrier_value(model: SystemModel, X, kind=BarrierKind.STANDARD) -> float:
    kind = BarrierKind.parse(kind)
    X = _check_X(model, X)
    value = -_logdet_chol(_cholesky(assemble_W(model, X), "W(X)"))
    if kind is BarrierKind.PORT_HAMILTONIAN:
        value += _logdet_chol(_cholesky(X, "X"))
    return value


def _W_direction(model: SystemModel, E: np.ndarray) -> np.ndarray:
    """Directional change of W along Hermitian ``E``: ``-[[A^H E + E A, E B], [B^H E, 0]]``."""
    A, B = model.A, model.B
    EB = E @ B
    return -np.block(
        [[A.conj().T @ E + E @ A, EB], [EB.conj().T, np.zeros((model.m, model.m))]]
    )


def _inverse_from_chol(L: np.ndarray) -> np.ndarray:
    return sym(scipy.linalg.cho_solve((L, True), np.eye(L.shape[0])))


def barrier_gradient(model: SystemModel, X, kind=BarrierKind.STANDARD) -> np.ndarray:
    """Hermitian gradient G with ``d/dt b(X + t E)|_0 = <G, E>``."""
    kind = BarrierKind.parse(kind)
    X = _check_X(model, X)
    Winv = _inverse_from_chol(_cholesky(assemble_W(model, X), "W(X)"))
    n = model.n
    W11, W12, W21 = Winv[:n, :n], Winv[:n, n:], Winv[n:, :n]
    A, B = model.A, model.B
    G = W11 @ A.conj().T + A @ W11 + W12 @ B.conj().T + B @ W21
    if kind is BarrierKind.PORT_HAMILTONIAN:
        G = G + _inverse_from_chol(_cholesky(X, "X"))
    return sym(G)


def barrier_hessian(model: SystemModel, X, kind=BarrierKind.STANDARD, basis=None) -> np.ndarray:
    """Hessian of the barrier in the coordinates of ``basis`` (default :func:`hermitian_basis`)."""
    kind = BarrierKind.parse(kind)
    X = _check_X(model, X)
    if basis is None:
        basis = hermitian_basis(model.n)
    Winv = _inverse_from_chol(_cholesky(assemble_W(model, X), "W(X)"))
    Z = np.stack([Winv @ _W_direction(model, E) for E in basis])
    H = np.einsum("kij,lji->kl", Z, Z).real
    if kind is BarrierKind.PORT_HAMILTONIAN:
        Xinv = _inverse_from_chol(_cholesky(X, "X"))
        Y = np.einsum("ij,kjl->kil", Xinv, basis)
        H -= np.einsum("kij,lji->kl", Y, Y).real
    return 0.5 * (H + H.T)


class StationarityResiduals(NamedTuple):
    ricc_pd_margin: float
    lyap_residual: float


def stationarity_residuals(model: SystemModel, X, kind=BarrierKind.STANDARD) -> StationarityResiduals:
    """Riccati positivity margin and the normalized stationarity residual at X.

    Standard: ``||P A_F + A_F^H P||_F``; port-Hamiltonian:
    ``||P X^{-1} P + P A_F + A_F^H P||_F``.  Both are divided by
    ``||P||_F (||A||_F + ||B||_F ||F||_F)`` (plus ``||P||_F^2 ||X^{-1}||_F`` for
    the pH kind), the size of the terms that make up ``A_F = A - BF``; dividing
    by ``||A_F||`` itself breaks down where ``A_F`` vanishes.
    """
    kind = BarrierKind.parse(kind)
    ev = evaluate(model, X)
    P, A_F = ev.P, ev.A_F
    margin = float(np.linalg.eigvalsh(P)[0])
    R = P @ A_F + A_F.conj().T @ P
    nP = np.linalg.norm(P)
    scale = nP * (np.linalg.norm(model.A) + np.linalg.norm(model.B) * np.linalg.norm(ev.F))
    if kind is BarrierKind.PORT_HAMILTONIAN:
        Xinv = np.linalg.inv(ev.X)
        R = R + P @ Xinv @ P
        scale += nP**2 * np.linalg.norm(Xinv)
    return StationarityResiduals(margin, float(np.linalg.norm(R) / (scale + 1e-300)))


@dataclass
class CenterOptions:
    tolerance: float = field(default_factory=default_tolerance)
    max_iterations: int = DEFAULT_MAX_ITER
    initial_point: object = "midpoint"
    kind: BarrierKind = BarrierKind.STANDARD


@dataclass
class CenterResult:
    X_center: np.ndarray
    kind: BarrierKind
    barrier_value: float
    grad_norm: float
    stationarity_residual: float
    ricc_pd_margin: float
    iterations: int
    closed_loop_eigs: np.ndarray
    converged: bool
    history: list = field(default_factory=list, repr=False)


def _feasible(model, X, kind) -> bool:
    try:
        _cholesky(assemble_W(model, X), "W(X)")
        if kind is BarrierKind.PORT_HAMILTONIAN:
            _cholesky(X, "X")
    except Infeasible:
        return False
    return True


def _initial_point(model, opts, kind):
    x0 = opts.initial_point
    if x0 is None or (isinstance(x0, str) and x0 == "midpoint"):
        return _midpoint_start(model, kind)
    elif isinstance(x0, str) and x0 == "identity":
        X0 = np.eye(model.n, dtype=complex)
    elif isinstance(x0, str):
        raise ValueError(f"unknown initial point {x0!r}")
    else:
        X0 = _check_X(model, x0)
    if not _feasible(model, X0, kind):
        raise Infeasible(f"initial point ({x0 if isinstance(x0, str) else 'given'}) is not strictly feasible")
    return X0


def _midpoint_start(model, kind):
    """Midpoint of the extremal solutions, or of a shifted Riccati pair when that
    midpoint lies on the boundary.

    W(X_-) and W(X_+) both have rank m, so for n > m their kernels intersect and
    the plain midpoint is singular. Solutions of ``Ricc(X) = delta I`` have
    ``W(X) > 0`` and give a strictly feasible midpoint.
    """
    pair = extremal_solutions(model)
    X0 = sym(0.5 * (pair.X_minus + pair.X_plus))
    if _feasible(model, X0, kind):
        return X0
    delta = max(np.linalg.norm(evaluate(model, X0).P, 2), np.linalg.norm(model.A, 2), 1e-300)
    for _ in range(80):
        delta *= 0.5
        try:
            lo, hi = shifted_riccati_pair(model, delta)
        except (ImaginaryAxisEigenvalue, SubspaceExtractionFailed):
            continue
        X0 = sym(0.5 * (lo + hi))
        if _feasible(model, X0, kind):
            return X0
    raise Infeasible("could not construct a strictly feasible starting point")


def _newton_direction(H: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Solve ``H d = -g``; shift H when it is not positive definite."""
    shift = 0.0
    scale = max(1e-300, np.max(np.abs(np.diag(H))))
    for _ in range(60):
        try:
            c, low = scipy.linalg.cho_factor(H + shift * np.eye(len(g)))
            return -scipy.linalg.cho_solve((c, low), g)
        except np.linalg.LinAlgError:
            lmin = np.linalg.eigvalsh(H)[0]
            shift = max(2.0 * shift, -1.1 * lmin, 1e-12 * scale)
    return -g


def _line_search(model, X, D, b, slope, gnorm, kind):
    """Backtracking Armijo search with a feasibility guard.

    Once the predicted decrease is below round-off in ``b`` the Armijo test is
    meaningless; a feasible full step is then accepted if it shrinks the gradient.
    """
    noise = 1e3 * np.finfo(float).eps * (1.0 + abs(b))
    Xt = sym(X + D)
    if -slope <= noise and _feasible(model, Xt, kind):
        if np.linalg.norm(barrier_gradient(model, Xt, kind)) < gnorm:
            return Xt, barrier_value(model, Xt, kind)
    step = 1.0
    for _ in range(80):
        Xt = sym(X + step * D)
        if _feasible(model, Xt, kind):
            bt = barrier_value(model, Xt, kind)
            if bt <= b + ARMIJO_C * step * slope:
                return Xt, bt
        step *= ARMIJO_RHO
    return None


def _polish(model, X, b, gnorm, kind, basis, steps=3):
    """Full Newton steps after the gradient test passes, kept while they shrink the gradient.

    A small gradient does not mean a small error in X when the barrier is flat;
    a few quadratically convergent steps close that gap.
    """
    for _ in range(steps):
        g = hermitian_coords(barrier_gradient(model, X, kind), basis)
        d = _newton_direction(barrier_hessian(model, X, kind, basis), g)
        Xt = sym(X + np.einsum("k,kij->ij", d, basis))
        if not _feasible(model, Xt, kind):
            break
        gt = float(np.linalg.norm(barrier_gradient(model, Xt, kind)))
        if gt >= gnorm:
            break
        X, b, gnorm = Xt, barrier_value(model, Xt, kind), gt
    return X, b, gnorm


def compute_center(model: SystemModel, kind=None, opts: CenterOptions | None = None) -> CenterResult:
    """Analytic center of the strictly feasible KYP set under the chosen barrier.

    Raises :class:`NotStrictlyPassive` for models without an interior and
    :class:`MaxIterations` (with ``.result``) if the iteration cap is hit.
    """
    opts = opts or CenterOptions()
    kind = BarrierKind.parse(kind if kind is not None else opts.kind)
    diag = check_strict_passivity(model)
    if not diag.strict:
        raise NotStrictlyPassive("model is not strictly passive: " + "; ".join(diag.failed))
    mm = is_minimal(model)
    if not (mm.controllable and mm.observable):
        warnings.warn(f"model is not minimal ({mm}); center may not be meaningful")

    basis = hermitian_basis(model.n)
    X = _initial_point(model, opts, kind)
    b = barrier_value(model, X, kind)
    history = []
    converged = False
    it = 0
    for it in range(opts.max_iterations + 1):
        G = barrier_gradient(model, X, kind)
        gnorm = float(np.linalg.norm(G))
        history.append((b, gnorm))
        if gnorm <= opts.tolerance * (1.0 + abs(b)):
            converged = True
            X, b, gnorm = _polish(model, X, b, gnorm, kind, basis)
            history.append((b, gnorm))
            break
        if it == opts.max_iterations:
            break
        g = hermitian_coords(G, basis)
        d = _newton_direction(barrier_hessian(model, X, kind, basis), g)
        slope = float(g @ d)
        if slope >= 0:
            d, slope = -g, -float(g @ g)
        D = np.einsum("k,kij->ij", d, basis)
        Xt = _line_search(model, X, D, b, slope, gnorm, kind)
        if Xt is None:
            break
        X, b = Xt

    ev = evaluate(model, X)
    res = stationarity_residuals(model, X, kind)
    result = CenterResult(
        X_center=X,
        kind=kind,
        barrier_value=b,
        grad_norm=history[-1][1],
        stationarity_residual=res.lyap_residual,
        ricc_pd_margin=res.ricc_pd_margin,
        iterations=it,
        closed_loop_eigs=np.linalg.eigvals(ev.A_F),
        converged=converged,
        history=history,
    )
    if not converged:
        raise MaxIterations(
            f"no convergence after {it} iterations (grad norm {result.grad_norm:.3e})",
            result=result,
        )
    return result


class ScalarCenter(NamedTuple):
    x_star: float
    f: float
    p: float


def scalar_strict_passivity_failures(a, b, c, d) -> list:
    failed = []
    if not a < 0:
        failed.append("a<0")
    if not d > 0:
        failed.append("d>0")
    if not a * d - b * c < 0:
        failed.append("ad-bc<0")
    if b == 0:
        failed.append("b!=0")
    return failed


def scalar_center_closed_form(a, b, c, d, kind=BarrierKind.STANDARD) -> ScalarCenter:
    """Closed-form center of ``W(x) = [[-2ax, c-bx], [c-bx, 2d]] > 0`` for real scalars.

    Standard: ``x* = c/b - 2da/b**2``; port-Hamiltonian: ``x* = |c/b|``.  ``f``
    and ``p`` are the feedback ``(c - b x*)/(2d)`` and Riccati value
    ``-2a x* - 2d f**2`` at ``x*``.
    """
    kind = BarrierKind.parse(kind)
    failed = scalar_strict_passivity_failures(a, b, c, d)
    if failed:
        raise NotStrictlyPassive("scalar model violates " + ", ".join(failed))
    if kind is BarrierKind.STANDARD:
        x = c / b - 2.0 * d * a / b**2
    else:
        x = abs(c / b)
    f = (c - b * x) / (2.0 * d)
    p = -2.0 * a * x - 2.0 * d * f**2
    return ScalarCenter(x, f, p)
