"""Passivity and stability radii for a fixed certificate X, and related robustness measures."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.optimize

from .errors import NotFeasible, OrderingViolated, SearchFailed, Unstable
from .kyp import _check_X, assemble_W
from .lti_core import SystemModel, eigh_sqrt, is_asymptotically_stable, sym

GAMMA_BRACKET = (1e-6, 1e6)
GAMMA_RTOL = 1e-10
CLUSTER_RTOL = 1e-10
FEASIBILITY_TOL = 1e-10
UNIMODAL_TOL = 1e-12


def golden_section(f, lo, hi, xtol):
    """Minimize a unimodal ``f`` on ``[lo, hi]`` to bracket width ``xtol``."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > xtol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x), (a, b)


@dataclass(frozen=True)
class PerturbationMatrix:
    """Structured perturbation ``Delta_T = [[-dA, -dB], [dC, dD]]`` (or ``-dA`` alone for stability)."""

    Delta_T: np.ndarray
    norm_fro: float
    norm_2: float
    rank: int

    def blocks(self, n: int):
        """Split into ``(dA, dB, dC, dD)``."""
        D = self.Delta_T
        return -D[:n, :n], -D[:n, n:], D[n:, :n], D[n:, n:]

    def apply(self, model: SystemModel) -> SystemModel:
        n = model.n
        if self.Delta_T.shape == (n, n):
            return SystemModel(model.A - self.Delta_T, model.B, model.C, model.D)
        dA, dB, dC, dD = self.blocks(n)
        return SystemModel(model.A + dA, model.B + dB, model.C + dC, model.D + dD)


@dataclass
class RadiusReport:
    """Bounds and the exact X-radius for one certificate.

    ``lower = alpha*beta/2`` and ``upper = alpha*beta/(1 + |u^H w|)`` bracket
    ``exact_at_gamma = 1/lambda_max(M(gamma*))``.
    """

    kind: str
    alpha: float
    beta: float
    xi: float
    gamma_star: float
    lambda_max_star: float
    lower: float
    upper: float
    exact_at_gamma: float
    uw_overlap: float
    delta: PerturbationMatrix
    boundary_margin: float
    unimodal: bool
    search_method: str
    is_center_estimate: bool = False
    extra: dict = field(default_factory=dict)

    @property
    def alpha_beta(self) -> float:
        return self.alpha * self.beta


class _GammaProblem:
    """``lambda_max`` of ``gamma^2 W^{-1/2} Xh^2 W^{-1/2} + W^{-1}/gamma^2`` and its eigenvectors."""

    def __init__(self, What: np.ndarray, Xhat: np.ndarray):
        self.What = What
        self.Xhat = Xhat
        self.Wmh = eigh_sqrt(What, inverse=True)
        self.XWmh = Xhat @ self.Wmh
        self.first = sym(self.XWmh.conj().T @ self.XWmh)
        self.second = sym(self.Wmh @ self.Wmh)

    def matrix(self, gamma):
        return gamma**2 * self.first + self.second / gamma**2

    def lam(self, gamma) -> float:
        return float(np.linalg.eigvalsh(self.matrix(gamma))[-1])

    def split(self, gamma, y):
        """Eigenvector ``z = [u; v]`` of M(gamma) from an eigenvector ``y`` of the compressed matrix."""
        u = gamma * self.XWmh @ y
        v = self.Wmh @ y / gamma
        nz = math.sqrt(np.vdot(u, u).real + np.vdot(v, v).real)
        return u / nz, v / nz

    def imbalance(self, gamma) -> float:
        w, Y = np.linalg.eigh(self.matrix(gamma))
        u, v = self.split(gamma, Y[:, -1])
        return float(np.vdot(u, u).real - np.vdot(v, v).real)

    def balanced_vector(self, gamma):
        """Top eigenvector of M(gamma) with ``||u|| = ||v||`` when the top eigenvalue is multiple."""
        w, Y = np.linalg.eigh(self.matrix(gamma))
        lam = w[-1]
        top = Y[:, w >= lam - CLUSTER_RTOL * abs(lam)]
        if top.shape[1] == 1:
            return lam, self.split(gamma, top[:, 0])
        U = gamma * self.XWmh @ top
        V = self.Wmh @ top / gamma
        Dm = sym(U.conj().T @ U - V.conj().T @ V)
        d, E = np.linalg.eigh(Dm)
        if d[0] < 0 < d[-1]:
            t = math.atan(math.sqrt(-d[-1] / d[0]))
            c = math.cos(t) * E[:, -1] + math.sin(t) * E[:, 0]
        else:
            c = E[:, np.argmin(np.abs(d))]
        return lam, self.split(gamma, top @ c)


def _unimodal(values, tol=UNIMODAL_TOL) -> bool:
    diffs = np.diff(values)
    thr = tol * max(1.0, float(np.max(np.abs(values))))
    signs = [np.sign(x) for x in diffs if abs(x) > thr]
    changes = sum(1 for a, b in zip(signs, signs[1:]) if a != b)
    if changes == 0:
        return True
    return changes == 1 and signs[0] < 0


def _probe(problem: _GammaProblem, gammas=None):
    gammas = np.logspace(-2, 2, 20) if gammas is None else gammas
    values = np.array([problem.lam(g) for g in gammas])
    return _unimodal(values), values


def _minimize_gamma(problem: _GammaProblem, unimodal: bool):
    lo, hi = (math.log(g) for g in GAMMA_BRACKET)
    npts = 241 if unimodal else 4001
    grid = np.linspace(lo, hi, npts)
    vals = np.array([problem.lam(math.exp(t)) for t in grid])
    i = int(np.argmin(vals))
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, npts - 1)]
    t, _, (a, b) = golden_section(lambda s: problem.lam(math.exp(s)), a, b, GAMMA_RTOL)
    # the minimizer balances ||u|| and ||v||; polish on that condition
    fa, fb = problem.imbalance(math.exp(a)), problem.imbalance(math.exp(b))
    if fa * fb < 0:
        t = scipy.optimize.brentq(lambda s: problem.imbalance(math.exp(s)), a, b, xtol=1e-15)
    if not np.isfinite(t):
        raise SearchFailed("gamma search did not produce a finite minimizer")
    return math.exp(t)


def _cluster_overlap(U: np.ndarray, W: np.ndarray):
    """Unit vectors ``u`` in span(U), ``w`` in span(W) maximizing ``|u^H w|``."""
    Y, s, Zh = np.linalg.svd(U.conj().T @ W)
    return U @ Y[:, 0], W @ Zh[0].conj(), float(s[0])


def _radius_core(What, Xhat, kind, at_center=False) -> RadiusReport:
    problem = _GammaProblem(What, Xhat)
    unimodal, _ = _probe(problem)
    if not unimodal:
        warnings.warn("lambda_max(M(gamma)) failed the unimodality probe; using a dense gamma grid")
    gamma = _minimize_gamma(problem, unimodal)
    lam, (u, v) = problem.balanced_vector(gamma)
    Delta = -2.0 * np.outer(u, v.conj()) / lam
    s = np.linalg.svd(Delta, compute_uv=False)
    rank = int(np.sum(s > 1e-10 * s[0]))
    delta = PerturbationMatrix(Delta, float(np.linalg.norm(Delta)), float(s[0]), rank)
    perturbed = sym(What + Xhat @ Delta + Delta.conj().T @ Xhat)
    boundary = float(np.linalg.eigvalsh(perturbed)[0])

    wW, VW = np.linalg.eigh(What)
    alpha = math.sqrt(wW[0])
    Ua = VW[:, wW <= wW[0] + CLUSTER_RTOL * abs(wW[-1])]
    Lw, sv, _ = np.linalg.svd(problem.Wmh @ Xhat)
    beta = 1.0 / sv[0]
    Wb = Lw[:, sv >= sv[0] * (1.0 - CLUSTER_RTOL)]
    _, _, overlap = _cluster_overlap(Ua, Wb)
    overlap = min(overlap, 1.0)

    Xmh = eigh_sqrt(Xhat, inverse=True)
    xi = float(np.linalg.eigvalsh(sym(Xmh @ What @ Xmh))[0])
    return RadiusReport(
        kind=kind,
        alpha=alpha,
        beta=beta,
        xi=xi,
        gamma_star=gamma,
        lambda_max_star=lam,
        lower=alpha * beta / 2.0,
        upper=alpha * beta / (1.0 + overlap),
        exact_at_gamma=1.0 / lam,
        uw_overlap=overlap,
        delta=delta,
        boundary_margin=boundary,
        unimodal=unimodal,
        search_method="golden" if unimodal else "dense-grid",
        is_center_estimate=at_center,
    )


def _Xhat(model: SystemModel, X) -> np.ndarray:
    n, m = model.n, model.m
    return np.block([[X, np.zeros((n, m))], [np.zeros((m, n)), np.eye(m)]])


def _require_pdpd(model: SystemModel, X):
    X = _check_X(model, X)
    W = assemble_W(model, X)
    wmin = np.linalg.eigvalsh(W)[0]
    xmin = np.linalg.eigvalsh(X)[0]
    if wmin <= FEASIBILITY_TOL * max(1.0, np.linalg.norm(W, 2)) or xmin <= 0:
        raise NotFeasible(
            f"X is not strictly feasible (lambda_min W = {wmin:.3e}, lambda_min X = {xmin:.3e})"
        )
    return X, W


def m_gamma_lambda_max(model: SystemModel, X, gamma: float) -> float:
    X, W = _require_pdpd(model, X)
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    return _GammaProblem(W, _Xhat(model, X)).lam(gamma)


def unimodality_probe(model: SystemModel, X, gammas=None):
    """Check that ``lambda_max(M(gamma))`` first decreases then increases on a log grid.

    Returns ``(ok, values)``.
    """
    X, W = _require_pdpd(model, X)
    return _probe(_GammaProblem(W, _Xhat(model, X)), gammas)


def x_passivity_radius(model: SystemModel, X, at_center=False) -> RadiusReport:
    """X-passivity radius with its bounds and the minimal rank-one perturbation.

    ``at_center`` marks X as an analytic center; when additionally ``X = I``
    the exact value estimates the full passivity radius.
    """
    X, W = _require_pdpd(model, X)
    is_identity = np.allclose(X, np.eye(model.n), atol=1e-10)
    report = _radius_core(W, _Xhat(model, X), "passivity", at_center and is_identity)
    return report


def x_stability_radius(model: SystemModel, X) -> RadiusReport:
    """Same construction on ``V(X) = -XA - A^H X`` for perturbations of A alone.

    ``report.delta.Delta_T`` holds ``-Delta_A``.
    """
    X = _check_X(model, X)
    V = sym(-X @ model.A - model.A.conj().T @ X)
    vmin = np.linalg.eigvalsh(V)[0]
    xmin = np.linalg.eigvalsh(X)[0]
    if vmin <= FEASIBILITY_TOL * max(1.0, np.linalg.norm(V, 2)) or xmin <= 0:
        raise NotFeasible(f"V(X) or X is not positive definite ({vmin:.3e}, {xmin:.3e})")
    return _radius_core(V, X, "stability")


def true_stability_radius(A, grid_points=401) -> float:
    """``min_w sigma_min(A - i w I)`` by a coarse frequency grid plus golden-section refinement.

    This is an estimator for desk-sized problems, not a certified bisection method.
    """
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    if not is_asymptotically_stable(A):
        raise Unstable("A is not asymptotically stable")
    n = A.shape[0]
    eye = np.eye(n)

    def g(w):
        return float(np.linalg.svd(A - 1j * w * eye, compute_uv=False)[-1])

    bound = 10.0 * max(np.linalg.norm(A, 2), 1e-300)
    grid = np.linspace(-bound, bound, grid_points)
    vals = np.array([g(w) for w in grid])
    best = float(np.min(vals))
    step = grid[1] - grid[0]
    for i in range(len(grid)):
        left = vals[i - 1] if i > 0 else np.inf
        right = vals[i + 1] if i < len(grid) - 1 else np.inf
        if vals[i] <= left and vals[i] <= right:
            lo = grid[i] - step if i > 0 else grid[i]
            hi = grid[i] + step if i < len(grid) - 1 else grid[i]
            _, val, _ = golden_section(g, lo, hi, 1e-10 * bound)
            best = min(best, val)
    return best


@dataclass
class ConditionOptimal:
    X_opt: np.ndarray
    kappa_X: float
    kappa_T: float
    commuting: bool
    kappa_T_bound: float | None
    lower_diag: np.ndarray
    upper_diag: np.ndarray


def _pick_in_window(lo, hi):
    """Per-index values in ``[lo_i, hi_i]`` intersected with ``[min(hi), max(lo)]``, or one common value."""
    lo_max, hi_min = float(np.max(lo)), float(np.min(hi))
    if lo_max <= hi_min:
        lam = 0.5 * (lo_max + hi_min)
        return np.full(lo.shape, lam), 1.0
    left = np.maximum(lo, hi_min)
    right = np.minimum(hi, lo_max)
    return 0.5 * (left + right), lo_max / hi_min


def condition_optimal_certificate(X_minus, X_plus) -> ConditionOptimal:
    """Certificate between ``X_minus`` and ``X_plus`` with the smallest condition number.

    Optimal when the two commute; otherwise built on a simultaneous congruence
    diagonalization and reported with the guaranteed bound on ``kappa(T)``.
    """
    Xm = sym(np.asarray(X_minus, dtype=complex))
    Xp = sym(np.asarray(X_plus, dtype=complex))
    if np.linalg.eigvalsh(Xp - Xm)[0] < -1e-8:
        raise OrderingViolated("X_plus - X_minus is not positive semidefinite")
    if np.linalg.eigvalsh(Xm)[0] <= 0:
        raise OrderingViolated("X_minus is not positive definite")
    comm = np.linalg.norm(Xm @ Xp - Xp @ Xm)
    commuting = comm <= 1e-10 * np.linalg.norm(Xm) * np.linalg.norm(Xp)
    if commuting:
        # a generic combination separates the joint eigenspaces
        _, U = np.linalg.eigh(Xm + math.sqrt(2.0) * Xp)
        lo = np.real(np.diag(U.conj().T @ Xm @ U))
        hi = np.real(np.diag(U.conj().T @ Xp @ U))
        d, kappa = _pick_in_window(lo, hi)
        X_opt = sym((U * d) @ U.conj().T)
        return ConditionOptimal(X_opt, kappa, math.sqrt(kappa), True, None, lo, hi)

    # L^H X_- L and L^H X_+ L diagonal; unit columns keep kappa(L) moderate
    _, L = scipy.linalg.eigh(Xp, Xm)
    L = L / np.linalg.norm(L, axis=0)
    lo = np.real(np.diag(L.conj().T @ Xm @ L))
    hi = np.real(np.diag(L.conj().T @ Xp @ L))
    d, _ = _pick_in_window(lo, hi)
    Linv = np.linalg.inv(L)
    X_opt = sym(Linv.conj().T @ np.diag(d) @ Linv)
    w = np.linalg.eigvalsh(X_opt)
    kappa = float(w[-1] / w[0])
    kL = float(np.linalg.cond(L))
    bound = max(kL, kL * math.sqrt(np.max(lo) / np.min(hi)))
    return ConditionOptimal(X_opt, kappa, math.sqrt(kappa), False, bound, lo, hi)
