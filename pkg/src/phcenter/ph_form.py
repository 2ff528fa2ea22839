"""Port-Hamiltonian realizations built from a KYP certificate."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotFeasible, NotPositiveDefinite
from .kyp import _check_X, assemble_W, membership
from .lti_core import SystemModel, eigh_sqrt, sym

PH_RTOL = 1e-10
MIN_GENERATOR_EIG = 1e-8


@dataclass(frozen=True)
class PhRealization:
    """Coefficients of ``x' = (J - R) Q x + (G - K) u, y = (G + K)^H Q x + D u``.

    ``T`` is the state transformation that produced these coordinates (identity
    when the realization lives in the original coordinates).
    """

    J: np.ndarray
    R: np.ndarray
    Q: np.ndarray
    G: np.ndarray
    K: np.ndarray
    D: np.ndarray
    T: np.ndarray

    @property
    def dissipation_block(self) -> np.ndarray:
        """``[[R, K], [K^H, sym(D)]]``."""
        return np.block([[self.R, self.K], [self.K.conj().T, sym(self.D)]])

    def to_model(self) -> SystemModel:
        return SystemModel(
            (self.J - self.R) @ self.Q,
            self.G - self.K,
            (self.G + self.K).conj().T @ self.Q,
            self.D,
        )


def _require_certificate(model: SystemModel, X) -> np.ndarray:
    X = _check_X(model, X)
    mem = membership(model, X)
    if mem.x_margin <= 0:
        raise NotPositiveDefinite(f"X is not positive definite (lambda_min = {mem.x_margin:.3e})")
    if not mem.in_X_pd:
        raise NotFeasible(f"W(X) is not positive semidefinite (lambda_min = {mem.margin:.3e})")
    return X


def ph_from_certificate(model: SystemModel, X) -> PhRealization:
    """pH realization with ``Q = X`` in the original state coordinates."""
    Q = _require_certificate(model, X)
    A, B, C = model.A, model.B, model.C
    Qinv = sym(np.linalg.inv(Q))
    AQi = A @ Qinv
    QiCh = Qinv @ C.conj().T
    return PhRealization(
        J=0.5 * (AQi - AQi.conj().T),
        R=-0.5 * (AQi + AQi.conj().T),
        Q=Q,
        G=0.5 * (QiCh + B),
        K=0.5 * (QiCh - B),
        D=model.D.copy(),
        T=np.eye(model.n, dtype=complex),
    )


def ph_in_T_coordinates(model: SystemModel, X, factor=None) -> PhRealization:
    """pH realization with ``Q = I`` after the change of state ``x_T = T x``.

    ``T`` defaults to the Hermitian square root of X; any ``T`` with
    ``T^H T = X`` may be passed as ``factor``.
    """
    X = _require_certificate(model, X)
    if factor is None:
        T = eigh_sqrt(X)
    else:
        T = np.asarray(factor, dtype=complex)
        if np.linalg.norm(T.conj().T @ T - X) > 1e-10 * max(1.0, np.linalg.norm(X)):
            raise ValueError("factor does not satisfy T^H T = X")
    mt = model.transform(T)
    A_T, B_T, C_T = mt.A, mt.B, mt.C
    n = model.n
    return PhRealization(
        J=0.5 * (A_T - A_T.conj().T),
        R=-0.5 * (A_T + A_T.conj().T),
        Q=np.eye(n, dtype=complex),
        G=0.5 * (C_T.conj().T + B_T),
        K=0.5 * (C_T.conj().T - B_T),
        D=model.D.copy(),
        T=T,
    )


def W_in_T_coordinates(model: SystemModel, X, T) -> np.ndarray:
    """``diag(T^{-H}, I) W(X) diag(T^{-1}, I)``, the KYP matrix at ``I`` after transforming by T."""
    W = assemble_W(model, X)
    n, m = model.n, model.m
    Tinv = np.linalg.inv(T)
    S = np.block([[Tinv, np.zeros((n, m))], [np.zeros((m, n)), np.eye(m)]])
    return sym(S.conj().T @ W @ S)


def validate_ph(ph: PhRealization, rtol=PH_RTOL) -> list:
    """Return a list of violated pH conditions; empty when the realization is valid.

    Each entry is a dict with ``condition`` and ``margin`` keys.
    """
    violations = []
    skew = float(np.linalg.norm(ph.J + ph.J.conj().T))
    if skew > rtol * max(1.0, np.linalg.norm(ph.J)):
        violations.append({"condition": "J skew-Hermitian", "margin": skew})
    block = ph.dissipation_block
    lmin = float(np.linalg.eigvalsh(sym(block))[0])
    if lmin < -rtol * max(1.0, np.linalg.norm(block, 2)):
        violations.append({"condition": "[[R, K], [K^H, sym(D)]] positive semidefinite", "margin": lmin})
    herm = float(np.linalg.norm(ph.Q - ph.Q.conj().T))
    qmin = float(np.linalg.eigvalsh(sym(ph.Q))[0])
    if herm > rtol * max(1.0, np.linalg.norm(ph.Q)):
        violations.append({"condition": "Q Hermitian", "margin": herm})
    if qmin <= 0:
        violations.append({"condition": "Q positive definite", "margin": qmin})
    return violations


def random_dissipation_factor(n: int, m: int, rng: np.random.Generator, real=False) -> np.ndarray:
    p = n + m
    if real:
        return rng.standard_normal((p, p))
    return (rng.standard_normal((p, p)) + 1j * rng.standard_normal((p, p))) / np.sqrt(2.0)


def generate_random_ph(n: int, m: int, seed=None, real=False, return_factor=False):
    """Random strictly passive model with ``W(I) = M M^H`` for a random square ``M``.

    With ``[[R, K], [K^H, S]] = M M^H`` the model is ``A = -R/2``, ``B = -K/2``,
    ``C = K^H/2``, ``D = S/2``. Draws are repeated until ``lambda_min(M M^H)``
    exceeds ``1e-8``. Entries of M are standard complex normal unless ``real``.
    """
    if n < 1 or m < 1:
        raise ValueError("need n >= 1 and m >= 1")
    rng = np.random.default_rng(seed)
    while True:
        M = random_dissipation_factor(n, m, rng, real=real)
        W = M @ M.conj().T
        if np.linalg.eigvalsh(sym(W))[0] > MIN_GENERATOR_EIG:
            break
    W = sym(W)
    R, K, S = W[:n, :n], W[:n, n:], W[n:, n:]
    model = SystemModel(-R / 2, -K / 2, K.conj().T / 2, S / 2)
    return (model, M) if return_factor else model
