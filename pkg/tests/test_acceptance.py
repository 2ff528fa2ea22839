"""Acceptance suite. Every criterion prints a single PASS/FAIL line and then asserts.

Oracles are recomputed here with plain numpy wherever possible instead of reusing
library helpers, so that a bug in a shared helper cannot confirm itself.
"""

import json
import time

import numpy as np
import pytest

from phcenter import cli
from phcenter import documents as docs
from phcenter.analytic_center import (
    BarrierKind,
    barrier_gradient,
    barrier_value,
    compute_center,
)
from phcenter.kyp import extremal_solutions
from phcenter.lti_core import SystemModel
from phcenter.ph_form import generate_random_ph, ph_from_certificate
from phcenter.radii import (
    condition_optimal_certificate,
    true_stability_radius,
    unimodality_probe,
    x_passivity_radius,
)

from conftest import interior_point, random_hermitian

SEEDS = range(10)


@pytest.fixture
def verdict(capsys):
    def emit(label, ok, detail=""):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} {label}" + (f" ({detail})" if detail else ""))
        assert ok, f"{label}: {detail}"

    return emit


def W_of(model, X):
    A, B, C, D = model.A, model.B, model.C, model.D
    return np.block([[-X @ A - A.conj().T @ X, C.conj().T - X @ B], [C - B.conj().T @ X, D + D.conj().T]])


def feedback_and_riccati(model, X):
    A, B, C = model.A, model.B, model.C
    S = model.D + model.D.conj().T
    F = np.linalg.solve(S, C - B.conj().T @ X)
    P = -A.conj().T @ X - X @ A - F.conj().T @ S @ F
    return F, (P + P.conj().T) / 2, A - B @ F


def test_criterion_01_scalar_closed_forms(verdict):
    start = time.perf_counter()
    m = SystemModel.scalar(-1.0, 1.0, 1.0, 1.0)
    x_std = compute_center(m, BarrierKind.STANDARD).X_center[0, 0].real
    x_ph = compute_center(m, BarrierKind.PORT_HAMILTONIAN).X_center[0, 0].real
    X = np.array([[x_std]])
    F, P, _ = feedback_and_riccati(m, X)
    det_W = np.linalg.det(W_of(m, X)).real
    elapsed = time.perf_counter() - start
    ok = (
        abs(x_std - 3.0) <= 1e-8
        and abs(x_ph - 1.0) <= 1e-8
        and abs(F[0, 0].real + 1.0) <= 1e-10
        and abs(P[0, 0].real - 4.0) <= 1e-10
        and abs(det_W - 8.0) <= 1e-10
        and elapsed < 1.0
    )
    verdict(
        "criterion 1: scalar closed forms",
        ok,
        f"x_std={x_std:.12g} x_ph={x_ph:.12g} f={F[0, 0].real:.12g} p={P[0, 0].real:.12g} "
        f"detW={det_W:.12g} t={elapsed:.2f}s",
    )


def test_criterion_02_center_optimality(verdict):
    start = time.perf_counter()
    worst = {"grad": 0.0, "lyap": 0.0, "re": 0.0}
    ok = True
    for seed in SEEDS:
        m = generate_random_ph(6, 3, seed=seed)
        res = compute_center(m, BarrierKind.STANDARD)
        _, P, A_F = feedback_and_riccati(m, res.X_center)
        grad_ratio = res.grad_norm / (1e-9 * (1 + abs(res.barrier_value)))
        lyap = np.linalg.norm(P @ A_F + A_F.conj().T @ P) / (np.linalg.norm(P) * np.linalg.norm(A_F))
        re = np.max(np.abs(np.linalg.eigvals(A_F).real)) / np.linalg.norm(A_F, 2)
        worst["grad"] = max(worst["grad"], grad_ratio)
        worst["lyap"] = max(worst["lyap"], lyap)
        worst["re"] = max(worst["re"], re)
        ok &= grad_ratio <= 1.0 and np.linalg.eigvalsh(P)[0] > 0 and lyap <= 1e-8 and re <= 1e-6
    elapsed = time.perf_counter() - start
    ok &= elapsed < 30.0
    verdict(
        "criterion 2: center optimality on 10 seeded models",
        ok,
        f"max grad/tol={worst['grad']:.2e} max lyap={worst['lyap']:.2e} "
        f"max |Re|/|A_F|={worst['re']:.2e} t={elapsed:.2f}s",
    )


def test_criterion_03_extremal_bracketing(verdict):
    ok = True
    details = []
    for seed in SEEDS:
        m = generate_random_ph(6, 3, seed=seed)
        pair = extremal_solutions(m)
        Xm, Xp = pair.X_minus, pair.X_plus
        S = m.S
        Ac = m.A - m.B @ np.linalg.solve(S, m.C)
        H = np.block(
            [
                [Ac, -m.B @ np.linalg.solve(S, m.B.conj().T)],
                [m.C.conj().T @ np.linalg.solve(S, m.C), -Ac.conj().T],
            ]
        )
        hnorm = np.linalg.norm(H, 2)
        nA = np.linalg.norm(m.A)
        for X, side in ((Xm, -1), (Xp, 1)):
            _, P, A_F = feedback_and_riccati(m, X)
            ok &= np.linalg.norm(P) <= 1e-6 * max(1.0, np.linalg.norm(X) * nA)
            re = np.linalg.eigvals(A_F).real
            ok &= bool(np.all(side * re > 1e-8 * hnorm))
        gap = np.linalg.eigvalsh(Xp - Xm)[0]
        ok &= np.linalg.eigvalsh(Xm)[0] > 0 and gap >= -1e-8
        details.append(gap)
    verdict("criterion 3: extremal bracketing on 10 seeded models", ok, f"min gap={min(details):.3e}")


def test_criterion_04_radius_machinery(verdict):
    ok = True
    worst_sandwich = -np.inf
    worst_boundary = 0.0
    worst_norm = 0.0
    for seed in SEEDS:
        m = generate_random_ph(6, 3, seed=seed)
        X = compute_center(m).X_center
        probe_ok, _ = unimodality_probe(m, X)
        r = x_passivity_radius(m, X)
        W = W_of(m, X)
        n, p = m.n, m.n + m.m
        Xh = np.eye(p, dtype=complex)
        Xh[:n, :n] = X
        # independent evaluation of lambda_max(M(gamma*))
        w, V = np.linalg.eigh(W)
        Wmh = (V / np.sqrt(w)) @ V.conj().T
        g = r.gamma_star
        lam = np.linalg.eigvalsh(g**2 * Wmh @ Xh @ Xh @ Wmh + Wmh @ Wmh / g**2)[-1]
        exact = 1.0 / lam
        ok &= probe_ok
        ok &= r.alpha * r.beta / 2 <= exact * (1 + 1e-12)
        ok &= exact <= r.alpha * r.beta / (1 + r.uw_overlap) + 1e-9
        worst_sandwich = max(worst_sandwich, exact - r.alpha * r.beta / (1 + r.uw_overlap))
        # apply the perturbation to the model and reassemble W
        D = r.delta.Delta_T
        pert = SystemModel(m.A - D[:n, :n], m.B - D[:n, n:], m.C + D[n:, :n], m.D + D[n:, n:])
        lmin = np.linalg.eigvalsh(W_of(pert, X))[0] / np.linalg.norm(W, 2)
        worst_boundary = max(worst_boundary, abs(lmin))
        ok &= abs(lmin) <= 1e-8
        s = np.linalg.svd(D, compute_uv=False)
        worst_norm = max(worst_norm, abs(np.linalg.norm(D) - s[0]))
        ok &= abs(np.linalg.norm(D) - s[0]) <= 1e-10
    verdict(
        "criterion 4: radius machinery at the standard center",
        ok,
        f"max exact-upper={worst_sandwich:.2e} max |lambda_min W_Delta|/|W|={worst_boundary:.2e} "
        f"max |F-2 norm gap|={worst_norm:.2e}",
    )


def test_criterion_05_table_analogue(verdict, tmp_path, capsys):
    start = time.perf_counter()
    path = tmp_path / "model.json"
    assert cli.main(["generate", "--n", "6", "--m", "3", "--seed", "42", str(path)]) == 0
    capsys.readouterr()
    code = cli.main(["radii", str(path), "--json", "--no-timestamp"])
    rep = json.loads(capsys.readouterr().out)
    elapsed = time.perf_counter() - start
    t = rep["outputs"]["table"]
    cols = ("alpha_sq", "beta_sq", "xi", "alpha_beta", "lambda_min_Rc", "rho_stab")
    ok = (
        code == 0
        and all(c in t and t[c] is not None for c in cols)
        and t["xi"] >= t["alpha_beta"]
        and min(t["xi"], t["alpha_sq"], t["beta_sq"]) > 0
        and t["lambda_min_Rc"] > 0
        and elapsed < 10.0
    )
    verdict(
        "criterion 5: table-analogue columns on the seed-42 model",
        ok,
        " ".join(f"{c}={t.get(c, float('nan')):.6g}" for c in cols) + f" t={elapsed:.2f}s",
    )


def test_criterion_06_ph_round_trip(verdict, rng):
    worst_rec = 0.0
    worst_id = 0.0
    for seed in SEEDS:
        m = generate_random_ph(6, 3, seed=seed)
        X = interior_point(m, rng)
        ph = ph_from_certificate(m, X)
        Q = ph.Q
        rec = [
            ((ph.J - ph.R) @ Q, m.A),
            (ph.G - ph.K, m.B),
            ((ph.G + ph.K).conj().T @ Q, m.C),
        ]
        for got, ref in rec:
            worst_rec = max(worst_rec, np.linalg.norm(got - ref) / np.linalg.norm(ref))
        Qi = np.linalg.inv(Q)
        n, k = m.n, m.m
        S = np.block([[Qi, np.zeros((n, k))], [np.zeros((k, n)), np.eye(k)]])
        block = np.block([[ph.R, ph.K], [ph.K.conj().T, (ph.D + ph.D.conj().T) / 2]])
        target = 0.5 * S @ W_of(m, X) @ S
        worst_id = max(worst_id, np.linalg.norm(block - target) / np.linalg.norm(target))
    ok = worst_rec <= 1e-10 and worst_id <= 1e-10
    verdict("criterion 6: pH round trip and dissipation identity", ok, f"rec={worst_rec:.2e} identity={worst_id:.2e}")


def test_criterion_07_gradient_vs_finite_differences(verdict, rng):
    h = 1e-5
    worst = 0.0
    for k in range(10):
        m = generate_random_ph(6, 3, seed=k)
        X = interior_point(m, rng)
        E = random_hermitian(rng, m.n)
        E /= np.linalg.norm(E)
        for kind in BarrierKind:
            G = barrier_gradient(m, X, kind)
            lin = float(np.real(np.vdot(G, E)))
            fd = (barrier_value(m, X + h * E, kind) - barrier_value(m, X - h * E, kind)) / (2 * h)
            worst = max(worst, abs(lin - fd) / (1 + abs(lin)))
    verdict("criterion 7: gradients match central differences", worst <= 1e-6, f"max rel err={worst:.2e}")


def test_criterion_08_condition_optimal(verdict):
    a = condition_optimal_certificate(np.diag([1.0, 3.0]), np.diag([2.0, 4.0]))
    b = condition_optimal_certificate(np.diag([1.0, 1.0]), np.diag([2.0, 2.0]))
    ok = np.array_equal(np.real(np.diag(a.X_opt)), [2.0, 3.0]) and a.kappa_X == 1.5 and b.kappa_X == 1.0
    ok &= np.allclose(a.X_opt, np.diag(np.diag(a.X_opt)), atol=0)
    verdict(
        "criterion 8: condition-optimal certificate",
        ok,
        f"X_opt=diag{tuple(float(v) for v in np.real(np.diag(a.X_opt)))} kappa={a.kappa_X} overlap kappa={b.kappa_X}",
    )


def test_criterion_09_stability_radius(verdict):
    r2 = true_stability_radius(np.diag([-1.0, -3.0]))
    r1 = true_stability_radius([[-1.0]])
    ok = abs(r2 - 1.0) <= 1e-6 and abs(r1 - 1.0) <= 1e-12
    verdict("criterion 9: stability radius estimator", ok, f"diag(-1,-3)->{r2:.15g} -1->{r1:.17g}")


def test_criterion_10_cli_determinism(verdict, tmp_path, capsys):
    results = {}
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        cli.main(["generate", "--n", "6", "--m", "3", "--seed", "42", str(p)])
    results["generate reproducible"] = a.read_bytes() == b.read_bytes()
    text = a.read_text()
    model, meta = docs.loads_model(text)
    results["round trip"] = docs.dumps_model(model, meta) == text

    def write(name, A, B, C, D):
        path = tmp_path / name
        path.write_text(docs.dumps_model(SystemModel(A, B, C, D)))
        return str(path)

    cases = {
        "integrator, D=1": (write("e1.json", [[0.0]], [[1.0]], [[1.0]], [[1.0]]), 1),
        "oscillator, D=1": (write("e2.json", [[0, 1], [-1, 0]], [[1], [0]], [[1, 0]], [[1]]), 1),
        "oscillator, D=0": (write("e3.json", [[0, 1], [-1, 0]], [[1], [0]], [[1, 0]], [[0]]), 1),
        "scalar (-1,1,1,1)": (write("e4.json", [[-1.0]], [[1.0]], [[1.0]], [[1.0]]), 0),
    }
    codes = {}
    for label, (path, expected) in cases.items():
        codes[label] = cli.main(["check", path])
        results[f"check {label}"] = codes[label] == expected
    capsys.readouterr()
    reports = []
    for _ in range(2):
        cli.main(["center", str(a), "--json", "--no-timestamp"])
        reports.append(capsys.readouterr().out)
    results["center report byte-identical"] = reports[0] == reports[1]
    failed = [k for k, v in results.items() if not v]
    verdict("criterion 10: CLI determinism and round trip", not failed, f"exit codes={codes} failed={failed}")
