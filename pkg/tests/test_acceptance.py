"""Acceptance suite: one printed PASS/FAIL line per criterion.

Run alone with ``pytest tests/test_acceptance.py -v``.
"""

import math
from dataclasses import replace

import numpy as np
import pytest

from gluedtrees.config import ExperimentConfig
from gluedtrees.dynamics import (
    LOCALIZATION_QUANTILE,
    basis_state,
    eigendecompose,
    evolve_classical,
    evolve_quantum,
    packet_extent,
    propagate,
)
from gluedtrees.experiments import crosscheck, run_experiment
from gluedtrees.graph import build_glued_tree
from gluedtrees.line import (
    DisorderSpec,
    apply_disorder,
    column_basis,
    compress,
    lumped_classical_chain,
    reduced_hamiltonian,
    verify_subspace_closure,
)
from gluedtrees.localization import (
    lyapunov_exponent,
    max_localization_length,
    thouless_inverse_length,
    thouless_length,
)

pytestmark = pytest.mark.slow


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {number}] {'PASS' if ok else 'FAIL'}  {title}: {detail}")
        assert ok, detail
    return emit


def test_c1_subspace_reduction(report):
    comp, clos = 0.0, 0.0
    for n in range(1, 9):
        g = build_glued_tree(n)
        b = column_basis(g)
        comp = max(comp, float(np.max(np.abs(compress(g, b, 1.0) - reduced_hamiltonian(n, 1.0).dense()))))
        clos = max(clos, verify_subspace_closure(g, b, 1.0))
    report(1, "subspace reduction n=1..8", comp <= 1e-12 and clos <= 1e-10,
           f"max compression dev {comp:.2e} (tol 1e-12), max closure residual {clos:.2e} (tol 1e-10)")


def test_c2_dynamics_oracle(report):
    r = crosscheck(6, 1.0, (1.0, 3.0, 10.0))
    q, c = r["quantum_deviation"], r["classical_deviation"]
    report(2, "reduced vs full graph, n=6, t=1,3,10", q <= 1e-8 and c <= 1e-8,
           f"quantum dev {q:.2e}, classical dev {c:.2e} (tol 1e-8)")


def test_c3_ballistic_transport(report):
    s = eigendecompose(reduced_hamiltonian(1000, 1.0))
    times = np.arange(50.0, 301.0, 10.0)
    ext = [packet_extent(p, 0.99) for p in evolve_quantum(s, basis_state(2001), times)]
    slope = float(np.polyfit(times, ext, 1)[0])
    target = 2 * math.sqrt(2)
    report(3, "clean ballistic spreading, n=1000", abs(slope / target - 1) <= 0.05,
           f"99% extent slope {slope:.4f} vs 2*sqrt2 = {target:.4f} (tol 5%)")


def test_c4_localization_saturation(report, tmp_path):
    cfg = replace(
        ExperimentConfig.defaults("fig4"),
        delta=(0.03, 0.06), seeds=10, times=(350.0, 700.0), out=str(tmp_path),
    )
    res = run_experiment(cfg)
    # index 1 holds the extent at LOCALIZATION_QUANTILE (1 - e^-2)
    med = {d: np.median(res["extents"][d][:, :, 1], axis=0) for d in (0.03, 0.06)}
    m350, m700 = med[0.06]
    growth = m700 / m350 - 1
    lmax = max_localization_length(1.0, 0.06)
    ok = growth < 0.10 and 0.5 * lmax <= m700 <= 2 * lmax and med[0.03][1] > m700
    report(4, "localization saturation, cauchy, 10 seeds", ok,
           f"q={LOCALIZATION_QUANTILE:.4f}; delta=0.06 median extent {m350:g} (t=350) -> {m700:g} (t=700), "
           f"growth {growth:+.1%} (tol <10%); l_max={lmax:.2f}, ratio {m700 / lmax:.2f} (tol [0.5, 2]); "
           f"delta=0.03 saturated {med[0.03][1]:g} > {m700:g}")


def test_c5_thouless_vs_transfer_matrix(report):
    devs = {}
    for d in (0.03, 0.1, 0.3):
        est = lyapunov_exponent(3.0, 1.0, DisorderSpec("cauchy", d), 10**6, seed=0)
        lt = thouless_length(3.0, 1.0, d)
        devs[d] = abs(est.length - lt) / lt
    report(5, "Lloyd formula vs transfer matrix, 1e6 steps", max(devs.values()) <= 0.03,
           ", ".join(f"delta={d}: {v:.2%}" for d, v in devs.items()) + " (tol 3%)")


def test_c6_scaling_exponents(report, tmp_path):
    cfg = replace(ExperimentConfig.defaults("scaling"), out=str(tmp_path))
    results = run_experiment(cfg)["results"]
    target = {"cauchy": (-1.0, 0.1), "gaussian": (-2.0, 0.2), "uniform": (-2.0, 0.2)}
    ok, parts = True, []
    for fam, (slope, tol) in target.items():
        r = results[fam]
        good = abs(r.slope - slope) <= tol and r.r_squared >= 0.98
        ok &= good
        parts.append(f"{fam} slope {r.slope:.3f} (want {slope}+-{tol}), R2 {r.r_squared:.4f}")
    report(6, "scaling exponents over delta in [0.01, 0.1]", ok, "; ".join(parts))


def test_c7_hitting_suppression(report, tmp_path):
    cfg = replace(ExperimentConfig.defaults("hitting"), out=str(tmp_path))
    fit = run_experiment(cfg)["fit"]
    ok = fit["slope"] < 0 and fit["r_squared"] >= 0.9 and fit["ratio_last_first"] <= 0.1
    report(7, f"hitting suppression, delta=0.2, {cfg.seeds} seeds", ok,
           f"slope {fit['slope']:.4f}, R2 {fit['r_squared']:.4f} (tol >=0.9), "
           f"median ratio n=60/n=20 {fit['ratio_last_first']:.2e} (tol <=0.1)")


def test_c8_invariants(report):
    failures = []
    rng = np.random.default_rng(8)
    for case, (family, delta) in enumerate([("cauchy", 0.06), ("gaussian", 0.5), ("uniform", 1.0), ("cauchy", 0.0)]):
        spec = DisorderSpec(family, delta)
        h = apply_disorder(reduced_hamiltonian(200, 1.0), spec, case)
        if h.epsilon.tobytes() != apply_disorder(reduced_hamiltonian(200, 1.0), spec, case).epsilon.tobytes():
            failures.append(f"disorder not bit-exact ({family})")
        s = eigendecompose(h)
        H = h.dense()
        psi0 = rng.normal(size=h.length) + 1j * rng.normal(size=h.length)
        psi0 /= np.linalg.norm(psi0)
        e0 = np.vdot(psi0, H @ psi0).real
        for t in (0.5, 37.0, 700.0):
            psi = propagate(s, psi0, t)
            if abs(np.vdot(psi, psi).real - 1) > 1e-9:
                failures.append(f"unitarity t={t}")
            if abs(np.vdot(psi, H @ psi).real - e0) > 1e-9 * max(1.0, abs(e0)):
                failures.append(f"energy t={t}")
            if np.linalg.norm(propagate(s, psi, -t) - psi0) > 1e-8:
                failures.append(f"time reversal t={t}")
    for n in (1, 10, 200):
        for p in evolve_classical(lumped_classical_chain(n, 1.0), basis_state(2 * n + 1).real, [0.1, 10.0, 1e4]):
            if abs(p.probabilities.sum() - 1) > 1e-9:
                failures.append(f"classical conservation n={n}")
    x = np.arange(-1536, 1537) / 128.0  # 3 +- x exact
    for d in (0.0, 0.03, 0.3, 3.0):
        if not np.array_equal(thouless_inverse_length(3 + x, 1.0, d), thouless_inverse_length(3 - x, 1.0, d)):
            failures.append(f"Lloyd symmetry delta={d}")
    grid = np.linspace(0, 3, 301)
    for E in (-4.0, 1.0, 3.0, 5.5, 9.0):
        inv = np.array([float(thouless_inverse_length(E, 1.0, d)) for d in grid])
        if np.any(np.diff(inv) < -1e-15):
            failures.append(f"Lloyd monotonicity E={E}")
    report(8, "invariant suite", not failures, "all green" if not failures else "; ".join(failures))
