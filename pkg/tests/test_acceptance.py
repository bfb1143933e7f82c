"""End-to-end acceptance checks, one test per release criterion.

Each test prints a single pass/fail line so a plain `pytest -s
tests/test_acceptance.py` doubles as the sign-off checklist.
"""
import time

import numpy as np
import pytest

from spdeorder import (
    DriftSpec,
    Field,
    Grid,
    NoiseSpec,
    ProblemSpec,
    ReactionSpec,
    SpatialOpSpec,
    TimeGrid,
    bracket_study,
    build_extremal,
    check_assumptions,
    comparison_study,
    constant_forcing,
    iterate_bracket,
    sigma_eps,
    sigma_eps_prime,
    sigma_eps_second,
    solve_frozen,
    sup_h_distance,
)
from spdeorder.bracket import MAX_SIDE, MIN_SIDE
from spdeorder.cli import main
from spdeorder.config import resolve_config
from spdeorder.core import zeros
from spdeorder.scenarios import build_newton, build_problem_spec


def _report(label: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"\n[{status}] {label}{suffix}")
    assert ok, f"{label}{suffix}"


def test_criterion_1_counterexample_regression():
    start = time.perf_counter()
    cfg = resolve_config({"scenario": "ode_counterexample"})
    spec = build_problem_spec(cfg)
    kwargs = dict(tol_fixed=cfg["run.tol_fixed"], max_outer=cfg["run.max_outer"])
    minimal = iterate_bracket(spec, MIN_SIDE, **kwargs)
    maximal = iterate_bracket(spec, MAX_SIDE, **kwargs)
    elapsed = time.perf_counter() - start

    min_sup = float(np.max(np.abs(minimal.final.values)))
    times = maximal.final.times()
    max_err = float(np.max(np.abs(maximal.final.values[:, 0] - times**2 / 4.0)))
    ok = (minimal.converged and maximal.converged
          and min_sup <= 1e-6 and max_err <= 5e-3
          and minimal.monotone_ok and maximal.monotone_ok
          and elapsed <= 5.0)
    _report("criterion 1: two distinct solutions from one datum",
            ok, f"min sup {min_sup:.2e}, max err {max_err:.2e}, {elapsed:.1f}s")


def test_criterion_2_extremal_bracket_closed_forms():
    g = Grid.ode()
    spec = ProblemSpec(
        grid=g,
        time_grid=TimeGrid(T=1.0, n_steps=10_000),  # dt = 1e-4
        spatial=SpatialOpSpec(),
        drift=DriftSpec.sqrt_plus(),
        reaction=ReactionSpec.zero(),
        noise=NoiseSpec.none(),
        u0=Field([0.0], g),
    )
    upper = build_extremal(spec, MAX_SIDE)
    lower = build_extremal(spec, MIN_SIDE)
    err_up = abs(upper.values[-1, 0] - 1.71828)
    err_lo = abs(lower.values[-1, 0] + 0.63212)
    ok = err_up <= 2e-4 and err_lo <= 2e-4
    _report("criterion 2: extremal brackets hit the exponential closed forms",
            ok, f"upper err {err_up:.2e}, lower err {err_lo:.2e}")


def test_criterion_3_comparison_principle_desk_scale():
    start = time.perf_counter()
    cfg = resolve_config({"scenario": "heat_comparison"})
    grid = Grid(n_interior=cfg["grid.n"], length=cfg["grid.L"])
    u0_flat = zeros(grid)
    u0_sine = Field(np.sin(np.pi * grid.x), grid)
    base = build_problem_spec(cfg, u0=u0_flat)
    spec_lo = build_problem_spec(cfg, u0=u0_flat)
    spec_hi = build_problem_spec(cfg, u0=u0_sine)
    assert base.noise.K == 8 and base.time_grid.dt == 1e-3

    h_lo = constant_forcing(cfg["comparison.h_low"])
    h_hi = constant_forcing(cfg["comparison.h_high"])
    report = comparison_study(spec_lo, spec_hi, M=cfg["run.M"],
                              master_seed=cfg["run.master_seed"],
                              forcing_1=h_lo, forcing_2=h_hi, tol=1e-10)
    reversed_report = comparison_study(spec_hi, spec_lo, M=10,
                                       master_seed=cfg["run.master_seed"],
                                       forcing_1=h_hi, forcing_2=h_lo, tol=1e-10)
    elapsed = time.perf_counter() - start
    ok = (report.passed and report.worst_energy <= 1e-10
          and not reversed_report.passed and elapsed <= 60.0)
    _report("criterion 3: pathwise comparison over 100 coupled paths",
            ok, f"worst energy {report.worst_energy:.2e}, reversed worst "
                f"{reversed_report.worst_energy:.2e}, {elapsed:.1f}s")


def test_criterion_4_regularizer_calculus():
    eps_set = (1.0, 1e-2, 1e-4, 1e-8)
    s = np.linspace(0.0, 1.0, 10_001)  # includes the stationary point 0.6
    ok = True
    details = []
    sup_prod = {}
    for eps in eps_set:
        r = s * eps
        ok &= abs(sigma_eps(eps, eps) - eps) <= 1e-9 * eps
        ok &= abs(sigma_eps_prime(eps, eps) - 1.0) <= 1e-9
        ok &= abs(sigma_eps_second(eps, eps)) <= 1e-9
        vals = sigma_eps(r, eps)
        ok &= bool(np.all(vals >= 0.0) and np.all(vals <= np.maximum(r, 0.0) + 1e-15))
        sup_prime = float(np.max(np.abs(sigma_eps_prime(r, eps))))
        ok &= abs(sup_prime - 1.512) <= 1e-6
        sup_prod[eps] = float(np.max(np.abs(vals * sigma_eps_second(r, eps))))
    spread = max(sup_prod.values()) / min(sup_prod.values())
    ok &= spread <= 1.01
    details.append(f"sup|sigma'*| = 1.512, |sigma*sigma''| spread {spread:.4f}")
    _report("criterion 4: C2 positive-part regularizer calculus", ok,
            "; ".join(details))


def test_criterion_5_discrete_T_monotonicity():
    ok = True
    worst = []
    for p in (2.0, 3.0, 4.0):
        report = check_assumptions(
            SpatialOpSpec(p=p),
            DriftSpec.zero(),
            ReactionSpec.zero(),
            NoiseSpec.none(),
            grid=Grid(n_interior=64),
            n_pairs=1000,
            seed=p_seed(p),
        )
        by_name = {c.name: c for c in report.checks}
        ok &= by_name["operator_coercivity_identity"].passed
        for sig in ("identity", "positive_part", "sigma_eps"):
            ok &= by_name[f"operator_T_monotonicity_{sig}"].passed
        worst.append(f"p={p:g} ok")
    _report("criterion 5: T-monotonicity and coercivity over 1000 pairs",
            ok, ", ".join(worst))


def p_seed(p: float) -> int:
    return int(p * 1000)


def test_criterion_6_monotone_iteration_properties():
    cfg = resolve_config({"scenario": "plap_bracket"})
    spec = build_problem_spec(cfg)
    kwargs = dict(tol_fixed=1e-6, max_outer=100, newton=build_newton(cfg))
    minimal = iterate_bracket(spec, MIN_SIDE, **kwargs)
    maximal = iterate_bracket(spec, MAX_SIDE, **kwargs)
    mono = max(max(minimal.monotonicity_violations),
               max(maximal.monotonicity_violations))
    containment = max(max(minimal.containment_violations),
                      max(maximal.containment_violations))
    cross = float(np.max(minimal.final.values - maximal.final.values))
    ok = (minimal.converged and maximal.converged
          and mono <= 1e-12 and containment <= 1e-10 and cross <= 1e-12)
    _report("criterion 6: monotone bracket iteration with jump drift", ok,
            f"mono {mono:.1e}, containment {containment:.1e}, cross {cross:.1e},"
            f" sweeps {minimal.n_sweeps}/{maximal.n_sweeps}")


def test_criterion_7_unique_regime_collapse():
    g = Grid(n_interior=64)
    tg = TimeGrid(T=0.5, n_steps=250)

    def spec_for(K):
        return ProblemSpec(
            grid=g,
            time_grid=tg,
            spatial=SpatialOpSpec(),
            drift=DriftSpec.lipschitz_tanh(1.0),
            reaction=ReactionSpec.zero(),
            noise=NoiseSpec.geometric(K) if K else NoiseSpec.none(),
            u0=zeros(g),
        )

    gaps = {}
    for K, M in ((0, 1), (4, 20)):
        pairs = bracket_study(spec_for(K), M=M, master_seed=777,
                              tol_fixed=1e-8, max_outer=100)
        gaps[K] = max(pair.gap for pair in pairs)
        assert all(p.minimal.converged and p.maximal.converged for p in pairs)
    ok = gaps[0] <= 1e-6 and gaps[4] <= 1e-6
    _report("criterion 7: brackets collapse under a Lipschitz drift", ok,
            f"gap K=0: {gaps[0]:.1e}, gap K=4 over 20 paths: {gaps[4]:.1e}")


def test_criterion_8_heat_solver_convergence():
    n = 255
    g = Grid(n_interior=n)
    u0 = np.sin(np.pi * g.x)
    T = 0.1
    exact = u0 * np.exp(-np.pi**2 * T)

    def terminal_error(dt):
        spec = ProblemSpec(
            grid=g,
            time_grid=TimeGrid(T=T, n_steps=int(round(T / dt))),
            spatial=SpatialOpSpec(),
            drift=DriftSpec.zero(),
            reaction=ReactionSpec.zero(),
            noise=NoiseSpec.none(),
            u0=Field(u0, g),
        )
        traj = solve_frozen(spec, None, None)
        return float(np.max(np.abs(traj.values[-1] - exact)))

    e1 = terminal_error(1e-4)
    e2 = terminal_error(5e-5)
    ratio = e1 / e2
    ok = e1 <= 2e-3 and 1.5 <= ratio <= 2.5
    _report("criterion 8: first-order heat solve against the analytic solution",
            ok, f"error {e1:.2e}, dt-halving ratio {ratio:.2f}")


def test_criterion_9_byte_identical_reproducibility(tmp_path):
    base = ("scenario = heat_comparison\n"
            "grid.n = 16\n"
            "time.T = 0.02\n"
            "run.M = 4\n")
    cfg_a = tmp_path / "a.cfg"
    cfg_a.write_text(base + "run.workers = 1\n")
    cfg_b = tmp_path / "b.cfg"
    cfg_b.write_text(base + "run.workers = 4\n")

    outs = [tmp_path / name for name in ("run1", "run2", "run_mt")]
    assert main(["run", str(cfg_a), "--out", str(outs[0]), "--seed", "2024"]) == 0
    assert main(["run", str(cfg_a), "--out", str(outs[1]), "--seed", "2024"]) == 0
    assert main(["run", str(cfg_b), "--out", str(outs[2]), "--seed", "2024"]) == 0

    names = sorted(p.name for p in outs[0].iterdir())
    ok = len(names) > 0
    for other in outs[1:]:
        ok &= names == sorted(p.name for p in other.iterdir())
        for name in names:
            ok &= (outs[0] / name).read_bytes() == (other / name).read_bytes()
    _report("criterion 9: reruns and worker-count changes are byte-identical",
            ok, f"{len(names)} artifacts compared across 3 runs")
