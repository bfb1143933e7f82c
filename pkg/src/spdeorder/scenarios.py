"""Scenario runners: build problem specs from a resolved config, run the
assumption checks and the scenario pipeline, and write batch artifacts
(assumptions.txt, trajectory CSVs, comparison reports, bracket summaries,
summary.txt with one pass/fail line per gate).
"""
from __future__ import annotations

import os
from typing import Optional

import numpy as np

from .bracket import (
    MAX_SIDE,
    MIN_SIDE,
    bracket_study,
    build_extremal,
    iterate_bracket,
    verify_interval,
)
from .comparison import comparison_study, sigma_energy_trace, run_coupled
from .config import ScenarioConfig, SCENARIO_DESCRIPTIONS, SCENARIOS
from .core import Field, Grid, TimeGrid, ODE
from .noise import sample_noise_path
from .operators import (
    DriftSpec,
    NoiseSpec,
    ReactionSpec,
    SpatialOpSpec,
    check_assumptions,
)
from .solver import NewtonParams, ProblemSpec, constant_forcing


def build_grid(cfg: ScenarioConfig) -> Grid:
    return Grid(mode=cfg["grid.mode"], n_interior=cfg["grid.n"], length=cfg["grid.L"])


def build_time_grid(cfg: ScenarioConfig) -> TimeGrid:
    n_steps = int(round(cfg["time.T"] / cfg["time.dt"]))
    return TimeGrid(T=cfg["time.T"], n_steps=n_steps)


def build_drift(cfg: ScenarioConfig) -> DriftSpec:
    kind = cfg["drift.kind"]
    if kind == "zero":
        return DriftSpec.zero(C_B=cfg["drift.C_B"])
    if kind == "sqrt_plus":
        return DriftSpec.sqrt_plus(C_B=cfg["drift.C_B"])
    if kind == "heaviside":
        return DriftSpec.heaviside(cfg["drift.s0"], cfg["drift.low"],
                                   cfg["drift.high"], jump_side=cfg["drift.jump_side"],
                                   C_B=cfg["drift.C_B"])
    if kind == "lipschitz_tanh":
        return DriftSpec.lipschitz_tanh(cfg["drift.scale"], C_B=cfg["drift.C_B"])
    flat = cfg["drift.knots"]
    knots = tuple(zip(flat[0::2], flat[1::2]))
    return DriftSpec.piecewise_linear(knots, C_B=cfg["drift.C_B"])


def build_reaction(cfg: ScenarioConfig) -> ReactionSpec:
    kind = cfg["reaction.kind"]
    if kind == "zero":
        return ReactionSpec.zero()
    if kind == "linear":
        return ReactionSpec.linear(cfg["reaction.slope"], cfg["reaction.offset"],
                                   C_F=cfg["reaction.C_F"])
    return ReactionSpec.lipschitz_tanh(cfg["reaction.scale"], C_F=cfg["reaction.C_F"])


def build_noise(cfg: ScenarioConfig) -> NoiseSpec:
    K = cfg["noise.K"]
    if K == 0:
        return NoiseSpec.none()
    C_G = cfg["noise.C_G"] or None  # 0 means derive from the coefficients
    return NoiseSpec.geometric(K, gamma=cfg["noise.gamma"],
                               pointwise_kind=cfg["noise.kind"], C_G=C_G)


def build_u0(cfg: ScenarioConfig, grid: Grid) -> Field:
    kind = cfg["u0.kind"]
    amp = cfg["u0.amplitude"]
    if kind == "zero":
        return Field(np.zeros(grid.n_interior), grid)
    if kind == "constant":
        return Field(np.full(grid.n_interior, amp), grid)
    if grid.mode == ODE:
        return Field(np.array([amp]), grid)
    return Field(amp * np.sin(np.pi * grid.x / grid.length), grid)


def build_problem_spec(cfg: ScenarioConfig, u0: Optional[Field] = None) -> ProblemSpec:
    grid = build_grid(cfg)
    if u0 is None:
        u0 = build_u0(cfg, grid)
    return ProblemSpec(
        grid=grid,
        time_grid=build_time_grid(cfg),
        spatial=SpatialOpSpec(p=cfg["spatial.p"], alpha=cfg["spatial.alpha"],
                              reg_delta=cfg["spatial.reg_delta"]),
        drift=build_drift(cfg),
        reaction=build_reaction(cfg),
        noise=build_noise(cfg),
        u0=u0,
    )


def build_newton(cfg: ScenarioConfig) -> NewtonParams:
    return NewtonParams(tol=cfg["newton.tol"], max_iter=cfg["newton.max_iter"])


def list_scenarios() -> str:
    lines = []
    for name in SCENARIOS:
        lines.append(f"{name}: {SCENARIO_DESCRIPTIONS[name]}")
    return "\n".join(lines) + "\n"


def _write(out_dir: str, name: str, text: str) -> None:
    with open(os.path.join(out_dir, name), "w") as fh:
        fh.write(text)


def _write_summary(out_dir: str, scenario: str, gates: dict, extra: dict) -> None:
    lines = [f"scenario = {scenario}"]
    for key, value in extra.items():
        lines.append(f"{key} = {value!r}" if isinstance(value, float)
                     else f"{key} = {value}")
    for name, ok in gates.items():
        lines.append(f"gate.{name} = {'pass' if ok else 'fail'}")
    lines.append(f"all_gates = {'pass' if all(gates.values()) else 'fail'}")
    _write(out_dir, "summary.txt", "\n".join(lines) + "\n")


def _run_assumptions(cfg: ScenarioConfig, spec: ProblemSpec, out_dir: str) -> None:
    report = check_assumptions(spec.spatial, spec.drift, spec.reaction,
                               spec.noise, grid=spec.grid,
                               seed=cfg["run.master_seed"])
    _write(out_dir, "assumptions.txt", report.to_text())


def _run_bracket_sides(cfg: ScenarioConfig, spec: ProblemSpec, out_dir: str,
                       suffix: str = "") -> dict:
    newton = build_newton(cfg)
    path = sample_noise_path(cfg["run.master_seed"], 0, spec.noise.K,
                             spec.time_grid)
    lower = build_extremal(spec, MIN_SIDE, path, newton)
    upper = build_extremal(spec, MAX_SIDE, path, newton)
    results = {}
    for side in (MIN_SIDE, MAX_SIDE):
        result = iterate_bracket(
            spec, side, path,
            tol_fixed=cfg["run.tol_fixed"], max_outer=cfg["run.max_outer"],
            mono_tol=cfg["run.mono_tol"],
            retain_full_iterates=cfg["run.retain_full_iterates"],
            extremals=(lower, upper), newton=newton)
        _write(out_dir, f"bracket_{side}{suffix}.txt", result.to_text())
        result.final.to_csv(os.path.join(out_dir, f"trajectory_{side}{suffix}.csv"))
        results[side] = result
    results["lower"] = lower
    results["upper"] = upper
    return results


def _scenario_ode_counterexample(cfg: ScenarioConfig, out_dir: str) -> dict:
    spec = build_problem_spec(cfg)
    _run_assumptions(cfg, spec, out_dir)
    results = _run_bracket_sides(cfg, spec, out_dir)
    minimal, maximal = results[MIN_SIDE], results[MAX_SIDE]

    min_sup = float(np.max(np.abs(minimal.final.values)))
    t_final = spec.time_grid.T
    max_terminal = float(maximal.final.values[-1, 0])
    target = t_final**2 / 4.0
    interval_min = verify_interval(minimal.final, results["lower"],
                                   results["upper"], cfg["gates.interval_tol"])
    interval_max = verify_interval(maximal.final, results["lower"],
                                   results["upper"], cfg["gates.interval_tol"])
    gates = {
        "min_converged": minimal.converged,
        "max_converged": maximal.converged,
        "min_sup_zero": min_sup <= cfg["gates.min_sup"],
        "max_terminal": abs(max_terminal - target) <= cfg["gates.max_terminal_err"],
        "monotone_sweeps": minimal.monotone_ok and maximal.monotone_ok,
        "interval": interval_min.passed and interval_max.passed,
    }
    extra = {
        "u_min_sup": min_sup,
        "u_max_terminal": max_terminal,
        "u_max_terminal_target": target,
        "min_sweeps": minimal.n_sweeps,
        "max_sweeps": maximal.n_sweeps,
    }
    _write_summary(out_dir, cfg.scenario, gates, extra)
    return gates


def _scenario_heat_comparison(cfg: ScenarioConfig, out_dir: str) -> dict:
    grid = build_grid(cfg)
    u0_flat = Field(np.zeros(grid.n_interior), grid)
    u0_sine = Field(np.sin(np.pi * grid.x / grid.length), grid)
    if cfg["comparison.reversed"]:
        u0_1, u0_2 = u0_sine, u0_flat
    else:
        u0_1, u0_2 = u0_flat, u0_sine
    spec_1 = build_problem_spec(cfg, u0=u0_1)
    spec_2 = build_problem_spec(cfg, u0=u0_2)
    _run_assumptions(cfg, spec_1, out_dir)

    newton = build_newton(cfg)
    report = comparison_study(
        spec_1, spec_2, cfg["run.M"], cfg["run.master_seed"],
        forcing_1=constant_forcing(cfg["comparison.h_low"]),
        forcing_2=constant_forcing(cfg["comparison.h_high"]),
        tol=cfg["run.comparison_tol"], workers=cfg["run.workers"], newton=newton)
    _write(out_dir, "comparison.txt", report.to_text())
    report.energies_to_csv(os.path.join(out_dir, "comparison.csv"))

    # regularizer diagnostics on the first path
    path0 = sample_noise_path(cfg["run.master_seed"], 0, spec_1.noise.K,
                              spec_1.time_grid)
    t1, t2 = run_coupled(spec_1, spec_2, path0,
                         constant_forcing(cfg["comparison.h_low"]),
                         constant_forcing(cfg["comparison.h_high"]), newton)
    t1.to_csv(os.path.join(out_dir, "trajectory_lower.csv"))
    t2.to_csv(os.path.join(out_dir, "trajectory_upper.csv"))
    times = spec_1.time_grid.times()
    traces = {eps: sigma_energy_trace(t1, t2, eps) for eps in cfg["run.eps_list"]}
    with open(os.path.join(out_dir, "sigma_trace.csv"), "w") as fh:
        fh.write("t," + ",".join(f"eps_{eps!r}" for eps in traces) + "\n")
        for n, t in enumerate(times):
            row = ",".join(repr(float(traces[eps][n])) for eps in traces)
            fh.write(f"{float(t)!r},{row}\n")

    gates = {"comparison": report.passed}
    extra = {
        "paths": report.n_paths,
        "worst_energy": report.worst_energy,
        "tolerance": report.tol,
        "reversed": cfg["comparison.reversed"],
    }
    _write_summary(out_dir, cfg.scenario, gates, extra)
    return gates


def _plap_gates(cfg: ScenarioConfig, results: dict) -> tuple[dict, dict]:
    minimal, maximal = results[MIN_SIDE], results[MAX_SIDE]
    interval_tol = cfg["gates.interval_tol"]
    interval_min = verify_interval(minimal.final, results["lower"],
                                   results["upper"], interval_tol)
    interval_max = verify_interval(maximal.final, results["lower"],
                                   results["upper"], interval_tol)
    cross = float(np.max(minimal.final.values - maximal.final.values))
    gates = {
        "min_converged": minimal.converged,
        "max_converged": maximal.converged,
        "monotone_sweeps": minimal.monotone_ok and maximal.monotone_ok,
        "interval": interval_min.passed and interval_max.passed,
        "min_below_max": cross <= cfg["run.mono_tol"],
    }
    extra = {
        "min_sweeps": minimal.n_sweeps,
        "max_sweeps": maximal.n_sweeps,
        "min_final_residual": minimal.residual_history[-1],
        "max_final_residual": maximal.residual_history[-1],
        "cross_order_violation": cross,
    }
    return gates, extra


def _scenario_plap_bracket(cfg: ScenarioConfig, out_dir: str) -> dict:
    spec = build_problem_spec(cfg)
    _run_assumptions(cfg, spec, out_dir)
    results = _run_bracket_sides(cfg, spec, out_dir)
    gates, extra = _plap_gates(cfg, results)

    if cfg["run.dual_jump_side"]:
        # expose the jump-selection dependence of the computed bracket
        flipped = "upper" if cfg["drift.jump_side"] == "lower" else "lower"
        alt_values = dict(cfg.values)
        alt_values["drift.jump_side"] = flipped
        alt_cfg = ScenarioConfig(alt_values)
        alt_spec = build_problem_spec(alt_cfg)
        alt = _run_bracket_sides(alt_cfg, alt_spec, out_dir,
                                 suffix=f"_jump_{flipped}")
        alt_gates, _ = _plap_gates(alt_cfg, alt)
        gates.update({f"{k}_jump_{flipped}": v for k, v in alt_gates.items()})

    _write_summary(out_dir, cfg.scenario, gates, extra)
    return gates


def _scenario_custom(cfg: ScenarioConfig, out_dir: str) -> dict:
    spec = build_problem_spec(cfg)
    _run_assumptions(cfg, spec, out_dir)
    newton = build_newton(cfg)
    M = cfg["run.M"] if spec.noise.K > 0 else 1
    pairs = bracket_study(spec, M, cfg["run.master_seed"],
                          tol_fixed=cfg["run.tol_fixed"],
                          max_outer=cfg["run.max_outer"],
                          mono_tol=cfg["run.mono_tol"], newton=newton)
    gaps = [pair.gap for pair in pairs]
    cross = max(pair.cross_order_violation for pair in pairs)
    converged = all(p.minimal.converged and p.maximal.converged for p in pairs)
    monotone = all(p.minimal.monotone_ok and p.maximal.monotone_ok for p in pairs)
    first = pairs[0]
    _write(out_dir, "bracket_min.txt", first.minimal.to_text())
    _write(out_dir, "bracket_max.txt", first.maximal.to_text())
    first.minimal.final.to_csv(os.path.join(out_dir, "trajectory_min.csv"))
    first.maximal.final.to_csv(os.path.join(out_dir, "trajectory_max.csv"))
    gates = {
        "converged": converged,
        "monotone_sweeps": monotone,
        "min_below_max": cross <= cfg["run.mono_tol"],
    }
    extra = {
        "paths": M,
        "max_gap": max(gaps),
        "mean_gap": sum(gaps) / len(gaps),
        "cross_order_violation": cross,
    }
    _write_summary(out_dir, cfg.scenario, gates, extra)
    return gates


_RUNNERS = {
    "ode_counterexample": _scenario_ode_counterexample,
    "heat_comparison": _scenario_heat_comparison,
    "plap_bracket": _scenario_plap_bracket,
    "custom": _scenario_custom,
}


def run_scenario(cfg: ScenarioConfig, out_dir: str) -> int:
    """Run one scenario, write artifacts, return 0 iff all gates pass."""
    os.makedirs(out_dir, exist_ok=True)
    gates = _RUNNERS[cfg.scenario](cfg, out_dir)
    return 0 if all(gates.values()) else 1
