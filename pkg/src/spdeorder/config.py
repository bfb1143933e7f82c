"""Flat-key configuration files for the scenario runner.

Format: one `section.key = value` pair per line, `#` comments, blank lines
ignored.  Every tolerance and run control has a pinned default so the
built-in scenarios run with zero user input; unknown keys are rejected.
"""
from __future__ import annotations

from dataclasses import dataclass

SCENARIOS = ("ode_counterexample", "heat_comparison", "plap_bracket", "custom")


class ConfigError(ValueError):
    """Malformed configuration; the message names the offending key."""


def _positive(x):
    return x > 0


def _nonnegative(x):
    return x >= 0


# key -> (type, validator or None, description)
SCHEMA = {
    "scenario": (str, lambda v: v in SCENARIOS, f"one of {SCENARIOS}"),
    "grid.mode": (str, lambda v: v in ("pde_1d", "ode"), "pde_1d or ode"),
    "grid.n": (int, lambda v: v >= 1, "interior node count"),
    "grid.L": (float, _positive, "domain length"),
    "time.T": (float, _positive, "final time"),
    "time.dt": (float, _positive, "time step"),
    "spatial.p": (float, lambda v: v >= 2, "growth exponent, >= 2"),
    "spatial.alpha": (float, _positive, "operator coefficient"),
    "spatial.reg_delta": (float, _nonnegative, "Jacobian regularizer"),
    "drift.kind": (str, lambda v: v in ("zero", "sqrt_plus", "heaviside",
                                        "lipschitz_tanh", "piecewise_linear"),
                   "drift kind"),
    "drift.jump_side": (str, lambda v: v in ("lower", "mid", "upper"),
                        "heaviside jump selection"),
    "drift.s0": (float, None, "heaviside jump point"),
    "drift.low": (float, None, "heaviside lower value"),
    "drift.high": (float, None, "heaviside upper value"),
    "drift.scale": (float, None, "tanh drift scale"),
    "drift.knots": (tuple, None, "piecewise-linear knots r0,v0,r1,v1,..."),
    "drift.C_B": (float, _positive, "drift growth constant"),
    "reaction.kind": (str, lambda v: v in ("zero", "linear", "lipschitz_tanh"),
                      "reaction kind"),
    "reaction.slope": (float, None, "linear reaction slope"),
    "reaction.offset": (float, None, "linear reaction offset"),
    "reaction.scale": (float, None, "tanh reaction scale"),
    "reaction.C_F": (float, _positive, "reaction Lipschitz constant"),
    "noise.K": (int, _nonnegative, "retained noise modes (0 = deterministic)"),
    "noise.gamma": (float, _positive, "mode coefficient ladder prefactor"),
    "noise.kind": (str, lambda v: v in ("linear", "lipschitz_tanh"),
                   "pointwise noise kind"),
    "noise.C_G": (float, _nonnegative, "noise constant (0 = derive from coeffs)"),
    "u0.kind": (str, lambda v: v in ("zero", "sine", "constant"), "initial datum"),
    "u0.amplitude": (float, None, "initial datum amplitude"),
    "run.M": (int, lambda v: v >= 1, "Monte Carlo path count"),
    "run.master_seed": (int, _nonnegative, "master seed"),
    "run.tol_fixed": (float, _positive, "fixed-point residual tolerance"),
    "run.max_outer": (int, lambda v: v >= 1, "max outer sweeps"),
    "run.mono_tol": (float, _nonnegative, "monotonicity violation tolerance"),
    "run.comparison_tol": (float, _positive, "comparison energy tolerance"),
    "run.eps_list": (tuple, None, "regularizer eps values for diagnostics"),
    "run.retain_full_iterates": (bool, None, "store full iterate trajectories"),
    "run.dual_jump_side": (bool, None, "also run the opposite jump_side"),
    "run.workers": (int, lambda v: v >= 1, "worker threads for path ensembles"),
    "newton.tol": (float, _positive, "Newton residual tolerance"),
    "newton.max_iter": (int, lambda v: v >= 1, "Newton iteration cap"),
    "comparison.reversed": (bool, None, "swap the ordered initial data"),
    "comparison.h_low": (float, None, "lower frozen forcing"),
    "comparison.h_high": (float, None, "upper frozen forcing"),
    "gates.min_sup": (float, _positive, "minimal-solution sup gate"),
    "gates.max_terminal_err": (float, _positive, "maximal-solution terminal gate"),
    "gates.interval_tol": (float, _positive, "interval containment gate"),
}

DEFAULTS = {
    "scenario": "custom",
    "grid.mode": "pde_1d",
    "grid.n": 64,
    "grid.L": 1.0,
    "time.T": 1.0,
    "time.dt": 1e-3,
    "spatial.p": 2.0,
    "spatial.alpha": 1.0,
    "spatial.reg_delta": 1e-12,
    "drift.kind": "zero",
    "drift.jump_side": "lower",
    "drift.s0": 0.5,
    "drift.low": 0.0,
    "drift.high": 1.0,
    "drift.scale": 1.0,
    "drift.knots": (),
    "drift.C_B": 1.0,
    "reaction.kind": "zero",
    "reaction.slope": 0.0,
    "reaction.offset": 0.0,
    "reaction.scale": 1.0,
    "reaction.C_F": 1e-12,
    "noise.K": 0,
    "noise.gamma": 0.5,
    "noise.kind": "linear",
    "noise.C_G": 0.0,
    "u0.kind": "zero",
    "u0.amplitude": 1.0,
    "run.M": 100,
    "run.master_seed": 12345,
    "run.tol_fixed": 1e-6,
    "run.max_outer": 60,
    "run.mono_tol": 1e-10,
    "run.comparison_tol": 1e-10,
    "run.eps_list": (1e-2, 1e-4),
    "run.retain_full_iterates": False,
    "run.dual_jump_side": False,
    "run.workers": 1,
    "newton.tol": 1e-10,
    "newton.max_iter": 50,
    "comparison.reversed": False,
    "comparison.h_low": -1.0,
    "comparison.h_high": 1.0,
    "gates.min_sup": 1e-6,
    "gates.max_terminal_err": 5e-3,
    "gates.interval_tol": 1e-10,
}

# every built-in scenario pins its own defaults so the acceptance runs need
# no user input
SCENARIO_PRESETS = {
    "ode_counterexample": {
        "grid.mode": "ode",
        "grid.n": 1,
        "time.T": 1.0,
        "time.dt": 1e-3,
        "drift.kind": "sqrt_plus",
        "drift.C_B": 1.0,
        "noise.K": 0,
        "u0.kind": "zero",
        "run.tol_fixed": 1e-6,
        "run.max_outer": 60,
    },
    "heat_comparison": {
        "grid.mode": "pde_1d",
        "grid.n": 64,
        "time.T": 0.25,
        "time.dt": 1e-3,
        "spatial.p": 2.0,
        "spatial.alpha": 1.0,
        "noise.K": 8,
        "noise.gamma": 0.5,
        "noise.kind": "linear",
        "run.M": 100,
        "run.comparison_tol": 1e-10,
        "comparison.h_low": -1.0,
        "comparison.h_high": 1.0,
    },
    "plap_bracket": {
        "grid.mode": "pde_1d",
        "grid.n": 64,
        "time.T": 0.5,
        "time.dt": 1e-3,
        "spatial.p": 2.0,
        "drift.kind": "heaviside",
        "drift.s0": 0.5,
        "drift.low": 0.0,
        "drift.high": 1.0,
        "drift.C_B": 1.0,
        "noise.K": 0,
        "u0.kind": "sine",
        "u0.amplitude": 1.0,
        "run.tol_fixed": 1e-6,
        "run.max_outer": 100,
    },
    "custom": {},
}

SCENARIO_DESCRIPTIONS = {
    "ode_counterexample": "0D nonuniqueness regression: sqrt-plus drift, "
                          "minimal solution 0 and maximal solution t^2/4",
    "heat_comparison": "coupled stochastic heat runs with ordered data; "
                       "positive-part energy gate",
    "plap_bracket": "monotone bracket iteration for a discontinuous "
                    "(heaviside) drift on the 1D heat operator",
    "custom": "all problem and run parameters taken from the config file",
}


def _parse_value(key: str, raw: str):
    typ = SCHEMA[key][0]
    raw = raw.strip()
    try:
        if typ is bool:
            if raw.lower() in ("true", "yes", "1", "on"):
                return True
            if raw.lower() in ("false", "no", "0", "off"):
                return False
            raise ValueError("expected a boolean")
        if typ is int:
            return int(raw)
        if typ is float:
            return float(raw)
        if typ is tuple:
            if not raw:
                return ()
            return tuple(float(part) for part in raw.split(","))
        return raw
    except ValueError as err:
        raise ConfigError(f"config key {key!r}: cannot parse {raw!r} ({err})") from None


def _validate(key: str, value):
    _, validator, description = SCHEMA[key]
    if validator is not None and not validator(value):
        raise ConfigError(f"config key {key!r}: value {value!r} out of range "
                          f"({description})")


@dataclass(frozen=True)
class ScenarioConfig:
    values: dict

    def __getitem__(self, key):
        return self.values[key]

    @property
    def scenario(self) -> str:
        return self.values["scenario"]


def parse_config_text(text: str) -> dict:
    """Parse the raw key/value pairs of a config document."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got "
                              f"{stripped!r}")
        key, _, value = stripped.partition("=")
        key = key.strip()
        if key not in SCHEMA:
            raise ConfigError(f"line {lineno}: unknown config key {key!r}")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate config key {key!r}")
        raw[key] = _parse_value(key, value)
    return raw


def resolve_config(overrides: dict) -> ScenarioConfig:
    """Layer defaults, scenario preset, and explicit overrides; validate all."""
    scenario = overrides.get("scenario", DEFAULTS["scenario"])
    if scenario not in SCENARIOS:
        raise ConfigError(f"config key 'scenario': unknown scenario {scenario!r}")
    merged = dict(DEFAULTS)
    merged.update(SCENARIO_PRESETS[scenario])
    merged.update(overrides)
    merged["scenario"] = scenario
    for key, value in merged.items():
        _validate(key, value)
    # derived consistency checks
    n_steps = merged["time.T"] / merged["time.dt"]
    if abs(n_steps - round(n_steps)) > 1e-9 * max(1.0, n_steps):
        raise ConfigError("config key 'time.dt': T/dt must be an integer "
                          f"step count, got {n_steps}")
    if merged["grid.mode"] == "ode" and merged["grid.n"] != 1:
        raise ConfigError("config key 'grid.n': ode mode requires grid.n = 1")
    if merged["grid.mode"] == "pde_1d" and merged["grid.n"] < 2:
        raise ConfigError("config key 'grid.n': pde_1d mode requires grid.n >= 2")
    return ScenarioConfig(merged)


def load_config(path) -> ScenarioConfig:
    with open(path, "r") as fh:
        text = fh.read()
    return resolve_config(parse_config_text(text))
