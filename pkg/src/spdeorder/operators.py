"""Concrete monotone spatial operator, drift/reaction/noise nonlinearities,
and the smooth positive-part regularizer, with runtime-checkable descriptors.

The spatial operator is the 1D p-Laplacian flux difference with Dirichlet
ghost zeros.  Drift b is nondecreasing (possibly discontinuous), the
reaction f is Lipschitz, and the noise acts mode-wise through scalar
functions g_k.  All specs validate their declared structural properties on
dense sample grids at construction time; `check_assumptions` re-verifies
them (plus the operator inequalities) and returns a report instead of
raising.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import Field, Grid, ODE

JUMP_SIDES = ("lower", "mid", "upper")

_SAMPLE_RANGE = 50.0
_SAMPLE_COUNT = 20001


# ---------------------------------------------------------------------------
# spatial operator


@dataclass(frozen=True)
class SpatialOpSpec:
    """Power-law flux a(D) = alpha |D|^(p-2) D.

    reg_delta smooths |D|^(p-2) only inside Newton's linearization, never in
    the residual, so flat gradients cannot make the Jacobian singular.
    """

    p: float = 2.0
    alpha: float = 1.0
    reg_delta: float = 1e-12

    def __post_init__(self):
        if self.p < 2:
            raise ValueError("growth exponent p must be >= 2")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if self.reg_delta < 0:
            raise ValueError("reg_delta must be nonnegative")


def interface_gradients(values: np.ndarray, dx: float) -> np.ndarray:
    """Differences across the n+1 cell interfaces, with ghost zeros."""
    padded = np.concatenate(([0.0], values, [0.0]))
    return np.diff(padded) / dx


def apply_A_values(spec: SpatialOpSpec, values: np.ndarray, grid: Grid) -> np.ndarray:
    if grid.mode == ODE:
        return np.zeros_like(values)
    dx = grid.dx
    D = interface_gradients(values, dx)
    flux = spec.alpha * np.abs(D) ** (spec.p - 2.0) * D
    return -np.diff(flux) / dx


def apply_A(spec: SpatialOpSpec, u: Field) -> Field:
    """Discrete -div(a(grad u)) with homogeneous Dirichlet values."""
    return Field(apply_A_values(spec, u.values, u.grid), u.grid)


def jacobian_bands(
    spec: SpatialOpSpec, values: np.ndarray, grid: Grid
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Tridiagonal bands (sub, diag, super) of the linearized operator.

    Uses the regularized flux derivative (D^2 + reg_delta)^((p-2)/2).
    """
    n = values.size
    if grid.mode == ODE:
        z = np.zeros(n)
        return z, z.copy(), z.copy()
    dx = grid.dx
    D = interface_gradients(values, dx)
    w = spec.alpha * (spec.p - 1.0) * (D * D + spec.reg_delta) ** ((spec.p - 2.0) / 2.0)
    w /= dx * dx
    diag = w[:-1] + w[1:]
    sub = np.zeros(n)
    sup = np.zeros(n)
    sub[1:] = -w[1:-1]  # coupling of node i to node i-1
    sup[:-1] = -w[1:-1]  # coupling of node i to node i+1
    return sub, diag, sup


# ---------------------------------------------------------------------------
# drift


@dataclass(frozen=True)
class DriftSpec:
    """Nondecreasing scalar drift b, applied pointwise (Nemytskii)."""

    kind: str
    C_B: float = 1.0
    s0: float = 0.0
    low: float = 0.0
    high: float = 1.0
    scale: float = 1.0
    knots: tuple = ()
    jump_side: str = "lower"

    def __post_init__(self):
        if self.kind not in ("zero", "sqrt_plus", "heaviside", "lipschitz_tanh",
                             "piecewise_linear"):
            raise ValueError(f"unknown drift kind {self.kind!r}")
        if self.jump_side not in JUMP_SIDES:
            raise ValueError(f"jump_side must be one of {JUMP_SIDES}")
        if not self.C_B > 0:
            raise ValueError("C_B must be positive")
        if self.kind == "heaviside" and self.low > self.high:
            raise ValueError("heaviside requires low <= high")
        if self.kind == "piecewise_linear":
            knots = tuple((float(r), float(v)) for r, v in self.knots)
            if len(knots) < 2:
                raise ValueError("piecewise_linear needs at least two knots")
            rs = [r for r, _ in knots]
            vs = [v for _, v in knots]
            if any(r2 <= r1 for r1, r2 in zip(rs, rs[1:])):
                raise ValueError("knot abscissae must be strictly increasing")
            if any(v2 < v1 for v1, v2 in zip(vs, vs[1:])):
                raise ValueError("knot values must be nondecreasing")
            object.__setattr__(self, "knots", knots)
        r = np.linspace(-_SAMPLE_RANGE, _SAMPLE_RANGE, _SAMPLE_COUNT)
        vals = eval_b_values(self, r)
        if np.any(np.diff(vals) < 0.0):
            raise ValueError("drift is not nondecreasing on the sample grid")
        if np.any(np.abs(vals) > self.C_B * (1.0 + np.abs(r)) + 1e-12):
            raise ValueError("drift violates the declared linear growth bound")

    @classmethod
    def zero(cls, C_B: float = 1.0) -> "DriftSpec":
        return cls(kind="zero", C_B=C_B)

    @classmethod
    def sqrt_plus(cls, C_B: float = 1.0) -> "DriftSpec":
        return cls(kind="sqrt_plus", C_B=C_B)

    @classmethod
    def heaviside(cls, s0: float, low: float, high: float,
                  jump_side: str = "lower", C_B: Optional[float] = None) -> "DriftSpec":
        if C_B is None:
            C_B = max(abs(low), abs(high), 1e-12)
        return cls(kind="heaviside", s0=s0, low=low, high=high,
                   jump_side=jump_side, C_B=C_B)

    @classmethod
    def lipschitz_tanh(cls, scale: float, C_B: Optional[float] = None) -> "DriftSpec":
        if C_B is None:
            C_B = abs(scale) if scale else 1e-12
        return cls(kind="lipschitz_tanh", scale=scale, C_B=C_B)

    @classmethod
    def piecewise_linear(cls, knots, C_B: Optional[float] = None) -> "DriftSpec":
        if C_B is None:
            C_B = max(abs(v) for _, v in knots) + 1.0
        return cls(kind="piecewise_linear", knots=tuple(knots), C_B=C_B)


def eval_b_values(spec: DriftSpec, r: np.ndarray) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    if spec.kind == "zero":
        return np.zeros_like(r)
    if spec.kind == "sqrt_plus":
        return np.sqrt(np.maximum(r, 0.0))
    if spec.kind == "heaviside":
        if spec.jump_side == "lower":
            at_jump = spec.low
        elif spec.jump_side == "upper":
            at_jump = spec.high
        else:
            at_jump = 0.5 * (spec.low + spec.high)
        return np.where(r < spec.s0, spec.low,
                        np.where(r > spec.s0, spec.high, at_jump))
    if spec.kind == "lipschitz_tanh":
        return spec.scale * np.tanh(r)
    # piecewise_linear; constant extension beyond the end knots keeps the
    # function nondecreasing and bounded
    rs = np.array([k[0] for k in spec.knots])
    vs = np.array([k[1] for k in spec.knots])
    return np.interp(r, rs, vs)


def eval_b(spec: DriftSpec, u: Field) -> Field:
    return Field(eval_b_values(spec, u.values), u.grid)


# ---------------------------------------------------------------------------
# reaction


@dataclass(frozen=True)
class ReactionSpec:
    """Lipschitz scalar reaction f, applied pointwise."""

    kind: str = "zero"
    slope: float = 0.0
    offset: float = 0.0
    scale: float = 1.0
    C_F: float = 1e-12

    def __post_init__(self):
        if self.kind not in ("zero", "linear", "lipschitz_tanh"):
            raise ValueError(f"unknown reaction kind {self.kind!r}")
        if not self.C_F > 0:
            raise ValueError("C_F must be positive")
        r = np.linspace(-_SAMPLE_RANGE, _SAMPLE_RANGE, _SAMPLE_COUNT)
        vals = eval_f_values(self, r)
        incr = np.abs(np.diff(vals)) / (r[1] - r[0])
        if np.any(incr > self.C_F * (1.0 + 1e-9) + 1e-12):
            raise ValueError("reaction violates the declared Lipschitz bound")

    @classmethod
    def zero(cls) -> "ReactionSpec":
        return cls(kind="zero")

    @classmethod
    def linear(cls, slope: float, offset: float = 0.0,
               C_F: Optional[float] = None) -> "ReactionSpec":
        if C_F is None:
            C_F = abs(slope) if slope else 1e-12
        return cls(kind="linear", slope=slope, offset=offset, C_F=C_F)

    @classmethod
    def lipschitz_tanh(cls, scale: float, C_F: Optional[float] = None) -> "ReactionSpec":
        if C_F is None:
            C_F = abs(scale) if scale else 1e-12
        return cls(kind="lipschitz_tanh", scale=scale, C_F=C_F)


def eval_f_values(spec: ReactionSpec, r: np.ndarray) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    if spec.kind == "zero":
        return np.zeros_like(r)
    if spec.kind == "linear":
        return spec.slope * r + spec.offset
    return spec.scale * np.tanh(r)


def eval_f(spec: ReactionSpec, u: Field) -> Field:
    return Field(eval_f_values(spec, u.values), u.grid)


# ---------------------------------------------------------------------------
# noise


@dataclass(frozen=True)
class NoiseSpec:
    """Mode-wise multiplicative noise G(u)e_k = g_k(u), truncated to K modes."""

    K: int = 0
    coeffs: tuple = ()
    pointwise_kind: str = "linear"
    C_G: float = 1e-12

    def __post_init__(self):
        if self.K < 0:
            raise ValueError("mode count K must be nonnegative")
        coeffs = tuple(float(c) for c in self.coeffs)
        if len(coeffs) != self.K:
            raise ValueError("need exactly one coefficient per retained mode")
        object.__setattr__(self, "coeffs", coeffs)
        if self.pointwise_kind not in ("linear", "lipschitz_tanh"):
            raise ValueError(f"unknown noise kind {self.pointwise_kind!r}")
        if not self.C_G > 0:
            raise ValueError("C_G must be positive")
        if sum(c * c for c in coeffs) > self.C_G**2 * (1.0 + 1e-12):
            raise ValueError("sum of squared mode coefficients exceeds C_G^2")

    @classmethod
    def none(cls) -> "NoiseSpec":
        return cls(K=0, coeffs=(), C_G=1e-12)

    @classmethod
    def geometric(cls, K: int, gamma: float = 0.5, pointwise_kind: str = "linear",
                  C_G: Optional[float] = None) -> "NoiseSpec":
        """Default coefficient ladder c_k = gamma * 2^(-k/2)."""
        coeffs = tuple(gamma * 2.0 ** (-0.5 * k) for k in range(K))
        if C_G is None:
            C_G = float(np.sqrt(sum(c * c for c in coeffs))) if K else 1e-12
        return cls(K=K, coeffs=coeffs, pointwise_kind=pointwise_kind, C_G=C_G)

    @property
    def coeff_array(self) -> np.ndarray:
        return np.array(self.coeffs, dtype=float)


def eval_g_values(spec: NoiseSpec, k: int, r: np.ndarray) -> np.ndarray:
    if not 0 <= k < spec.K:
        raise IndexError(f"mode index {k} out of range for K = {spec.K}")
    r = np.asarray(r, dtype=float)
    if spec.pointwise_kind == "linear":
        return spec.coeffs[k] * r
    return spec.coeffs[k] * np.tanh(r)


def eval_g(spec: NoiseSpec, k: int, u: Field) -> Field:
    return Field(eval_g_values(spec, k, u.values), u.grid)


def noise_term_values(spec: NoiseSpec, r: np.ndarray, dW: np.ndarray) -> np.ndarray:
    """sum_k g_k(r) dW_k, vectorized over nodes."""
    if spec.K == 0:
        return np.zeros_like(r)
    weight = float(np.dot(spec.coeff_array, dW))
    if spec.pointwise_kind == "linear":
        return weight * r
    return weight * np.tanh(r)


# ---------------------------------------------------------------------------
# smooth positive-part regularizer


def _sigma_dispatch(r, eps, above, inside, below=0.0):
    if not eps > 0:
        raise ValueError("eps must be positive")
    arr = np.asarray(r, dtype=float)
    s = arr / eps
    out = np.where(arr > eps, above(arr, s), np.where(arr > 0.0, inside(arr, s), below))
    if np.ndim(r) == 0:
        return float(out)
    return out


def sigma_eps(r, eps: float):
    """C^2 approximation of the positive part: quintic gluing on (0, eps]."""
    return _sigma_dispatch(
        r, eps,
        above=lambda arr, s: arr,
        inside=lambda arr, s: eps * s**3 * (3.0 * s * s - 8.0 * s + 6.0),
    )


def sigma_eps_prime(r, eps: float):
    return _sigma_dispatch(
        r, eps,
        above=lambda arr, s: np.ones_like(arr),
        inside=lambda arr, s: s * s * (15.0 * s * s - 32.0 * s + 18.0),
    )


def sigma_eps_second(r, eps: float):
    return _sigma_dispatch(
        r, eps,
        above=lambda arr, s: np.zeros_like(arr),
        inside=lambda arr, s: s * (60.0 * s * s - 96.0 * s + 36.0) / eps,
    )


def sigma_hat(r, eps: float):
    """Primitive of sigma_eps with sigma_hat(0) = 0, in closed form."""
    return _sigma_dispatch(
        r, eps,
        above=lambda arr, s: 0.5 * arr * arr - 0.1 * eps * eps,
        inside=lambda arr, s: eps * eps * s**4 * (0.5 * s * s - 1.6 * s + 1.5),
    )


def Sigma_functional(u: Field, eps: float) -> float:
    """Integral of sigma_hat over the domain (dx-weighted sum)."""
    return float(np.sum(sigma_hat(u.values, eps)) * u.grid.dx)


# ---------------------------------------------------------------------------
# assumption checking


@dataclass(frozen=True)
class AssumptionCheck:
    name: str
    passed: bool
    required: bool
    detail: str


@dataclass(frozen=True)
class AssumptionReport:
    checks: tuple

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if c.required)

    def to_text(self) -> str:
        lines = ["assumption checks"]
        for c in self.checks:
            status = "pass" if c.passed else "fail"
            tag = "" if c.required else " (informational)"
            lines.append(f"  {c.name}: {status}{tag} -- {c.detail}")
        lines.append(f"overall: {'pass' if self.passed else 'fail'}")
        return "\n".join(lines) + "\n"


def check_assumptions(
    spatial: SpatialOpSpec,
    drift: DriftSpec,
    reaction: ReactionSpec,
    noise: NoiseSpec,
    grid: Optional[Grid] = None,
    n_pairs: int = 200,
    seed: int = 0,
) -> AssumptionReport:
    """Numerically verify the structural assumptions on random samples.

    Failures are reported, never raised; the drift Lipschitz entry is
    informational only (discontinuous drifts are expected to fail it).
    """
    if grid is None:
        grid = Grid(n_interior=64)
    rng = np.random.default_rng(seed)
    checks = []

    r = np.linspace(-_SAMPLE_RANGE, _SAMPLE_RANGE, _SAMPLE_COUNT)
    dr = r[1] - r[0]

    bv = eval_b_values(drift, r)
    worst_mono = float(np.min(np.diff(bv))) if bv.size > 1 else 0.0
    checks.append(AssumptionCheck(
        "drift_nondecreasing", worst_mono >= 0.0, True,
        f"min consecutive increment {worst_mono:.3e}"))

    growth_gap = float(np.max(np.abs(bv) - drift.C_B * (1.0 + np.abs(r))))
    checks.append(AssumptionCheck(
        "drift_linear_growth", growth_gap <= 1e-12, True,
        f"max |b(r)| - C_B(1+|r|) = {growth_gap:.3e}"))

    lip = float(np.max(np.abs(np.diff(bv)) / dr))
    checks.append(AssumptionCheck(
        "drift_lipschitz", lip <= drift.C_B / dr * 1e-3, False,
        f"max difference quotient {lip:.3e} on spacing {dr:.3e}"))

    fv = eval_f_values(reaction, r)
    f_lip = float(np.max(np.abs(np.diff(fv)) / dr)) if fv.size > 1 else 0.0
    checks.append(AssumptionCheck(
        "reaction_lipschitz", f_lip <= reaction.C_F * (1.0 + 1e-9) + 1e-12, True,
        f"max difference quotient {f_lip:.3e} vs C_F = {reaction.C_F:.3e}"))

    csum = float(np.sum(noise.coeff_array**2))
    checks.append(AssumptionCheck(
        "noise_mode_summability", csum <= noise.C_G**2 * (1.0 + 1e-12), True,
        f"sum c_k^2 = {csum:.6e} vs C_G^2 = {noise.C_G**2:.6e}"))

    if grid.mode == ODE:
        checks.append(AssumptionCheck(
            "operator_nulled_in_ode_mode", True, True,
            "spatial operator is identically zero"))
    else:
        dx = grid.dx
        worst_coerc = 0.0
        worst_tmono = {"identity": 0.0, "positive_part": 0.0, "sigma_eps": 0.0}
        sigmas = {
            "identity": lambda w: w,
            "positive_part": lambda w: np.maximum(w, 0.0),
            "sigma_eps": lambda w: sigma_eps(w, 1e-3),
        }
        for _ in range(n_pairs):
            phi = rng.standard_normal(grid.n_interior)
            psi = rng.standard_normal(grid.n_interior)
            Aphi = apply_A_values(spatial, phi, grid)
            lhs = float(np.dot(Aphi, phi) * dx)
            D = interface_gradients(phi, dx)
            rhs = float(spatial.alpha * np.sum(np.abs(D) ** spatial.p) * dx)
            worst_coerc = max(worst_coerc, abs(lhs - rhs) / max(rhs, 1e-300))
            dA = Aphi - apply_A_values(spatial, psi, grid)
            for name, sig in sigmas.items():
                sv = sig(phi - psi)
                val = float(np.dot(dA, sv) * dx)
                scale = float(np.sum(np.abs(dA * sv)) * dx) + 1.0
                worst_tmono[name] = min(worst_tmono[name], val / scale)
        checks.append(AssumptionCheck(
            "operator_coercivity_identity", worst_coerc <= 1e-12, True,
            f"max relative defect of <A(u),u> = alpha*sum|D|^p*dx: {worst_coerc:.3e}"))
        for name, worst in worst_tmono.items():
            checks.append(AssumptionCheck(
                f"operator_T_monotonicity_{name}", worst >= -1e-14, True,
                f"min normalized pairing {worst:.3e} over {n_pairs} random pairs"))

    return AssumptionReport(tuple(checks))
