import numpy as np
import pytest

from spdeorder import (
    ComparisonReport,
    DriftSpec,
    Field,
    Grid,
    NoiseSpec,
    ProblemSpec,
    ReactionSpec,
    SpatialOpSpec,
    TimeGrid,
    Trajectory,
    comparison_study,
    constant_forcing,
    energy_series,
    run_coupled,
    sigma_energy_trace,
)
from spdeorder.comparison import SpecCompatibilityError
from spdeorder.core import constant, zeros
from spdeorder.noise import sample_noise_path


def make_spec(u0_value, grid=None, n_steps=50, T=0.1, K=0, reaction=None):
    grid = grid or Grid(n_interior=16)
    return ProblemSpec(
        grid=grid,
        time_grid=TimeGrid(T=T, n_steps=n_steps),
        spatial=SpatialOpSpec(),
        drift=DriftSpec.zero(),
        reaction=reaction or ReactionSpec.zero(),
        noise=NoiseSpec.geometric(K) if K else NoiseSpec.none(),
        u0=constant(grid, u0_value),
    )


def ode_spec(u0_value):
    g = Grid.ode()
    return ProblemSpec(
        grid=g,
        time_grid=TimeGrid(T=1.0, n_steps=100),
        spatial=SpatialOpSpec(),
        drift=DriftSpec.zero(),
        reaction=ReactionSpec.zero(),
        noise=NoiseSpec.none(),
        u0=Field([u0_value], g),
    )


def test_identical_specs_zero_energy():
    spec = make_spec(1.0, K=2)
    path = sample_noise_path(3, 0, 2, spec.time_grid)
    t1, t2 = run_coupled(spec, spec, path)
    assert np.all(energy_series(t1, t2) == 0.0)
    assert np.all(energy_series(t2, t1) == 0.0)


def test_ode_opposite_forcings_exact_energy():
    # h = -1 gives u = -t, h = +1 gives u = +t (explicit in ode mode)
    lo, hi = ode_spec(0.0), ode_spec(0.0)
    t_lo, t_hi = run_coupled(lo, hi, None, constant_forcing(-1.0),
                             constant_forcing(1.0))
    times = t_lo.times()
    assert np.allclose(t_lo.values[:, 0], -times)
    assert np.allclose(t_hi.values[:, 0], times)
    assert np.all(energy_series(t_lo, t_hi) == 0.0)
    # transposing the arguments exposes the full gap (2t)^2
    assert np.allclose(energy_series(t_hi, t_lo), (2.0 * times) ** 2)


def test_incompatible_specs_rejected():
    a = make_spec(0.0)
    b = make_spec(0.0, grid=Grid(n_interior=17))
    with pytest.raises(SpecCompatibilityError):
        run_coupled(a, b, None)
    c = make_spec(0.0, reaction=ReactionSpec.linear(0.5))
    with pytest.raises(SpecCompatibilityError):
        run_coupled(a, c, None)


def test_comparison_study_ordered_data_passes():
    lo = make_spec(0.0, K=4)
    hi = make_spec(1.0, K=4)
    report = comparison_study(lo, hi, M=8, master_seed=7, tol=1e-10)
    assert report.passed
    assert report.worst_energy == 0.0
    assert report.n_paths == 8


def test_comparison_study_reversed_order_fails():
    lo = make_spec(0.0, K=4)
    hi = make_spec(1.0, K=4)
    report = comparison_study(hi, lo, M=4, master_seed=7, tol=1e-10)
    assert not report.passed
    assert report.worst_energy > 0.1
    assert report.worst_path >= 0
    assert "passed = false" in report.to_text()


def test_comparison_study_worker_count_invariant():
    lo = make_spec(0.0, K=3)
    hi = make_spec(0.5, K=3)
    r1 = comparison_study(hi, lo, M=6, master_seed=11, workers=1)
    r4 = comparison_study(hi, lo, M=6, master_seed=11, workers=4)
    assert np.array_equal(r1.max_energy, r4.max_energy)
    assert np.array_equal(r1.mean_energy, r4.mean_energy)
    assert (r1.worst_path, r1.worst_step, r1.worst_energy) == (
        r4.worst_path, r4.worst_step, r4.worst_energy)


def test_energies_csv(tmp_path):
    lo = make_spec(0.0)
    hi = make_spec(1.0)
    report = comparison_study(lo, hi, M=1, master_seed=0)
    out = tmp_path / "energies.csv"
    report.energies_to_csv(out)
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "t,max_energy,mean_energy"
    assert len(lines) == 1 + lo.time_grid.n_steps + 1


def test_sigma_trace_zero_when_ordered():
    lo, hi = ode_spec(0.0), ode_spec(1.0)
    t_lo, t_hi = run_coupled(lo, hi, None)
    for eps in (1.0, 0.1, 1e-3):
        assert np.all(sigma_energy_trace(t_lo, t_hi, eps) == 0.0)


def test_sigma_trace_constant_gap_oracle():
    # constant difference c above eps: trace is c^2/2 - 0.1 eps^2 per unit mass
    c = 2.0
    lo, hi = ode_spec(0.0), ode_spec(c)
    t_lo, t_hi = run_coupled(lo, hi, None)
    for eps in (0.5, 1e-2):
        trace = sigma_energy_trace(t_hi, t_lo, eps)
        assert np.allclose(trace, c * c / 2.0 - 0.1 * eps * eps)


def test_sigma_trace_monotone_in_eps():
    # as eps decreases the trace increases toward the positive-part energy / 2
    rng = np.random.default_rng(2)
    g = Grid(n_interior=16)
    tg = TimeGrid(T=1.0, n_steps=3)
    vals_1 = rng.standard_normal((4, 16))
    vals_2 = rng.standard_normal((4, 16))
    t1 = Trajectory(g, tg, vals_1)
    t2 = Trajectory(g, tg, vals_2)
    traces = [sigma_energy_trace(t1, t2, eps) for eps in (1.0, 0.3, 0.05, 1e-4)]
    for a, b in zip(traces, traces[1:]):
        assert np.all(a <= b + 1e-15)
    half_energy = 0.5 * energy_series(t1, t2)
    assert np.allclose(traces[-1], half_energy, atol=1e-6)


def test_sigma_trace_shape_mismatch():
    g = Grid(n_interior=4)
    t1 = Trajectory(g, TimeGrid(T=1.0, n_steps=2), np.zeros((3, 4)))
    t2 = Trajectory(g, TimeGrid(T=1.0, n_steps=3), np.zeros((4, 4)))
    with pytest.raises(ValueError):
        sigma_energy_trace(t1, t2, 0.1)
