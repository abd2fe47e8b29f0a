"""Tests for the discrete solver, refinement interpolation, and the ensemble driver.

The solver is checked three ways: against a deliberately naive double-loop
re-implementation built on the scalar kernel (scalar powers, Python running
sums), against exact identities that must hold bitwise (Brownian collapse at
h = 1/2, zero dampening, table versus direct kernel evaluation, coarse-node
agreement under refinement), and statistically on a shared Gaussian ensemble.
"""

import math
from dataclasses import dataclass

import numpy as np
import pytest
from scipy import stats

from semsim import (
    BrownianIncrements,
    DampeningFunction,
    Ensemble,
    HurstFunction,
    KernelParams,
    PathSimulationError,
    SamplePath,
    Seed,
    SimulationConfig,
    builtin_dampening,
    builtin_hurst,
    derive_path_seed,
    interpolate_on_refinement,
    make_grid,
    monte_carlo,
    refine_config,
    sample_brownian,
    sigma,
    simulate_discrete,
)
from semsim.randomness import coarsen


@dataclass(frozen=True)
class _FixedValue:
    """Evaluator returning one number regardless of (t, x)."""

    value: float

    def __call__(self, t, x):
        return self.value


class _RaisingEvaluator:
    def __call__(self, t, x):
        raise FloatingPointError("evaluator exploded")


def _oracle_path(config: SimulationConfig, increments: BrownianIncrements) -> np.ndarray:
    """Naive reference recursion: scalar kernel calls, Python running sums."""
    t = config.grid.nodes
    # The last node can overshoot the nominal horizon by an ulp; widen the
    # kernel domain accordingly so the reference never rejects t = t[-1].
    params = KernelParams(
        hurst=config.hurst,
        dampening=config.dampening,
        horizon=max(config.grid.horizon, float(t[-1])),
    )
    dB = increments.values
    g = config.offset_g
    values = [0.0 if g is None else float(g(0.0))]
    for k in range(1, config.grid.steps + 1):
        total = 0.0
        for i in range(k):
            total += sigma(params, float(t[k]), float(t[i]), values[i]) * float(dB[i])
        values.append(total if g is None else float(g(float(t[k]))) + total)
    return np.array(values)


class TestConfigValidation:
    def test_rejects_bad_n_paths(self):
        grid = make_grid(1.0, 8)
        h = builtin_hurst("constant", [0.5])
        with pytest.raises(ValueError, match="n_paths"):
            SimulationConfig(grid=grid, hurst=h, seed=Seed(1), n_paths=0)

    def test_rejects_wrong_types(self):
        grid = make_grid(1.0, 8)
        h = builtin_hurst("constant", [0.5])
        with pytest.raises(ValueError, match="grid"):
            SimulationConfig(grid=1.0, hurst=h, seed=Seed(1))
        with pytest.raises(ValueError, match="hurst"):
            SimulationConfig(grid=grid, hurst=0.5, seed=Seed(1))
        with pytest.raises(ValueError, match="seed"):
            SimulationConfig(grid=grid, hurst=h, seed=7)
        with pytest.raises(ValueError, match="dampening"):
            SimulationConfig(grid=grid, hurst=h, seed=Seed(1), dampening=1.0)

    def test_sample_path_shape_checked(self):
        grid = make_grid(1.0, 8)
        with pytest.raises(ValueError, match="shape"):
            SamplePath(grid=grid, values=np.zeros(8))

    def test_increment_grid_must_match(self):
        cfg = SimulationConfig(
            grid=make_grid(1.0, 8), hurst=builtin_hurst("constant", [0.5]), seed=Seed(1)
        )
        incr = sample_brownian(Seed(2), make_grid(1.0, 16))
        with pytest.raises(ValueError, match="grid"):
            simulate_discrete(cfg, incr)


class TestAgainstNaiveRecursion:
    @pytest.mark.parametrize(
        ("hurst", "dampening", "offset", "seed"),
        [
            (builtin_hurst("trig", [0.6, 0.2, 1.0]), None, None, 401),
            (builtin_hurst("trig", [0.6, 0.2, 1.0]), None, math.sin, 402),
            (builtin_hurst("trig", [0.6, 0.2, 1.0]), builtin_dampening("abs_value", []), None, 403),
            (
                builtin_hurst("bell", []),
                builtin_dampening("constant", [0.7]),
                lambda t: 0.3 * t,
                404,
            ),
        ],
        ids=["plain", "with-offset", "abs-dampened", "bell-const-damp-offset"],
    )
    def test_matches_double_loop(self, hurst, dampening, offset, seed):
        cfg = SimulationConfig(
            grid=make_grid(1.0, 48),
            hurst=hurst,
            seed=Seed(seed),
            dampening=dampening,
            offset_g=offset,
        )
        incr = sample_brownian(Seed(seed), cfg.grid)
        path = simulate_discrete(cfg, incr)
        expected = _oracle_path(cfg, incr)
        np.testing.assert_allclose(path.values, expected, rtol=1e-12, atol=0.0)

    def test_output_is_readonly(self):
        cfg = SimulationConfig(
            grid=make_grid(1.0, 16), hurst=builtin_hurst("constant", [0.7]), seed=Seed(5)
        )
        path = simulate_discrete(cfg, sample_brownian(Seed(5), cfg.grid))
        with pytest.raises(ValueError):
            path.values[0] = 1.0


class TestExactIdentities:
    @pytest.mark.parametrize("steps", [1, 7, 64, 1000])
    def test_half_hurst_reproduces_brownian_prefix_sums(self, steps):
        grid = make_grid(1.0, steps)
        cfg = SimulationConfig(grid=grid, hurst=builtin_hurst("constant", [0.5]), seed=Seed(11))
        incr = sample_brownian(Seed(11), grid)
        path = simulate_discrete(cfg, incr)
        assert path.values[0] == 0.0
        assert path.values[1:].tobytes() == np.cumsum(incr.values).tobytes()

    def test_zero_dampening_is_bitwise_noop(self):
        grid = make_grid(2.0, 64)
        h = builtin_hurst("smooth_at_origin", [])
        incr = sample_brownian(Seed(21), grid)
        bare = simulate_discrete(SimulationConfig(grid=grid, hurst=h, seed=Seed(21)), incr)
        zeroed = simulate_discrete(
            SimulationConfig(
                grid=grid, hurst=h, seed=Seed(21), dampening=builtin_dampening("constant", [0.0])
            ),
            incr,
        )
        assert bare.values.tobytes() == zeroed.values.tobytes()

    def test_hurst_table_matches_direct_evaluation(self):
        # Same function twice: once declared constant (activates the
        # distance-indexed power table on this exact grid), once wrapped so
        # the solver must evaluate it afresh on every row.
        grid = make_grid(1.0, 64)
        assert grid.has_exact_nodes
        tabled = builtin_hurst("constant", [0.75])
        direct = HurstFunction(
            evaluator=_FixedValue(0.75), h_star=0.5, h_sup=1.0, lip_t=0.0, lip_x=0.0
        )
        assert tabled.is_constant and not direct.is_constant
        incr = sample_brownian(Seed(31), grid)
        a = simulate_discrete(SimulationConfig(grid=grid, hurst=tabled, seed=Seed(31)), incr)
        b = simulate_discrete(SimulationConfig(grid=grid, hurst=direct, seed=Seed(31)), incr)
        assert a.values.tobytes() == b.values.tobytes()

    def test_dampening_table_matches_direct_evaluation(self):
        grid = make_grid(1.0, 64)
        h = builtin_hurst("constant", [0.7])
        tabled = builtin_dampening("constant", [0.8])
        direct = DampeningFunction(
            evaluator=_FixedValue(0.8), growth_C=0.8, lip_t=0.0, lip_x=0.0
        )
        assert tabled.constant_value == 0.8 and direct.constant_value is None
        incr = sample_brownian(Seed(41), grid)
        a = simulate_discrete(
            SimulationConfig(grid=grid, hurst=h, seed=Seed(41), dampening=tabled), incr
        )
        b = simulate_discrete(
            SimulationConfig(grid=grid, hurst=h, seed=Seed(41), dampening=direct), incr
        )
        assert a.values.tobytes() == b.values.tobytes()

    def test_offset_sets_initial_value_exactly(self):
        grid = make_grid(1.0, 8)
        cfg = SimulationConfig(
            grid=grid,
            hurst=builtin_hurst("constant", [0.6]),
            seed=Seed(3),
            offset_g=lambda t: 1.5 + t,
        )
        path = simulate_discrete(cfg, sample_brownian(Seed(3), grid))
        assert path.values[0] == 1.5


class TestInterpolation:
    def _coupled_setup(self, hurst, dampening=None, offset=None, steps=32, refine=4, seed=51):
        cfg = SimulationConfig(
            grid=make_grid(1.0, steps),
            hurst=hurst,
            seed=Seed(seed),
            dampening=dampening,
            offset_g=offset,
        )
        fine = sample_brownian(Seed(seed), make_grid(1.0, steps * refine))
        coarse_path = simulate_discrete(cfg, coarsen(fine, refine))
        return cfg, coarse_path, fine

    def test_refine_factor_one_is_identity(self):
        cfg, coarse_path, fine = self._coupled_setup(
            builtin_hurst("trig", [0.6, 0.2, 1.0]), refine=1
        )
        out = interpolate_on_refinement(cfg, coarse_path, fine, 1)
        assert out.values.tobytes() == coarse_path.values.tobytes()
        assert out.grid == cfg.grid

    def test_coarse_nodes_agree_bitwise(self):
        cfg, coarse_path, fine = self._coupled_setup(builtin_hurst("trig", [0.6, 0.2, 1.0]))
        out = interpolate_on_refinement(cfg, coarse_path, fine, 4)
        assert out.grid.steps == 128
        for j in range(cfg.grid.steps + 1):
            assert out.values[4 * j] == coarse_path.values[j]

    @pytest.mark.parametrize(
        ("dampening", "offset"),
        [(None, None), (builtin_dampening("abs_value", []), math.sin)],
        ids=["plain", "dampened-offset"],
    )
    def test_matches_double_loop(self, dampening, offset):
        hurst = builtin_hurst("trig", [0.6, 0.2, 1.0])
        cfg, coarse_path, fine = self._coupled_setup(hurst, dampening, offset, seed=52)
        r = 4
        out = interpolate_on_refinement(cfg, coarse_path, fine, r)

        params = KernelParams(hurst=hurst, dampening=dampening, horizon=1.0)
        t_c = cfg.grid.nodes
        tau = out.grid.nodes
        expected = np.empty_like(out.values)
        expected[0] = coarse_path.values[0]
        for j in range(1, tau.shape[0]):
            total = 0.0
            for ell in range(j):
                b = ell // r
                total += sigma(
                    params, float(tau[j]), float(t_c[b]), float(coarse_path.values[b])
                ) * float(fine.values[ell])
            expected[j] = total if offset is None else float(offset(float(tau[j]))) + total
        np.testing.assert_allclose(out.values, expected, rtol=1e-12, atol=1e-14)

    def test_half_hurst_refinement_is_fine_brownian(self):
        cfg, coarse_path, fine = self._coupled_setup(builtin_hurst("constant", [0.5]))
        out = interpolate_on_refinement(cfg, coarse_path, fine, 4)
        assert out.values[1:].tobytes() == np.cumsum(fine.values).tobytes()
        fine_cfg = refine_config(cfg, 4)
        direct = simulate_discrete(fine_cfg, fine)
        assert out.values.tobytes() == direct.values.tobytes()

    def test_rejects_uncoupled_increments(self):
        cfg, coarse_path, _ = self._coupled_setup(builtin_hurst("constant", [0.7]))
        unrelated = sample_brownian(Seed(999), make_grid(1.0, 128))
        with pytest.raises(ValueError, match="coupling"):
            interpolate_on_refinement(cfg, coarse_path, unrelated, 4)

    def test_rejects_wrong_grids_and_factor(self):
        cfg, coarse_path, fine = self._coupled_setup(builtin_hurst("constant", [0.7]))
        with pytest.raises(ValueError, match="refine_factor"):
            interpolate_on_refinement(cfg, coarse_path, fine, 0)
        with pytest.raises(ValueError, match="refinement"):
            interpolate_on_refinement(cfg, coarse_path, fine, 2)
        other = SamplePath(grid=make_grid(1.0, 16), values=np.zeros(17))
        with pytest.raises(ValueError, match="coarse_path"):
            interpolate_on_refinement(cfg, other, fine, 4)


class TestMonteCarlo:
    def _config(self, n_paths=3, steps=64, seed=61):
        return SimulationConfig(
            grid=make_grid(1.0, steps),
            hurst=builtin_hurst("smooth_at_origin", []),
            seed=Seed(seed),
            n_paths=n_paths,
        )

    def test_single_path_matches_direct_simulation(self):
        cfg = self._config(n_paths=1)
        ensemble = monte_carlo(cfg)
        stream = derive_path_seed(cfg.seed, 0)
        incr = sample_brownian(stream, cfg.grid, provenance=(cfg.seed.value, 0))
        direct = simulate_discrete(cfg, incr)
        assert ensemble.paths[0].values.tobytes() == direct.values.tobytes()

    def test_paths_are_indexed_and_deterministic(self):
        cfg = self._config(n_paths=4)
        a = monte_carlo(cfg)
        b = monte_carlo(cfg)
        assert isinstance(a, Ensemble)
        assert [p.path_index for p in a.paths] == [0, 1, 2, 3]
        assert a.values_matrix().tobytes() == b.values_matrix().tobytes()
        assert a.values_matrix().shape == (4, 65)

    def test_worker_count_does_not_change_output(self):
        cfg = self._config(n_paths=4)
        serial = monte_carlo(cfg, n_workers=1)
        parallel = monte_carlo(cfg, n_workers=2)
        assert serial.values_matrix().tobytes() == parallel.values_matrix().tobytes()

    def test_unpicklable_config_falls_back_to_serial(self):
        cfg = SimulationConfig(
            grid=make_grid(1.0, 32),
            hurst=builtin_hurst("constant", [0.6]),
            seed=Seed(62),
            offset_g=lambda t: 0.1 * t,
            n_paths=2,
        )
        serial = monte_carlo(cfg, n_workers=1)
        fallback = monte_carlo(cfg, n_workers=2)
        assert serial.values_matrix().tobytes() == fallback.values_matrix().tobytes()

    @pytest.mark.parametrize("n_workers", [1, 2])
    def test_path_failure_names_the_index(self, n_workers):
        broken = HurstFunction(
            evaluator=_RaisingEvaluator(), h_star=0.4, h_sup=0.6, lip_t=0.0, lip_x=0.0
        )
        cfg = SimulationConfig(
            grid=make_grid(1.0, 8), hurst=broken, seed=Seed(63), n_paths=2
        )
        with pytest.raises(PathSimulationError) as excinfo:
            monte_carlo(cfg, n_workers=n_workers)
        assert excinfo.value.path_index in (0, 1)
        assert isinstance(excinfo.value.cause, FloatingPointError)

    def test_refine_config_doubles_steps(self):
        cfg = self._config(steps=64)
        fine = refine_config(cfg, 2)
        assert fine.grid.steps == 128
        assert fine.grid.horizon == cfg.grid.horizon
        assert fine.hurst is cfg.hurst
        with pytest.raises(ValueError, match="factor"):
            refine_config(cfg, 0)


class TestGaussianEnsemble:
    """Distributional checks on the shared h = 1/2 ensemble (10^4 paths).

    At h = 1/2 the terminal value is N(0, 1) up to the 2^-40 increment
    lattice, whose variance contribution is below 1e-22.  Margins are
    multiples of the exact sampling standard errors.
    """

    def test_initial_column_is_zero(self, brownian_ensemble):
        vm = brownian_ensemble.values_matrix()
        assert vm.shape == (10_000, 33)
        assert np.all(vm[:, 0] == 0.0)

    def test_terminal_variance(self, brownian_ensemble):
        terminal = brownian_ensemble.values_matrix()[:, -1]
        se = math.sqrt(2.0 / (terminal.size - 1))
        assert abs(terminal.var() - 1.0) < 4.0 * se

    def test_terminal_excess_kurtosis(self, brownian_ensemble):
        terminal = brownian_ensemble.values_matrix()[:, -1]
        assert abs(stats.kurtosis(terminal)) < 0.2

    def test_first_half_agrees_with_full_ensemble(self, brownian_ensemble):
        terminal = brownian_ensemble.values_matrix()[:, -1]
        half = terminal[:5000]
        se_half = math.sqrt(2.0 / (half.size - 1))
        assert abs(half.var() - terminal.var()) < 4.0 * se_half

    def test_dampening_strictly_reduces_terminal_variance(self):
        grid = make_grid(1.0, 128)
        hurst = builtin_hurst("constant", [0.75])
        variances = []
        for strength in (0.0, 0.5, 1.0, 10.0):
            cfg = SimulationConfig(
                grid=grid,
                hurst=hurst,
                seed=Seed(5150),
                dampening=builtin_dampening("constant", [strength]),
                n_paths=300,
            )
            terminal = monte_carlo(cfg).values_matrix()[:, -1]
            variances.append(float(terminal.var()))
        assert all(b < a for a, b in zip(variances, variances[1:]))
