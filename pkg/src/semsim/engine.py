"""Euler-Maruyama simulation of self-exciting multifractional paths.

The discrete path is the left-point approximation of a singular-kernel
Volterra equation:

    X[0] = g(0)
    X[k] = g(t_k) + sum_{i < k} sigma(t_k, t_i, X[i]) * dB[i]

with ``sigma(t, s, x) = (t - s)**(h(t, x) - 1/2)``, optionally dampened by
``exp(-f(t, s-argument state) * (t - s))``.  The kernel's first argument is
the *evaluation* time ``t_k``, so no column of kernel values can be reused
across rows and a path costs Theta(N^2) kernel evaluations.

Summation discipline
--------------------
Every row sum is accumulated strictly left to right (a sequential running
sum), and row term arrays are always built in index order.  Together with
the lattice quantization of the driving increments this makes the exact
identities hold bitwise: a constant Hurst value of 1/2 reproduces Brownian
prefix sums, zero dampening reproduces the undampened run, and refinement
interpolation reproduces the coarse path at shared nodes on grids with
exact node products.

On grids whose node products are exact (see ``TimeGrid.has_exact_nodes``)
constant Hurst or dampening components are served from precomputed tables
indexed by node distance; the tables contain bitwise the same values the
direct formula would produce, so they change speed, never output.
"""

from __future__ import annotations

import concurrent.futures
import pickle
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .model import DampeningFunction, HurstFunction
from .randomness import (
    BrownianIncrements,
    Seed,
    TimeGrid,
    coarsen,
    derive_path_seed,
    make_grid,
    sample_brownian,
)

__all__ = [
    "SimulationConfig",
    "SamplePath",
    "Ensemble",
    "PathSimulationError",
    "simulate_discrete",
    "interpolate_on_refinement",
    "monte_carlo",
]


class PathSimulationError(RuntimeError):
    """A single path failed; ``path_index`` names the offender."""

    def __init__(self, path_index: int, cause: BaseException):
        super().__init__(f"simulation of path {path_index} failed: {cause!r}")
        self.path_index = path_index
        self.cause = cause

    def __reduce__(self):
        # Default exception reduction would replay __init__ with the
        # formatted message only; keep both attributes across pickling so
        # worker failures arrive intact.
        return (PathSimulationError, (self.path_index, self.cause))


@dataclass(frozen=True)
class SimulationConfig:
    """Everything needed to reproduce one run.

    ``offset_g`` is an optional deterministic map ``t -> real`` added to
    every node; ``seed`` is the master seed from which per-path streams are
    derived; ``n_paths`` is the ensemble size for :func:`monte_carlo`.
    """

    grid: TimeGrid
    hurst: HurstFunction
    seed: Seed
    dampening: DampeningFunction | None = None
    offset_g: Callable[[float], float] | None = None
    n_paths: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "n_paths", int(self.n_paths))
        if self.n_paths < 1:
            raise ValueError(f"n_paths must be at least 1, got {self.n_paths!r}")
        if not isinstance(self.grid, TimeGrid):
            raise ValueError("grid must be a TimeGrid")
        if not isinstance(self.hurst, HurstFunction):
            raise ValueError("hurst must be a HurstFunction")
        if not isinstance(self.seed, Seed):
            raise ValueError("seed must be a Seed")
        if self.dampening is not None and not isinstance(self.dampening, DampeningFunction):
            raise ValueError("dampening must be a DampeningFunction or None")


@dataclass(frozen=True)
class SamplePath:
    """One realized path: ``values[k]`` is the state at node ``k``."""

    grid: TimeGrid
    values: np.ndarray
    path_index: int = 0

    def __post_init__(self) -> None:
        v = self.values
        if not (isinstance(v, np.ndarray) and v.shape == (self.grid.steps + 1,)):
            raise ValueError(
                f"values must have shape ({self.grid.steps + 1},), got {getattr(v, 'shape', None)}"
            )


@dataclass(frozen=True)
class Ensemble:
    """An ordered collection of paths simulated under one config."""

    config: SimulationConfig
    paths: tuple[SamplePath, ...]

    def values_matrix(self) -> np.ndarray:
        """Stack path values into an ``(n_paths, steps + 1)`` array."""
        return np.stack([p.values for p in self.paths])


def _offset_values(config: SimulationConfig) -> np.ndarray | None:
    if config.offset_g is None:
        return None
    return np.array([float(config.offset_g(float(t))) for t in config.grid.nodes])


class _KernelRows:
    """Row-wise kernel evaluation with optional distance-indexed tables.

    ``row(t_eval, nodes, states, out)`` writes ``sigma(t_eval, nodes[i],
    states[i])`` into ``out`` for every ``i``.  ``table_offset`` activates
    the table path: nodes must then satisfy ``t_eval - nodes[i] ==
    t_table[offset - i]`` bitwise, which on exact-node grids holds with
    ``offset = k`` for row ``k``.
    """

    def __init__(self, grid: TimeGrid, hurst: HurstFunction, dampening: DampeningFunction | None):
        self.hurst = hurst
        self.dampening = dampening
        n = grid.steps
        t = grid.nodes
        use_tables = grid.has_exact_nodes
        self.pow_table = None
        if use_tables and hurst.is_constant:
            table = np.empty(n + 1)
            table[0] = np.nan
            np.power(t[1:], hurst.h_star - 0.5, out=table[1:])
            self.pow_table = table
        self.damp_table = None
        if use_tables and dampening is not None and dampening.constant_value is not None:
            table = np.empty(n + 1)
            table[0] = np.nan
            np.exp(-dampening.constant_value * t[1:], out=table[1:])
            self.damp_table = table

    @staticmethod
    def _table_slice(table: np.ndarray, offset: int, k: int) -> np.ndarray:
        # Elements offset, offset-1, ..., offset-k+1 as a reversed view.
        stop = offset - k
        return table[offset:(stop if stop >= 0 else None):-1]

    def row(self, t_eval: float, nodes: np.ndarray, states: np.ndarray,
            out: np.ndarray, table_offset: int | None = None) -> np.ndarray:
        k = nodes.shape[0]
        o = out[:k]
        if self.pow_table is not None and table_offset is not None:
            np.copyto(o, self._table_slice(self.pow_table, table_offset, k))
        else:
            dts = t_eval - nodes
            h = self.hurst.evaluate(t_eval, states) if not self.hurst.is_constant \
                else self.hurst.h_star
            np.power(dts, np.asarray(h) - 0.5, out=o)
        if self.dampening is not None:
            if self.damp_table is not None and table_offset is not None:
                o *= self._table_slice(self.damp_table, table_offset, k)
            else:
                f = np.asarray(self.dampening.evaluate(t_eval, states), dtype=np.float64)
                o *= np.exp(-f * (t_eval - nodes))
        return o


def simulate_discrete(config: SimulationConfig, increments: BrownianIncrements) -> SamplePath:
    """Run the discrete recursion for one path.

    ``increments.grid`` must equal ``config.grid``.  Cost is Theta(N^2):
    the kernel depends on the evaluation time, so each row is evaluated
    afresh and summed left to right.
    """
    if increments.grid != config.grid:
        raise ValueError(
            f"increments grid {increments.grid} does not match config grid {config.grid}"
        )
    n = config.grid.steps
    t = config.grid.nodes
    dB = increments.values
    g = _offset_values(config)
    rows = _KernelRows(config.grid, config.hurst, config.dampening)

    x = np.empty(n + 1)
    x[0] = 0.0 if g is None else g[0]
    work = np.empty(max(n, 1))
    for k in range(1, n + 1):
        kern = rows.row(t[k], t[:k], x[:k], work, table_offset=k)
        kern *= dB[:k]
        np.cumsum(kern, out=kern)
        x[k] = kern[k - 1] if g is None else g[k] + kern[k - 1]
    x.setflags(write=False)
    return SamplePath(grid=config.grid, values=x, path_index=0)


def interpolate_on_refinement(
    config: SimulationConfig,
    coarse_path: SamplePath,
    fine_increments: BrownianIncrements,
    refine_factor: int,
) -> SamplePath:
    """Extend a coarse path to a refined grid without re-solving.

    Each fine node ``tau_j`` gets

        g(tau_j) + sum over fine intervals below tau_j of
            sigma(tau_j, eta_l, X_coarse[eta_l]) * dB_fine[l]

    where ``eta_l`` is the coarse node at or below the interval start.  The
    kernel value is constant across each whole coarse block, so whole
    blocks are accumulated through the block sums of the fine increments;
    on the lattice those sums are exact, which makes the value at every
    coarse node agree bitwise with the coarse recursion on exact-node
    grids.  ``refine_factor == 1`` returns the coarse values unchanged.

    The coupling precondition (the fine increments coarsen to exactly the
    increments that generated ``coarse_path``) is verified by re-running
    the coarse recursion; a mismatch is rejected.
    """
    if not (isinstance(refine_factor, int) and refine_factor >= 1):
        raise ValueError(f"refine_factor must be a positive integer, got {refine_factor!r}")
    if coarse_path.grid != config.grid:
        raise ValueError("coarse_path grid does not match config grid")
    n = config.grid.steps
    fine_grid = make_grid(config.grid.horizon, n * refine_factor)
    if fine_increments.grid != fine_grid:
        raise ValueError(
            f"fine increments must live on the {refine_factor}-fold refinement {fine_grid}"
        )
    coarse_increments = coarsen(fine_increments, refine_factor)
    recomputed = simulate_discrete(config, coarse_increments)
    if not np.array_equal(recomputed.values, coarse_path.values):
        raise ValueError(
            "coupling violated: fine increments do not coarsen to the increments behind coarse_path"
        )
    if refine_factor == 1:
        return SamplePath(grid=fine_grid, values=coarse_path.values,
                          path_index=coarse_path.path_index)

    r = refine_factor
    tau = fine_grid.nodes
    t_c = config.grid.nodes
    xc = coarse_path.values
    dB_fine = fine_increments.values
    dB_coarse = coarse_increments.values
    g_fn = config.offset_g
    rows = _KernelRows(config.grid, config.hurst, config.dampening)

    out = np.empty(n * r + 1)
    out[0] = xc[0]
    work = np.empty(n + 1)
    for j in range(1, n * r + 1):
        b, p = divmod(j, r)
        m = b + (1 if p else 0)
        kern = rows.row(float(tau[j]), t_c[:m], xc[:m], work)
        if p:
            kern[:b] *= dB_coarse[:b]
            partial = np.cumsum(dB_fine[b * r:b * r + p])
            kern[b] *= partial[p - 1]
        else:
            kern *= dB_coarse[:b]
        np.cumsum(kern, out=kern)
        total = kern[m - 1]
        out[j] = total if g_fn is None else float(g_fn(float(tau[j]))) + total
    out.setflags(write=False)
    return SamplePath(grid=fine_grid, values=out, path_index=coarse_path.path_index)


def _simulate_indexed(config: SimulationConfig, index: int) -> np.ndarray:
    try:
        stream = derive_path_seed(config.seed, index)
        incr = sample_brownian(stream, config.grid, provenance=(config.seed.value, index))
        return simulate_discrete(config, incr).values
    except Exception as exc:
        raise PathSimulationError(index, exc) from exc


def _worker(payload: bytes, index: int) -> tuple[int, np.ndarray]:
    config = pickle.loads(payload)
    return index, _simulate_indexed(config, index)


def monte_carlo(config: SimulationConfig, n_workers: int = 1) -> Ensemble:
    """Simulate ``config.n_paths`` independent paths.

    Path ``i`` is driven by the stream derived from ``(seed, i)``, so the
    ensemble is a pure function of the config: any worker count, including
    the serial path, produces identical output, and paths can be
    regenerated individually.  Failures inside one path surface as
    :class:`PathSimulationError` naming the index.  Configs whose callables
    cannot be pickled fall back to serial execution.
    """
    n_workers = max(1, int(n_workers))
    indices = range(config.n_paths)
    if n_workers > 1:
        try:
            payload = pickle.dumps(config)
        except Exception:
            payload = None
        if payload is not None:
            results: list[np.ndarray | None] = [None] * config.n_paths
            with concurrent.futures.ProcessPoolExecutor(max_workers=n_workers) as pool:
                futures = [pool.submit(_worker, payload, i) for i in indices]
                for fut in concurrent.futures.as_completed(futures):
                    try:
                        i, values = fut.result()
                    except PathSimulationError:
                        raise
                    results[i] = values
            paths = tuple(
                SamplePath(grid=config.grid, values=v, path_index=i)
                for i, v in enumerate(results)
            )
            return Ensemble(config=config, paths=paths)
    paths = tuple(
        SamplePath(grid=config.grid, values=_simulate_indexed(config, i), path_index=i)
        for i in indices
    )
    return Ensemble(config=config, paths=paths)


def refine_config(config: SimulationConfig, factor: int) -> SimulationConfig:
    """Config on the ``factor``-fold refined grid, all else unchanged."""
    if not (isinstance(factor, int) and factor >= 1):
        raise ValueError(f"factor must be a positive integer, got {factor!r}")
    return replace(config, grid=make_grid(config.grid.horizon, config.grid.steps * factor))
