"""Hurst and dampening functions with declared regularity constants.

A Hurst function ``h(t, x)`` steers the local roughness of a simulated
path; a dampening function ``f(t, x) >= 0`` exponentially suppresses the
memory kernel.  Both carry *declared* constants (range bounds, Lipschitz
constants, growth constant) that downstream bounds rely on.  Declarations
are not trusted blindly: :func:`validate_hurst` and
:func:`validate_dampening` falsify them by dense lattice sampling.

Built-in Hurst families (argument ``x`` is the current path value, all are
time-independent):

``constant``
    ``h = H`` for ``H`` in ``(0, 1]``.  ``H = 1.0`` is admitted as a
    boundary test value.
``smooth_at_origin``
    ``h(x) = 1/2 + (1/2) / (1 + x**2)``, range ``[1/2, 1]``, smoothest at
    the origin.
``rough_at_origin``
    ``h(x) = 1/2 - (1/2) / (1 + x**2)`` floored at ``EPSILON_FLOOR``,
    roughest at the origin.  The raw formula reaches 0 at ``x = 0``, which
    the moment and stability bounds exclude, so the floor keeps the lower
    bound strictly positive.
``bell``
    ``h(x) = 1 / (1 + x**2)`` floored at ``EPSILON_FLOOR``; spans nearly
    the whole admissible range.
``trig``
    ``h(x) = alpha + beta * sin(gamma * x)``; requires
    ``0 < alpha - |beta|`` and ``alpha + |beta| < 1``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "EPSILON_FLOOR",
    "HurstClipWarning",
    "HurstFunction",
    "DampeningFunction",
    "Violation",
    "ValidationReport",
    "builtin_hurst",
    "builtin_dampening",
    "eval_hurst",
    "validate_hurst",
    "validate_dampening",
]

# Floor applied by built-ins whose raw formula touches 0.
EPSILON_FLOOR = 0.05

# Sharp slope bounds: max |d/dx (1/2)/(1+x^2)| = 3*sqrt(3)/16 at x = 1/sqrt(3),
# and twice that for 1/(1+x^2).
_HALF_CAUCHY_SLOPE = 3.0 * math.sqrt(3.0) / 16.0
_CAUCHY_SLOPE = 3.0 * math.sqrt(3.0) / 8.0


class HurstClipWarning(UserWarning):
    """Raised when a scalar Hurst evaluation had to be clipped into range."""


@dataclass(frozen=True)
class HurstFunction:
    """A Hurst function together with its declared constants.

    ``evaluator(t, x)`` must accept a float ``t`` and a float or ndarray
    ``x``.  Values are clipped into ``[h_star, h_sup]`` on evaluation.
    ``h_star`` must be strictly positive and ``h_sup`` at most 1; the value
    1 itself is allowed because two built-ins attain it at the origin.
    """

    evaluator: Callable
    h_star: float
    h_sup: float
    lip_t: float
    lip_x: float
    name: str = "custom"

    def __post_init__(self) -> None:
        if not (0.0 < self.h_star <= self.h_sup <= 1.0):
            raise ValueError(
                f"need 0 < h_star <= h_sup <= 1, got h_star={self.h_star!r}, h_sup={self.h_sup!r}"
            )
        for label, c in (("lip_t", self.lip_t), ("lip_x", self.lip_x)):
            if not (math.isfinite(c) and c >= 0.0):
                raise ValueError(f"{label} must be a finite nonnegative constant, got {c!r}")

    @property
    def is_constant(self) -> bool:
        return self.h_star == self.h_sup

    def evaluate(self, t, x):
        """Clipped evaluation; ndarray in, ndarray out."""
        raw = self.evaluator(t, x)
        return np.clip(raw, self.h_star, self.h_sup)


@dataclass(frozen=True)
class DampeningFunction:
    """A nonnegative dampening function with declared constants.

    ``growth_C`` bounds ``|f(t, x)| <= growth_C * (1 + |x|)``; the
    Lipschitz constants bound variation in each argument.  ``constant_value``
    is set for the constant built-in so simulators can precompute decay
    tables; it is None for every non-constant function.
    """

    evaluator: Callable
    growth_C: float
    lip_t: float
    lip_x: float
    name: str = "custom"
    constant_value: float | None = None

    def __post_init__(self) -> None:
        for label, c in (("growth_C", self.growth_C), ("lip_t", self.lip_t), ("lip_x", self.lip_x)):
            if not (math.isfinite(c) and c >= 0.0):
                raise ValueError(f"{label} must be a finite nonnegative constant, got {c!r}")

    def evaluate(self, t, x):
        return self.evaluator(t, x)


def eval_hurst(h: HurstFunction, t: float, x: float) -> float:
    """Scalar Hurst evaluation, clipped into ``[h_star, h_sup]``.

    Emits :class:`HurstClipWarning` when the raw value strayed outside the
    declared range, which flags an evaluator/declaration mismatch for
    custom functions (built-ins keep themselves in range).
    """
    raw = float(h.evaluator(float(t), float(x)))
    clipped = min(max(raw, h.h_star), h.h_sup)
    if clipped != raw:
        warnings.warn(
            f"hurst function {h.name!r} returned {raw} at (t={t}, x={x}); clipped to {clipped}",
            HurstClipWarning,
            stacklevel=2,
        )
    return clipped


# Built-in evaluators are tiny frozen dataclasses so configurations stay
# picklable for process pools.

@dataclass(frozen=True)
class _ConstantEval:
    value: float

    def __call__(self, t, x):
        x = np.asarray(x, dtype=np.float64)
        if x.shape == ():
            return self.value
        return np.full(x.shape, self.value)


@dataclass(frozen=True)
class _SmoothAtOriginEval:
    def __call__(self, t, x):
        x = np.asarray(x, dtype=np.float64)
        return 0.5 + 0.5 / (1.0 + x * x)


@dataclass(frozen=True)
class _RoughAtOriginEval:
    def __call__(self, t, x):
        x = np.asarray(x, dtype=np.float64)
        return np.maximum(0.5 - 0.5 / (1.0 + x * x), EPSILON_FLOOR)


@dataclass(frozen=True)
class _BellEval:
    def __call__(self, t, x):
        x = np.asarray(x, dtype=np.float64)
        return np.maximum(1.0 / (1.0 + x * x), EPSILON_FLOOR)


@dataclass(frozen=True)
class _TrigEval:
    alpha: float
    beta: float
    gamma: float

    def __call__(self, t, x):
        x = np.asarray(x, dtype=np.float64)
        return self.alpha + self.beta * np.sin(self.gamma * x)


@dataclass(frozen=True)
class _AbsEval:
    def __call__(self, t, x):
        return np.abs(np.asarray(x, dtype=np.float64))


def builtin_hurst(name: str, params: tuple | list = ()) -> HurstFunction:
    """Construct a built-in Hurst function by name.

    Names: ``constant`` (one parameter ``H``), ``smooth_at_origin``,
    ``rough_at_origin``, ``bell`` (no parameters), ``trig`` (parameters
    ``alpha, beta, gamma``).
    """
    params = tuple(float(p) for p in params)
    if name == "constant":
        if len(params) != 1:
            raise ValueError("constant takes exactly one parameter H")
        H = params[0]
        if not (0.0 < H <= 1.0):
            raise ValueError(f"constant H must lie in (0, 1], got {H!r}")
        return HurstFunction(_ConstantEval(H), h_star=H, h_sup=H, lip_t=0.0, lip_x=0.0, name="constant")
    if name == "smooth_at_origin":
        if params:
            raise ValueError("smooth_at_origin takes no parameters")
        return HurstFunction(
            _SmoothAtOriginEval(), h_star=0.5, h_sup=1.0,
            lip_t=0.0, lip_x=_HALF_CAUCHY_SLOPE, name="smooth_at_origin",
        )
    if name == "rough_at_origin":
        if params:
            raise ValueError("rough_at_origin takes no parameters")
        return HurstFunction(
            _RoughAtOriginEval(), h_star=EPSILON_FLOOR, h_sup=0.5,
            lip_t=0.0, lip_x=_HALF_CAUCHY_SLOPE, name="rough_at_origin",
        )
    if name == "bell":
        if params:
            raise ValueError("bell takes no parameters")
        return HurstFunction(
            _BellEval(), h_star=EPSILON_FLOOR, h_sup=1.0,
            lip_t=0.0, lip_x=_CAUCHY_SLOPE, name="bell",
        )
    if name == "trig":
        if len(params) != 3:
            raise ValueError("trig takes exactly three parameters alpha, beta, gamma")
        alpha, beta, gamma = params
        lo, hi = alpha - abs(beta), alpha + abs(beta)
        if not (0.0 < lo and hi < 1.0):
            raise ValueError(
                f"trig range [alpha - |beta|, alpha + |beta|] = [{lo}, {hi}] must lie strictly inside (0, 1)"
            )
        return HurstFunction(
            _TrigEval(alpha, beta, gamma), h_star=lo, h_sup=hi,
            lip_t=0.0, lip_x=abs(beta * gamma), name="trig",
        )
    raise ValueError(f"unknown hurst function {name!r}")


def builtin_dampening(name: str, params: tuple | list = ()) -> DampeningFunction:
    """Construct a built-in dampening function by name.

    Names: ``constant`` (one parameter ``c >= 0``), ``abs_value``
    (``f(x) = |x|``), ``bell`` (``f(x) = 1 / (1 + x**2)``).
    """
    params = tuple(float(p) for p in params)
    if name == "constant":
        if len(params) != 1:
            raise ValueError("constant takes exactly one parameter c")
        c = params[0]
        if not (math.isfinite(c) and c >= 0.0):
            raise ValueError(f"constant dampening level must be finite and nonnegative, got {c!r}")
        return DampeningFunction(
            _ConstantEval(c), growth_C=c, lip_t=0.0, lip_x=0.0,
            name="constant", constant_value=c,
        )
    if name == "abs_value":
        if params:
            raise ValueError("abs_value takes no parameters")
        return DampeningFunction(_AbsEval(), growth_C=1.0, lip_t=0.0, lip_x=1.0, name="abs_value")
    if name == "bell":
        if params:
            raise ValueError("bell takes no parameters")
        return DampeningFunction(
            _BellEval(), growth_C=1.0, lip_t=0.0, lip_x=_CAUCHY_SLOPE, name="bell",
        )
    raise ValueError(f"unknown dampening function {name!r}")


@dataclass(frozen=True)
class Violation:
    """One falsified declaration, with the offending sample and bound."""

    kind: str
    t: float
    x: float
    quantity: float
    bound: float
    t2: float | None = None
    y: float | None = None


@dataclass(frozen=True)
class ValidationReport:
    passed: bool
    violations: tuple[Violation, ...]
    total_violations: int
    samples_used: int


_MAX_RECORDED = 50
# Dense-lattice checks tolerate rounding in the sampled quantities.
_REL_SLACK = 1e-9
_ABS_SLACK = 1e-12


def _collect(mask: np.ndarray, kind: str, ts, xs, qty, bound, t2=None, ys=None) -> list[Violation]:
    out = []
    for i, j in np.argwhere(mask)[:_MAX_RECORDED]:
        sel = (i, j)
        out.append(
            Violation(
                kind=kind,
                t=float(ts[sel]),
                x=float(xs[sel]),
                quantity=float(qty[sel]),
                bound=float(np.broadcast_to(bound, mask.shape)[sel]),
                t2=None if t2 is None else float(t2[sel]),
                y=None if ys is None else float(ys[sel]),
            )
        )
    return out


def validate_hurst(
    h: HurstFunction,
    t_samples: int,
    x_range: tuple[float, float],
    x_samples: int,
    t_range: tuple[float, float] = (0.0, 1.0),
) -> ValidationReport:
    """Falsify the declared constants of a Hurst function by lattice scan.

    Checks, on a ``t_samples`` by ``x_samples`` lattice over ``t_range``
    and ``x_range``: range containment of the raw evaluator in
    ``[h_star, h_sup]``, the x-Lipschitz bound on adjacent lattice
    columns, and the t-Lipschitz bound on adjacent lattice rows.  Bounds
    are applied with a relative slack of 1e-9 so sharp constants are not
    rejected on rounding noise.
    """
    if t_samples < 2 or x_samples < 2:
        raise ValueError("need at least 2 samples along each axis")
    ts = np.linspace(t_range[0], t_range[1], t_samples)
    xs = np.linspace(x_range[0], x_range[1], x_samples)
    vals = np.empty((t_samples, x_samples))
    for i, t in enumerate(ts):
        vals[i] = np.asarray(h.evaluator(float(t), xs), dtype=np.float64)

    violations: list[Violation] = []
    total = 0
    tgrid = np.broadcast_to(ts[:, None], vals.shape)
    xgrid = np.broadcast_to(xs[None, :], vals.shape)

    low = vals < h.h_star - _ABS_SLACK
    high = vals > h.h_sup + _ABS_SLACK
    for mask, bound in ((low, h.h_star), (high, h.h_sup)):
        total += int(mask.sum())
        violations += _collect(mask, "range", tgrid, xgrid, vals, np.full_like(vals, bound))

    dx = np.abs(np.diff(xs))
    jump_x = np.abs(np.diff(vals, axis=1))
    bound_x = h.lip_x * dx[None, :] * (1.0 + _REL_SLACK) + _ABS_SLACK
    mask_x = jump_x > bound_x
    total += int(mask_x.sum())
    violations += _collect(
        mask_x, "lipschitz_x", tgrid[:, :-1], xgrid[:, :-1], jump_x, bound_x,
        ys=np.broadcast_to(xs[None, 1:], jump_x.shape),
    )

    dtv = np.abs(np.diff(ts))
    jump_t = np.abs(np.diff(vals, axis=0))
    bound_t = h.lip_t * dtv[:, None] * (1.0 + _REL_SLACK) + _ABS_SLACK
    mask_t = jump_t > bound_t
    total += int(mask_t.sum())
    violations += _collect(
        mask_t, "lipschitz_t", tgrid[:-1, :], xgrid[:-1, :], jump_t, bound_t,
        t2=np.broadcast_to(ts[1:, None], jump_t.shape),
    )

    return ValidationReport(
        passed=total == 0,
        violations=tuple(violations[:_MAX_RECORDED]),
        total_violations=total,
        samples_used=t_samples * x_samples,
    )


def validate_dampening(
    f: DampeningFunction,
    t_samples: int,
    x_range: tuple[float, float],
    x_samples: int,
    t_range: tuple[float, float] = (0.0, 1.0),
) -> ValidationReport:
    """Falsify the declarations of a dampening function by lattice scan.

    Checks nonnegativity, the linear growth bound
    ``|f(t, x)| <= growth_C * (1 + |x|)``, and both Lipschitz bounds, with
    the same slack policy as :func:`validate_hurst`.
    """
    if t_samples < 2 or x_samples < 2:
        raise ValueError("need at least 2 samples along each axis")
    ts = np.linspace(t_range[0], t_range[1], t_samples)
    xs = np.linspace(x_range[0], x_range[1], x_samples)
    vals = np.empty((t_samples, x_samples))
    for i, t in enumerate(ts):
        vals[i] = np.asarray(f.evaluator(float(t), xs), dtype=np.float64)

    violations: list[Violation] = []
    total = 0
    tgrid = np.broadcast_to(ts[:, None], vals.shape)
    xgrid = np.broadcast_to(xs[None, :], vals.shape)

    neg = vals < -_ABS_SLACK
    total += int(neg.sum())
    violations += _collect(neg, "negativity", tgrid, xgrid, vals, np.zeros_like(vals))

    growth_bound = f.growth_C * (1.0 + np.abs(xgrid)) * (1.0 + _REL_SLACK) + _ABS_SLACK
    over = np.abs(vals) > growth_bound
    total += int(over.sum())
    violations += _collect(over, "growth", tgrid, xgrid, np.abs(vals), growth_bound)

    dx = np.abs(np.diff(xs))
    jump_x = np.abs(np.diff(vals, axis=1))
    bound_x = f.lip_x * dx[None, :] * (1.0 + _REL_SLACK) + _ABS_SLACK
    mask_x = jump_x > bound_x
    total += int(mask_x.sum())
    violations += _collect(
        mask_x, "lipschitz_x", tgrid[:, :-1], xgrid[:, :-1], jump_x, bound_x,
        ys=np.broadcast_to(xs[None, 1:], jump_x.shape),
    )

    dtv = np.abs(np.diff(ts))
    jump_t = np.abs(np.diff(vals, axis=0))
    bound_t = f.lip_t * dtv[:, None] * (1.0 + _REL_SLACK) + _ABS_SLACK
    mask_t = jump_t > bound_t
    total += int(mask_t.sum())
    violations += _collect(
        mask_t, "lipschitz_t", tgrid[:-1, :], xgrid[:-1, :], jump_t, bound_t,
        t2=np.broadcast_to(ts[1:, None], jump_t.shape),
    )

    return ValidationReport(
        passed=total == 0,
        violations=tuple(violations[:_MAX_RECORDED]),
        total_violations=total,
        samples_used=t_samples * x_samples,
    )
