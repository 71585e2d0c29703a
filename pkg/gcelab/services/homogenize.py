"""Homogenization ODEs for conformal factors and horizontal lifts on Nil³."""

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
import sympy
from scipy.integrate import dblquad, quad
from scipy.interpolate import CubicSpline

from gcelab.config import config
from gcelab.exceptions import InvalidConformalFactorError, InvalidParameterError

logger = logging.getLogger(__name__)

PERIODICITY_TOLERANCE = 1e-8

Evaluator = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class PeriodicFunction:
    """Real function of one variable with a declared period.

    Given either as a vectorized evaluator or as samples on the uniform grid
    k·period/N, k = 0..N-1, interpolated by a periodic cubic spline.
    """

    period: float
    evaluator: Optional[Evaluator] = None
    samples: Optional[np.ndarray] = None
    name: str = ""

    def __post_init__(self):
        if not self.period > 0:
            raise InvalidParameterError(f"period must be positive, got {self.period}")
        if (self.evaluator is None) == (self.samples is None):
            raise InvalidParameterError("give exactly one of an evaluator or samples")
        if self.samples is not None:
            samples = np.array(self.samples, dtype=float).ravel()
            if samples.size < 4:
                raise InvalidParameterError("at least 4 samples are needed for interpolation")
            samples.setflags(write=False)
            object.__setattr__(self, "samples", samples)

    @classmethod
    def constant(cls, value: float, period: float) -> "PeriodicFunction":
        return cls(period, evaluator=lambda t: np.full(np.shape(t), float(value)), name=f"{value:g}")

    @cached_property
    def spline(self) -> Optional[CubicSpline]:
        if self.samples is None:
            return None
        n = self.samples.size
        grid = np.linspace(0.0, self.period, n + 1)
        return CubicSpline(grid, np.append(self.samples, self.samples[0]), bc_type="periodic")

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.spline is not None:
            return self.spline(np.mod(t, self.period))
        return np.asarray(self.evaluator(t), dtype=float) * np.ones_like(t)

    @cached_property
    def mean(self) -> float:
        if self.samples is not None:
            # trapezoid rule on a periodic uniform grid
            return float(np.mean(self.samples))
        value, _ = quad(lambda t: float(self(t)), 0.0, self.period, limit=200, epsabs=1e-13, epsrel=1e-13)
        return value / self.period

    def sample_grid(self, points: Optional[int] = None) -> np.ndarray:
        points = points or config.numerics.sample_points
        return np.linspace(0.0, self.period, points, endpoint=False)

    def periodicity_residual(self, points: Optional[int] = None) -> float:
        t = self.sample_grid(points)
        return float(np.max(np.abs(self(t + self.period) - self(t))))

    def ensure_conformal_factor(
        self, points: Optional[int] = None, tolerance: float = PERIODICITY_TOLERANCE
    ) -> "PeriodicFunction":
        """Reject non-periodic or non-positive functions."""
        residual = self.periodicity_residual(points)
        if residual > tolerance * max(1.0, float(np.max(np.abs(self(self.sample_grid(points)))))):
            raise InvalidConformalFactorError(
                f"f is not {self.period:g}-periodic (residual {residual:.3e})"
            )
        lowest = float(np.min(self(self.sample_grid(points))))
        if lowest <= 0:
            raise InvalidConformalFactorError(f"f must be positive, min over a period is {lowest:.6g}")
        return self


def rk4(rhs: Callable[[float, float], float], y0: float, t0: float, step: float, steps: int) -> np.ndarray:
    """Classical fixed-step fourth-order Runge–Kutta for a scalar ODE, returns steps + 1 values."""
    values = np.empty(steps + 1)
    values[0] = y = y0
    t = t0
    for i in range(steps):
        k1 = rhs(t, y)
        k2 = rhs(t + 0.5 * step, y + 0.5 * step * k1)
        k3 = rhs(t + 0.5 * step, y + 0.5 * step * k2)
        k4 = rhs(t + step, y + step * k3)
        y = y + step * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
        t = t0 + (i + 1) * step
        values[i + 1] = y
    return values


def _step_count(steps: Optional[int]) -> int:
    steps = steps or config.numerics.ode_steps
    if steps < 16:
        raise InvalidParameterError(f"at least 16 integration steps are needed, got {steps}")
    return steps


def _spline_derivative(grid: np.ndarray, values: np.ndarray) -> np.ndarray:
    closed = np.array(values)
    closed[-1] = closed[0]
    return CubicSpline(grid, closed, bc_type="periodic")(grid, 1)


@dataclass
class FlatSolution:
    """c and the w-periodic α₂ with -α₂' = c - f, sampled on `grid`."""

    c: float
    grid: np.ndarray
    values: np.ndarray
    residuals: Dict[str, float] = field(default_factory=dict)
    symmetrized: bool = False

    @property
    def alpha2(self) -> PeriodicFunction:
        return PeriodicFunction(self.grid[-1], samples=self.values[:-1], name="alpha2")


def solve_flat_case(
    f: PeriodicFunction, steps: Optional[int] = None, symmetrize: bool = False
) -> FlatSolution:
    """α₂' = f - c with c the mean of f and α₂ of zero mean.

    With `symmetrize`, returns ½(α₂(t) - α₂(-t)), the average with the
    pullback under t ↦ -t; f must then be even.
    """
    f.ensure_conformal_factor()
    steps = _step_count(steps)
    w = f.period
    c = f.mean
    h = w / steps
    grid = np.linspace(0.0, w, steps + 1)
    raw = rk4(lambda t, _: float(f(t)) - c, 0.0, 0.0, h, steps)
    drift = abs(raw[-1] - raw[0])
    values = raw - np.mean(raw[:-1])

    if symmetrize:
        t = f.sample_grid()
        evenness = float(np.max(np.abs(f(t) - f(-t))))
        if evenness > PERIODICITY_TOLERANCE:
            raise InvalidParameterError(f"symmetrization needs an even f (residual {evenness:.3e})")
        mirrored = values[(steps - np.arange(steps + 1)) % steps]
        values = 0.5 * (values - mirrored)

    derivative = _spline_derivative(grid, values)
    residuals = {
        "periodicity": max(drift, abs(values[-1] - values[0])),
        "ode": float(np.max(np.abs(-derivative - (c - f(grid))))),
        "mean": abs(c - float(np.mean(f(grid[:-1])))),
    }
    logger.debug(f"flat case for f='{f.name}': c={c:.12g}, residuals {residuals}")
    return FlatSolution(c=c, grid=grid, values=values, residuals=residuals, symmetrized=symmetrize)


@dataclass
class HyperbolicSolution:
    """a₀-periodic β with β' - β = c - f, sampled on `grid`; `drift` is p of the raw solution."""

    c: float
    grid: np.ndarray
    values: np.ndarray
    drift: float
    residuals: Dict[str, float] = field(default_factory=dict)

    @property
    def beta(self) -> PeriodicFunction:
        return PeriodicFunction(self.grid[-1], samples=self.values[:-1], name="beta")


def solve_hyperbolic_case(
    f: PeriodicFunction, c: float, steps: Optional[int] = None, initial: float = 0.0
) -> HyperbolicSolution:
    """Periodic solution of β' = β + c - f.

    Any solution β satisfies β(y + a₀) - β(y) = p eʸ; subtracting
    p/(e^{a₀} - 1) eʸ removes the drift.
    """
    f.ensure_conformal_factor()
    steps = _step_count(steps)
    a0 = f.period
    h = a0 / steps
    grid = np.linspace(0.0, a0, steps + 1)
    raw = rk4(lambda y, b: b + c - float(f(y)), initial, 0.0, h, steps)
    drift = float(raw[-1] - raw[0])
    values = raw - drift / math.expm1(a0) * np.exp(grid)

    derivative = _spline_derivative(grid, values)
    residuals = {
        "periodicity": abs(values[-1] - values[0]),
        "ode": float(np.max(np.abs(derivative - values - (c - f(grid))))),
    }
    logger.debug(f"hyperbolic case for f='{f.name}', c={c:g}: drift p={drift:.6g}, residuals {residuals}")
    return HyperbolicSolution(c=c, grid=grid, values=values, drift=drift, residuals=residuals)


# ---------------------------------------------------------------------------
# Nil³: λ = dt + (y dx - x dy), dλ = -2 dx∧dy
# ---------------------------------------------------------------------------


_x, _y = sympy.symbols("x y", real=True)
# dx and dy coefficients of λ; the dt coefficient is 1
NIL_CONTACT_COEFFICIENTS = (_y, -_x)


def nil_contact_form(point: np.ndarray, tangent: np.ndarray) -> float:
    x, y, _ = point
    return float(tangent[2] + y * tangent[0] - x * tangent[1])


@lru_cache(maxsize=None)
def nil_contact_curvature() -> Callable[[float, float], float]:
    """dλ = (∂_x Q - ∂_y P) dx∧dy for λ = dt + P dx + Q dy."""
    P, Q = NIL_CONTACT_COEFFICIENTS
    density = sympy.simplify(sympy.diff(Q, _x) - sympy.diff(P, _y))
    logger.debug(f"dλ = ({density}) dx∧dy")
    return sympy.lambdify((_x, _y), density, modules="numpy")


@dataclass
class HorizontalLiftPath:
    """Lift (x, y, t) of a piecewise-linear planar path with λ(γ') = 0."""

    base_points: np.ndarray
    fiber: np.ndarray
    segments: List[slice]
    horizontality_residual: float

    @property
    def shift(self) -> float:
        """Reeb displacement needed to close the lift, signed along +ξ."""
        return float(self.fiber[-1] - self.fiber[0])

    @property
    def points(self) -> np.ndarray:
        return np.column_stack([self.base_points, self.fiber])


def horizontal_lift(
    vertices: Sequence[Sequence[float]], samples_per_edge: int = 64, start_fiber: float = 0.0
) -> HorizontalLiftPath:
    """Integrate t' = x y' - y x' along consecutive straight edges."""
    vertices = np.asarray(vertices, dtype=float)
    if vertices.ndim != 2 or vertices.shape[1] != 2 or len(vertices) < 2:
        raise InvalidParameterError("a planar path needs at least two 2-D vertices")
    if samples_per_edge < 2:
        raise InvalidParameterError("each edge needs at least two samples")
    base, fiber, segments = [], [], []
    t_start, offset = start_fiber, 0
    worst = 0.0
    for start, end in zip(vertices[:-1], vertices[1:]):
        direction = end - start
        s = np.linspace(0.0, 1.0, samples_per_edge + 1)
        xy = start + np.outer(s, direction)

        def rhs(param: float, _: float) -> float:
            x, y = start + param * direction
            return x * direction[1] - y * direction[0]

        t = rk4(rhs, t_start, 0.0, 1.0 / samples_per_edge, samples_per_edge)
        rate = np.gradient(t, s, edge_order=2)
        for point, t_rate in zip(np.column_stack([xy, t]), rate):
            worst = max(worst, abs(nil_contact_form(point, np.append(direction, t_rate))))
        base.append(xy)
        fiber.append(t)
        segments.append(slice(offset, offset + len(s)))
        offset += len(s)
        t_start = t[-1]
    return HorizontalLiftPath(
        base_points=np.vstack(base),
        fiber=np.concatenate(fiber),
        segments=segments,
        horizontality_residual=worst,
    )


def lift_parallelogram(V: Sequence[float], W: Sequence[float], samples: int = 64) -> HorizontalLiftPath:
    """Lift of the commutator loop 0 → V → V+W → W → 0 of the translations by V and W."""
    V, W = np.asarray(V, dtype=float), np.asarray(W, dtype=float)
    return horizontal_lift([np.zeros(2), V, V + W, W, np.zeros(2)], samples)


def nil_commutator_shift(V: Sequence[float], W: Sequence[float], samples: int = 64) -> float:
    """Fiber shift of the lifted commutator [τ_V, τ_W]; equals 2 (V × W)."""
    path = lift_parallelogram(V, W, samples)
    logger.debug(
        f"commutator of V={list(V)} and W={list(W)}: shift {path.shift:.12g}, "
        f"horizontality {path.horizontality_residual:.2e}"
    )
    return path.shift


def holonomy_integral(
    V: Sequence[float], W: Sequence[float], origin: Sequence[float] = (0.0, 0.0)
) -> float:
    """-∫_P dλ over the parallelogram P(u, s) = origin + uV + sW, u, s in [0, 1]."""
    V, W, origin = (np.asarray(v, dtype=float) for v in (V, W, origin))
    density = nil_contact_curvature()
    jacobian = V[0] * W[1] - V[1] * W[0]

    def integrand(s: float, u: float) -> float:
        x, y = origin + u * V + s * W
        return float(density(x, y)) * jacobian

    value, _ = dblquad(integrand, 0.0, 1.0, 0.0, 1.0, epsabs=1e-13, epsrel=1e-13)
    return -value
