"""Fixed-step RK4 integration of the planar system u' = v, v' = -lam w(x) f(u).

The weight is constant on each side of x = 0, so the interval is integrated
as two smooth pieces with the state carried across the interface unchanged;
each side's step is the largest value not exceeding the target that divides
the side length exactly, making 0 and both endpoints exact grid nodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, TextIO

import numpy as np

from .problem import Problem

DEFAULT_TARGET_STEP = 1e-4
DEFAULT_BLOWUP_BOUND = 1e3

# Effective step is clamped so each instance gets at least this many steps
# across the habitat, whatever the requested target.
MIN_STEPS_PER_SPAN = 100


class BlowupError(RuntimeError):
    """A trajectory left the bounded region before reaching omega2."""

    def __init__(self, x: float, u: float, v: float):
        self.x = x
        self.u = u
        self.v = v
        super().__init__(f"trajectory exceeded the blow-up bound at x={x:.6g} (u={u:.6g}, v={v:.6g})")


@dataclass(frozen=True)
class PhasePoint:
    """A point (u, v) of the phase plane; v is the spatial derivative of u."""

    u: float
    v: float

    def __post_init__(self):
        if not (math.isfinite(self.u) and math.isfinite(self.v)):
            raise ValueError(f"phase point must be finite, got ({self.u}, {self.v})")


@dataclass(frozen=True)
class IntegratorConfig:
    target_step: float = DEFAULT_TARGET_STEP
    blowup_bound: float = DEFAULT_BLOWUP_BOUND

    def __post_init__(self):
        if not self.target_step > 0.0:
            raise ValueError(f"target_step must be > 0, got {self.target_step}")
        if not self.blowup_bound > 0.0:
            raise ValueError(f"blowup_bound must be > 0, got {self.blowup_bound}")


@dataclass(eq=False)
class Trajectory:
    """Sampled solution on [omega1, omega2] with one sample exactly at x = 0."""

    xs: np.ndarray
    us: np.ndarray
    vs: np.ndarray
    split_index: int
    step_left: float
    step_right: float

    @property
    def samples(self) -> Iterator[tuple[float, PhasePoint]]:
        for x, u, v in zip(self.xs, self.us, self.vs):
            yield float(x), PhasePoint(float(u), float(v))

    @property
    def initial(self) -> PhasePoint:
        return PhasePoint(float(self.us[0]), float(self.vs[0]))

    @property
    def terminal(self) -> PhasePoint:
        return PhasePoint(float(self.us[-1]), float(self.vs[-1]))

    def write_csv(self, out: TextIO, decimate: int = 1, header_lines: tuple[str, ...] = ()) -> None:
        """Write `x,u,v` rows, keeping every `decimate`-th sample plus the last."""
        if decimate < 1:
            raise ValueError(f"decimate must be >= 1, got {decimate}")
        for line in header_lines:
            out.write(f"# {line}\n")
        out.write("x,u,v\n")
        n = len(self.xs)
        idx = list(range(0, n, decimate))
        if idx[-1] != n - 1:
            idx.append(n - 1)
        for i in idx:
            out.write(f"{self.xs[i]:.17g},{self.us[i]:.17g},{self.vs[i]:.17g}\n")


def vector_field(p: Problem, x: float, z: PhasePoint) -> PhasePoint:
    """Right-hand side (v, -lam w(x) f(u)) at a point of the habitat."""
    return PhasePoint(z.v, -p.lam * p.weight.at(x) * float(p.f.value(z.u)))


def _side_steps(length: float, target: float) -> tuple[int, float]:
    n = max(1, math.ceil(length / target))
    return n, length / n


def _effective_target(p: Problem, cfg: IntegratorConfig) -> float:
    # never fewer than MIN_STEPS_PER_SPAN steps across the habitat
    return min(cfg.target_step, p.weight.span / MIN_STEPS_PER_SPAN)


def _rk4_side_scalar(feval, c: float, h: float, n: int, u: float, v: float,
                     bound: float, x0: float, record=None):
    """March n steps of u' = v, v' = c f(u); returns final (u, v).

    `record(u, v)` is called after every step when given. Raises BlowupError
    as soon as a post-step state leaves [-bound, bound]^2.
    """
    h6 = h / 6.0
    for i in range(n):
        k1u = v
        k1v = c * feval(u)
        u2 = u + 0.5 * h * k1u
        v2 = v + 0.5 * h * k1v
        k2u = v2
        k2v = c * feval(u2)
        u3 = u + 0.5 * h * k2u
        v3 = v + 0.5 * h * k2v
        k3u = v3
        k3v = c * feval(u3)
        u4 = u + h * k3u
        v4 = v + h * k3v
        k4u = v4
        k4v = c * feval(u4)
        u = u + h6 * (k1u + 2.0 * (k2u + k3u) + k4u)
        v = v + h6 * (k1v + 2.0 * (k2v + k3v) + k4v)
        if not (-bound <= u <= bound and -bound <= v <= bound):
            raise BlowupError(x0 + (i + 1) * h, u, v)
        if record is not None:
            record(u, v)
    return u, v


def integrate(p: Problem, cfg: IntegratorConfig, z0: PhasePoint) -> Trajectory:
    """Integrate from (omega1, z0) to omega2, sampling every step.

    Two fixed-step RK4 sweeps, one per constant-weight side; u and v are
    continuous across x = 0 (only the second derivative jumps).
    """
    target = _effective_target(p, cfg)
    w = p.weight
    n1, h1 = _side_steps(-w.omega1, target)
    n2, h2 = _side_steps(w.omega2, target)
    xs = np.concatenate([np.linspace(w.omega1, 0.0, n1 + 1),
                         np.linspace(0.0, w.omega2, n2 + 1)[1:]])
    us = np.empty(n1 + n2 + 1)
    vs = np.empty(n1 + n2 + 1)
    us[0], vs[0] = z0.u, z0.v

    feval = p.f.value
    bound = cfg.blowup_bound
    pos = 1

    def record(u, v):
        nonlocal pos
        us[pos], vs[pos] = u, v
        pos += 1

    u, v = _rk4_side_scalar(feval, p.lam * w.alpha, h1, n1, z0.u, z0.v,
                            bound, w.omega1, record)
    _rk4_side_scalar(feval, -p.lam, h2, n2, u, v, bound, 0.0, record)
    return Trajectory(xs=xs, us=us, vs=vs, split_index=n1, step_left=h1, step_right=h2)


def poincare_map(p: Problem, cfg: IntegratorConfig, z0: PhasePoint) -> PhasePoint:
    """Terminal phase point at omega2 of the trajectory started at (omega1, z0)."""
    target = _effective_target(p, cfg)
    w = p.weight
    n1, h1 = _side_steps(-w.omega1, target)
    n2, h2 = _side_steps(w.omega2, target)
    feval = p.f.value
    bound = cfg.blowup_bound
    u, v = _rk4_side_scalar(feval, p.lam * w.alpha, h1, n1, z0.u, z0.v, bound, w.omega1)
    u, v = _rk4_side_scalar(feval, -p.lam, h2, n2, u, v, bound, 0.0)
    return PhasePoint(u, v)


@dataclass(eq=False)
class TerminalSweep:
    """Batched terminal states for many initial heights at once."""

    u_end: np.ndarray
    v_end: np.ndarray
    ok: np.ndarray        # False where the column blew up
    exit_x: np.ndarray    # blow-up location, nan for surviving columns


def _rk4_side_batch(fvec, c, h, n, u, v, bound, x0, active, exit_x):
    """Vectorized counterpart of _rk4_side_scalar with per-column freezing.

    Columns that leave the bound are frozen at zero (their results are not
    used) and their exit location recorded; arithmetic follows the scalar
    path exactly so the two agree wherever both are finite.
    """
    h6 = h / 6.0
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(n):
            k1u = v
            k1v = c * fvec(u)
            u2 = u + 0.5 * h * k1u
            v2 = v + 0.5 * h * k1v
            k2u = v2
            k2v = c * fvec(u2)
            u3 = u + 0.5 * h * k2u
            v3 = v + 0.5 * h * k2v
            k3u = v3
            k3v = c * fvec(u3)
            u4 = u + h * k3u
            v4 = v + h * k3v
            k4u = v4
            k4v = c * fvec(u4)
            u = u + h6 * (k1u + 2.0 * (k2u + k3u) + k4u)
            v = v + h6 * (k1v + 2.0 * (k2v + k3v) + k4v)
            blown = active & ~((np.abs(u) <= bound) & (np.abs(v) <= bound))
            if blown.any():
                exit_x[blown] = x0 + (i + 1) * h
                active &= ~blown
                u = np.where(active, u, 0.0)
                v = np.where(active, v, 0.0)
    return u, v


def sweep_terminals(p: Problem, cfg: IntegratorConfig, u0: np.ndarray) -> TerminalSweep:
    """Poincare map applied to a whole batch of initial points (u0, 0)."""
    target = _effective_target(p, cfg)
    w = p.weight
    n1, h1 = _side_steps(-w.omega1, target)
    n2, h2 = _side_steps(w.omega2, target)
    u = np.asarray(u0, dtype=float).copy()
    v = np.zeros_like(u)
    active = np.ones(u.shape, dtype=bool)
    exit_x = np.full(u.shape, np.nan)
    fvec = p.f.value
    bound = cfg.blowup_bound
    u, v = _rk4_side_batch(fvec, p.lam * w.alpha, h1, n1, u, v, bound, w.omega1, active, exit_x)
    u, v = _rk4_side_batch(fvec, -p.lam, h2, n2, u, v, bound, 0.0, active, exit_x)
    u[~active] = np.nan
    v[~active] = np.nan
    return TerminalSweep(u_end=u, v_end=v, ok=active, exit_x=exit_x)


def piecewise_energy(p: Problem, x: float, z: PhasePoint) -> float:
    """Conserved quantity v^2/2 + lam w F(u) of the side containing x.

    F is the antiderivative of f with F(0) = 0. Constant along trajectories
    within each constant-weight side, which makes it an integration-accuracy
    oracle; x = 0 is rejected because it belongs to neither open side.
    """
    if x == 0.0:
        raise ValueError("x = 0 lies on the weight discontinuity; pick a side")
    w = p.weight.at(x)
    return 0.5 * z.v * z.v + p.lam * w * float(p.f.antiderivative(z.u))


def energy_profile(p: Problem, traj: Trajectory) -> tuple[np.ndarray, np.ndarray]:
    """Per-side energy along a trajectory (interface sample included in both)."""
    F = np.asarray(p.f.antiderivative(traj.us), dtype=float)
    kinetic = 0.5 * traj.vs * traj.vs
    split = traj.split_index
    left = kinetic[: split + 1] - p.lam * p.weight.alpha * F[: split + 1]
    right = kinetic[split:] + p.lam * F[split:]
    return left, right
