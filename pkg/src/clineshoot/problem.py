"""Problem instances: step weight, selection ratio, and hypothesis diagnostics."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .nonlinearity import (
    DEFAULT_GRID_SIZE,
    FStarReport,
    Nonlinearity,
    check_f_star,
    nonlinearity_from_dict,
)

if TYPE_CHECKING:
    from .integrator import Trajectory


@dataclass(frozen=True)
class StepWeight:
    """Piecewise-constant weight: -alpha on [omega1, 0), +1 on (0, omega2].

    The value at exactly x = 0 is +1 (right-continuous convention); all
    integrations split at 0, so the single-point choice never matters.
    """

    alpha: float
    omega1: float
    omega2: float

    def __post_init__(self):
        if not self.alpha > 0.0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        if not self.omega1 < 0.0:
            raise ValueError(f"omega1 must be < 0, got {self.omega1}")
        if not self.omega2 > 0.0:
            raise ValueError(f"omega2 must be > 0, got {self.omega2}")

    def at(self, x: float) -> float:
        if not self.omega1 <= x <= self.omega2:
            raise ValueError(f"x={x} outside habitat [{self.omega1}, {self.omega2}]")
        return -self.alpha if x < 0.0 else 1.0

    @property
    def mean(self) -> float:
        """Integral of the weight over the habitat, in closed form."""
        return self.alpha * self.omega1 + self.omega2

    @property
    def span(self) -> float:
        return self.omega2 - self.omega1

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "omega1": self.omega1, "omega2": self.omega2}


@dataclass(frozen=True)
class Problem:
    """A full instance: habitat/weight, selection term f, and ratio lam > 0."""

    weight: StepWeight
    f: Nonlinearity
    lam: float

    def __post_init__(self):
        if not self.lam > 0.0:
            raise ValueError(f"selection ratio must be > 0, got {self.lam}")

    @property
    def omega1(self) -> float:
        return self.weight.omega1

    @property
    def omega2(self) -> float:
        return self.weight.omega2

    def to_dict(self) -> dict:
        return {"weight": self.weight.to_dict(), "f": self.f.to_dict(), "lambda": self.lam}

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def weight_at(w: StepWeight, x: float) -> float:
    return w.at(x)


def weight_mean(w: StepWeight) -> float:
    return w.mean


@dataclass(frozen=True)
class ConjectureReport:
    """Verdicts on the four scope conditions for the uniqueness question.

    (a) the weight is positive on a set of positive measure, (b) its mean is
    negative, (c) f satisfies the structural hypotheses, (d) f(s)/s is
    strictly decreasing on (0, 1).
    """

    weight_positive_somewhere: bool
    weight_mean: float
    weight_mean_negative: bool
    f_star: FStarReport
    ratio_strictly_decreasing: bool

    @property
    def in_scope(self) -> bool:
        return (
            self.weight_positive_somewhere
            and self.weight_mean_negative
            and self.f_star.satisfies_f_star
            and self.ratio_strictly_decreasing
        )

    def to_dict(self) -> dict:
        return {
            "weight_positive_somewhere": self.weight_positive_somewhere,
            "weight_mean": self.weight_mean,
            "weight_mean_negative": self.weight_mean_negative,
            "f_star": self.f_star.to_dict(),
            "ratio_strictly_decreasing": self.ratio_strictly_decreasing,
            "in_scope": self.in_scope,
        }


def validate_conjecture_hypotheses(
    p: Problem, grid_size: int = DEFAULT_GRID_SIZE
) -> ConjectureReport:
    """Check whether an instance sits in scope of the uniqueness question.

    For this step-weight family, positivity on a set of positive measure is
    exactly omega2 > 0, which the type already guarantees; it is still
    reported for completeness.
    """
    report = check_f_star(p.f, grid_size)
    mean = p.weight.mean
    return ConjectureReport(
        weight_positive_somewhere=p.weight.omega2 > 0.0,
        weight_mean=mean,
        weight_mean_negative=mean < 0.0,
        f_star=report,
        ratio_strictly_decreasing=report.ratio_strictly_decreasing,
    )


def _trapezoid(y: np.ndarray, x: np.ndarray) -> float:
    return float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(x)))


def neumann_necessary_integral(p: Problem, traj: "Trajectory") -> float:
    """Trapezoidal approximation of the habitat integral of w(x) f(u(x)).

    The sum is split at x = 0 so no panel straddles the weight discontinuity.
    For a genuine zero-flux solution the result vanishes up to quadrature
    error.
    """
    xs, us = traj.xs, traj.us
    if abs(xs[0] - p.omega1) > 1e-9 or abs(xs[-1] - p.omega2) > 1e-9:
        raise ValueError(
            f"trajectory spans [{xs[0]}, {xs[-1]}], expected [{p.omega1}, {p.omega2}]"
        )
    split = traj.split_index
    if xs[split] != 0.0:
        raise ValueError("trajectory has no sample at x = 0")
    fvals = np.asarray(p.f.value(us), dtype=float)
    left = -p.weight.alpha * _trapezoid(fvals[: split + 1], xs[: split + 1])
    right = _trapezoid(fvals[split:], xs[split:])
    return left + right


def problem_from_dict(d: dict) -> Problem:
    """Build a Problem from its JSON object form; ValueError carries the bad key."""
    if not isinstance(d, dict):
        raise ValueError("problem config must be a JSON object")
    for key in ("weight", "f", "lambda"):
        if key not in d:
            raise ValueError(f"problem config is missing required key {key!r}")
    wd = d["weight"]
    if not isinstance(wd, dict):
        raise ValueError("'weight' must be an object with alpha/omega1/omega2")
    for key in ("alpha", "omega1", "omega2"):
        if key not in wd:
            raise ValueError(f"'weight' is missing required key {key!r}")
        if not isinstance(wd[key], (int, float)) or isinstance(wd[key], bool):
            raise ValueError(f"'weight.{key}' must be a number, got {wd[key]!r}")
    if not isinstance(d["lambda"], (int, float)) or isinstance(d["lambda"], bool):
        raise ValueError(f"'lambda' must be a number, got {d['lambda']!r}")
    weight = StepWeight(
        alpha=float(wd["alpha"]), omega1=float(wd["omega1"]), omega2=float(wd["omega2"])
    )
    f = nonlinearity_from_dict(d["f"])
    return Problem(weight=weight, f=f, lam=float(d["lambda"]))


def problem_from_json(text: str) -> Problem:
    return problem_from_dict(json.loads(text))
