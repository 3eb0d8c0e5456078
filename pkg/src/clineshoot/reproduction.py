"""Named benchmark instances and the comparison harness for their
reference values.

Two quantitative instances each carry three target steady states; two
qualitative scenarios probe how the cline count responds to the shape of
the nonlinearity (concave versus not) and to the intensity parameter.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Optional, Sequence

from .integrator import IntegratorConfig
from .nonlinearity import ArctanDamped, DegreeOfDominance, HatFamily, nonlinearity_from_dict
from .problem import Problem, StepWeight, problem_from_dict
from .shooting import ClineSearchResult, find_all_clines

DEFAULT_TOLERANCE = 0.005


@dataclass(frozen=True)
class NamedInstance:
    """A benchmark problem with its reference values.

    count_mode states how expected_cline_count is meant: "exact" for the
    quantitative instances, "at_most" for the uniqueness scenario, "sweep"
    when the count is only reported as a function of the intensity.
    """

    name: str
    problem: Problem
    expected_cline_count: Optional[int]
    expected_c: Optional[tuple[float, ...]]
    expected_terminal_u: Optional[tuple[float, ...]]
    tolerance: float
    count_mode: str = "exact"
    notes: str = ""

    def __post_init__(self):
        if self.count_mode not in ("exact", "at_most", "sweep"):
            raise ValueError(f"unknown count_mode {self.count_mode!r}")
        if self.expected_cline_count is not None:
            for label, seq in (("expected_c", self.expected_c),
                               ("expected_terminal_u", self.expected_terminal_u)):
                if seq is not None and len(seq) != self.expected_cline_count:
                    raise ValueError(f"{label} must list {self.expected_cline_count} "
                                     f"values, got {len(seq)}")
        if not self.tolerance > 0.0:
            raise ValueError(f"tolerance must be > 0, got {self.tolerance}")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "problem": self.problem.to_dict(),
            "expected_cline_count": self.expected_cline_count,
            "expected_c": None if self.expected_c is None else list(self.expected_c),
            "expected_terminal_u": (None if self.expected_terminal_u is None
                                    else list(self.expected_terminal_u)),
            "tolerance": self.tolerance,
            "count_mode": self.count_mode,
            "notes": self.notes,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def named_instance_from_dict(d: dict) -> NamedInstance:
    def _tuple_or_none(key):
        val = d.get(key)
        return None if val is None else tuple(float(x) for x in val)

    return NamedInstance(
        name=str(d["name"]),
        problem=problem_from_dict(d["problem"]),
        expected_cline_count=(None if d.get("expected_cline_count") is None
                              else int(d["expected_cline_count"])),
        expected_c=_tuple_or_none("expected_c"),
        expected_terminal_u=_tuple_or_none("expected_terminal_u"),
        tolerance=float(d["tolerance"]),
        count_mode=str(d.get("count_mode", "exact")),
        notes=str(d.get("notes", "")),
    )


def named_instance_from_json(text: str) -> NamedInstance:
    return named_instance_from_dict(json.loads(text))


def proposition_1() -> NamedInstance:
    """Hat-shaped nonlinearity, three steady states at intensity 45."""
    problem = Problem(
        weight=StepWeight(alpha=1.0, omega1=-0.21, omega2=0.2),
        f=HatFamily(h=3.0),
        lam=45.0,
    )
    return NamedInstance(
        name="proposition-1",
        problem=problem,
        expected_cline_count=3,
        expected_c=(0.125, 0.479, 0.683),
        expected_terminal_u=(0.273, 0.601, 0.833),
        tolerance=DEFAULT_TOLERANCE,
    )


def proposition_2() -> NamedInstance:
    """Arctan-damped nonlinearity, three steady states at intensity 3.

    The reference c values coincide with the terminal abscissae (u at the
    right endpoint) of the three located steady states; the computed initial
    heights are near 0.018, 0.383 and 0.488, as the bracket intervals
    (0.01, 0.1), (0.1, 0.45) and (0.45, 0.9) require.
    """
    problem = Problem(
        weight=StepWeight(alpha=2.4, omega1=-0.255, omega2=0.6),
        f=ArctanDamped(m=10.0),
        lam=3.0,
    )
    return NamedInstance(
        name="proposition-2",
        problem=problem,
        expected_cline_count=3,
        expected_c=(0.436, 0.776, 0.854),
        expected_terminal_u=None,
        tolerance=DEFAULT_TOLERANCE,
        notes=("reference values match the terminal abscissae of the computed "
               "steady states, not their initial heights (computed initial "
               "heights: about 0.018, 0.383, 0.488)"),
    )


def remark_instances() -> list[NamedInstance]:
    """Qualitative scenarios: concave nonlinearity gives at most one cline;
    a dominance-skewed one can give several once the intensity is large."""
    geometry = StepWeight(alpha=1.0, omega1=-0.21, omega2=0.2)
    concave = NamedInstance(
        name="remark-no-dominance",
        problem=Problem(weight=geometry, f=DegreeOfDominance(k=0.0), lam=45.0),
        expected_cline_count=1,
        expected_c=None,
        expected_terminal_u=None,
        tolerance=DEFAULT_TOLERANCE,
        count_mode="at_most",
    )
    skewed = NamedInstance(
        name="remark-full-dominance",
        problem=Problem(weight=geometry, f=DegreeOfDominance(k=-1.0), lam=45.0),
        expected_cline_count=None,
        expected_c=None,
        expected_terminal_u=None,
        tolerance=DEFAULT_TOLERANCE,
        count_mode="sweep",
    )
    return [concave, skewed]


@dataclass(frozen=True)
class MatchRecord:
    expected_c: float
    found_c: float
    deviation_c: float
    expected_u: Optional[float] = None
    found_u: Optional[float] = None
    deviation_u: Optional[float] = None

    def to_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if v is not None}


@dataclass(eq=False)
class ComparisonReport:
    instance_name: str
    tolerance: float
    matches: list[MatchRecord]
    misses: list[float]    # expected c values with no counterpart
    extras: list[float]    # found c values with no counterpart
    count_expected: int
    count_found: int
    passed: bool

    def to_dict(self) -> dict:
        return {
            "instance": self.instance_name,
            "tolerance": self.tolerance,
            "matches": [m.to_dict() for m in self.matches],
            "misses": list(self.misses),
            "extras": list(self.extras),
            "count_expected": self.count_expected,
            "count_found": self.count_found,
            "passed": self.passed,
        }

    def render(self) -> str:
        lines = [f"instance {self.instance_name}: expected {self.count_expected}, "
                 f"found {self.count_found} (tolerance {self.tolerance:g})"]
        for m in self.matches:
            line = (f"  c {m.found_c:.6f} vs {m.expected_c:.6f} "
                    f"(dev {m.deviation_c:.2e})")
            if m.deviation_u is not None:
                line += (f"; terminal u {m.found_u:.6f} vs {m.expected_u:.6f} "
                         f"(dev {m.deviation_u:.2e})")
            lines.append(line)
        for e in self.misses:
            lines.append(f"  unmatched expectation: c = {e:.6f}")
        for e in self.extras:
            lines.append(f"  extra root found: c = {e:.6f}")
        lines.append(f"  verdict: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)


def _greedy_match(expected: Sequence[float], found: Sequence[float]) -> list[tuple[int, int]]:
    """One-to-one nearest-neighbour pairing by smallest absolute deviation."""
    pairs = sorted((abs(e - f), i, j) for i, e in enumerate(expected)
                   for j, f in enumerate(found))
    used_e: set[int] = set()
    used_f: set[int] = set()
    out = []
    for _, i, j in pairs:
        if i in used_e or j in used_f:
            continue
        used_e.add(i)
        used_f.add(j)
        out.append((i, j))
    return sorted(out)


def compare(instance: NamedInstance, found: Sequence) -> ComparisonReport:
    """Match found clines against the instance's reference values.

    Only meaningful for count_mode "exact": every expectation must be met
    within tolerance, with no extra roots, for the report to pass.
    """
    if instance.count_mode != "exact":
        raise ValueError(f"compare needs an exact-count instance, "
                         f"got count_mode={instance.count_mode!r}")
    expected = list(instance.expected_c or ())
    found_c = [c.c for c in found]
    pairing = _greedy_match(expected, found_c)
    matches: list[MatchRecord] = []
    ok = True
    for i, j in pairing:
        dev_c = abs(expected[i] - found_c[j])
        rec = MatchRecord(expected_c=expected[i], found_c=found_c[j], deviation_c=dev_c)
        if instance.expected_terminal_u is not None:
            eu = instance.expected_terminal_u[i]
            fu = found[j].terminal_u
            rec = MatchRecord(expected_c=expected[i], found_c=found_c[j],
                              deviation_c=dev_c, expected_u=eu, found_u=fu,
                              deviation_u=abs(eu - fu))
            if rec.deviation_u > instance.tolerance:
                ok = False
        if dev_c > instance.tolerance:
            ok = False
        matches.append(rec)
    matched_e = {i for i, _ in pairing}
    matched_f = {j for _, j in pairing}
    misses = [e for i, e in enumerate(expected) if i not in matched_e]
    extras = [f for j, f in enumerate(found_c) if j not in matched_f]
    if misses or extras:
        ok = False
    return ComparisonReport(
        instance_name=instance.name,
        tolerance=instance.tolerance,
        matches=matches,
        misses=misses,
        extras=extras,
        count_expected=len(expected),
        count_found=len(found_c),
        passed=ok,
    )


def run_instance(instance: NamedInstance, cfg: Optional[IntegratorConfig] = None,
                 resolution: int = 2001) -> ClineSearchResult:
    """Convenience wrapper: full cline search on a named instance."""
    if cfg is None:
        cfg = IntegratorConfig()
    return find_all_clines(instance.problem, cfg, resolution=resolution)


def sweep_cline_counts(instance: NamedInstance, lams: Sequence[float],
                       cfg: Optional[IntegratorConfig] = None,
                       resolution: int = 501) -> list[tuple[float, int]]:
    """Validated-cline count as a function of the intensity parameter.

    Reporting harness for the sweep-mode scenario; it asserts nothing."""
    if cfg is None:
        cfg = IntegratorConfig(target_step=1e-3)
    out = []
    for lam in lams:
        p = replace(instance.problem, lam=float(lam))
        res = find_all_clines(p, cfg, resolution=resolution)
        out.append((float(lam), len(res.clines)))
    return out
