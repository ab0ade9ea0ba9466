"""Numerical verification of a :class:`ContentSpec` against the axioms.

The axiom set checked is the continuity variant: [T0] Shannon limit at q=1,
[T1] continuity, [T2] convexity in p, [T3] pseudoadditivity with a nonvanishing
deformation, plus the side conditions (a) ``alpha/phi -> -1`` and (b) the
sign/range coupling of ``alpha`` and ``phi``. Differentiability is not checked.

Every check samples a finite :class:`GridSpec`; a check can only certify what
the grid sees. Failures always carry a witness point.
"""

from __future__ import annotations

import json
import math
import statistics
from dataclasses import dataclass, field
from typing import Callable, Iterable

from .content import (
    ContentSpec,
    _content,
    _shannon,
    info_content_stable,
)
from .errors import EvalDomainError, GridError, InputFormatError, PseudoaddError

__all__ = [
    "GridSpec", "CheckRecord", "AxiomReport", "CHECK_IDS",
    "check_T0", "check_T1_continuity", "check_T2_convexity", "check_T3_residual",
    "check_T3_phi_nonzero", "check_condition_a", "check_condition_b",
    "check_constraint_19", "verify",
]

CHECK_IDS = (
    "T0", "T1-continuity", "T2-convexity", "T3-residual", "T3-phi-nonzero",
    "cond-a", "cond-b", "constraint-19",
)
PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"

LADDER = (2, 3, 4, 5, 6)
DEFAULT_P = tuple(round(0.05 * i, 2) for i in range(1, 21))
DEFAULT_Q_CAP = 3.0

T0_FINAL_TOL = 1e-5
TREND_SLACK = 2.0
TREND_FLOOR = 1e-12
CONVEX_STEP = 1e-4
CONVEX_TOL = 1e-6
SIGN_TOL = 1e-12
T3_TOL = 1e-9
PHI_NONZERO_TOL = 1e-12
COND_A_TOL = 1e-3


# ------------------------------------------------------------------- grids

def _ladder_points(ladder: Iterable[int]) -> list[tuple[int, float, float]]:
    """``(j, side, q)`` for ``q = 1 + side * 10**-j``."""
    return [(j, side, 1.0 + side * 10.0 ** -j) for side in (-1.0, 1.0) for j in ladder]


@dataclass(frozen=True)
class GridSpec:
    """Sample points for the checks.

    ``q_points`` are the base points (1 excluded); the near-1 ladder
    ``1 +- 10**-j`` is always added on top of them.
    """

    q_points: tuple[float, ...]
    p_points: tuple[float, ...] = DEFAULT_P
    ladder: tuple[int, ...] = LADDER

    def __post_init__(self):
        qs = tuple(sorted(set(float(q) for q in self.q_points)))
        ps = tuple(sorted(set(float(p) for p in self.p_points)))
        if any(not q > 0 or q == 1.0 for q in qs):
            raise GridError("q_points must be positive and exclude 1")
        if not ps or any(not 0 < p <= 1 for p in ps):
            raise GridError("p_points must be a non-empty subset of (0, 1]")
        object.__setattr__(self, "q_points", qs)
        object.__setattr__(self, "p_points", ps)
        object.__setattr__(self, "ladder", tuple(sorted(set(int(j) for j in self.ladder))))

    @classmethod
    def default(cls, spec: ContentSpec) -> "GridSpec":
        top = DEFAULT_Q_CAP if spec.q_max is None else min(spec.q_max, DEFAULT_Q_CAP)
        qs = [i / 10 for i in range(1, int(round(top * 10)) + 1)]
        if spec.q_max is not None and spec.q_max <= DEFAULT_Q_CAP:
            qs.append(spec.q_max)
        return cls(tuple(q for q in qs if q != 1.0 and spec.in_domain(q)))

    @classmethod
    def from_dict(cls, data: dict) -> "GridSpec":
        if not isinstance(data, dict) or "q_points" not in data:
            raise InputFormatError('grid JSON must be an object with "q_points" (and optional "p_points")')
        try:
            return cls(tuple(float(q) for q in data["q_points"]),
                       tuple(float(p) for p in data.get("p_points", DEFAULT_P)),
                       tuple(int(j) for j in data.get("ladder", LADDER)))
        except (TypeError, ValueError) as exc:
            raise InputFormatError(f"grid JSON has a non-numeric entry: {exc}") from None

    @classmethod
    def from_json(cls, text: str) -> "GridSpec":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise InputFormatError(f"invalid grid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None

    def ladder_points(self) -> list[tuple[int, float, float]]:
        return _ladder_points(self.ladder)

    def all_q(self) -> tuple[float, ...]:
        return tuple(sorted(set(self.q_points) | {q for _, _, q in self.ladder_points()}))

    def validate(self, spec: ContentSpec) -> None:
        outside = [q for q in self.all_q() if not spec.in_domain(q)]
        if outside:
            raise GridError(f"grid q={outside[0]!r} lies outside the spec domain")


# ----------------------------------------------------------------- reports

@dataclass(frozen=True)
class CheckRecord:
    id: str
    status: str
    max_residual: float
    witness: dict | None = None
    note: str = ""

    def to_dict(self) -> dict:
        return {"id": self.id, "status": self.status, "max_residual": self.max_residual,
                "witness": self.witness, "note": self.note}


@dataclass(frozen=True)
class AxiomReport:
    checks: tuple[CheckRecord, ...]

    def __post_init__(self):
        ids = [c.id for c in self.checks]
        if sorted(ids) != sorted(CHECK_IDS):
            raise ValueError(f"report must contain each check exactly once, got {ids}")

    @property
    def verdict(self) -> str:
        return FAIL if any(c.status == FAIL for c in self.checks) else PASS

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    def __getitem__(self, check_id: str) -> CheckRecord:
        for c in self.checks:
            if c.id == check_id:
                return c
        raise KeyError(check_id)

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "checks": [c.to_dict() for c in self.checks]}

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    def to_text(self) -> str:
        lines = [f"verdict: {self.verdict}"]
        for c in self.checks:
            w = ""
            if c.witness:
                w = "  at " + ", ".join(f"{key}={val!r}" for key, val in c.witness.items())
            lines.append(f"  {c.id:<15} {c.status:<12} max_residual={c.max_residual!r}{w}")
            if c.note:
                lines.append(f"  {'':<15} {c.note}")
        return "\n".join(lines)


class _Tracker:
    """Running maximum of a residual together with its witness."""

    def __init__(self, check_id: str):
        self.id = check_id
        self.worst = 0.0
        self.worst_at: dict | None = None
        self.fail_at: dict | None = None
        self.note = ""

    def see(self, value: float, at: dict, failed: bool) -> None:
        if value > self.worst or self.worst_at is None:
            self.worst, self.worst_at = value, at
        if failed and self.fail_at is None:
            self.fail_at = at

    def error(self, exc: Exception, at: dict) -> None:
        self.worst = math.inf
        self.worst_at = at
        if self.fail_at is None:
            self.fail_at = at
            self.note = f"evaluation error: {exc}"

    def record(self, note: str = "") -> CheckRecord:
        if self.fail_at is not None:
            return CheckRecord(self.id, FAIL, self.worst, self.fail_at, self.note or note)
        return CheckRecord(self.id, PASS, self.worst, None, note)


class _Table:
    """Caches ``phi(q)`` and ``alpha(q)`` per grid point; errors are cached too."""

    def __init__(self, spec: ContentSpec):
        self.spec = spec
        self._cache: dict[float, tuple[float, float] | Exception] = {}

    def phi_alpha(self, q: float) -> tuple[float, float]:
        hit = self._cache.get(q)
        if hit is None:
            try:
                hit = (self.spec.phi(q), self.spec.alpha(q))
            except EvalDomainError as exc:
                hit = exc
            self._cache[q] = hit
        if isinstance(hit, Exception):
            raise hit
        return hit

    def content(self, q: float, p: float) -> float:
        """Plain evaluator (no near-1 rewriting); shares the cache."""
        if q == 1.0:
            return _shannon(self.spec.k, p)
        phi, alpha = self.phi_alpha(q)
        if phi == 0.0:
            raise ZeroDivisionError(f"phi({q!r}) == 0")
        return _content(self.spec.k, phi, alpha, p)


_ERRORS = (PseudoaddError, ArithmeticError)


# ------------------------------------------------------------------ checks

def check_T0(spec: ContentSpec, grid: GridSpec) -> CheckRecord:
    """Shannon limit along the near-1 ladder.

    Per p and per side, ``rho_j = |I(1 +- 10**-j, p) + k ln p| / (1 + |k ln p|)``
    must shrink toward the final rung (each rung at most ``TREND_SLACK`` times
    the previous one) and end at or below ``T0_FINAL_TOL``.
    """
    tr = _Tracker("T0")
    k = spec.k
    rungs = [(j, side, q) for j, side, q in grid.ladder_points() if spec.in_domain(q)]
    if not rungs:
        return CheckRecord("T0", INCONCLUSIVE, math.nan, None, "no ladder point lies in the spec domain")
    for p in grid.p_points:
        target = _shannon(k, p)
        for side in (-1.0, 1.0):
            prev = None
            for j, s, q in rungs:
                if s != side:
                    continue
                at = {"q": q, "p": p}
                try:
                    rho = abs(info_content_stable(spec, q, p) - target) / (1.0 + abs(target))
                except _ERRORS as exc:
                    tr.error(exc, at)
                    break
                if not math.isfinite(rho):
                    tr.error(ArithmeticError("non-finite content"), at)
                    break
                final = j == grid.ladder[-1]
                bad = prev is not None and rho > TREND_SLACK * prev + TREND_FLOOR
                if final:
                    bad = bad or rho > T0_FINAL_TOL
                    tr.see(rho, at, bad)
                elif bad:
                    tr.see(0.0, at, True)
                prev = rho
    return tr.record(f"final-rung tolerance {T0_FINAL_TOL}, residual must shrink along the ladder")


def _bisect_jump(f: Callable[[float], float], a: float, b: float, fa: float, fb: float,
                 steps: int = 40) -> tuple[bool, float]:
    """Chase a jump between ``a`` and ``b``; True if it survives halving.

    Returns ``(suspect, q)``. A continuous function's jump shrinks with the
    interval; a discontinuity keeps it. Evaluation errors inside the interval
    count as suspect.
    """
    j0 = abs(fb - fa)
    floor = 1e-9 * (1.0 + abs(fa) + abs(fb))
    for _ in range(steps):
        m = 0.5 * (a + b)
        if not a < m < b:
            break
        try:
            fm = f(m)
        except _ERRORS:
            return True, m
        if not math.isfinite(fm):
            return True, m
        if abs(fm - fa) >= abs(fb - fm):
            b, fb = m, fm
        else:
            a, fa = m, fm
    jump = abs(fb - fa)
    return jump > 0.25 * j0 and jump > floor, 0.5 * (a + b)


def _screen(qs: list[float], vs: list[float]) -> list[int]:
    """Indices of gaps whose slope stands out against the row's typical slope."""
    slopes = [abs(vs[i + 1] - vs[i]) / (qs[i + 1] - qs[i]) for i in range(len(qs) - 1)]
    if not slopes:
        return []
    lipschitz = 10.0 * statistics.median(slopes)
    scale = 1e-9 * (1.0 + max(abs(v) for v in vs))
    return [i for i, s in enumerate(slopes)
            if s > lipschitz and abs(vs[i + 1] - vs[i]) > scale]


def check_T1_continuity(spec: ContentSpec, grid: GridSpec) -> CheckRecord:
    """Continuity in q of ``phi`` and of ``I_q(p)`` at each grid p.

    Non-finite values or evaluation errors at grid points fail the check.
    Jumps are screened against a Lipschitz-style threshold and then chased by
    bisection; a jump that survives is only *suspected* (status inconclusive),
    because continuity cannot be decided from samples.
    """
    tr = _Tracker("T1-continuity")
    qs = list(grid.all_q())
    if spec.in_domain(1.0):
        qs = sorted(set(qs) | {1.0})
    rows: list[tuple[dict, Callable[[float], float]]] = [({}, lambda q: spec.phi(q))]
    for p in grid.p_points:
        rows.append(({"p": p}, lambda q, p=p: info_content_stable(spec, q, p)))

    suspect: dict | None = None
    largest = 0.0
    for label, f in rows:
        vals = []
        for q in qs:
            at = {"q": q, **label}
            try:
                v = f(q)
            except _ERRORS as exc:
                tr.error(exc, at)
                break
            if not math.isfinite(v):
                tr.error(ArithmeticError("non-finite value"), at)
                break
            vals.append(v)
        else:
            for i in _screen(qs, vals):
                hit, where = _bisect_jump(f, qs[i], qs[i + 1], vals[i], vals[i + 1])
                if hit:
                    jump = abs(vals[i + 1] - vals[i])
                    if suspect is None or jump > largest:
                        largest = jump
                        suspect = {"q": where, **label}
    if tr.fail_at is not None:
        return tr.record()
    if suspect is not None:
        what = "phi" if "p" not in suspect else "I_q(p)"
        return CheckRecord("T1-continuity", INCONCLUSIVE, largest, suspect,
                           f"suspected discontinuity of {what} in q (heuristic)")
    return CheckRecord("T1-continuity", PASS, 0.0, None,
                       "no jump survived bisection; continuity is not decidable from samples")


def _convexity_sign(k: float, phi: float, alpha: float) -> float:
    return k * (alpha / phi) * (alpha - 1.0)


def _sign_condition(spec: ContentSpec, grid: GridSpec, table: _Table, check_id: str) -> CheckRecord:
    tr = _Tracker(check_id)
    for q in grid.all_q():
        at = {"q": q}
        try:
            phi, alpha = table.phi_alpha(q)
            c = _convexity_sign(spec.k, phi, alpha)
        except _ERRORS as exc:
            tr.error(exc, at)
            continue
        if not math.isfinite(c):
            tr.error(ArithmeticError("non-finite k*(alpha/phi)*(alpha-1)"), at)
            continue
        tr.see(max(0.0, -c), at, c < -SIGN_TOL)
    return tr.record("k*(alpha/phi)*(alpha-1) >= 0")


def check_T2_convexity(spec: ContentSpec, grid: GridSpec, _table: _Table | None = None) -> CheckRecord:
    """Convexity in p: divided second differences plus the closed-form sign rule.

    ``(I(p+h) - 2 I(p) + I(p-h)) / h**2 >= -CONVEX_TOL * (1 + |I(p)|)`` at every
    interior grid p (``h = CONVEX_STEP``), and ``k (alpha/phi)(alpha - 1) >= 0``
    at every grid q.
    """
    table = _table or _Table(spec)
    tr = _Tracker("T2-convexity")
    h = CONVEX_STEP
    interior = [p for p in grid.p_points if p - h > 0 and p + h <= 1.0]
    for q in grid.all_q():
        for p in interior:
            at = {"q": q, "p": p}
            try:
                lo = info_content_stable(spec, q, p - h)
                mid = info_content_stable(spec, q, p)
                hi = info_content_stable(spec, q, p + h)
            except _ERRORS as exc:
                tr.error(exc, at)
                continue
            d2 = (hi - 2.0 * mid + lo) / (h * h)
            if not math.isfinite(d2):
                tr.error(ArithmeticError("non-finite second difference"), at)
                continue
            shortfall = max(0.0, -d2) / (1.0 + abs(mid))
            tr.see(shortfall, at, shortfall > CONVEX_TOL)
    sign = _sign_condition(spec, grid, table, "T2-convexity")
    if tr.fail_at is None and sign.status == FAIL:
        return CheckRecord("T2-convexity", FAIL, max(tr.worst, sign.max_residual), sign.witness,
                           "closed-form sign rule k*(alpha/phi)*(alpha-1) >= 0 violated")
    return tr.record("second differences and k*(alpha/phi)*(alpha-1) >= 0")


def check_constraint_19(spec: ContentSpec, grid: GridSpec, _table: _Table | None = None) -> CheckRecord:
    """Closed-form convexity constraint ``k (alpha/phi)(alpha - 1) >= 0`` alone."""
    return _sign_condition(spec, grid, _table or _Table(spec), "constraint-19")


def check_T3_residual(spec: ContentSpec, grid: GridSpec, _table: _Table | None = None) -> CheckRecord:
    """Pseudoadditivity residual over all grid ``(q, p1, p2)``.

    ``q = 1`` is included when admissible: there the content is the Shannon one
    and the residual exposes any ``phi(1) != 0``. Residuals are scaled by
    ``1 + |I(p1 p2)|/k`` so that steep contents are judged by rounding level.
    """
    table = _table or _Table(spec)
    tr = _Tracker("T3-residual")
    qs = list(grid.all_q())
    if spec.in_domain(1.0):
        qs = sorted(set(qs) | {1.0})
    k = spec.k
    ps = grid.p_points
    for q in qs:
        try:
            phi = table.phi_alpha(q)[0]
            single = {p: table.content(q, p) / k for p in ps}
        except _ERRORS as exc:
            tr.error(exc, {"q": q})
            continue
        for i, p1 in enumerate(ps):
            for p2 in ps[i:]:
                at = {"q": q, "p1": p1, "p2": p2}
                try:
                    joint = table.content(q, p1 * p2) / k
                except _ERRORS as exc:
                    tr.error(exc, at)
                    continue
                a, b = single[p1], single[p2]
                res = abs(joint - a - b - phi * a * b) / (1.0 + abs(joint))
                if not math.isfinite(res):
                    tr.error(ArithmeticError("non-finite residual"), at)
                    continue
                tr.see(res, at, res > T3_TOL)
    return tr.record(f"scaled residual tolerance {T3_TOL}")


def check_T3_phi_nonzero(spec: ContentSpec, grid: GridSpec, _table: _Table | None = None) -> CheckRecord:
    """``phi(q) != 0`` for ``q != 1``: ``|phi| > PHI_NONZERO_TOL`` off the ladder, nonzero on it."""
    table = _table or _Table(spec)
    tr = _Tracker("T3-phi-nonzero")
    ladder = {q for _, _, q in grid.ladder_points()}
    for q in grid.all_q():
        at = {"q": q}
        try:
            phi = table.phi_alpha(q)[0]
        except _ERRORS as exc:
            tr.error(exc, at)
            continue
        threshold = 0.0 if q in ladder else PHI_NONZERO_TOL
        shortfall = max(0.0, threshold - abs(phi))
        tr.see(shortfall, at, abs(phi) <= threshold)
    return tr.record(
        "a sign change of phi between grid points without a sampled zero is not detected; "
        "by the intermediate value theorem such a spec would need phi = 0 somewhere")


def check_condition_a(spec: ContentSpec, grid: GridSpec, _table: _Table | None = None) -> CheckRecord:
    """``alpha/phi -> -1`` on both sides of 1.

    ``|r_j + 1|`` must not grow by more than ``TREND_SLACK`` per rung and must
    end at or below ``COND_A_TOL``.
    """
    table = _table or _Table(spec)
    tr = _Tracker("cond-a")
    rungs = [(j, side, q) for j, side, q in grid.ladder_points() if spec.in_domain(q)]
    if not rungs:
        return CheckRecord("cond-a", INCONCLUSIVE, math.nan, None, "no ladder point lies in the spec domain")
    for side in (-1.0, 1.0):
        prev = None
        for j, s, q in rungs:
            if s != side:
                continue
            at = {"q": q}
            try:
                phi, alpha = table.phi_alpha(q)
                err = abs(alpha / phi + 1.0)
            except _ERRORS as exc:
                tr.error(exc, at)
                break
            if not math.isfinite(err):
                tr.error(ArithmeticError("non-finite alpha/phi"), at)
                break
            bad = prev is not None and err > TREND_SLACK * prev + TREND_FLOOR
            if j == grid.ladder[-1]:
                tr.see(err, at, bad or err > COND_A_TOL)
            elif bad:
                tr.see(0.0, at, True)
            prev = err
    return tr.record(f"|alpha/phi + 1| at the last rung <= {COND_A_TOL}, nonincreasing within factor {TREND_SLACK}")


def check_condition_b(spec: ContentSpec, grid: GridSpec, _table: _Table | None = None) -> CheckRecord:
    """``phi > 0 => alpha <= 0`` and ``phi < 0 => 0 <= alpha <= 1`` at grid q."""
    table = _table or _Table(spec)
    tr = _Tracker("cond-b")
    for q in grid.all_q():
        at = {"q": q}
        try:
            phi, alpha = table.phi_alpha(q)
        except _ERRORS as exc:
            tr.error(exc, at)
            continue
        if phi > 0:
            excess = max(0.0, alpha)
        elif phi < 0:
            excess = max(0.0, -alpha, alpha - 1.0)
        else:
            excess = 0.0
        tr.see(excess, at, excess > SIGN_TOL)
    return tr.record("checked at grid points only; sign changes of phi between points are covered by T3-phi-nonzero")


def verify(spec: ContentSpec, grid: GridSpec | None = None) -> AxiomReport:
    """Run every check and assemble the report (verdict fails iff some check fails)."""
    grid = grid or GridSpec.default(spec)
    grid.validate(spec)
    table = _Table(spec)
    return AxiomReport((
        check_T0(spec, grid),
        check_T1_continuity(spec, grid),
        check_T2_convexity(spec, grid, table),
        check_T3_residual(spec, grid, table),
        check_T3_phi_nonzero(spec, grid, table),
        check_condition_a(spec, grid, table),
        check_condition_b(spec, grid, table),
        check_constraint_19(spec, grid, table),
    ))
