"""Estimate ``(k, phi, alpha)`` from tabulated samples of a black-box content.

Only the samples are used, never expressions. With ``f = 1 + phi*I/k`` the
pseudoadditivity rule turns into ``f(p1 p2) = f(p1) f(p2)``, whose continuous
solutions are ``p**alpha``; so one pair ``(p_ref, p_ref**2)`` per q pins down
``phi`` and then ``alpha``, and a near-1 group pins down ``k``.
"""

from __future__ import annotations

import csv
import io
import math
import statistics
from dataclasses import dataclass
from typing import Iterable

from .content import EPS_PHI, _exprel
from .errors import (
    DegenerateSampleError,
    InconsistentSampleError,
    InputFormatError,
    InvalidTableError,
    MissingAnchorError,
)

__all__ = [
    "SampleTable", "RecoveryRow", "RecoveryResult",
    "recover_k", "recover_phi", "recover_alpha", "recover",
    "P_REF", "ANCHOR_TOL", "FLAG_TOL",
]

P_REF = 0.5
ANCHOR_TOL = 1e-6
FLAG_TOL = 1e-6
ONE_TOL = 1e-9
DEGENERATE_I = 1e-12


def _fmt(x: float) -> str:
    return repr(float(x))


@dataclass(frozen=True)
class SampleTable:
    rows: tuple[tuple[float, float, float], ...]

    def __init__(self, rows: Iterable[tuple[float, float, float]]):
        clean = []
        seen = set()
        for q, p, value in rows:
            q, p, value = float(q), float(p), float(value)
            if not (math.isfinite(q) and q > 0):
                raise InvalidTableError(f"q must be positive and finite, got {q!r}")
            if not 0 < p <= 1:
                raise InvalidTableError(f"p must lie in (0, 1], got {p!r} (q={q!r})")
            if not math.isfinite(value):
                raise InvalidTableError(f"I must be finite, got {value!r} at q={q!r}, p={p!r}")
            if p == 1.0 and abs(value) > ONE_TOL:
                raise InvalidTableError(f"I(1) must vanish, got {value!r} at q={q!r}")
            if (q, p) in seen:
                raise InvalidTableError(f"duplicate sample at q={q!r}, p={p!r}")
            seen.add((q, p))
            clean.append((q, p, value))
        object.__setattr__(self, "rows", tuple(clean))

    def groups(self) -> dict[float, dict[float, float]]:
        out: dict[float, dict[float, float]] = {}
        for q, p, value in self.rows:
            out.setdefault(q, {})[p] = value
        return dict(sorted(out.items()))

    def lookup(self, q: float, p: float) -> float:
        """``I`` at ``(q, p)``; p is matched to 12 significant digits."""
        group = self.groups().get(q)
        if group is None:
            raise MissingAnchorError(f"no samples at q={q!r}")
        return _lookup(group, p, q)

    # CSV: header "q,p,I", one row per sample
    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("q,p,I\n")
        for q, p, value in self.rows:
            buf.write(f"{_fmt(q)},{_fmt(p)},{_fmt(value)}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, source: str = "<table>") -> "SampleTable":
        lines = [(n, line) for n, line in enumerate(text.splitlines(), start=1)
                 if line.strip() and not line.lstrip().startswith("#")]
        if not lines:
            raise InputFormatError(f"{source}: empty sample table")
        n0, header = lines[0]
        if [c.strip() for c in header.split(",")] != ["q", "p", "I"]:
            raise InputFormatError(f'{source}: line {n0}: expected header "q,p,I"')
        rows = []
        for lineno, line in lines[1:]:
            cells = next(csv.reader([line]))
            if len(cells) != 3:
                raise InputFormatError(f"{source}: line {lineno}: expected 3 fields, got {len(cells)}")
            try:
                rows.append(tuple(float(c) for c in cells))
            except ValueError:
                raise InputFormatError(f"{source}: line {lineno}: non-numeric field in {line!r}") from None
        return cls(rows)


def _lookup(group: dict[float, float], p: float, q: float) -> float:
    if p in group:
        return group[p]
    for pp, value in group.items():
        if math.isclose(pp, p, rel_tol=1e-12, abs_tol=0.0):
            return value
    raise MissingAnchorError(f"no sample at p={p!r} for q={q!r}")


@dataclass(frozen=True)
class RecoveryRow:
    q: float
    phi_hat: float
    alpha_hat: float
    residual: float

    @property
    def flagged(self) -> bool:
        return not self.residual <= FLAG_TOL


@dataclass(frozen=True)
class RecoveryResult:
    k_hat: float
    rows: tuple[RecoveryRow, ...]

    @property
    def flagged(self) -> tuple[RecoveryRow, ...]:
        return tuple(r for r in self.rows if r.flagged)

    def row(self, q: float) -> RecoveryRow:
        for r in self.rows:
            if r.q == q:
                return r
        raise KeyError(q)

    # CSV: "# k_hat=<value>" then header "q,phi_hat,alpha_hat,residual"
    def to_csv(self) -> str:
        lines = [f"# k_hat={_fmt(self.k_hat)}", "q,phi_hat,alpha_hat,residual"]
        lines += [f"{_fmt(r.q)},{_fmt(r.phi_hat)},{_fmt(r.alpha_hat)},{_fmt(r.residual)}" for r in self.rows]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str, source: str = "<result>") -> "RecoveryResult":
        lines = [line for line in text.splitlines() if line.strip()]
        if len(lines) < 2 or not lines[0].startswith("# k_hat="):
            raise InputFormatError(f'{source}: expected a leading "# k_hat=<value>" line')
        if lines[1].strip() != "q,phi_hat,alpha_hat,residual":
            raise InputFormatError(f'{source}: line 2: expected header "q,phi_hat,alpha_hat,residual"')
        try:
            k_hat = float(lines[0][len("# k_hat="):])
            rows = tuple(RecoveryRow(*(float(c) for c in line.split(","))) for line in lines[2:])
        except (TypeError, ValueError) as exc:
            raise InputFormatError(f"{source}: malformed recovery CSV: {exc}") from None
        return cls(k_hat, rows)

    def to_dict(self) -> dict:
        return {"k_hat": self.k_hat,
                "rows": [{"q": r.q, "phi_hat": r.phi_hat, "alpha_hat": r.alpha_hat,
                          "residual": r.residual, "flagged": r.flagged} for r in self.rows]}


def _near_one(q: float) -> bool:
    return abs(q - 1.0) <= ANCHOR_TOL * (1.0 + 1e-9)


def recover_k(table: SampleTable) -> float:
    """Median of ``-I / ln p`` over every sample with ``|q - 1| <= 1e-6`` and ``p < 1``."""
    estimates = [-value / math.log(p) for q, p, value in table.rows if _near_one(q) and p < 1.0]
    if not estimates:
        raise MissingAnchorError(f"need samples with |q - 1| <= {ANCHOR_TOL} and p < 1 to fix k")
    k = statistics.median(estimates)
    if not k > 0:
        raise InvalidTableError(f"recovered k = {k!r} is not positive")
    return k


def recover_phi(table: SampleTable, k: float, q: float, p_ref: float = P_REF) -> float:
    """``k (I(p_ref**2) - 2 I(p_ref)) / I(p_ref)**2``."""
    i1 = table.lookup(q, p_ref)
    i2 = table.lookup(q, p_ref * p_ref)
    if abs(i1) < DEGENERATE_I:
        raise DegenerateSampleError(f"I({p_ref!r}) = {i1!r} at q={q!r} is too small to divide by")
    return k * (i2 - 2.0 * i1) / (i1 * i1)


def _alpha_hat(k: float, phi_hat: float, i_ref: float, p_ref: float, q: float) -> tuple[float, float]:
    """``(alpha_hat, alpha_hat/phi_hat)``; the ratio stays finite as phi_hat -> 0."""
    x = phi_hat * i_ref / k
    log_p = math.log(p_ref)
    if abs(phi_hat) < EPS_PHI:
        # log1p(x) = x (1 - x/2 + ...), so alpha/phi = (I/k)/ln p * (1 - x/2)
        ratio = i_ref / (k * log_p) * (1.0 - 0.5 * x)
        return phi_hat * ratio, ratio
    if not 1.0 + x > 0.0:
        raise InconsistentSampleError(
            f"1 + phi_hat*I/k = {1.0 + x!r} <= 0 at q={q!r}; samples are not of power form")
    alpha = math.log1p(x) / log_p
    return alpha, alpha / phi_hat


def recover_alpha(table: SampleTable, k: float, phi_hat: float, q: float, p_ref: float = P_REF) -> float:
    """``ln(1 + phi_hat I(p_ref)/k) / ln(p_ref)``."""
    if not 0 < p_ref < 1:
        raise ValueError("p_ref must lie strictly between 0 and 1")
    return _alpha_hat(k, phi_hat, table.lookup(q, p_ref), p_ref, q)[0]


def _reproduce(k: float, phi: float, alpha: float, ratio: float, p: float) -> float:
    if p == 1.0:
        return 0.0
    if abs(phi) < EPS_PHI:
        log_p = math.log(p)
        return k * ratio * log_p * _exprel(alpha * log_p)
    return k / phi * math.expm1(alpha * math.log(p))


def recover(table: SampleTable, p_ref: float = P_REF) -> RecoveryResult:
    """Estimate ``k``, then ``phi`` and ``alpha`` per q group.

    Each row's residual is the worst of (i) the relative misfit
    ``|I - I_hat| / (1 + |I|)`` over every sample of the group and (ii) the
    scaled pseudoadditivity residual on every sampled triple
    ``(p1, p2, p1*p2)``. Rows above ``FLAG_TOL`` are flagged.
    """
    groups = table.groups()
    if not groups:
        raise MissingAnchorError("empty sample table")
    k = recover_k(table)
    rows = []
    for q, group in groups.items():
        phi = recover_phi(table, k, q, p_ref)
        alpha, ratio = _alpha_hat(k, phi, _lookup(group, p_ref, q), p_ref, q)
        residual = 0.0
        for p, value in group.items():
            fit = _reproduce(k, phi, alpha, ratio, p)
            residual = max(residual, abs(value - fit) / (1.0 + abs(value)))
        ps = sorted(group)
        for i, p1 in enumerate(ps):
            for p2 in ps[i:]:
                try:
                    joint = _lookup(group, p1 * p2, q) / k
                except MissingAnchorError:
                    continue
                a, b = group[p1] / k, group[p2] / k
                residual = max(residual, abs(joint - a - b - phi * a * b) / (1.0 + abs(joint)))
        rows.append(RecoveryRow(q, phi, alpha, residual))
    return RecoveryResult(k, tuple(rows))
