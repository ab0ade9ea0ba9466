"""Information-content functions ``I_q(p) = (k/phi(q)) * (p**alpha(q) - 1)``.

A :class:`ContentSpec` bundles the scale ``k`` with user expressions for the
deformation ``phi(q)`` and the exponent ``alpha(q)``. Specs are deliberately
not validated against the axioms on construction; :mod:`pseudoadd.axioms`
does that, and it needs to be able to hold invalid specs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable

from .errors import (
    DegenerateSpecError,
    EvalDomainError,
    InputFormatError,
    InvalidSpecError,
    OutOfDomainError,
    UnknownPresetError,
    ZeroPhiError,
)
from .exprlang import Expr, parse

__all__ = [
    "ContentSpec", "QPoint", "PRESETS", "preset",
    "info_content", "info_content_stable", "pseudoadditivity_residual",
    "alpha_over_phi", "tabulate", "EPS_PHI",
]

EPS_PHI = 1e-8
SERIES_SWITCH = 1e-5
# step of the symmetric ratio estimate used when phi(q) is tiny
RATIO_STEP = 1e-4


@dataclass(frozen=True)
class ContentSpec:
    k: float
    phi: Expr
    alpha: Expr
    q_min: float = 0.0
    q_max: float | None = None

    def __post_init__(self):
        if not (math.isfinite(self.k) and self.k > 0):
            raise InvalidSpecError(f"k must be a positive finite number, got {self.k!r}")
        if not (math.isfinite(self.q_min) and self.q_min >= 0):
            raise InvalidSpecError(f"q_min must be finite and >= 0, got {self.q_min!r}")
        if self.q_max is not None and not self.q_max > self.q_min:
            raise InvalidSpecError(f"q_max={self.q_max!r} must exceed q_min={self.q_min!r}")

    @classmethod
    def from_strings(cls, k: float, phi: str, alpha: str,
                     q_min: float = 0.0, q_max: float | None = None) -> "ContentSpec":
        return cls(float(k), parse(phi, "q"), parse(alpha, "q"), float(q_min),
                   None if q_max is None else float(q_max))

    def in_domain(self, q: float) -> bool:
        """Domain is ``q_min < q <= q_max`` (upper end open when ``q_max`` is None)."""
        return q > self.q_min and (self.q_max is None or q <= self.q_max)

    def with_domain(self, q_min: float = 0.0, q_max: float | None = None) -> "ContentSpec":
        return ContentSpec(self.k, self.phi, self.alpha, q_min, q_max)

    # JSON: {"k": number, "phi": string, "alpha": string, "q_min": number, "q_max": number|null}
    def to_dict(self) -> dict:
        return {"k": self.k, "phi": self.phi.source, "alpha": self.alpha.source,
                "q_min": self.q_min, "q_max": self.q_max}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "ContentSpec":
        if not isinstance(data, dict):
            raise InputFormatError("content spec JSON must be an object")
        missing = [key for key in ("k", "phi", "alpha") if key not in data]
        if missing:
            raise InputFormatError(f"content spec JSON is missing field(s): {', '.join(missing)}")
        if not isinstance(data["phi"], str) or not isinstance(data["alpha"], str):
            raise InputFormatError("content spec fields 'phi' and 'alpha' must be strings")
        try:
            k = float(data["k"])
            q_min = float(data.get("q_min", 0.0))
            q_max = data.get("q_max")
            q_max = None if q_max is None else float(q_max)
        except (TypeError, ValueError) as exc:
            raise InputFormatError(f"content spec JSON has a non-numeric field: {exc}") from None
        return cls.from_strings(k, data["phi"], data["alpha"], q_min, q_max)

    @classmethod
    def from_json(cls, text: str) -> "ContentSpec":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputFormatError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
        return cls.from_dict(data)


@dataclass(frozen=True)
class QPoint:
    q: float
    p: float

    def __post_init__(self):
        if not self.q > 0:
            raise OutOfDomainError(f"q must be positive, got {self.q!r}")
        if not 0 < self.p <= 1:
            raise OutOfDomainError(f"p must lie in (0, 1], got {self.p!r}")


PRESETS = {
    # alpha = -phi; condition (b) fails for q > 2, hence the closed upper end
    "suyari": dict(k=1.0, phi="1 - q", alpha="q - 1", q_min=0.0, q_max=2.0),
    "hc": dict(k=1.0 / math.log(2.0), phi="(1 - 2^(1 - q)) / ln(2)", alpha="1 - q",
               q_min=0.0, q_max=None),
}


def preset(name: str) -> ContentSpec:
    try:
        kw = PRESETS[name]
    except KeyError:
        raise UnknownPresetError(
            f"unknown preset {name!r}; choose from {', '.join(sorted(PRESETS))}") from None
    return ContentSpec.from_strings(**kw)


# ----------------------------------------------------------------- helpers

def _check_point(spec: ContentSpec, q: float, p: float) -> None:
    if not spec.in_domain(q):
        hi = "inf)" if spec.q_max is None else f"{spec.q_max!r}]"
        raise OutOfDomainError(f"q={q!r} outside the spec domain ({spec.q_min!r}, {hi}")
    if not 0 < p <= 1:
        raise OutOfDomainError(f"p must lie in (0, 1], got {p!r}")


def _powm1(p: float, alpha: float) -> float:
    """``p**alpha - 1`` without cancellation when the power is close to 1."""
    t = alpha * math.log(p)
    if abs(t) < 1.0:
        return math.expm1(t)
    return p ** alpha - 1.0


def _exprel(t: float) -> float:
    """``(e**t - 1) / t``, finite at ``t = 0``."""
    if abs(t) < SERIES_SWITCH:
        return 1.0 + t / 2.0 + t * t / 6.0
    return math.expm1(t) / t


def _content(k: float, phi: float, alpha: float, p: float) -> float:
    if p == 1.0:
        return 0.0
    return k / phi * _powm1(p, alpha)


def _shannon(k: float, p: float) -> float:
    return 0.0 if p == 1.0 else -k * math.log(p)


def _ratio(spec: ContentSpec, q: float) -> float:
    return spec.alpha(q) / spec.phi(q)


def alpha_over_phi(spec: ContentSpec, q: float, phi: float | None = None,
                   alpha: float | None = None, step: float = RATIO_STEP) -> float:
    """Estimate ``alpha(q)/phi(q)`` where ``phi(q)`` may be tiny.

    Both expressions are typically evaluated with heavy cancellation near their
    common root (``1 - 2^(1-q)`` loses ~8 digits at ``|q-1| = 1e-9``), so the
    ratio is taken from a fourth-order symmetric average of the ratio at
    ``q +- step`` and ``q +- 2*step`` where it is well conditioned. Falls back
    to the direct quotient when those points are unusable.
    """
    if phi is None:
        phi = spec.phi(q)
    if alpha is None:
        alpha = spec.alpha(q)
    # q == 1 is the removable point itself; elsewhere 0/0 means a broken spec
    if q != 1.0 and abs(phi) < 1e-300 and abs(alpha) < 1e-300:
        raise DegenerateSpecError(f"alpha/phi is 0/0 at q={q!r}")
    try:
        if not (spec.in_domain(q - 2 * step) and spec.in_domain(q + 2 * step)):
            raise OutOfDomainError("ratio stencil leaves the domain")
        near = 0.5 * (_ratio(spec, q - step) + _ratio(spec, q + step))
        far = 0.5 * (_ratio(spec, q - 2 * step) + _ratio(spec, q + 2 * step))
        estimate = (4.0 * near - far) / 3.0
        if math.isfinite(estimate):
            return estimate
    except (ZeroDivisionError, EvalDomainError, OutOfDomainError):
        pass
    if phi == 0.0:
        if q == 1.0:
            raise DegenerateSpecError("alpha/phi at q=1 needs the neighbourhood of 1 inside the domain")
        raise ZeroPhiError(q)
    return alpha / phi


# -------------------------------------------------------------- operations

def info_content(spec: ContentSpec, q: float, p: float) -> float:
    """``I_q(p)``; at ``q == 1`` exactly this is the Shannon content ``-k ln p``."""
    _check_point(spec, q, p)
    if q == 1.0:
        return _shannon(spec.k, p)
    phi = spec.phi(q)
    if phi == 0.0:
        raise ZeroPhiError(q)
    return _content(spec.k, phi, spec.alpha(q), p)


def info_content_stable(spec: ContentSpec, q: float, p: float, eps_phi: float = EPS_PHI) -> float:
    """Like :func:`info_content`, but well conditioned for ``|phi(q)| < eps_phi``.

    In that regime the value is rewritten as
    ``k * (alpha/phi) * ln(p) * (exp(t) - 1)/t`` with ``t = alpha*ln(p)``.
    """
    if not eps_phi > 0:
        raise ValueError("eps_phi must be positive")
    _check_point(spec, q, p)
    if q == 1.0:
        return _shannon(spec.k, p)
    phi = spec.phi(q)
    alpha = spec.alpha(q)
    if abs(phi) >= eps_phi:
        return _content(spec.k, phi, alpha, p)
    if p == 1.0:
        return 0.0
    ratio = alpha_over_phi(spec, q, phi, alpha)
    log_p = math.log(p)
    return spec.k * ratio * log_p * _exprel(alpha * log_p)


def pseudoadditivity_residual(spec: ContentSpec, q: float, p1: float, p2: float) -> float:
    """``I(p1 p2)/k - I(p1)/k - I(p2)/k - phi(q) I(p1) I(p2) / k**2``."""
    k = spec.k
    a = info_content(spec, q, p1) / k
    b = info_content(spec, q, p2) / k
    ab = info_content(spec, q, p1 * p2) / k
    return ab - a - b - spec.phi(q) * a * b


def tabulate(spec: ContentSpec, q_points: Iterable[float], p_points: Iterable[float],
             eps_phi: float = EPS_PHI) -> list[tuple[float, float, float]]:
    """Rows ``(q, p, I_q(p))`` in grid order, using the stable evaluator."""
    ps = list(p_points)
    return [(q, p, info_content_stable(spec, q, p, eps_phi)) for q in q_points for p in ps]
