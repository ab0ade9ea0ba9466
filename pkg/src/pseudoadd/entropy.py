"""Generalized expectation, nonextensive entropy and divergence.

All averages use the unnormalized weights ``p_i**(1 - alpha(q))``. Outcomes
with zero probability are dropped whenever that weight tends to zero (or is
the ``0**0`` case), which keeps the entropy expansible.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .content import (
    EPS_PHI,
    ContentSpec,
    _check_point,
    _exprel,
    alpha_over_phi,
    info_content_stable,
)
from .errors import DistributionError, DivergentExpectationError, InputFormatError, ZeroPhiError

__all__ = [
    "Distribution", "Observable", "g_expectation", "entropy", "kl_divergence",
    "shannon_bits", "load_distribution", "load_observable", "NORM_TOL",
]

NORM_TOL = 1e-9


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Distribution:
    p: np.ndarray

    def __init__(self, weights: Sequence[float], renormalize: bool = False):
        arr = np.array(weights, dtype=float).reshape(-1)
        if arr.size < 1:
            raise DistributionError("a distribution needs at least one outcome")
        if not np.all(np.isfinite(arr)) or np.any(arr < 0):
            raise DistributionError("probabilities must be finite and nonnegative")
        total = float(math.fsum(arr))
        if renormalize:
            if total <= 0:
                raise DistributionError("cannot renormalize an all-zero vector")
            arr = arr / total
        elif abs(total - 1.0) > NORM_TOL:
            raise DistributionError(f"probabilities sum to {total!r}, not 1 (tolerance {NORM_TOL})")
        object.__setattr__(self, "p", _frozen(arr))

    def __len__(self) -> int:
        return self.p.size

    def __eq__(self, other) -> bool:
        return isinstance(other, Distribution) and np.array_equal(self.p, other.p)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class Observable:
    x: np.ndarray

    def __init__(self, values: Sequence[float]):
        arr = np.array(values, dtype=float).reshape(-1)
        if not np.all(np.isfinite(arr)):
            raise DistributionError("observable values must be finite")
        object.__setattr__(self, "x", _frozen(arr))

    def __len__(self) -> int:
        return self.x.size


def _exponent(spec: ContentSpec, q: float) -> float:
    return 1.0 if q == 1.0 else 1.0 - spec.alpha(q)


def _weights(p: np.ndarray, expo: float) -> np.ndarray:
    """``p**expo`` with zero-probability outcomes contributing nothing."""
    zero = p == 0
    if np.any(zero) and expo < 0:
        raise DivergentExpectationError(
            f"zero-probability outcome with negative weight exponent {expo!r}")
    w = np.zeros_like(p)
    w[~zero] = p[~zero] ** expo
    return w


def g_expectation(spec: ContentSpec, dist: Distribution, obs: Observable, q: float) -> float:
    """``sum_i p_i**(1 - alpha(q)) * X_i``; the ordinary mean at ``q == 1``."""
    if len(obs) != len(dist):
        raise DistributionError(f"observable has {len(obs)} values, distribution {len(dist)}")
    _check_point(spec, q, 1.0)
    w = _weights(dist.p, _exponent(spec, q))
    return float(np.dot(w, obs.x))


def entropy(spec: ContentSpec, dist: Distribution, q: float, eps_phi: float = EPS_PHI) -> float:
    """Nonextensive entropy ``(k/phi) * (1 - sum_i p_i**(1 - alpha))``.

    ``q == 1`` gives the Shannon value ``-k sum p ln p``. When ``|phi(q)|`` is
    below ``eps_phi`` the closed form is 0/0-prone, so the expectation of the
    stable content values is returned instead.
    """
    _check_point(spec, q, 1.0)
    p = dist.p
    if q == 1.0:
        nz = p[p > 0]
        return float(-spec.k * np.sum(nz * np.log(nz))) + 0.0
    phi = spec.phi(q)
    w = _weights(p, 1.0 - spec.alpha(q))
    if abs(phi) < eps_phi:
        support = np.flatnonzero(p > 0)
        return float(sum(w[i] * info_content_stable(spec, q, float(p[i]), eps_phi) for i in support))
    if phi == 0.0:
        raise ZeroPhiError(q)
    return spec.k / phi * (1.0 - float(np.sum(w)))


def shannon_bits(dist: Distribution) -> float:
    nz = dist.p[dist.p > 0]
    return float(-np.sum(nz * np.log2(nz))) + 0.0


def kl_divergence(spec: ContentSpec, pA: Distribution, pB: Distribution, q: float,
                  eps_phi: float = EPS_PHI) -> float:
    """``E_{q,pA}[I_q(pB) - I_q(pA)]`` using pA's generalized expectation.

    Each term ``pA^(1-alpha) (I(pB) - I(pA))`` equals
    ``(k/phi) pA expm1(alpha ln(pB/pA))``, which is evaluated directly so that
    ``K(p||p)`` is exactly zero. An outcome impossible under pB but possible
    under pA yields an infinite divergence (returned, not raised) whenever the
    content of a zero-probability outcome is itself infinite.
    """
    if len(pA) != len(pB):
        raise DistributionError(f"distributions differ in size: {len(pA)} vs {len(pB)}")
    _check_point(spec, q, 1.0)
    k = spec.k
    # terms are accumulated in units of `scale`: k/phi normally, k*alpha/phi
    # when phi is tiny (log form), and k at q == 1 (plain KL)
    if q == 1.0:
        alpha, scale, log_form, sign = 0.0, k, True, 1.0
    else:
        phi = spec.phi(q)
        alpha = spec.alpha(q)
        if abs(phi) < eps_phi:
            scale = k * alpha_over_phi(spec, q, phi, alpha)
            log_form = True
            sign = math.copysign(1.0, phi) if phi != 0.0 else math.copysign(1.0, scale * alpha)
        else:
            if phi == 0.0:
                raise ZeroPhiError(q)
            scale, log_form, sign = k / phi, False, math.copysign(1.0, phi)
    expo = 1.0 - alpha

    terms = []
    for a, b in zip(pA.p.tolist(), pB.p.tolist()):
        if a == 0.0:
            if expo < 0 and b > 0:
                raise DivergentExpectationError(
                    f"zero-probability outcome in pA with negative weight exponent {expo!r}")
            continue
        if b == 0.0:
            if q == 1.0 or alpha < 0.0:
                return math.copysign(math.inf, sign)
            if alpha == 0.0:
                continue
            # b**alpha -> 0, leaving a**(1-alpha) * (0 - a**alpha) = -a in units of k/phi
            terms.append(-a / alpha if log_form else -a)
            continue
        log_ratio = math.log(b) - math.log(a)
        if log_form:
            terms.append(a * log_ratio * _exprel(alpha * log_ratio))
        else:
            terms.append(a * math.expm1(alpha * log_ratio))
    total = math.fsum(terms)
    if q == 1.0:
        return -scale * total + 0.0
    return scale * total + 0.0


# ---------------------------------------------------------------------- I/O

def _parse_numbers(items, where: str) -> list[float]:
    out = []
    for i, item in enumerate(items):
        try:
            out.append(float(item))
        except (TypeError, ValueError):
            raise InputFormatError(f"{where}: entry {i} ({item!r}) is not a number") from None
    return out


def _read_vector(src: str, key: str) -> list[float]:
    if src.startswith("inline:"):
        body = src[len("inline:"):].strip()
        if not body:
            raise InputFormatError("inline list is empty")
        return _parse_numbers(body.split(","), "inline list")
    try:
        text = Path(src).read_text()
    except OSError as exc:
        raise InputFormatError(f"cannot read {src}: {exc.strerror or exc}") from None
    if text.lstrip().startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputFormatError(
                f"{src}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
        if not isinstance(data, dict) or not isinstance(data.get(key), list):
            raise InputFormatError(f'{src}: expected a JSON object {{"{key}": [...]}}')
        return _parse_numbers(data[key], src)
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    if not rows or [c.strip() for c in rows[0]] != [key]:
        raise InputFormatError(f'{src}: expected CSV with header "{key}" on line 1')
    values = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != 1:
            raise InputFormatError(f"{src}: line {lineno}: expected one value, got {len(row)}")
        values.extend(_parse_numbers([row[0].strip()], f"{src}: line {lineno}"))
    return values


def load_distribution(src: str, renormalize: bool = False) -> Distribution:
    """Read ``inline:0.5,0.5``, a JSON ``{"p": [...]}`` file or a CSV with header ``p``."""
    return Distribution(_read_vector(src, "p"), renormalize=renormalize)


def load_observable(src: str) -> Observable:
    """Same sources as :func:`load_distribution`, keyed ``"x"``."""
    return Observable(_read_vector(src, "x"))
