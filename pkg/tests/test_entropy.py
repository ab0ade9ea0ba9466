import json
import math

import numpy as np
import pytest

from pseudoadd.content import ContentSpec, info_content_stable, preset
from pseudoadd.entropy import (
    Distribution,
    Observable,
    entropy,
    g_expectation,
    kl_divergence,
    load_distribution,
    load_observable,
    shannon_bits,
)
from pseudoadd.errors import DistributionError, DivergentExpectationError, InputFormatError, OutOfDomainError

HC = preset("hc")
SUYARI = preset("suyari")
rng = np.random.default_rng(20261016)


def random_dist(size, rng=rng, zeros=False):
    w = rng.random(size)
    if zeros:
        w[rng.random(size) < 0.3] = 0.0
        if w.sum() == 0:
            w[0] = 1.0
    return Distribution(w / w.sum(), renormalize=True)


def hc_oracle(p, q):
    """Havrda-Charvat entropy written out directly, without the spec machinery."""
    p = np.asarray(p, dtype=float)
    return (1 - np.sum(p ** q)) / (1 - 2.0 ** (1 - q))


# ------------------------------------------------------------ distributions

def test_distribution_validation():
    Distribution([1.0])
    Distribution([0.5, 0.5 + 5e-10])
    with pytest.raises(DistributionError):
        Distribution([])
    with pytest.raises(DistributionError):
        Distribution([0.6, 0.6])
    with pytest.raises(DistributionError):
        Distribution([1.5, -0.5])
    with pytest.raises(DistributionError):
        Distribution([math.nan, 1.0])
    d = Distribution([2, 2], renormalize=True)
    assert d.p.tolist() == [0.5, 0.5]
    with pytest.raises(ValueError):
        d.p[0] = 1.0


# ------------------------------------------------------------- expectation

def test_g_expectation_examples():
    d = Distribution([0.5, 0.5])
    assert g_expectation(HC, d, Observable([6, 2 / 3]), 2) == pytest.approx(5 / 3, abs=1e-15)
    d = Distribution([0.2, 0.3, 0.5])
    x = Observable([1.0, -2.0, 4.0])
    assert g_expectation(HC, d, x, 1) == pytest.approx(0.2 - 0.6 + 2.0, abs=1e-15)
    assert g_expectation(SUYARI, d, Observable([1, 1, 1]), 1) == pytest.approx(1.0, abs=1e-15)


def test_g_expectation_errors():
    d = Distribution([0.5, 0.5])
    with pytest.raises(DistributionError):
        g_expectation(HC, d, Observable([1, 2, 3]), 2)
    with pytest.raises(OutOfDomainError):
        g_expectation(SUYARI, d, Observable([1, 2]), 2.5)
    # hc exponent is q, so q -> 0 keeps it positive; a spec with alpha > 1 diverges
    spec = ContentSpec.from_strings(1, "1 - q", "2*q")
    with pytest.raises(DivergentExpectationError):
        g_expectation(spec, Distribution([1.0, 0.0]), Observable([1, 1]), 1.5)


def test_zero_to_zero_contributes_nothing():
    # alpha(2) = 1 makes the weight exponent exactly 0
    spec = ContentSpec.from_strings(1, "q - 1", "q - 1")
    d = Distribution([0.5, 0.5, 0.0])
    assert g_expectation(spec, d, Observable([1, 1, 100]), 2) == 2.0


# ------------------------------------------------------------------ entropy

def test_entropy_examples():
    assert entropy(HC, Distribution([0.5, 0.5]), 2) == pytest.approx(1.0, abs=1e-15)
    assert entropy(HC, Distribution([0.25] * 4), 2) == pytest.approx(1.5, abs=1e-15)
    assert entropy(HC, Distribution([0.5, 0.5]), 1) == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("spec", [HC, SUYARI], ids=["hc", "suyari"])
@pytest.mark.parametrize("q", [0.3, 1.0, 1 + 1e-9, 1.7, 2.0])
def test_certainty_has_zero_entropy(spec, q):
    assert entropy(spec, Distribution([1.0]), q) == 0.0
    assert entropy(spec, Distribution([0.0, 1.0, 0.0]), q) == 0.0


@pytest.mark.parametrize("spec", [HC, SUYARI], ids=["hc", "suyari"])
@pytest.mark.parametrize("q", [0.25, 0.5, 1.0, 1 + 1e-9, 1.5, 2.0])
def test_entropy_is_expectation_of_content(spec, q):
    local = np.random.default_rng(7)
    for _ in range(50):
        d = random_dist(int(local.integers(1, 9)), local)
        values = Observable([info_content_stable(spec, q, float(p)) for p in d.p])
        s = entropy(spec, d, q)
        assert abs(s - g_expectation(spec, d, values, q)) <= 1e-12 * (1 + abs(s))
        assert s >= -1e-15


@pytest.mark.parametrize("i", range(1, 41))
def test_hc_fair_coin_is_one_bit(i):
    assert entropy(HC, Distribution([0.5, 0.5]), i / 10) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("q", [0.3, 0.8, 1.6, 2.0, 3.5])
def test_hc_matches_direct_formula(q):
    local = np.random.default_rng(11)
    for _ in range(20):
        d = random_dist(int(local.integers(2, 9)), local)
        assert entropy(HC, d, q) == pytest.approx(hc_oracle(d.p, q), rel=1e-12, abs=1e-14)


def test_hc_at_one_is_shannon_bits():
    local = np.random.default_rng(3)
    for _ in range(100):
        d = random_dist(int(local.integers(1, 9)), local)
        assert abs(entropy(HC, d, 1) - shannon_bits(d)) <= 1e-12


@pytest.mark.parametrize("side", [-1, 1])
def test_shannon_limit(side):
    local = np.random.default_rng(5)
    for _ in range(100):
        d = random_dist(int(local.integers(1, 9)), local)
        assert abs(entropy(HC, d, 1 + side * 1e-5) - entropy(HC, d, 1)) <= 1e-4


@pytest.mark.parametrize("spec", [HC, SUYARI], ids=["hc", "suyari"])
@pytest.mark.parametrize("q", [0.5, 1.0, 1.5, 2.0])
def test_expansibility(spec, q):
    local = np.random.default_rng(13)
    for _ in range(30):
        d = random_dist(int(local.integers(1, 7)), local)
        wider = Distribution(np.append(d.p, 0.0))
        assert entropy(spec, wider, q) == entropy(spec, d, q)


# --------------------------------------------------------------- divergence

def test_kl_example():
    a, b = Distribution([0.5, 0.5]), Distribution([0.25, 0.75])
    assert kl_divergence(HC, a, b, 2) == pytest.approx(2 / 3, abs=1e-14)
    # brute force: weights pA**q, content differences
    brute = sum(pa ** 2 * (info_content_stable(HC, 2, pb) - info_content_stable(HC, 2, pa))
                for pa, pb in zip(a.p, b.p))
    assert kl_divergence(HC, a, b, 2) == pytest.approx(brute, abs=1e-14)


@pytest.mark.parametrize("spec", [HC, SUYARI], ids=["hc", "suyari"])
@pytest.mark.parametrize("q", [0.5, 1.0, 1 + 1e-9, 1.5, 2.0])
def test_kl_of_self_is_zero(spec, q):
    local = np.random.default_rng(17)
    for _ in range(50):
        d = random_dist(int(local.integers(1, 9)), local, zeros=True)
        assert abs(kl_divergence(spec, d, d, q)) <= 1e-12


@pytest.mark.parametrize("spec", [HC, SUYARI], ids=["hc", "suyari"])
def test_kl_nonnegative(spec):
    local = np.random.default_rng(19)
    worst = math.inf
    for _ in range(1000):
        n = int(local.integers(2, 9))
        a, b = random_dist(n, local), random_dist(n, local)
        q = float(local.choice([0.5, 1.5, 2.0, local.uniform(0.05, 2.0)]))
        worst = min(worst, kl_divergence(spec, a, b, q))
    assert worst >= -1e-12


def test_kl_at_one_is_classical():
    a, b = Distribution([0.2, 0.8]), Distribution([0.6, 0.4])
    expected = (0.2 * math.log(0.2 / 0.6) + 0.8 * math.log(0.8 / 0.4)) / math.log(2)
    assert kl_divergence(HC, a, b, 1) == pytest.approx(expected, rel=1e-14)
    assert kl_divergence(HC, a, b, 1 + 1e-9) == pytest.approx(expected, rel=1e-7)


def test_kl_infinite_sentinel():
    a, b = Distribution([0.5, 0.5]), Distribution([1.0, 0.0])
    assert kl_divergence(HC, a, b, 2) == math.inf  # alpha(2) = -1
    assert kl_divergence(HC, a, b, 1) == math.inf
    # alpha(0.5) = 0.5 > 0: I(0) is finite, so the sum is too
    value = kl_divergence(HC, a, b, 0.5)
    brute = 0.5 ** 0.5 * ((info_content_stable(HC, 0.5, 1.0) - info_content_stable(HC, 0.5, 0.5))
                          + (HC.k / HC.phi(0.5) * (0.0 - 1.0) - info_content_stable(HC, 0.5, 0.5)))
    assert value == pytest.approx(brute, rel=1e-13)


def test_kl_size_mismatch():
    with pytest.raises(DistributionError):
        kl_divergence(HC, Distribution([1.0]), Distribution([0.5, 0.5]), 2)


# ---------------------------------------------------------------------- I/O

def test_loaders(tmp_path):
    assert load_distribution("inline:0.25, 0.75").p.tolist() == [0.25, 0.75]
    (tmp_path / "d.json").write_text(json.dumps({"p": [0.1, 0.9]}))
    assert load_distribution(str(tmp_path / "d.json")).p.tolist() == [0.1, 0.9]
    (tmp_path / "d.csv").write_text("p\n0.3\n0.7\n")
    assert load_distribution(str(tmp_path / "d.csv")).p.tolist() == [0.3, 0.7]
    (tmp_path / "x.csv").write_text("x\n6\n-1.5\n")
    assert load_observable(str(tmp_path / "x.csv")).x.tolist() == [6.0, -1.5]
    (tmp_path / "x.json").write_text('{"x": [1, 2]}')
    assert load_observable(str(tmp_path / "x.json")).x.tolist() == [1.0, 2.0]
    assert load_distribution("inline:1,3", renormalize=True).p.tolist() == [0.25, 0.75]


@pytest.mark.parametrize("src, body", [
    ("inline:", None),
    ("inline:0.5,abc", None),
    ("bad.json", '{"q": [1]}'),
    ("bad2.json", "{oops"),
    ("bad.csv", "prob\n0.5\n0.5\n"),
    ("bad2.csv", "p\n0.5,0.5\n"),
    ("missing.csv", None),
])
def test_loader_errors(tmp_path, src, body):
    if body is not None:
        (tmp_path / src).write_text(body)
    if not src.startswith("inline:"):
        src = str(tmp_path / src)
    with pytest.raises(InputFormatError):
        load_distribution(src)
