import math

import numpy as np
import pytest

from pseudoadd.axioms import DEFAULT_P, GridSpec, verify
from pseudoadd.content import ContentSpec, preset, tabulate
from pseudoadd.errors import (
    DegenerateSampleError,
    InconsistentSampleError,
    InputFormatError,
    InvalidTableError,
    MissingAnchorError,
)
from pseudoadd.recover import (
    RecoveryResult,
    SampleTable,
    recover,
    recover_alpha,
    recover_k,
    recover_phi,
)

HC = preset("hc")
SUYARI = preset("suyari")
LN2 = math.log(2)
QS = [0.5, 1 - 1e-7, 1 + 1e-7, 1.5, 2.0]
PS = [0.9, 0.5, 0.25]


def table_for(spec, qs=QS, ps=PS):
    return SampleTable(tabulate(spec, qs, ps))


# ---------------------------------------------------------------- examples

def test_k_from_hc_table():
    assert abs(recover_k(table_for(HC)) - 1 / LN2) <= 1e-6


def test_k_from_shannon_rows():
    table = SampleTable([(1.0, p, -math.log(p)) for p in (0.1, 0.5, 0.8)])
    assert recover_k(table) == pytest.approx(1.0, abs=1e-15)


def test_k_needs_an_anchor():
    with pytest.raises(MissingAnchorError):
        recover_k(table_for(HC, qs=[0.5, 2.0]))
    with pytest.raises(MissingAnchorError):
        recover(SampleTable([]))


def test_k_must_be_positive():
    table = SampleTable([(1.0, 0.5, 0.0), (1.0, 0.25, 0.0), (1.0, 0.9, -0.1)])
    with pytest.raises(InvalidTableError):
        recover_k(table)


def test_phi_hat_hc_at_two():
    # I(0.25) = 6, I(0.5) = 2: (6 - 2 - 2) k / 4 = 1/(2 ln2)
    table = table_for(HC)
    assert recover_phi(table, 1 / LN2, 2.0) == pytest.approx(1 / (2 * LN2), abs=1e-12)
    assert recover_phi(table, 1 / LN2, 2.0) == pytest.approx(0.7213475204444817, abs=1e-12)


def test_phi_hat_near_one_is_small():
    table = table_for(HC)
    k = recover_k(table)
    assert abs(recover_phi(table, k, 1 + 1e-7)) <= 1e-6


def test_phi_hat_suyari_at_two():
    # I(0.5) = 0.5, I(0.25) = 0.75 so phi_hat = (0.75 - 1) / 0.25
    table = table_for(SUYARI, qs=[1 - 1e-7, 2.0])
    assert recover_phi(table, 1.0, 2.0) == pytest.approx(-1.0, abs=1e-12)


def test_degenerate_reference_sample():
    table = SampleTable([(1.0, 0.5, LN2), (2.0, 0.5, 0.0), (2.0, 0.25, 0.0)])
    with pytest.raises(DegenerateSampleError):
        recover_phi(table, 1.0, 2.0)


def test_alpha_hat_examples():
    table = table_for(HC)
    k = 1 / LN2
    assert recover_alpha(table, k, recover_phi(table, k, 2.0), 2.0) == pytest.approx(-1.0, abs=1e-12)
    phi_hat = recover_phi(table, k, 1 + 1e-7)
    assert abs(recover_alpha(table, k, phi_hat, 1 + 1e-7)) <= 1e-6
    table = table_for(SUYARI, qs=[1 - 1e-7, 0.5])
    phi_hat = recover_phi(table, 1.0, 0.5)
    assert recover_alpha(table, 1.0, phi_hat, 0.5) == pytest.approx(-0.5, abs=1e-12)


def test_alpha_hat_small_phi_branch():
    # phi_hat below 1e-8 uses the series; compare with log1p directly
    table = SampleTable([(1.0, 0.5, 1.0), (1.0, 0.25, 2.0)])
    phi_hat = 1e-9
    direct = math.log1p(phi_hat * 1.0) / math.log(0.5)
    assert recover_alpha(table, 1.0, phi_hat, 1.0) == pytest.approx(direct, rel=1e-12)
    assert recover_alpha(table, 1.0, 0.0, 1.0) == 0.0


def test_alpha_hat_inconsistent():
    table = SampleTable([(1.0, 0.5, 1.0), (2.0, 0.5, 2.0), (2.0, 0.25, 1.0)])
    with pytest.raises(InconsistentSampleError):
        recover_alpha(table, 1.0, -0.75, 2.0)


def test_recovery_round_trip_hc():
    res = recover(table_for(HC))
    assert abs(res.k_hat * LN2 - 1) <= 1e-6
    for row in res.rows:
        assert abs(row.phi_hat - HC.phi(row.q)) <= 1e-6
        assert abs(row.alpha_hat - HC.alpha(row.q)) <= 1e-6
        assert not row.flagged


@pytest.mark.parametrize("q, p", [(1.5, 0.9), (0.5, 0.5), (2.0, 0.25)])
def test_corrupted_row_is_flagged(q, p):
    rows = [(qq, pp, v * 1.1 if (qq, pp) == (q, p) else v) for qq, pp, v in tabulate(HC, QS, PS)]
    res = recover(SampleTable(rows))
    assert [r.q for r in res.flagged] == [q]


def test_table_validation():
    with pytest.raises(InvalidTableError):
        SampleTable([(0.0, 0.5, 1.0)])
    with pytest.raises(InvalidTableError):
        SampleTable([(1.0, 1.5, 1.0)])
    with pytest.raises(InvalidTableError):
        SampleTable([(1.0, 1.0, 0.1)])
    with pytest.raises(InvalidTableError):
        SampleTable([(1.0, 0.5, 1.0), (1.0, 0.5, 1.0)])
    with pytest.raises(InvalidTableError):
        SampleTable([(1.0, 0.5, math.inf)])


# -------------------------------------------------------------- properties

@pytest.mark.parametrize("c", [0.01, 0.5, 3.0, 250.0])
def test_scale_consistency(c):
    table = table_for(HC)
    scaled = SampleTable([(q, p, c * v) for q, p, v in table.rows])
    base, res = recover(table), recover(scaled)
    assert res.k_hat == pytest.approx(c * base.k_hat, rel=1e-12)
    for a, b in zip(base.rows, res.rows):
        # phi_hat is a ratio of I values to k_hat, so full recovery leaves it alone
        assert b.phi_hat == pytest.approx(a.phi_hat, rel=1e-9, abs=1e-15)
        assert b.alpha_hat == pytest.approx(a.alpha_hat, rel=1e-9, abs=1e-15)
        # with k held at its unscaled value, phi_hat is divided by c
        held = recover_phi(scaled, base.k_hat, a.q)
        assert held == pytest.approx(a.phi_hat / c, rel=1e-9, abs=1e-15)


def _family():
    rng = np.random.default_rng(41)
    specs = [HC, SUYARI, ContentSpec.from_strings(2.5, "0.3*(1 - q^2)", "-0.3*(1 - q^2)", q_max=1.5)]
    for _ in range(3):
        c = float(rng.uniform(0.2, 0.6))
        specs.append(ContentSpec.from_strings(float(rng.uniform(0.5, 2)), f"-{c}*ln(q)", f"{c}*ln(q)", q_max=2.0))
    return specs


@pytest.mark.parametrize("spec", _family())
def test_round_trip_on_default_grid(spec):
    grid = GridSpec.default(spec)
    assert verify(spec, grid).passed
    res = recover(SampleTable(tabulate(spec, grid.all_q(), DEFAULT_P)))
    assert res.k_hat == pytest.approx(spec.k, rel=1e-6)
    for row in res.rows:
        phi, alpha = spec.phi(row.q), spec.alpha(row.q)
        assert abs(row.phi_hat - phi) <= 1e-6 * abs(phi) + 1e-12
        assert abs(row.alpha_hat - alpha) <= 1e-6 * abs(alpha) + 1e-12
        assert not row.flagged


# --------------------------------------------------------------------- CSV

def test_sample_csv_round_trip_is_exact():
    table = table_for(HC)
    text = table.to_csv()
    assert text.splitlines()[0] == "q,p,I"
    back = SampleTable.from_csv(text)
    assert back.rows == table.rows
    assert back.to_csv() == text


def test_sample_csv_skips_comments_and_blank_lines():
    text = "# from somewhere\nq,p,I\n\n1.0,0.5,0.6931471805599453\n"
    assert SampleTable.from_csv(text).rows == ((1.0, 0.5, 0.6931471805599453),)


@pytest.mark.parametrize("text", ["", "a,b,c\n1,0.5,1\n", "q,p,I\n1,0.5\n", "q,p,I\n1,half,1\n"])
def test_sample_csv_errors(text):
    with pytest.raises(InputFormatError):
        SampleTable.from_csv(text)


def test_result_csv_round_trip():
    res = recover(table_for(HC))
    text = res.to_csv()
    lines = text.splitlines()
    assert lines[0].startswith("# k_hat=")
    assert lines[1] == "q,phi_hat,alpha_hat,residual"
    assert len(lines) == 2 + len(QS)
    assert RecoveryResult.from_csv(text) == res


def test_result_csv_errors():
    with pytest.raises(InputFormatError):
        RecoveryResult.from_csv("q,phi_hat,alpha_hat,residual\n")
    with pytest.raises(InputFormatError):
        RecoveryResult.from_csv("# k_hat=1\nq,phi,alpha,res\n")
