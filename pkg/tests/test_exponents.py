import json
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from ffrestrict.errors import Infeasible, ParallelTerms, SchemaError
from ffrestrict.exponents import (
    DECAY,
    PARSEVAL,
    PRIOR_ESTIMATES,
    TRANSCRIBED_BRACKET_TERMS,
    VINH,
    Exponent,
    PiecewiseBound,
    crossover,
    crossover_points,
    cubic_remark_exponent,
    derive_bracket_terms,
    derive_section5_table,
    derive_updated_table,
    describe,
    dominates,
    envelope_exponent,
    implied_restriction_exponent,
    load_table,
    verify_crossovers,
)


def test_dominates_examples():
    assert dominates(Exponent(1, F(-1, 2)), (0, F(5, 3)), Exponent(F(1, 2), F(1, 2)))
    assert not dominates(Exponent(1, F(-1, 2)), (0, 3), Exponent(F(1, 2), F(1, 2)))
    assert dominates(PARSEVAL, (F(5, 2), 3), VINH)
    with pytest.raises(ValueError):
        dominates(DECAY, (2, 1), VINH)


fractions = st.fractions(min_value=-3, max_value=3, max_denominator=24)
exponents = st.builds(Exponent, fractions, fractions)
ranges = st.tuples(st.fractions(0, 3, max_denominator=12), st.fractions(0, 3, max_denominator=12)).map(sorted)


@given(exponents, ranges)
def test_dominates_reflexive(t, rng):
    assert dominates(t, rng, t)


@given(exponents, exponents, exponents, ranges)
def test_dominates_transitive(a, b, c, rng):
    if dominates(a, rng, b) and dominates(b, rng, c):
        assert dominates(a, rng, c)


@pytest.mark.parametrize("table_id,r", [("mt", F(18, 5)), ("prime", F(188, 53)), ("new", F(24, 7))])
def test_table_exponents(table_id, r):
    exp = implied_restriction_exponent(load_table(table_id))
    assert exp.r == r
    assert exp.r == exp.r_prime / (exp.r_prime - 1)


@pytest.mark.parametrize("table_id", ["mt", "prime", "new"])
def test_stated_boundaries_are_crossovers(table_id):
    pairs = verify_crossovers(load_table(table_id))
    assert pairs and all(s == c for s, c in pairs)


def test_new_table_boundaries():
    assert load_table("new").boundaries() == [F(5, 3), F(9, 5), F(9, 4), F(5, 2)]


def test_crossover_errors():
    with pytest.raises(ParallelTerms):
        crossover(Exponent(1, 0), Exponent(1, 1))
    with pytest.raises(ValueError):
        crossover_points([DECAY])
    assert crossover(DECAY, PARSEVAL) == 2


def test_derived_bracket_terms():
    derived = derive_bracket_terms()
    assert sorted(derived) == sorted(TRANSCRIBED_BRACKET_TERMS)
    assert derived == [
        Exponent(F(11, 16), F(-1, 8)),
        Exponent(F(17, 24), 0),
        Exponent(F(13, 16), F(-3, 16)),
        Exponent(F(5, 8), F(1, 8)),
    ]


def test_derive_updated_table():
    table = derive_updated_table()
    shipped = load_table("new")
    assert [(r.term, r.lo, r.hi) for r in table.rows] == [(r.term, r.lo, r.hi) for r in shipped.rows]
    assert derive_section5_table is derive_updated_table


def _grid_exponent(bounds, steps=30000):
    # float oracle: max over a gamma grid of log_q(min over bounds of max term) / gamma
    worst = 0.0
    for i in range(1, steps + 1):
        g = 3 * i / steps
        val = min(max(float(t.a) * g + float(t.b) for t in b) for b in bounds)
        worst = max(worst, val / g, 0.5)
    return 1 / (1 - worst)


def test_envelope_exponent_against_grid():
    env, exp = envelope_exponent()
    assert exp.r == F(32, 9)
    assert env.covers()
    grid_r = _grid_exponent([(t,) for t in PRIOR_ESTIMATES] + [tuple(derive_bracket_terms())])
    assert grid_r == pytest.approx(float(exp.r), abs=1e-3)


def test_cubic_remark():
    assert cubic_remark_exponent().r == F(10, 3)


def test_universal_row_optional():
    table = load_table("mt")
    assert implied_restriction_exponent(table, include_universal=False).r == F(18, 5)


def test_schema_errors(tmp_path):
    with pytest.raises(SchemaError):
        load_table("nope")
    with pytest.raises(SchemaError):
        PiecewiseBound.from_json({"rows": []})
    with pytest.raises(SchemaError):
        PiecewiseBound.from_json({"rows": [{"a": "1", "b": "x", "lo": "0", "hi": "3"}]})
    with pytest.raises(SchemaError):
        PiecewiseBound.from_json({"rows": [{"a": "1", "b": "0", "lo": "2", "hi": "1"}]})
    gap = PiecewiseBound.from_json({"rows": [{"a": "1", "b": "-1/2", "lo": "0", "hi": "1"}]})
    with pytest.raises(SchemaError):
        implied_restriction_exponent(gap, include_universal=False)
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(SchemaError):
        PiecewiseBound.load(bad)


def test_infeasible():
    grows = PiecewiseBound.from_json({"rows": [{"a": "0", "b": "1/4", "lo": "0", "hi": "3"}]})
    with pytest.raises(Infeasible):
        implied_restriction_exponent(grows)


def test_file_roundtrip(tmp_path):
    path = tmp_path / "t.json"
    path.write_text(json.dumps(load_table("prime").to_json()))
    assert implied_restriction_exponent(PiecewiseBound.load(path)).r == F(188, 53)


def test_describe():
    d = describe(load_table("new"))
    assert d["r"] == "24/7" and d["r_prime"] == "24/17"
    assert all(c["match"] for c in d["crossovers"])
