"""Polynomial grammar and instance files: parsing, printing, stability."""

import json

import numpy as np
import pytest

from tmoment.instances import (Instance, ParseError, dumps_canonical,
                               format_polynomial, instance_from_json,
                               instance_to_json, load_instance,
                               parse_polynomial, save_instance)
from tmoment.monomials import basis
from tmoment.moments import Polynomial


# -- parsing oracle ---------------------------------------------------------------


def test_parse_basic_forms():
    p = parse_polynomial("625 - x1^2 - x2^2", 2)
    assert p.terms == {(0, 0): 625.0, (2, 0): -1.0, (0, 2): -1.0}

    p = parse_polynomial("2x1 + 3*x2", 2)
    assert p.terms == {(1, 0): 2.0, (0, 1): 3.0}

    p = parse_polynomial("-x1*x2^3", 2)
    assert p.terms == {(1, 3): -1.0}

    p = parse_polynomial("1/24", 1)
    assert p.terms == {(0,): pytest.approx(1.0 / 24.0)}

    p = parse_polynomial("7/50 x1", 2)
    assert p.terms == {(1, 0): pytest.approx(0.14)}

    p = parse_polynomial("2.5e-3 * x1^2", 1)
    assert p.terms == {(2,): 2.5e-3}


def test_parse_parentheses_and_signs():
    p = parse_polynomial("(x1 + x2) * (x1 - x2)", 2)
    assert p.terms == {(2, 0): 1.0, (0, 2): -1.0}
    p = parse_polynomial("- (x1 - 1) + x1", 1)
    assert p.terms == {(0,): 1.0}


def test_parse_errors_carry_positions():
    with pytest.raises(ParseError) as e:
        parse_polynomial("x1 + $", 2)
    assert e.value.line == 1 and e.value.col >= 5

    with pytest.raises(ParseError):
        parse_polynomial("x3", 2)           # unknown variable
    with pytest.raises(ParseError):
        parse_polynomial("1/0", 1)          # zero denominator
    with pytest.raises(ParseError):
        parse_polynomial("x1^99999", 1)     # exponent cap
    with pytest.raises(ParseError):
        parse_polynomial("x1 x1", 1)        # missing operator
    with pytest.raises(ParseError):
        parse_polynomial("", 1)


def test_format_polynomial_shape():
    p = Polynomial(2, {(2, 0): -1.0, (0, 0): 625.0, (0, 2): -1.0})
    assert format_polynomial(p) == "625.0 - x1^2 - x2^2"
    assert format_polynomial(Polynomial(2, {})) == "0"


def _random_polynomial(rng, n, d):
    b = basis(n, d)
    terms = {}
    for _ in range(int(rng.integers(1, 7))):
        c = float(np.round(rng.normal() * 10 ** int(rng.integers(-3, 4)), 12))
        if c == 0.0:
            c = 1.0
        terms[b.exponent(int(rng.integers(len(b))))] = c
    return Polynomial(n, terms)


def test_print_parse_round_trip_two_hundred_expressions():
    # the printer must emit exactly the grammar the parser accepts, with
    # float bits preserved
    rng = np.random.Generator(np.random.Philox(key=500))
    for i in range(200):
        n = int(rng.integers(1, 4))
        d = int(rng.integers(0, 7))
        p = _random_polynomial(rng, n, d)
        q = parse_polynomial(format_polynomial(p), n)
        assert q.terms == p.terms, f"case {i}: {format_polynomial(p)}"


# -- instance files ------------------------------------------------------------


def test_fixture_byte_stability(fixtures_dir, tmp_path):
    for path in sorted(fixtures_dir.glob("*.json")):
        original = path.read_bytes()
        inst = load_instance(path)
        out = tmp_path / path.name
        save_instance(inst, out)
        assert out.read_bytes() == original, path.name


def test_instance_json_round_trip(fixtures_dir):
    inst = load_instance(fixtures_dir / "ball_quartic_deg6.json")
    blob = instance_to_json(inst)
    again = instance_from_json(json.loads(json.dumps(blob)))
    np.testing.assert_array_equal(again.y.values, inst.y.values)
    assert again.K.radius == inst.K.radius
    assert dumps_canonical(instance_to_json(again)) == dumps_canonical(blob)


def test_instance_validation_errors(fixtures_dir, tmp_path):
    blob = json.loads((fixtures_dir / "plusminus_ones_deg4.json").read_text())
    short = dict(blob, moments=blob["moments"][:-1])
    with pytest.raises(ParseError):
        instance_from_json(short)

    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ParseError):
        load_instance(bad)
    with pytest.raises(ParseError):
        load_instance(tmp_path / "missing.json")


def test_instance_accessors(fixtures_dir):
    inst = load_instance(fixtures_dir / "circle_10atoms_deg6.json")
    assert inst.n == 2 and inst.d == 6
    assert len(inst.y.values) == len(basis(2, 6))
    assert inst.K.radius == 1.0
    assert inst.reference is not None


def test_rn_instance_has_no_set(fixtures_dir):
    inst = load_instance(fixtures_dir / "rn_deg4_trace.json")
    assert inst.K is None or inst.K.is_rn
