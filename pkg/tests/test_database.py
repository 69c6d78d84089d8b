from fractions import Fraction as Q

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from belyi.database import (
    DatabaseError,
    OrbitRecord,
    PassportRecord,
    beta,
    counts_table,
    format_beta,
    max_size_table,
    parse_key,
    passport_key,
    passport_weight,
    read_jsonl,
    read_orbits,
    stats,
    write_jsonl,
)
from belyi.pointed import descends_by_size, pointed_classes

from conftest import find_passport, fixture_path, passports_of


def records_upto(d):
    return [PassportRecord.from_passport(p) for k in range(1, d + 1) for p in passports_of(k)]


def make_record(key, size):
    d, _, g, lam = parse_key(key)
    return PassportRecord(key, d, g, lam, {}, size)


# -- keys ---------------------------------------------------------------------

def test_key_roundtrip():
    lam = ((6, 1), (6, 1), (4, 2, 1))
    key = passport_key(7, 12, 1, lam)
    assert key == "7T12-g1-6^1.1^1-6^1.1^1-4^1.2^1.1^1"
    assert parse_key(key) == (7, "12", 1, lam)
    assert parse_key("7TGL3(F2)-g2-7^1-7^1-3^2.1^1")[1] == "GL3(F2)"
    with pytest.raises(DatabaseError):
        parse_key("7-g1-7^1")
    with pytest.raises(DatabaseError):
        passport_key(7, "A-7", 1, lam)


def test_every_enumerated_key_parses_back(small_passports):
    for ps in small_passports.values():
        for p in ps:
            r = PassportRecord.from_passport(p)
            d, _, g, lam = parse_key(r.key)
            assert (d, g, lam) == (p.degree, p.genus, tuple(tuple(l) for l in p.lam))
            assert r.size == len(r.triples)
            assert [t.sort_key() for t in r.triple_objects()] == [t.sort_key() for t in p.triples]


def test_record_validation():
    with pytest.raises(DatabaseError):
        PassportRecord("5T1-g1-5^1-4^1.1^1-4^1.1^1", 5, 0, ((5,), (4, 1), (4, 1)), {}, 1)
    with pytest.raises(DatabaseError):
        PassportRecord("5T1-g1-5^1-4^1.1^1-4^1.1^1", 5, 1, ((5,), (4, 1), (4, 1)), {}, 2,
                       triples=[[[1, 2, 3, 4, 5], [1, 2, 3, 4, 5]]])
    with pytest.raises(DatabaseError):
        make_record("5T1-g1-5^1-4^1.1^1-4^1.1^1", 0)
    with pytest.raises(DatabaseError):
        OrbitRecord("5T1-g1-5^1-4^1.1^1-4^1.1^1", [2, 0])


# -- JSONL --------------------------------------------------------------------

def test_write_read_write_is_byte_identical(tmp_path):
    recs = records_upto(5)
    (p,) = find_passport(5, [(5,), (4, 1), (4, 1)], group_order=120)
    pc = pointed_classes(p)
    for r in recs:
        if r.key == PassportRecord.from_passport(p).key:
            r.set_pointed(pc, descends_by_size(p, pc))
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    write_jsonl(a, reversed(recs))
    back = read_jsonl(a)
    assert [r.key for r in back] == sorted(r.key for r in recs)
    write_jsonl(b, back)
    assert a.read_bytes() == b.read_bytes()
    assert {r.key: r.to_json() for r in back} == {r.key: r.to_json() for r in recs}
    assert not list(tmp_path.glob(".tmp-*"))


def test_duplicate_keys_rejected(tmp_path):
    r = make_record("5T1-g1-5^1-4^1.1^1-4^1.1^1", 1)
    with pytest.raises(DatabaseError, match="5T1-g1-5\\^1-4\\^1.1\\^1-4\\^1.1\\^1"):
        write_jsonl(tmp_path / "x.jsonl", [r, r])
    line = (tmp_path / "y.jsonl")
    write_jsonl(line, [r])
    text = line.read_text()
    line.write_text(text + text)
    with pytest.raises(DatabaseError, match="duplicate key .*first on line 1"):
        read_jsonl(line)


def test_parse_errors_carry_line_numbers(tmp_path):
    path = tmp_path / "bad.jsonl"
    good = '{"key":"1T1-g0-1^1-1^1-1^1","degree":1,"genus":0,"lambda":[[1],[1],[1]],"size":1}'
    path.write_text(good + "\n" + "{not json\n")
    with pytest.raises(DatabaseError, match=":2: invalid JSON"):
        read_jsonl(path)
    path.write_text(good + "\n\n" + '{"key":"1T1-g0-1^1-1^1-1^1"}\n')
    with pytest.raises(DatabaseError, match=":3: missing field"):
        read_jsonl(path)


def test_runtime_table_fixture():
    recs = read_jsonl(fixture_path("runtime_table.jsonl"))
    assert len(recs) == 6
    assert sorted(r.size for r in recs) == sorted([2, 23, 2, 4, 22, 4])
    assert all(r.triples is None for r in recs)
    labels = {r.group["external_label"] for r in recs}
    assert labels == {"A9", "S9", "A7", "S7", "GL3(F2)"}


# -- weights and beta -----------------------------------------------------------

def test_passport_weight_values():
    assert passport_weight(1, [1]) == 1
    assert passport_weight(24, [1, 2, 3, 4, 6, 8]) == Q(88, 529)
    assert passport_weight(13, [3, 10]) == Q(85, 144)
    assert passport_weight(5, [1] * 5) == 0
    assert passport_weight(5, [5]) == 1
    with pytest.raises(ValueError):
        passport_weight(5, [2, 2])


@st.composite
def size_and_parts(draw):
    parts = draw(st.lists(st.integers(1, 9), min_size=1, max_size=6))
    return sum(parts), parts


@given(size_and_parts())
@settings(max_examples=100)
def test_weight_bounds(sp):
    size, parts = sp
    w = passport_weight(size, parts)
    assert 0 <= w <= 1
    assert (w == 1) == (len(parts) == 1)
    if size >= 2:
        assert (w == 0) == all(x == 1 for x in parts)


@given(size_and_parts(), st.data())
@settings(max_examples=100)
def test_refining_an_orbit_never_raises_the_weight(sp, data):
    size, parts = sp
    i = data.draw(st.integers(0, len(parts) - 1))
    assume(parts[i] >= 2)
    a = data.draw(st.integers(1, parts[i] - 1))
    finer = parts[:i] + [a, parts[i] - a] + parts[i + 1:]
    assert passport_weight(size, finer) < passport_weight(size, parts)


def test_beta_is_one_for_small_degree():
    recs = records_upto(4)
    for d in range(1, 5):
        assert beta(recs, [], d) == 1


def test_beta_degree5_with_orbit_fixture():
    recs = records_upto(5)
    orbits = read_orbits(fixture_path("orbits_d5.jsonl"))
    keys = {r.key for r in recs}
    assert all(o.key in keys for o in orbits)
    b = beta(recs, orbits, 5)
    assert b == Q(31, 33)
    assert abs(float(b) - 0.9393) < 1e-4
    assert format_beta(b) == "31/33 ~ 0.93939"


def test_beta_interval_when_orbits_missing():
    recs = records_upto(5)
    lo, hi = beta(recs, [], 5)
    n_big = sum(1 for r in recs if r.size > 1)
    assert (lo, hi) == (Q(33 - n_big, 33), Q(1))
    orbits = read_orbits(fixture_path("orbits_d5.jsonl"))
    exact = beta(recs, orbits, 5)
    assert lo <= exact <= hi
    # partial data narrows the interval around the exact value
    lo2, hi2 = beta(recs, orbits[:3], 5)
    assert lo <= lo2 <= exact <= hi2 <= hi


def test_beta_rejects_orbits_not_matching_size():
    recs = records_upto(5)
    key = next(r.key for r in recs if r.size == 2)
    with pytest.raises(ValueError):
        beta(recs, [OrbitRecord(key, [1, 2])], 5)
    with pytest.raises(ValueError):
        beta(recs, [], 0)


# -- tables ---------------------------------------------------------------------

def test_counts_table_rows_and_totals():
    t = counts_table(records_upto(5))
    assert t.row(5) == [12, 6, 2] and t.degree_total(5) == 20
    assert t.row(1) == [1]
    assert t.summary_line(4) == "d=4: 6,2 (total 8)"
    assert t.total == 33 == sum(t.degree_total(d) for d in t.degrees)
    assert t.total == sum(t.genus_total(g) for g in t.genera)


def test_max_size_table():
    recs = records_upto(7)
    m = max_size_table(recs)
    assert [m[d] for d in range(1, 8)] == [1, 1, 1, 1, 3, 8, 38]
    r = make_record("5T1-g1-5^1-4^1.1^1-4^1.1^1", 7)
    assert max_size_table([r]) == {5: 7}


def test_stats_lines():
    t = stats(records_upto(4), [], [4])
    assert t.lines()[-1] == "beta(4) = 1 ~ 1.00000"
    assert "per genus: g=0: 10, g=1: 3 (total 13)" in t.lines()
