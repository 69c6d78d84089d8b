import subprocess
import sys

import pytest

from belyi.passports import (
    assemble_passports,
    check_degree,
    counts_by_genus,
    enumerate_degree,
    enumerate_group,
    genus_from_types,
    partition_leq,
    s3_canonicalize,
)
from belyi.perm import (
    CapacityError,
    PermGroup,
    Permutation,
    PermutationTriple,
    canonical_triple,
    closure,
)

from conftest import find_passport, passports_of
from oracles import brute_force_classes, conjugate_groups

# passports per degree, split by genus
TABLE = {
    1: [1], 2: [1], 3: [2, 1], 4: [6, 2], 5: [12, 6, 2], 6: [38, 29, 7],
    7: [89, 50, 13, 3],
}


@pytest.mark.parametrize("d", [1, 2, 3, 4, 5])
def test_enumeration_matches_exhaustive_search(d):
    """Every class appears exactly once and nothing else does."""
    oracle = brute_force_classes(d)
    ours = [t for p in passports_of(d) for t in p.triples]
    keys = [(t.sigma0._img, t.sigma1._img) for t in ours]
    assert len(keys) == len(set(keys)), "a class was produced twice"
    assert set(keys) == set(oracle)
    # passports: same genus, cycle types and conjugate monodromy groups
    buckets = []
    for key, (lam, G) in oracle.items():
        for b in buckets:
            if b[0] == lam and conjugate_groups(b[1], G, d):
                b[2].append(key)
                break
        else:
            buckets.append([lam, G, [key]])
    expected = sorted(sorted(b[2]) for b in buckets)
    got = sorted(sorted((t.sigma0._img, t.sigma1._img) for t in p.triples)
                 for p in passports_of(d))
    assert got == expected


@pytest.mark.parametrize("d", sorted(TABLE))
def test_counts_by_genus(d):
    counts = counts_by_genus(passports_of(d))
    assert [counts.get(g, 0) for g in range(len(TABLE[d]))] == TABLE[d]
    assert sum(counts.values()) == sum(TABLE[d])


@pytest.mark.parametrize("d", range(1, 8))
def test_passport_invariants(d):
    for p in passports_of(d):
        lam = tuple(p.lam)
        assert partition_leq(lam[0], lam[1]) and partition_leq(lam[1], lam[2])
        assert p.genus == genus_from_types(lam) >= 0
        assert p.triples == sorted(p.triples)
        for t in p.triples:
            assert tuple(t.cycle_types()) == lam
            assert canonical_triple(t) == t
        # Riemann-Hurwitz: the index sum is even and at least 2d - 2
        tot = sum(d - len(l) for l in lam)
        assert tot % 2 == 0 and tot >= 2 * d - 2


def test_genus_is_integral_and_nonnegative_for_all_triples(small_passports):
    for d, ps in small_passports.items():
        for p in ps:
            for t in p.triples:
                tot = sum(x.index() for x in t)
                assert tot % 2 == 0
                assert 1 - d + tot // 2 == p.genus >= 0


def test_named_sizes_small_degree():
    (p,) = find_passport(5, [(5,), (4, 1), (4, 1)], group_order=120)
    assert p.size == 1 and p.genus == 1
    (p,) = find_passport(7, [(7,), (7,), (3, 3, 1)], group_order=168)
    assert p.size == 4 and p.genus == 2
    assert max(p.size for p in passports_of(7)) == 38


def test_genus_and_lambda_filters():
    ps = enumerate_degree(7, genera=[3])
    assert len(ps) == 3 and all(p.genus == 3 for p in ps)
    ps = enumerate_degree(6, lam_filter=lambda lam: lam[0] == (6,))
    assert ps and all(p.lam[0] == (6,) for p in ps)


def test_parallel_runs_are_identical():
    a = enumerate_degree(7, jobs=1)
    b = enumerate_degree(7, jobs=3)
    assert [(p.genus, p.group.canonical_id, p.group.label, p.lam,
             [t.sort_key() for t in p.triples]) for p in a] == \
           [(p.genus, p.group.canonical_id, p.group.label, p.lam,
             [t.sort_key() for t in p.triples]) for p in b]


def test_cli_output_is_byte_identical_across_worker_counts(tmp_path):
    outs = []
    for jobs in (1, 2):
        path = tmp_path / f"d7-{jobs}.jsonl"
        subprocess.run([sys.executable, "-m", "belyi", "enumerate", "--degree", "6-7",
                        "--jobs", str(jobs), "--out", str(path)], check=True,
                       capture_output=True)
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_degree_cap():
    with pytest.raises(CapacityError):
        check_degree(10)
    with pytest.raises(CapacityError):
        check_degree(12, allow_large=True)
    with pytest.warns(RuntimeWarning):
        check_degree(10, allow_large=True)
    with pytest.raises(ValueError):
        check_degree(0)


def test_group_enumeration_agrees_with_whole_degree():
    # the Frobenius group of order 20 in degree 5
    F20 = closure([Permutation.from_cycles("(1,2,3,4,5)"), Permutation.from_cycles("(2,3,5,4)", 5)])
    triples = enumerate_group(F20)
    by_group = sorted(s3_canonicalize(p).lam for p in assemble_passports(triples))
    whole = sorted(p.lam for p in passports_of(5) if p.group.order == 20)
    assert by_group == whole
    assert sorted(t.sort_key() for t in triples) == sorted(
        t.sort_key() for p in passports_of(5) if p.group.order == 20 for t in p.triples)


def test_group_enumeration_of_symmetric_group():
    triples = enumerate_group(PermGroup.symmetric(4))
    whole = [t for p in passports_of(4) if p.group.order == 24 for t in p.triples]
    assert sorted(t.sort_key() for t in triples) == sorted(t.sort_key() for t in whole)


def test_assemble_rejects_intransitive():
    t = PermutationTriple.from_cycles("(1,2)", "(1,2)", degree=3)
    with pytest.raises(ValueError):
        assemble_passports([t])


def test_s3_canonicalize_restores_sorted_order():
    (p,) = find_passport(5, [(5,), (4, 1), (4, 1)], group_order=120)
    # rotating the roles of 0, 1, inf keeps the product condition
    rotated = [PermutationTriple(t.sigma1, t.sigma_inf, t.sigma0) for t in p.triples]
    (q,) = assemble_passports(canonical_triple(t) for t in rotated)
    assert q.lam != p.lam
    back = s3_canonicalize(q)
    assert back.lam == p.lam
    assert back.triples == p.triples
