import itertools

import pytest
from fractions import Fraction

from doubling import (
    CapError,
    CyclicGroup,
    MatrixGroup,
    ProductGroup,
    SymmetricGroup,
    TableGroup,
    mul_set,
    normal_subgroups,
    projection_quotient,
    quaternion_group,
    quotient,
    subset,
)
from doubling.quotients import all_subgroups, is_normal, is_subgroup


def test_cyclic_subgroup_lattice():
    subs = normal_subgroups(CyclicGroup(6))
    assert [len(s) for s in subs] == [1, 2, 3, 6]


def test_closure_generates_subgroups():
    from doubling import closure

    z12 = CyclicGroup(12)
    assert closure(z12, {4}) == {0, 4, 8}
    assert closure(z12, {5}) == set(range(12))
    s3 = SymmetricGroup(3)
    t = next(i for i in range(1, 6) if s3.op(i, i) == 0)
    assert closure(s3, {t}) == {0, t}
    # two distinct transpositions generate everything
    t2 = next(i for i in range(t + 1, 6) if s3.op(i, i) == 0)
    assert closure(s3, {t, t2}) == set(range(6))


def test_s3_normal_subgroups():
    s3 = SymmetricGroup(3)
    subs = normal_subgroups(s3)
    assert [len(s) for s in subs] == [1, 3, 6]
    # the order-3 one is the even permutations (oracle: inversion parity)
    a3 = next(s for s in subs if len(s) == 3)
    for idx in a3.elements:
        p = s3.perms[idx]
        inversions = sum(
            1 for i, j in itertools.combinations(range(3), 2) if p[i] > p[j]
        )
        assert inversions % 2 == 0


def test_q8_subgroups_all_normal():
    q8 = quaternion_group()
    # oracle: brute force over all 2^8 subsets
    elems = list(range(8))
    brute = [
        frozenset(s)
        for size in range(1, 9)
        for s in itertools.combinations(elems, size)
        if is_subgroup(q8, frozenset(s))
    ]
    assert sorted(brute, key=lambda s: (len(s), sorted(s))) == all_subgroups(q8)
    assert len(brute) == 6
    assert all(is_normal(q8, s) for s in brute)


def test_s4_normal_subgroups():
    subs = normal_subgroups(SymmetricGroup(4))
    assert [len(s) for s in subs] == [1, 4, 12, 24]


def test_subgroup_enum_caps():
    with pytest.raises(CapError):
        normal_subgroups(CyclicGroup(65))
    with pytest.raises(ValueError):
        normal_subgroups(MatrixGroup())


def test_quotient_weights_counting():
    z6 = CyclicGroup(6)
    q = quotient(z6, {0, 3})
    assert q.quotient.order == 3
    assert q.quotient_weight == 1
    assert q.subgroup_weight == 1
    assert q.quotient_weight * q.subgroup_weight == z6.weight


def test_quotient_weights_normalized_subgroup():
    q = quotient(CyclicGroup(6), {0, 3}, "normalized")
    assert q.subgroup_weight == Fraction(1, 2)
    assert q.quotient_weight == 2


def test_s3_mod_a3_is_order_two():
    s3 = SymmetricGroup(3)
    a3 = next(s for s in normal_subgroups(s3) if len(s) == 3)
    q = quotient(s3, a3)
    assert q.quotient.order == 2
    other = 1 - q.project(s3.identity)
    assert q.quotient.op(other, other) == q.project(s3.identity)


def test_quotient_rejects_bad_subgroups():
    z6 = CyclicGroup(6)
    with pytest.raises(ValueError, match="subgroup"):
        quotient(z6, {0, 1})
    s3 = SymmetricGroup(3)
    # {e, transposition} is a subgroup but not normal
    transposition = next(
        i for i in range(6) if i != 0 and s3.op(i, i) == 0
    )
    with pytest.raises(ValueError, match="normal"):
        quotient(s3, {0, transposition})


def test_projection_quotient_drops_coordinates():
    g = ProductGroup([CyclicGroup(2), CyclicGroup(4)])
    q = projection_quotient(g, [1])
    assert q.quotient.order == 4
    assert q.subgroup.elements == {(0, 0), (1, 0)}
    assert q.project((1, 3)) == 3
    assert q.quotient_weight * q.subgroup_weight == g.weight


def test_projection_keep_all_is_identity():
    g = ProductGroup([CyclicGroup(2), CyclicGroup(3)])
    q = projection_quotient(g, [0, 1])
    a = subset(g, {(0, 1), (1, 2)})
    assert q.image(a).elements == a.elements
    assert q.subgroup.elements == {(0, 0)}


def test_projection_quotient_errors():
    g = ProductGroup([CyclicGroup(2), CyclicGroup(3)])
    with pytest.raises(ValueError, match="nonempty"):
        projection_quotient(g, [])
    with pytest.raises(ValueError, match="range"):
        projection_quotient(g, [2])
    lazy = ProductGroup([MatrixGroup(), CyclicGroup(3)])
    with pytest.raises(ValueError, match="finite"):
        projection_quotient(lazy, [1])


def test_projection_homomorphism():
    g = ProductGroup([CyclicGroup(2), CyclicGroup(4), CyclicGroup(3)])
    q = projection_quotient(g, [1, 2])
    a = subset(g, {(0, 1, 2), (1, 3, 0)})
    b = subset(g, {(1, 2, 1)})
    assert q.image(mul_set(a, b)).elements == mul_set(q.image(a), q.image(b)).elements


def test_image_of_product_is_product_of_images():
    z6 = CyclicGroup(6)
    q = quotient(z6, {0, 3})
    a = subset(z6, {0, 1})
    b = subset(z6, {2, 5})
    assert q.image(mul_set(a, b)).elements == mul_set(q.image(a), q.image(b)).elements


def test_fubini_identity():
    # mu_G(A) equals the quotient-weighted sum of fiber lengths
    from doubling import fiber_profile

    for mode in ("counting", "normalized"):
        z12 = CyclicGroup(12)
        q = quotient(z12, {0, 4, 8}, mode)
        a = subset(z12, {0, 1, 2, 5, 9, 11})
        prof = fiber_profile(a, q)
        total = sum((q.quotient_weight * f for f in prof.fibers.values()), Fraction(0))
        assert total == a.measure


def test_quotient_independent_of_element_labels():
    # relabel Z6 by a permutation; measures of projected sets must not move
    z6 = CyclicGroup(6)
    perm = [2, 4, 0, 5, 1, 3]
    inv_perm = {v: i for i, v in enumerate(perm)}
    table = [
        [perm[(inv_perm[i] + inv_perm[j]) % 6] for j in range(6)] for i in range(6)
    ]
    relabeled = TableGroup(table, name="Z6-relabeled")

    q1 = quotient(z6, {0, 3})
    q2 = quotient(relabeled, {perm[0], perm[3]})
    a1 = subset(z6, {0, 1, 3})
    a2 = subset(relabeled, {perm[0], perm[1], perm[3]})
    assert q1.quotient.order == q2.quotient.order
    assert q1.image(a1).measure == q2.image(a2).measure
    from doubling import fiber_profile

    f1 = sorted(fiber_profile(a1, q1).fibers.values())
    f2 = sorted(fiber_profile(a2, q2).fibers.values())
    assert f1 == f2
