from collections import Counter

import numpy as np
import pytest

from isograss.bilinear import SKEW, SYMMETRIC, BilinearSpace, standard_space
from isograss.linalg import span, subspace_intersect
from isograss.paving import (
    NotIsotropic,
    build_paving,
    classify_point,
    fibered_partition_counts,
    iso_grassmannian_count,
    isotropic_subspaces,
)
from isograss.polynomials import IntPolynomial, gaussian_binomial


def test_paving_sp2():
    paving = build_paving(standard_space(SKEW, 2, 3), 1)
    assert sorted(pc.affine_dim for pc in paving.pieces) == [0, 1]
    assert paving.count_polynomial() == IntPolynomial([1, 1])


def test_paving_o2():
    paving = build_paving(standard_space(SYMMETRIC, 2, 3), 1)
    assert sorted(pc.affine_dim for pc in paving.pieces) == [0, 0]


def test_paving_sp4_lagrangians():
    paving = build_paving(standard_space(SKEW, 4, 3), 2)
    assert sorted(pc.affine_dim for pc in paving.pieces) == [0, 1, 2, 3]
    assert paving.count_polynomial()(3) == 40


def test_paving_o4_maximal():
    paving = build_paving(standard_space(SYMMETRIC, 4, 3), 2)
    assert sorted(pc.affine_dim for pc in paving.pieces) == [0, 0, 1, 1]
    assert paving.count_polynomial() == IntPolynomial([2, 2])
    assert paving.count_polynomial()(3) == 8


def test_classify_two_lines_sp2():
    space = standard_space(SKEW, 2, 3)
    paving = build_paving(space, 1)
    a = classify_point(paving, span([[1, 0]], 2, 3))
    b = classify_point(paving, span([[0, 1]], 2, 3))
    assert a != b


def test_classify_rejects_non_isotropic():
    space = standard_space(SYMMETRIC, 2, 3)
    paving = build_paving(space, 1)
    with pytest.raises(NotIsotropic):
        paving.classify(span([[1, 1]], 2, 3))


def _standard_flags(space, max_len=2):
    """A deterministic sample of isotropic flags, lengths 0..max_len."""
    flags = [()]
    iso_lines = []
    for h in isotropic_subspaces(space, 1):
        iso_lines.append(h)
        if len(iso_lines) == 2:
            break
    if iso_lines:
        flags.append((iso_lines[0],))
    planes = [h for h in isotropic_subspaces(space, 2)]
    for plane in planes[:2]:
        for line in iso_lines:
            if plane.contains(line):
                flags.append((line, plane))
                break
    return flags


@pytest.mark.parametrize(
    "form,n",
    [(SKEW, 2), (SKEW, 4), (SYMMETRIC, 2), (SYMMETRIC, 3), (SYMMETRIC, 4), (SYMMETRIC, 5)],
)
def test_paving_laws_exhaustive(form, n):
    # classification is total and single-valued; pieces have p^dim points;
    # the flag-intersection vector is constant per piece
    for p in (3, 5):
        space = standard_space(form, n, p)
        for flag in _standard_flags(space):
            kmax = n // 2
            for k in range(kmax + 1):
                paving = build_paving(space, k, flag)
                tallies = Counter()
                for h in isotropic_subspaces(space, k):
                    idx = paving.classify(h)
                    tallies[idx] += 1
                    piece = paving.pieces[idx]
                    got = tuple(subspace_intersect(h, m).dim for m in flag)
                    assert got == piece.invariants
                for idx, piece in enumerate(paving.pieces):
                    assert tallies[idx] == p**piece.affine_dim
                assert sum(tallies.values()) == paving.count_polynomial()(p)


def test_iso_count_examples():
    assert iso_grassmannian_count(SKEW, 2, 1) == IntPolynomial([1, 1])
    assert iso_grassmannian_count(SKEW, 4, 2) == IntPolynomial([1, 1, 1, 1])
    assert iso_grassmannian_count(SYMMETRIC, 4, 2) == IntPolynomial([2, 2])
    assert iso_grassmannian_count(SYMMETRIC, 4, 1) == IntPolynomial([1, 2, 1])


def test_iso_count_matches_brute_force():
    for form, n in ((SKEW, 2), (SKEW, 4), (SKEW, 6), (SYMMETRIC, 2), (SYMMETRIC, 3),
                    (SYMMETRIC, 4), (SYMMETRIC, 5), (SYMMETRIC, 6)):
        for k in range(n // 2 + 1):
            poly = iso_grassmannian_count(form, n, k)
            primes = (3, 5, 7) if n <= 5 else (3, 5)
            for p in primes:
                space = standard_space(form, n, p)
                brute = sum(1 for _ in isotropic_subspaces(space, k))
                assert poly(p) == brute, (form, n, k, p)


def test_recursion_branches_cover_everything():
    # X1 + X2 + X3 piece counts at q = p partition the isotropic Grassmannian
    for form, n, k in ((SKEW, 4, 2), (SYMMETRIC, 5, 2)):
        space = standard_space(form, n, 3)
        paving = build_paving(space, k)
        by_branch = Counter()
        for pc in paving.pieces:
            by_branch[pc.piece_id.split(".", 1)[0]] += 3**pc.affine_dim
        assert sum(by_branch.values()) == paving.count_polynomial()(3)


def test_fibered_zero_gram_flag_pairs():
    # fully degenerate form: Y(r,k) is the variety of flag pairs R <= H
    p, n = 3, 3
    zero_form = BilinearSpace(n, p, SYMMETRIC, np.zeros((n, n), dtype=np.int64))
    full_flag = (span(np.eye(n, dtype=np.int64), n, p),)
    for r, k in ((1, 1), (1, 2), (0, 2), (2, 2)):
        pieces = fibered_partition_counts(zero_form, full_flag, r, k)
        total = sum(pc.pairs for pc in pieces)
        expect = gaussian_binomial(n, r)(p) * gaussian_binomial(n - r, k - r)(p)
        assert total == expect


def test_fibered_reduces_to_paving_counts_when_r_zero():
    space = standard_space(SKEW, 4, 3)
    line = next(iter(isotropic_subspaces(space, 1)))
    pieces = fibered_partition_counts(space, (line,), 0, 2)
    paving = build_paving(space, 2, (line,))
    assert [pc.pairs for pc in pieces] == [3**q.affine_dim for q in paving.pieces]


def test_fibered_empty_when_r_too_large():
    space = standard_space(SKEW, 4, 3)
    line = next(iter(isotropic_subspaces(space, 1)))
    # nondegenerate: M1 cap rad V = 0, so r = 1 is out of reach
    assert fibered_partition_counts(space, (line,), 1, 2) == []


def test_fibered_mixed_degenerate():
    # rank-1 radical: flags inside the radical fiber correctly
    p = 3
    gram = np.diag([0, 1, 1]).astype(np.int64)
    space = BilinearSpace(3, p, SYMMETRIC, gram)
    m1 = span([[1, 0, 0]], 3, p)
    pieces = fibered_partition_counts(space, (m1,), 1, 1)
    assert sum(pc.pairs for pc in pieces) == 1  # only H = rad itself
