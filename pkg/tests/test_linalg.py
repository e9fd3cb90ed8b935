import numpy as np
import pytest

from isograss.linalg import (
    BudgetExceeded,
    PrimeField,
    Subspace,
    block_project,
    enumerate_subspaces,
    full_subspace,
    intersect_prefix,
    left_kernel,
    random_subspace,
    rref,
    rref_canonicalize,
    span,
    subspace_intersect,
    subspace_sum,
    subspace_total,
    subspaces_between,
    zero_subspace,
)
from isograss.polynomials import gaussian_binomial


def test_prime_field_validation():
    PrimeField(3)
    PrimeField(997)
    for bad in (2, 4, 9, 1, 999, 1009):
        with pytest.raises(ValueError):
            PrimeField(bad)


def test_rref_scaling():
    s = rref_canonicalize(np.array([[2, 0], [0, 1]]), 3)
    assert (s.basis == np.eye(2, dtype=np.int64)).all()


def test_rref_dependent_rows():
    s = rref_canonicalize(np.array([[1, 1], [2, 2]]), 3)
    assert s.dim == 1
    assert (s.basis == [[1, 1]]).all()


def test_rref_empty():
    s = rref_canonicalize(np.zeros((0, 3)), 5, n=3)
    assert s.dim == 0
    assert s == zero_subspace(3, 5)


def test_rref_idempotent_and_scale_invariant_exhaustive():
    # every 2 x n matrix over F_3 (n <= 4): canonical form is stable under
    # re-canonicalization and under row rescaling
    from itertools import product

    p = 3
    for cols in (3, 4):
        for flat in product(range(p), repeat=2 * cols):
            m = np.array(flat, dtype=np.int64).reshape(2, cols)
            s = rref_canonicalize(m, p)
            assert rref_canonicalize(s.basis, p, n=cols) == s
            assert rref_canonicalize(m * np.array([[1], [2]]), p) == s


def test_sum_and_intersect_examples():
    p = 3
    e1 = span([[1, 0]], 2, p)
    e2 = span([[0, 1]], 2, p)
    assert subspace_sum(e1, e2) == full_subspace(2, p)
    assert subspace_sum(e1, e1) == e1

    a = span([[1, 0, 0]], 3, 5)
    b = span([[1, 1, 0]], 3, 5)
    assert subspace_sum(a, b) == span([[1, 0, 0], [0, 1, 0]], 3, 5)

    s12 = span([[1, 0, 0], [0, 1, 0]], 3, 3)
    s23 = span([[0, 1, 0], [0, 0, 1]], 3, 3)
    assert subspace_intersect(s12, s23) == span([[0, 1, 0]], 3, 3)
    assert subspace_intersect(s12, full_subspace(3, 3)) == s12
    assert subspace_intersect(e1, e2) == zero_subspace(2, p)


def test_modular_dimension_law_random():
    rng = np.random.default_rng(42)
    for p in (3, 5):
        for _ in range(100):
            n = int(rng.integers(1, 5))
            a = random_subspace(n, int(rng.integers(0, n + 1)), p, rng)
            b = random_subspace(n, int(rng.integers(0, n + 1)), p, rng)
            s = subspace_sum(a, b)
            i = subspace_intersect(a, b)
            assert s.dim + i.dim == a.dim + b.dim
            assert s.contains(a) and s.contains(b)
            assert a.contains(i) and b.contains(i)


def test_ambient_mismatch():
    with pytest.raises(ValueError):
        subspace_sum(span([[1, 0]], 2, 3), span([[1, 0, 0]], 3, 3))
    with pytest.raises(ValueError):
        subspace_intersect(span([[1, 0]], 2, 3), span([[1, 0]], 2, 5))


def test_left_kernel():
    m = np.array([[1, 0], [2, 0], [0, 0]])
    k = left_kernel(m, 5)
    assert k.shape[0] == 2
    assert not (k @ m % 5).any()


@pytest.mark.parametrize("n,k,p", [(2, 1, 3), (3, 1, 3), (3, 2, 3), (4, 2, 3), (4, 2, 5)])
def test_enumeration_counts(n, k, p):
    subs = list(enumerate_subspaces(n, k, p))
    assert len(subs) == gaussian_binomial(n, k)(p)
    assert len(set(subs)) == len(subs)
    assert all(s.dim == k for s in subs)


def test_enumeration_full_grid():
    for n in range(6):
        for k in range(n + 1):
            for p in (3, 5, 7):
                if subspace_total(n, k, p) > 20000:
                    continue
                got = sum(1 for _ in enumerate_subspaces(n, k, p))
                assert got == gaussian_binomial(n, k)(p)


def test_enumeration_frozen_values():
    assert sum(1 for _ in enumerate_subspaces(2, 1, 3)) == 4
    assert sum(1 for _ in enumerate_subspaces(4, 2, 3)) == 130
    zs = list(enumerate_subspaces(3, 0, 5))
    assert zs == [zero_subspace(3, 5)]


def test_enumeration_chunking_matches_full_run():
    n, k, p = 4, 2, 3
    full = list(enumerate_subspaces(n, k, p))
    total = subspace_total(n, k, p)
    pieces = []
    step = 17
    for start in range(0, total, step):
        pieces.extend(enumerate_subspaces(n, k, p, start=start, stop=min(start + step, total)))
    assert pieces == full


def test_enumeration_budget():
    with pytest.raises(BudgetExceeded):
        list(enumerate_subspaces(10, 5, 7, budget=1000))
    try:
        list(enumerate_subspaces(10, 5, 7, budget=1000))
    except BudgetExceeded as e:
        assert e.estimate == gaussian_binomial(10, 5)(7)


def test_block_project_examples():
    p = 3
    h = span([[1, 0, 0, 0], [0, 0, 1, 0]], 4, p)
    pr0 = block_project(h, [2, 2], 0)
    pr1 = block_project(h, [2, 2], 1)
    assert pr0 == span([[1, 0]], 2, p)
    assert pr1 == span([[1, 0]], 2, p)

    inside_first = span([[1, 1, 0, 0]], 4, p)
    assert block_project(inside_first, [2, 2], 1).dim == 0

    diag = span([[1, 0, 1, 0]], 4, p)
    assert block_project(diag, [2, 2], 0).dim == 0
    assert block_project(diag, [2, 2], 1) == span([[1, 0]], 2, p)


def test_block_project_dimension_identity_exhaustive():
    # sum over blocks of dim pr_i h telescopes to dim h
    p, n = 3, 4
    blocks = [2, 2]
    for k in range(n + 1):
        for h in enumerate_subspaces(n, k, p):
            total = sum(block_project(h, blocks, i).dim for i in range(2))
            assert total == h.dim


def test_intersect_prefix():
    h = span([[1, 0, 1], [0, 1, 1]], 3, 3)
    got = intersect_prefix(h, 2)
    assert got == span([[1, 2, 0]], 3, 3)


def test_subspaces_between():
    p = 3
    lower = span([[1, 0, 0, 0]], 4, p)
    upper = span([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0]], 4, p)
    mids = list(subspaces_between(lower, upper, 2))
    assert len(mids) == gaussian_binomial(2, 1)(p)
    assert all(m.contains(lower) and upper.contains(m) for m in mids)
    assert len(set(mids)) == len(mids)


def test_subspace_repr_and_contains_vector():
    s = span([[1, 2]], 2, 3)
    assert "Subspace" in repr(s)
    assert s.contains_vector([2, 1])
    assert not s.contains_vector([1, 1])
