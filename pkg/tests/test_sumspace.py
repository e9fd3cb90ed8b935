import pytest

from isograss.bilinear import SKEW, SYMMETRIC
from isograss.linalg import enumerate_subspaces, span, zero_subspace
from isograss.orbits import DOUBLEPRIME0, PRIME0
from isograss.polynomials import gaussian_binomial, interpolate_counts
from isograss.sumspace import (
    MultiLabel,
    SpecParseError,
    SumSpace,
    build_sum_space,
    canonical_representative,
    component_group_order_multi,
    enumerate_multilabels,
    format_space_spec,
    multilabel_of,
    orbit_dim_multi,
    orbit_point_counts,
    orbit_points_multi,
    parse_space_spec,
    slice_weights,
)


def test_parse_space_spec():
    assert parse_space_spec("Sp2+O3+O4") == [(SKEW, 2), (SYMMETRIC, 3), (SYMMETRIC, 4)]
    assert format_space_spec(parse_space_spec("Sp4")) == "Sp4"
    assert format_space_spec(parse_space_spec("O2+Sp2")) == "O2+Sp2"
    for bad, pos in (("Sp3", 0), ("X4", 0), ("Sp2+", 4), ("+O2", 0), ("Sp2 O2", 3), ("", 0)):
        with pytest.raises(SpecParseError) as exc:
            parse_space_spec(bad)
        assert exc.value.pos == pos


def test_sum_space_layout():
    b = build_sum_space("Sp2+O2", 3)
    assert b.n == 4 and b.dims == (2, 2) and b.offsets == (0, 2, 4)
    assert (b.gram[:2, 2:] == 0).all()
    rt = SumSpace.from_descriptor(b.to_descriptor())
    assert rt.dims == b.dims and (rt.gram == b.gram).all()
    assert rt.factors[1].witness == b.factors[1].witness


def test_enumerate_multilabels_examples():
    b = build_sum_space("Sp2+O2", 3)
    labels = enumerate_multilabels(b, 1)
    assert len(labels) == 4
    assert MultiLabel((0, 1), (0, PRIME0)) in labels
    assert MultiLabel((0, 1), (0, DOUBLEPRIME0)) in labels
    assert MultiLabel((0, 1), (0, 1)) in labels
    assert MultiLabel((1, 0), (0, 0)) in labels

    assert enumerate_multilabels(build_sum_space("Sp2", 3), 1) == [
        MultiLabel((1,), (0,))
    ]
    assert enumerate_multilabels(build_sum_space("O1+O1", 3), 2) == [
        MultiLabel((1, 1), (1, 1))
    ]


def test_multilabel_of_examples():
    b = build_sum_space("Sp2+O2", 3)
    # block-diagonal: labels are the per-factor labels
    h = span([[1, 0, 0, 0], [0, 0, 1, 0]], 4, 3)
    assert multilabel_of(b, h) == MultiLabel((1, 1), (0, PRIME0))
    # graph subspace: h cap B_1 = 0, projection is the witness line
    diag = span([[1, 0, 1, 0]], 4, 3)
    assert multilabel_of(b, diag) == MultiLabel((0, 1), (0, PRIME0))
    assert multilabel_of(b, zero_subspace(4, 3)) == MultiLabel((0, 0), (0, 0))


def test_orbit_dim_multi_examples():
    b = build_sum_space("Sp2+O2", 3)
    assert orbit_dim_multi(b, MultiLabel((0, 1), (0, 1))) == 3
    assert orbit_dim_multi(b, MultiLabel((1, 0), (0, 0))) == 1
    assert orbit_dim_multi(b, MultiLabel((0, 1), (0, PRIME0))) == 2
    o1o1 = build_sum_space("O1+O1", 3)
    assert orbit_dim_multi(o1o1, MultiLabel((1, 1), (1, 1))) == 0
    # m = 1 reduces to the single-factor dimension
    sp4 = build_sum_space("Sp4", 3)
    assert orbit_dim_multi(sp4, MultiLabel((2,), (0,))) == 3


def test_component_group_order_multi():
    spsp = build_sum_space("Sp2+Sp2", 3)
    for lab in enumerate_multilabels(spsp, 2):
        assert component_group_order_multi(spsp, lab) == 1
    o4o3 = build_sum_space("O4+O3", 3)
    assert component_group_order_multi(o4o3, MultiLabel((2, 1), (2, 1))) == 4
    assert component_group_order_multi(o4o3, MultiLabel((2, 1), (PRIME0, 0))) == 1


def test_slice_weights():
    sp4 = build_sum_space("Sp4", 3)
    rep = slice_weights(sp4, MultiLabel((2,), (0,)), [0])
    assert [(w.block, w.sub_block, w.weight) for w in rep.weights] == [((0, 0), "c", 2)]
    assert rep.min_weight() == 2

    b = build_sum_space("Sp2+O2", 3)
    lab = MultiLabel((1, 1), (0, 1))
    rep = slice_weights(b, lab, [0, 1])
    by_key = {(w.block, w.sub_block): w.weight for w in rep.weights}
    assert by_key[((0, 1), "b")] == 1
    assert by_key[((0, 1), "c")] == 3
    assert rep.min_weight() == 1
    assert not rep.non_positive()

    with pytest.raises(ValueError):
        slice_weights(b, lab, [0, 0])
    with pytest.raises(ValueError):
        slice_weights(b, lab, [2, 1])


def test_orbit_point_counts_sp2_o2():
    b = build_sum_space("Sp2+O2", 3)
    counts = orbit_point_counts(b, 1)
    expect = {
        MultiLabel((1, 0), (0, 0)): 4,
        MultiLabel((0, 1), (0, PRIME0)): 9,
        MultiLabel((0, 1), (0, DOUBLEPRIME0)): 9,
        MultiLabel((0, 1), (0, 1)): 18,
    }
    assert counts == expect
    assert sum(counts.values()) == 40 == gaussian_binomial(4, 1)(3)


def test_orbit_points_multi_edge_cases():
    b = build_sum_space("Sp2+O2", 3)
    # a label outside the valid set counts zero
    assert orbit_points_multi(b, MultiLabel((1, 0), (1, 0))) == 0
    counts = orbit_point_counts(b, 0)
    assert counts == {MultiLabel((0, 0), (0, 0)): 1}


def test_partition_multi_small():
    for spec in ("Sp2+O2", "Sp2+Sp2", "O2+O3"):
        for p in (3, 5):
            b = build_sum_space(spec, p)
            for k in range(b.n + 1):
                counts = orbit_point_counts(b, k)
                labels = enumerate_multilabels(b, k)
                assert set(counts) == set(labels)
                assert all(c > 0 for c in counts.values())
                assert sum(counts.values()) == gaussian_binomial(b.n, k)(p)


def test_partition_multi_dimension_six():
    for spec in ("Sp2+O4", "Sp4+Sp2", "O3+O3", "O1+O2"):
        b = build_sum_space(spec, 3)
        for k in range(b.n + 1):
            counts = orbit_point_counts(b, k)
            assert set(counts) == set(enumerate_multilabels(b, k))
            assert sum(counts.values()) == gaussian_binomial(b.n, k)(3)


def test_batched_multilabels_agree_with_scalar():
    for spec in ("Sp2+O2", "O2+O3"):
        b = build_sum_space(spec, 3)
        for k in (1, 2):
            scalar: dict = {}
            for h in enumerate_subspaces(b.n, k, 3):
                lab = multilabel_of(b, h)
                scalar[lab] = scalar.get(lab, 0) + 1
            assert scalar == orbit_point_counts(b, k)


def test_bundle_law():
    # orbit count = p^{sum_{i<j} k_j (n_i - k_i)} * prod stratum counts
    from isograss.orbits import stratum_points

    for spec, p in (("Sp2+O2", 3), ("O2+O3", 3), ("Sp2+Sp2", 5)):
        b = build_sum_space(spec, p)
        for k in range(b.n + 1):
            counts = orbit_point_counts(b, k)
            for lab, c in counts.items():
                fiber = 1
                for j in range(b.m):
                    for i in range(j):
                        fiber *= p ** (lab.ks[j] * (b.dims[i] - lab.ks[i]))
                prod = 1
                for i, f in enumerate(b.factors):
                    prod *= stratum_points(f, lab.ks[i], lab.rs[i])
                assert c == fiber * prod, (spec, p, k, str(lab))


def test_degree_law_multi_small():
    primes = (3, 5, 7, 11, 13)
    spaces = {p: build_sum_space("Sp2+O2", p) for p in primes}
    for k in range(5):
        all_counts = {p: orbit_point_counts(spaces[p], k) for p in primes}
        for lab in enumerate_multilabels(spaces[3], k):
            d = orbit_dim_multi(spaces[3], lab)
            samples = [(p, all_counts[p].get(lab, 0)) for p in primes]
            if d == 0:
                assert all(c == 1 for _, c in samples)
                continue
            poly = interpolate_counts(samples[: d + 2], d, require_nonnegative=False)
            assert poly.degree == d, (str(lab), poly)
            for p, c in samples:
                assert poly(p) == c


def test_chunked_counts_merge():
    b = build_sum_space("Sp2+O2", 3)
    from isograss.linalg import subspace_total

    total = subspace_total(4, 2, 3)
    merged: dict = {}
    for start in range(0, total, 37):
        part = orbit_point_counts(b, 2, start=start, stop=min(start + 37, total))
        for lab, c in part.items():
            merged[lab] = merged.get(lab, 0) + c
    assert merged == orbit_point_counts(b, 2)


def test_workers_match_serial():
    b = build_sum_space("O2+O3", 7)
    serial = orbit_point_counts(b, 2)
    from isograss.sumspace import _COUNTS_CACHE

    _COUNTS_CACHE.clear()
    parallel = orbit_point_counts(b, 2, workers=2)
    assert serial == parallel


def test_canonical_representative_hits_every_label():
    for spec in ("Sp2", "Sp4", "O2", "O3", "O4", "Sp2+O2", "Sp2+Sp2", "O2+O3"):
        b = build_sum_space(spec, 3)
        for k in range(b.n + 1):
            for lab in enumerate_multilabels(b, k):
                rep = canonical_representative(b, lab)
                assert rep.dim == k
                assert multilabel_of(b, rep) == lab, (spec, k, str(lab))
