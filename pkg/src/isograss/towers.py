"""Resolutions of orbit closures as towers of Grassmannian bundles.

A point of the resolution of the closure of the stratum labelled
(k_1..k_m, r_1..r_m) is a list of flags: per factor an isotropic
``P~_i <= B_i`` of dimension k_i - r_i, together with a chain
H_0 <= P_1 <= H_1 <= ... <= P_m <= H_m where P_i lives in
B_{<i} + P~_i and H_i in B_{<i} + P~_i^perp, with dim P_i = k_1+..+k_i - r_i
and dim H_i = k_1+..+k_i.  The last space H_m sweeps out the closure, and
the tower structure (isotropic Grassmannian bases, Grassmannian fibers)
gives the symbolic point count.

The covering tower adds, for every symmetric factor with
max{0, 2k_i - n_i} < r_i, a middle isotropic Q~_i (inside B_i for even r_i,
inside B_i + F for odd r_i, where F is an extra line of norm 1); over the
open stratum these choices split the fiber into 2^d components, one pair
per such factor.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .bilinear import (
    SYMMETRIC,
    BilinearSpace,
    QuotientMap,
    pairing,
    perp,
    radical,
)
from .linalg import (
    DEFAULT_BUDGET,
    BudgetExceeded,
    Subspace,
    span,
    subspace_intersect,
    subspace_sum,
    subspace_total,
    subspaces_between,
    zero_subspace,
)
from .orbits import (
    DOUBLEPRIME0,
    PRIME0,
    is_valid_label,
    label_of,
    rank_numeric,
)
from .paving import isotropic_subspaces, space_iso_count
from .polynomials import IntPolynomial, gaussian_binomial
from .sumspace import MultiLabel, SumSpace, multilabel_of, validate_multilabel


@dataclass(frozen=True)
class FlagDatum:
    """One point of the resolution: per-factor isotropics and the flag chain."""

    ptildes: tuple[Subspace, ...]  # in B_i coordinates
    ps: tuple[Subspace, ...]       # in B, supported on the first blocks
    hs: tuple[Subspace, ...]

    @property
    def target(self) -> Subspace:
        return self.hs[-1]


@dataclass(frozen=True)
class TowerLayer:
    kind: str  # 'iso_grassmannian' | 'iso_component' | 'grassmannian'
    params: tuple[int, ...]
    count: IntPolynomial


@dataclass(frozen=True)
class TowerDescriptor:
    layers: tuple[TowerLayer, ...]

    def count_polynomial(self) -> IntPolynomial:
        total = IntPolynomial([1])
        for layer in self.layers:
            total = total * layer.count
        return total


def resolution_tower(space: SumSpace, label: MultiLabel) -> TowerDescriptor:
    """Symbolic layer structure of the resolution for a valid label.

    Base layers are the isotropic Grassmannians of the P~_i choices (one
    ruling only when r_i is a component tag); then for each factor the
    chain space P_i and the target space H_i each contribute a Grassmannian
    fiber layer.  Counts are exact for split factors.
    """
    validate_multilabel(space, label)
    layers = []
    for i, f in enumerate(space.factors):
        ki, ri = label.ks[i], label.rs[i]
        if ri in (PRIME0, DOUBLEPRIME0):
            half = space_iso_count(f, ki).exact_div(2)
            layers.append(TowerLayer("iso_component", (f.n, ki), half))
        else:
            layers.append(
                TowerLayer("iso_grassmannian", (f.n, ki - ri), space_iso_count(f, ki - ri))
            )
    nu_prev = 0  # dim B_{<j}
    n_prev = 0   # k_1 + ... + k_{j-1}
    for j, f in enumerate(space.factors):
        kj = label.ks[j]
        rj = rank_numeric(label.rs[j])
        if j > 0:
            amb = (nu_prev - n_prev) + (kj - rj)
            layers.append(
                TowerLayer("grassmannian", (amb, kj - rj), gaussian_binomial(amb, kj - rj))
            )
        amb_h = (nu_prev - n_prev) + f.n - 2 * kj + 2 * rj
        layers.append(TowerLayer("grassmannian", (amb_h, rj), gaussian_binomial(amb_h, rj)))
        nu_prev += f.n
        n_prev += kj
    return TowerDescriptor(tuple(layers))


def _base_choices(space: SumSpace, label: MultiLabel, i: int):
    """P~_i candidates: isotropic of dim k_i - r_i, one ruling for tags."""
    f = space.factors[i]
    ki, ri = label.ks[i], label.rs[i]
    if ri in (PRIME0, DOUBLEPRIME0):
        for x in isotropic_subspaces(f, ki):
            if label_of(f, x).r == ri:
                yield x
    else:
        yield from isotropic_subspaces(f, ki - ri)


def _upper_bounds(space: SumSpace, i: int, ptilde: Subspace):
    """(B_{<i} + P~_i, B_{<i} + P~_i^perp) as subspaces of B."""
    f = space.factors[i]
    prefix = space.prefix_subspace(i)
    up = subspace_sum(prefix, space.embed_factor(i, ptilde))
    uh = subspace_sum(prefix, space.embed_factor(i, perp(f, ptilde)))
    return up, uh


def tower_points(
    space: SumSpace, label: MultiLabel, budget: int = DEFAULT_BUDGET
) -> list[FlagDatum]:
    """Exhaustive enumeration of the resolution's points."""
    validate_multilabel(space, label)
    symbolic = resolution_tower(space, label).count_polynomial()(space.p)
    if symbolic > budget:
        raise BudgetExceeded(symbolic, budget)
    out: list[FlagDatum] = []
    nsum = list(np.cumsum(label.ks))

    def step(j: int, ptildes, ps, hs):
        if j == space.m:
            out.append(FlagDatum(tuple(ptildes), tuple(ps), tuple(hs)))
            return
        kj, rj = label.ks[j], rank_numeric(label.rs[j])
        h_prev = hs[-1] if hs else zero_subspace(space.n, space.p)
        for ptilde in _base_choices(space, label, j):
            up, uh = _upper_bounds(space, j, ptilde)
            for pj in subspaces_between(h_prev, up, nsum[j] - rj, budget=budget):
                for hj in subspaces_between(pj, uh, nsum[j], budget=budget):
                    step(j + 1, ptildes + [ptilde], ps + [pj], hs + [hj])

    step(0, [], [], [])
    return out


@dataclass(frozen=True)
class FiberPoint:
    datum: FlagDatum
    invariants: tuple[tuple[int, int, int], ...]  # per factor


@dataclass(frozen=True)
class FiberReport:
    points: tuple[FiberPoint, ...]

    def __len__(self):
        return len(self.points)


def _fiber_invariants(space: SumSpace, datum: FlagDatum, target: Subspace):
    """Per factor: dim P_i cap B_{<i}, dim H_i cap B_{<i},
    dim P_i cap (rad pr_i M + B_{<i})."""
    out = []
    for i, f in enumerate(space.factors):
        prefix = space.prefix_subspace(i)
        pr_m = space.project_factor(target, i)
        rad_m = radical(f, pr_m)
        enlarged = subspace_sum(prefix, space.embed_factor(i, rad_m))
        out.append(
            (
                subspace_intersect(datum.ps[i], prefix).dim,
                subspace_intersect(datum.hs[i], prefix).dim,
                subspace_intersect(datum.ps[i], enlarged).dim,
            )
        )
    return tuple(out)


def tower_fiber(
    space: SumSpace,
    label: MultiLabel,
    target: Subspace,
    budget: int = DEFAULT_BUDGET,
) -> FiberReport:
    """All resolution points over a fixed target subspace.

    When the target lies in the open stratum the fiber must be a single
    point (the resolution is bijective there); that is checked here.
    """
    validate_multilabel(space, label)
    if target.n != space.n or target.p != space.p:
        raise ValueError("target lives in the wrong space")
    points: list[FiberPoint] = []
    nsum = list(np.cumsum(label.ks))
    prefixes = [subspace_intersect(target, space.prefix_subspace(i + 1)) for i in range(space.m)]

    def step(j: int, ptildes, ps, hs):
        kj, rj = label.ks[j], rank_numeric(label.rs[j])
        h_prev = hs[-1] if hs else zero_subspace(space.n, space.p)
        target_j = prefixes[j]
        for ptilde in _base_choices(space, label, j):
            up, uh = _upper_bounds(space, j, ptilde)
            up_m = subspace_intersect(up, target_j)
            if up_m.dim < nsum[j] - rj:
                continue
            for pj in subspaces_between(h_prev, up_m, nsum[j] - rj, budget=budget):
                if j == space.m - 1:
                    if uh.contains(target):
                        datum = FlagDatum(
                            tuple(ptildes + [ptilde]), tuple(ps + [pj]), tuple(hs + [target])
                        )
                        points.append(
                            FiberPoint(datum, _fiber_invariants(space, datum, target))
                        )
                    continue
                uh_m = subspace_intersect(uh, target_j)
                for hj in subspaces_between(pj, uh_m, nsum[j], budget=budget):
                    step(j + 1, ptildes + [ptilde], ps + [pj], hs + [hj])

    if target.dim == label.k:
        step(0, [], [], [])
    report = FiberReport(tuple(points))
    if multilabel_of(space, target) == label and len(report) != 1:
        raise AssertionError(
            f"fiber over an open-stratum point has {len(report)} points, expected 1"
        )
    return report


def closure_labels(
    space: SumSpace, label: MultiLabel, budget: int = DEFAULT_BUDGET
) -> set[MultiLabel]:
    """Labels of all targets swept by the resolution: the experimental
    closure of the stratum in label terms (finite-field evidence only)."""
    seen: set[Subspace] = set()
    out: set[MultiLabel] = set()
    for datum in tower_points(space, label, budget=budget):
        h = datum.target
        if h in seen:
            continue
        seen.add(h)
        out.add(multilabel_of(space, h))
    return out


# ---------------------------------------------------------------------------
# Single-factor resolution
# ---------------------------------------------------------------------------

def single_resolution(
    space: BilinearSpace, k: int, r: int, budget: int = DEFAULT_BUDGET
) -> list[tuple[Subspace, Subspace]]:
    """Pairs (P, H) with P isotropic of dim k-r and P <= H <= P^perp, dim H = k.

    Checks the image and fiber laws: the targets are exactly the H with
    dim rad H >= k - r, and the fiber over H is a single pair when
    dim rad H = k - r exactly.
    """
    if not isinstance(r, int) or not is_valid_label(space.form_type, space.n, k, r):
        raise ValueError(f"(k={k}, r={r}) is not a valid integer label")
    pairs = []
    for psub in isotropic_subspaces(space, k - r, budget=budget):
        for h in subspaces_between(psub, perp(space, psub), k, budget=budget):
            pairs.append((psub, h))

    fiber_sizes: dict[Subspace, int] = {}
    for _, h in pairs:
        fiber_sizes[h] = fiber_sizes.get(h, 0) + 1
    if subspace_total(space.n, k, space.p) > budget:
        raise BudgetExceeded(subspace_total(space.n, k, space.p), budget)
    from .linalg import enumerate_subspaces

    for h in enumerate_subspaces(space.n, k, space.p, budget=budget):
        raddim = radical(space, h).dim
        in_image = raddim >= k - r
        if in_image != (h in fiber_sizes):
            raise AssertionError("image of the resolution is not the radical locus")
        if raddim == k - r and fiber_sizes.get(h) != 1:
            raise AssertionError("fiber over an open-stratum point is not a singleton")
    return pairs


# ---------------------------------------------------------------------------
# Covering towers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoverDatum:
    base: FlagDatum
    qtildes: dict  # factor index -> Subspace (B_i or B_i + F coordinates)
    qs: dict       # factor index -> Subspace (B or B + F coordinates)

    def __hash__(self):
        return hash(
            (
                self.base,
                tuple(sorted(self.qtildes.items())),
                tuple(sorted(self.qs.items())),
            )
        )


def cover_factors(space: SumSpace, label: MultiLabel) -> list[int]:
    """Factors that carry the extra middle isotropic: symmetric with
    max{0, 2k_i - n_i} < r_i (integer ranks only)."""
    out = []
    for i, f in enumerate(space.factors):
        ri = label.rs[i]
        if f.form_type != SYMMETRIC or ri in (PRIME0, DOUBLEPRIME0):
            continue
        if max(0, 2 * label.ks[i] - f.n) < int(ri):
            out.append(i)
    return out


def _pad(sub: Subspace, extra: int = 1) -> Subspace:
    rows = np.zeros((sub.dim, sub.n + extra), dtype=np.int64)
    rows[:, : sub.n] = sub.basis
    return span(rows, sub.n + extra, sub.p)


def _extend_space(space: BilinearSpace) -> BilinearSpace:
    """B_i + F with the form extended by <z, z'> = z z' on the new line."""
    g = np.zeros((space.n + 1, space.n + 1), dtype=np.int64)
    g[: space.n, : space.n] = space.gram
    g[space.n, space.n] = 1
    return BilinearSpace(space.n + 1, space.p, SYMMETRIC, g)


def _cover_choices(space: SumSpace, label: MultiLabel, datum: FlagDatum, i: int, budget: int):
    """(Q~_i, Q_i) pairs over one resolution point for one cover factor."""
    f = space.factors[i]
    p = space.p
    ki = label.ks[i]
    ri = int(label.rs[i])
    n_prev = sum(label.ks[:i])
    ptilde, pi, hi = datum.ptildes[i], datum.ps[i], datum.hs[i]
    if ri % 2 == 0:
        qt_dim = ki - ri // 2
        q_dim = n_prev + ki - ri // 2
        for qt in subspaces_between(ptilde, perp(f, ptilde), qt_dim, budget=budget):
            if pairing(f, qt.basis, qt.basis).any():
                continue
            uq = subspace_sum(space.prefix_subspace(i), space.embed_factor(i, qt))
            upper = subspace_intersect(hi, uq)
            for q in subspaces_between(pi, upper, q_dim, budget=budget):
                yield qt, q
    else:
        fe = _extend_space(f)
        qt_dim = ki - (ri - 1) // 2
        q_dim = n_prev + ki - (ri - 1) // 2
        pt_pad = _pad(ptilde)
        pi_pad = _pad(pi)
        extra = np.zeros((1, space.n + 1), dtype=np.int64)
        extra[0, space.n] = 1
        hi_ext = span(np.vstack([_pad(hi).basis, extra]), space.n + 1, p)
        prefix_pad = _pad(space.prefix_subspace(i))
        lo, hi_end = space.offsets[i], space.offsets[i + 1]
        for qt in subspaces_between(pt_pad, perp(fe, pt_pad), qt_dim, budget=budget):
            if pairing(fe, qt.basis, qt.basis).any():
                continue
            rows = np.zeros((qt.dim, space.n + 1), dtype=np.int64)
            rows[:, lo:hi_end] = qt.basis[:, : f.n]
            rows[:, space.n] = qt.basis[:, f.n]
            uq = subspace_sum(prefix_pad, span(rows, space.n + 1, p))
            upper = subspace_intersect(hi_ext, uq)
            for q in subspaces_between(pi_pad, upper, q_dim, budget=budget):
                yield qt, q


def cover_points(
    space: SumSpace, label: MultiLabel, budget: int = DEFAULT_BUDGET
) -> list[CoverDatum]:
    """Exhaustive enumeration of the covering tower."""
    out = []
    factors = cover_factors(space, label)
    for datum in tower_points(space, label, budget=budget):
        choice_lists = [list(_cover_choices(space, label, datum, i, budget)) for i in factors]
        for combo in product(*choice_lists):
            qtildes = {i: qt for i, (qt, _) in zip(factors, combo)}
            qs = {i: q for i, (_, q) in zip(factors, combo)}
            out.append(CoverDatum(datum, qtildes, qs))
    return out


def cover_fiber(
    space: SumSpace,
    label: MultiLabel,
    target: Subspace,
    budget: int = DEFAULT_BUDGET,
):
    """Covering-tower fiber over a target, with its structural components.

    Returns (points, component_count, factor_sizes): per cover factor,
    ``factor_sizes[i]`` is the number of middle-isotropic choices, and the
    component count is the number of distinct tuples of ruling colors,
    where two middle isotropics get the same color iff their intersection
    dimension has the parity of their own dimension.
    """
    base = tower_fiber(space, label, target, budget=budget)
    factors = cover_factors(space, label)
    points = []
    for fp in base.points:
        choice_lists = [
            list(_cover_choices(space, label, fp.datum, i, budget)) for i in factors
        ]
        for combo in product(*choice_lists):
            qtildes = {i: qt for i, (qt, _) in zip(factors, combo)}
            qs = {i: q for i, (_, q) in zip(factors, combo)}
            points.append(CoverDatum(fp.datum, qtildes, qs))

    refs: dict[int, Subspace] = {}
    colorings = set()
    factor_values: dict[int, set] = {i: set() for i in factors}
    for pt in points:
        colors = []
        for i in factors:
            qt = pt.qtildes[i]
            factor_values[i].add(qt)
            ref = refs.setdefault(i, qt)
            colors.append((subspace_intersect(qt, ref).dim - qt.dim) % 2)
        colorings.add(tuple(colors))
    factor_sizes = {i: len(v) for i, v in factor_values.items()}
    return points, len(colorings), factor_sizes


def expected_cover_fiber_space(space: SumSpace, label: MultiLabel, target: Subspace, i: int) -> BilinearSpace:
    """The quadratic space whose maximal-isotropic count gives the fiber
    factor at a cover factor i, for a target in the open stratum:
    pr_i H / rad(pr_i H), extended by a norm-1 line when r_i is odd."""
    f = space.factors[i]
    pr = space.project_factor(target, i)
    sub = BilinearSpace(pr.dim, space.p, f.form_type,
                        pairing(f, pr.basis, pr.basis))
    if int(label.rs[i]) % 2:
        sub = _extend_space(sub)
    qm = QuotientMap(sub, radical(sub, span(np.eye(sub.n, dtype=np.int64), sub.n, sub.p)))
    return qm.quotient
