"""Property suites: exhaustive finite-field checks of the classification,
dimension, paving, resolution, fiber, closure, transporter and slice laws.

Each suite returns a list of CheckResult; a suite passes when every result
does.  Budget refusals raise BudgetExceeded instead of failing a check, so
callers can tell "wrong" from "too big".
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bilinear import (
    SYMMETRIC,
    BilinearSpace,
    DiscriminantMismatch,
    discriminant_class,
    pairing,
    perp,
    rank_invariant,
    standard_space,
    transport_isometry,
    witt_decompose,
)
from .linalg import (
    DEFAULT_BUDGET,
    BudgetExceeded,
    random_subspace,
    subspace_intersect,
    subspace_sum,
    subspace_total,
)
from .orbits import DOUBLEPRIME0, PRIME0, rank_numeric
from .paving import build_paving, isotropic_subspaces
from .polynomials import (
    IntPolynomial,
    InterpolationError,
    gaussian_binomial,
    interpolate_counts,
)
from .sumspace import (
    MultiLabel,
    build_sum_space,
    canonical_representative,
    component_group_order_multi,
    enumerate_multilabels,
    multilabel_of,
    orbit_dim_multi,
    orbit_point_counts,
    slice_weights,
)
from .towers import (
    closure_labels,
    cover_factors,
    cover_fiber,
    expected_cover_fiber_space,
    resolution_tower,
    tower_fiber,
    tower_points,
)

GRID_SPACES = ("Sp2", "Sp4", "O2", "O3", "O4", "Sp2+O2", "Sp2+Sp2", "O2+O3")
PRIME_POOL = (3, 5, 7, 11, 13, 17, 19, 23, 29, 31)
SUITE_NAMES = ("partition", "degrees", "paving", "towers", "fibers", "closure")


@dataclass
class CheckResult:
    name: str
    passed: bool
    details: str = ""
    repro: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f"  [{self.details}]" if self.details and not self.passed else ""
        return f"{status}  {self.name}{extra}"


def _result(name, passed, details="", repro=""):
    return CheckResult(name, bool(passed), details, repro)


# ---------------------------------------------------------------------------
# partition
# ---------------------------------------------------------------------------

def _krange(n: int, only_k):
    if only_k is None:
        return range(n + 1)
    return [only_k] if 0 <= only_k <= n else []


def suite_partition(specs=GRID_SPACES, primes=(3, 5), budget=DEFAULT_BUDGET, workers=1,
                    only_k=None):
    out = []
    for spec in specs:
        for p in primes:
            space = build_sum_space(spec, p)
            bad = []
            for k in _krange(space.n, only_k):
                counts = orbit_point_counts(space, k, budget=budget, workers=workers)
                labels = set(enumerate_multilabels(space, k))
                if set(counts) != labels:
                    bad.append(f"k={k}: label sets differ")
                if any(c <= 0 for c in counts.values()):
                    bad.append(f"k={k}: empty stratum")
                total = sum(counts.values())
                expect = gaussian_binomial(space.n, k)(p)
                if total != expect:
                    bad.append(f"k={k}: {total} != {expect}")
            out.append(
                _result(
                    f"partition {spec} p={p}",
                    not bad,
                    "; ".join(bad),
                    f"isograss verify --space {spec} --primes {p} --suite partition",
                )
            )
    return out


# ---------------------------------------------------------------------------
# degrees
# ---------------------------------------------------------------------------

def _primes_for_degree(base_primes, degree, space_n, k, budget, soft_extra=2_000_000):
    """Prime set with degree+1 usable samples, always covering the base
    primes, plus one redundant sample when it is cheap."""
    need = max(degree + 1, len(base_primes))
    pool = list(dict.fromkeys(list(base_primes) + list(PRIME_POOL)))
    usable = [p for p in pool if subspace_total(space_n, k, p) <= budget]
    if len(usable) < degree + 1:
        too_big = [subspace_total(space_n, k, p) for p in pool if p not in usable]
        raise BudgetExceeded(min(too_big) if too_big else 0, budget)
    chosen = usable[:need]
    for q in usable[need:]:
        if subspace_total(space_n, k, q) <= soft_extra:
            chosen.append(q)
            break
    return chosen


def stratum_polynomials(
    spec: str,
    k: int,
    base_primes=(3, 5, 7, 11),
    budget=DEFAULT_BUDGET,
    workers=1,
) -> dict[MultiLabel, IntPolynomial]:
    """Exact count polynomial of every stratum of Gr_k for one grid space.

    Sampling primes start from ``base_primes`` and are extended until every
    fit is determined.  The unique top-dimensional label (the open stratum)
    needs no samples of its own: the classification is a partition, so at
    every prime its count is the Gaussian binomial minus the other strata,
    and its polynomial is derived from that identity, then re-checked
    against all gathered counts.  Every sample must lie on its label's
    fitted polynomial.
    """
    ref = build_sum_space(spec, 3)
    labels = enumerate_multilabels(ref, k)
    degrees = {lab: orbit_dim_multi(ref, lab) for lab in labels}
    max_deg = max(degrees.values(), default=0)
    tops = [lab for lab, d in degrees.items() if d == max_deg]
    top = tops[0] if len(tops) == 1 else None
    sample_deg = max(
        [d for lab, d in degrees.items() if lab != top], default=0
    ) if top is not None else max_deg
    primes = _primes_for_degree(base_primes, sample_deg, ref.n, k, budget)
    counts = {}
    for p in primes:
        space = build_sum_space(spec, p)
        counts[p] = orbit_point_counts(space, k, budget=budget, workers=workers)
        total = sum(counts[p].values())
        expect = gaussian_binomial(ref.n, k)(p)
        if total != expect:
            raise InterpolationError(f"{spec} k={k} p={p}: partition broken")
    out = {}
    for lab in labels:
        if lab == top:
            continue
        d = degrees[lab]
        samples = [(p, counts[p].get(lab, 0)) for p in primes]
        poly = interpolate_counts(samples[: d + 1], d, require_nonnegative=False)
        for p, c in samples:
            if poly(p) != c:
                raise InterpolationError(
                    f"{spec} k={k} {lab}: sample at p={p} off the fitted polynomial"
                )
        out[lab] = poly
    if top is not None:
        rest = IntPolynomial([])
        for poly in out.values():
            rest = rest + poly
        derived = gaussian_binomial(ref.n, k) - rest
        for p in primes:
            if derived(p) != counts[p].get(top, 0):
                raise InterpolationError(
                    f"{spec} k={k} {top}: derived polynomial misses the count at p={p}"
                )
        out[top] = derived
    return out


def suite_degrees(
    specs=GRID_SPACES, base_primes=(3, 5, 7, 11), budget=DEFAULT_BUDGET, workers=1,
    only_k=None,
):
    out = []
    for spec in specs:
        ref = build_sum_space(spec, 3)
        for k in _krange(ref.n, only_k):
            bad = []
            try:
                polys = stratum_polynomials(spec, k, base_primes, budget, workers)
            except InterpolationError as e:
                out.append(_result(f"degrees {spec} k={k}", False, str(e)))
                continue
            total = IntPolynomial([])
            for lab, poly in polys.items():
                d = orbit_dim_multi(ref, lab)
                if poly.is_zero() or poly.degree != d:
                    bad.append(f"{lab}: degree {poly} != {d}")
                total = total + poly
            if total != gaussian_binomial(ref.n, k):
                bad.append(f"sum of strata {total} != Gaussian binomial")
            # closures (unions of strata down the rank order) count positively
            if ref.m == 1:
                for lab, poly in polys.items():
                    closure_poly = IntPolynomial([])
                    for other, q in polys.items():
                        if _single_below(other, lab):
                            closure_poly = closure_poly + q
                    if not closure_poly.is_nonnegative():
                        bad.append(f"closure of {lab} has a negative coefficient")
            out.append(
                _result(
                    f"degrees {spec} k={k}",
                    not bad,
                    "; ".join(bad),
                    f"isograss verify --space {spec} --k {k} --suite degrees",
                )
            )
    return out


def _single_below(a: MultiLabel, b: MultiLabel) -> bool:
    """Rank order on single-factor labels of equal k: a in the closure of b."""
    ra, rb = a.rs[0], b.rs[0]
    if rb in (PRIME0, DOUBLEPRIME0):
        return ra == rb
    return rank_numeric(ra) <= int(rb)


# ---------------------------------------------------------------------------
# paving
# ---------------------------------------------------------------------------

def _sample_flags(space: BilinearSpace, max_len=2):
    flags = [()]
    lines = []
    for h in isotropic_subspaces(space, 1):
        lines.append(h)
        if len(lines) == 3:
            break
    for line in lines[:2]:
        flags.append((line,))
    if max_len >= 2:
        count = 0
        for plane in isotropic_subspaces(space, 2):
            for line in lines:
                if plane.contains(line):
                    flags.append((line, plane))
                    count += 1
                    break
            if count == 2:
                break
    return flags


def suite_paving(forms_dims=None, primes=(3, 5), budget=DEFAULT_BUDGET):
    from .bilinear import SKEW

    if forms_dims is None:
        forms_dims = [(SKEW, 2), (SKEW, 4), (SYMMETRIC, 2), (SYMMETRIC, 3),
                      (SYMMETRIC, 4), (SYMMETRIC, 5)]
    out = []
    for form, n in forms_dims:
        for p in primes:
            space = standard_space(form, n, p)
            bad = []
            for flag in _sample_flags(space):
                for k in range(n // 2 + 1):
                    paving = build_paving(space, k, flag)
                    tallies = [0] * len(paving.pieces)
                    for h in isotropic_subspaces(space, k, budget=budget):
                        idx = paving.classify(h)
                        tallies[idx] += 1
                        got = tuple(subspace_intersect(h, m).dim for m in flag)
                        if got != paving.pieces[idx].invariants:
                            bad.append(f"k={k} flag-len={len(flag)}: invariants vary")
                    for idx, piece in enumerate(paving.pieces):
                        if tallies[idx] != p**piece.affine_dim:
                            bad.append(
                                f"k={k} piece {piece.piece_id}: {tallies[idx]} != p^{piece.affine_dim}"
                            )
                    if sum(tallies) != paving.count_polynomial()(p):
                        bad.append(f"k={k}: piece polynomial misses the total")
            tag = ("Sp" if form != SYMMETRIC else "O") + str(n)
            out.append(_result(f"paving {tag} p={p}", not bad, "; ".join(bad[:4])))
    return out


# ---------------------------------------------------------------------------
# towers
# ---------------------------------------------------------------------------

def suite_towers(specs=GRID_SPACES, primes=(3,), budget=DEFAULT_BUDGET, small_cap=200_000,
                 only_k=None):
    out = []
    for spec in specs:
        for p in primes:
            space = build_sum_space(spec, p)
            bad = []
            for k in _krange(space.n, only_k):
                for label in enumerate_multilabels(space, k):
                    tower = resolution_tower(space, label)
                    poly = tower.count_polynomial()
                    if not poly.is_nonnegative() or not poly.is_palindromic():
                        bad.append(f"{label}: tower polynomial {poly} not paved/proper")
                    expect = poly(p)
                    if expect > small_cap:
                        continue
                    got = len(tower_points(space, label, budget=budget))
                    if got != expect:
                        bad.append(f"{label}: {got} points != symbolic {expect}")
            out.append(
                _result(
                    f"towers {spec} p={p}",
                    not bad,
                    "; ".join(bad[:4]),
                    f"isograss verify --space {spec} --primes {p} --suite towers",
                )
            )
    return out


# ---------------------------------------------------------------------------
# fibers
# ---------------------------------------------------------------------------

def suite_fibers(specs=GRID_SPACES, primes=(3, 5, 7), budget=DEFAULT_BUDGET, only_k=None):
    out = []
    for spec in specs:
        out.extend(_fiber_bijectivity(spec, primes[0], budget, only_k))
        out.extend(_fiber_polynomiality(spec, primes, budget, only_k))
        out.extend(_cover_components(spec, budget, only_k))
    return out


def _fiber_bijectivity(spec, p, budget, only_k=None):
    """Over the open stratum every target is hit exactly once."""
    space = build_sum_space(spec, p)
    bad = []
    for k in _krange(space.n, only_k):
        for label in enumerate_multilabels(space, k):
            hits: dict = {}
            for datum in tower_points(space, label, budget=budget):
                hits[datum.target] = hits.get(datum.target, 0) + 1
            for target, c in hits.items():
                if multilabel_of(space, target) == label and c != 1:
                    bad.append(f"{label}: target hit {c} times")
    return [_result(f"fibers bijectivity {spec} p={p}", not bad, "; ".join(bad[:4]))]


def _fiber_polynomiality(spec, primes, budget, only_k=None):
    """Fiber sizes over canonical representatives interpolate exactly."""
    ref = build_sum_space(spec, 3)
    bad = []
    for k in _krange(ref.n, only_k):
        labels = enumerate_multilabels(ref, k)
        for label in labels:
            below = closure_labels(ref, label, budget=budget)
            dim_x = resolution_tower(ref, label).count_polynomial().degree
            for sub in sorted(below, key=MultiLabel.sort_key):
                bound = dim_x - orbit_dim_multi(ref, sub)
                use = _primes_for_degree(list(primes), bound, 0, 0, budget)
                samples = []
                for p in use:
                    space = build_sum_space(spec, p)
                    rep = canonical_representative(space, sub)
                    samples.append((p, len(tower_fiber(space, label, rep, budget=budget))))
                try:
                    poly = interpolate_counts(samples[: bound + 1], bound)
                    for p, c in samples:
                        if poly(p) != c:
                            raise InterpolationError("extra sample off the polynomial")
                except InterpolationError as e:
                    bad.append(f"{label} over {sub}: {e}")
    return [_result(f"fibers polynomial {spec} p={tuple(primes)}", not bad, "; ".join(bad[:4]))]


def _cover_components(spec, budget, only_k=None):
    """Covering fibers over split-type open points: product structure and 2^d
    components.  Even ranks use p = 3, odd ranks p = 5 (where the extended
    binary form splits at the canonical representative)."""
    bad = []
    ref = build_sum_space(spec, 3)
    for k in _krange(ref.n, only_k):
        for label in enumerate_multilabels(ref, k):
            factors = cover_factors(ref, label)
            if not factors:
                continue
            odd = any(int(label.rs[i]) % 2 for i in factors)
            p = 5 if odd else 3
            space = build_sum_space(spec, p)
            rep = canonical_representative(space, label)
            points, comps, sizes = cover_fiber(space, label, rep, budget=budget)
            d = len(factors)
            want = component_group_order_multi(space, label)
            if comps != want:
                bad.append(f"{label}: {comps} components != {want}")
            expect_total = 1
            for i in factors:
                fib_space = expected_cover_fiber_space(space, label, rep, i)
                half = fib_space.n // 2
                expect = sum(1 for _ in isotropic_subspaces(fib_space, half, budget=budget))
                if sizes.get(i) != expect:
                    bad.append(f"{label} factor {i}: {sizes.get(i)} choices != {expect}")
                expect_total *= expect
            if len(points) != expect_total:
                bad.append(f"{label}: fiber size {len(points)} != product {expect_total}")
            if want != 2**d:
                bad.append(f"{label}: component order {want} != 2^{d}")
    return [_result(f"fibers cover-components {spec}", not bad, "; ".join(bad[:4]))]


# ---------------------------------------------------------------------------
# closure
# ---------------------------------------------------------------------------

def closure_relation(spec: str, k: int, p: int = 3, budget=DEFAULT_BUDGET):
    """label -> set of labels in its experimental closure."""
    space = build_sum_space(spec, p)
    labels = enumerate_multilabels(space, k)
    return {lab: closure_labels(space, lab, budget=budget) for lab in labels}


def suite_closure(specs=GRID_SPACES, primes=(3,), budget=DEFAULT_BUDGET, only_k=None):
    out = []
    for spec in specs:
        p = primes[0]
        space = build_sum_space(spec, p)
        bad = []
        for k in _krange(space.n, only_k):
            rel = closure_relation(spec, k, p, budget)
            for lab, below in rel.items():
                if lab not in below:
                    bad.append(f"k={k} {lab}: not reflexive")
                for sub in below:
                    if lab in rel[sub] and sub != lab:
                        bad.append(f"k={k}: {lab} and {sub} mutually below")
                    if not rel[sub] <= below:
                        bad.append(f"k={k}: closure of {lab} not transitive at {sub}")
            if space.m == 1:
                for lab, below in rel.items():
                    expect = {
                        other
                        for other in rel
                        if _single_below(other, lab)
                    }
                    if below != expect:
                        bad.append(f"k={k} {lab}: closure {below} != rank chain")
        out.append(
            _result(
                f"closure {spec} p={p}",
                not bad,
                "; ".join(bad[:4]),
                f"isograss verify --space {spec} --primes {p} --suite closure",
            )
        )
    return out


# ---------------------------------------------------------------------------
# transporter / Witt checks
# ---------------------------------------------------------------------------

def _witt_table_ok(space, h, ws) -> bool:
    from .linalg import rank_mod

    parts = [ws.m1, ws.m2, ws.m3, ws.m4]
    if sum(x.dim for x in parts) != space.n:
        return False
    if subspace_sum(ws.m1, ws.m2) != h:
        return False
    hperp = perp(space, h)
    if subspace_sum(ws.m1, ws.m3) != hperp or ws.m1 != subspace_intersect(h, hperp):
        return False
    for i in range(4):
        for j in range(4):
            bi, bj = parts[i].basis, parts[j].basis
            if not bi.size or not bj.size:
                continue
            block = pairing(space, bi, bj)
            perfect = {i, j} == {0, 3} or (i == j in (1, 2))
            if perfect and rank_mod(block, space.p) != min(parts[i].dim, parts[j].dim):
                return False
            if not perfect and block.any():
                return False
    return True


def _transport_spaces(spec: str, p: int) -> list[BilinearSpace]:
    space = build_sum_space(spec, p)
    kinds = {f.form_type for f in space.factors}
    if len(kinds) == 1:
        if space.m == 1:
            return [space.factors[0]]
        return [space.as_bilinear()]
    return list(space.factors)


def suite_witt(specs=GRID_SPACES, primes=(3, 5), pairs_per_space=1000, seed=20240817):
    out = []
    rng = np.random.default_rng(seed)
    for spec in specs:
        for p in primes:
            fails = []
            for amb in _transport_spaces(spec, p):
                n = amb.n
                buckets: dict = {}
                done = 0
                while done < pairs_per_space:
                    k = int(rng.integers(0, n + 1))
                    h = random_subspace(n, k, p, rng)
                    ws = witt_decompose(amb, h)
                    if not _witt_table_ok(amb, h, ws):
                        fails.append(f"pairing table fails for {h}")
                        done += 1
                        continue
                    r = rank_invariant(amb, h)
                    disc = None
                    if amb.form_type == SYMMETRIC and r:
                        disc = discriminant_class(amb, ws.m2.basis)
                    key = (k, r, disc)
                    other = buckets.get(key)
                    if other is None:
                        buckets[key] = h
                        continue
                    buckets[key] = h
                    try:
                        g = transport_isometry(amb, other, h)
                    except DiscriminantMismatch as e:
                        fails.append(f"unexpected obstruction: {e}")
                        done += 1
                        continue
                    if ((g.T @ amb.gram @ g - amb.gram) % p).any():
                        fails.append("not an isometry")
                    from .bilinear import apply_isometry

                    if apply_isometry(g, other) != h:
                        fails.append("does not transport")
                    done += 1
            out.append(
                _result(
                    f"witt/transport {spec} p={p} ({pairs_per_space} pairs)",
                    not fails,
                    "; ".join(fails[:3]),
                )
            )
    return out


# ---------------------------------------------------------------------------
# slice positivity
# ---------------------------------------------------------------------------

def suite_slices(specs=GRID_SPACES, samples=100, seed=411):
    rng = np.random.default_rng(seed)
    out = []
    for spec in specs:
        space = build_sum_space(spec, 3)
        bad = []
        for k in range(space.n + 1):
            for label in enumerate_multilabels(space, k):
                for _ in range(samples):
                    exps = np.sort(
                        rng.choice(np.arange(-60, 60), size=space.m, replace=False)
                    )
                    report = slice_weights(space, label, [int(e) for e in exps])
                    if report.min_weight() < 1:
                        bad.append(f"{label}: weight {report.min_weight()} at {exps}")
        out.append(_result(f"slices {spec} ({samples} exponent vectors)", not bad, "; ".join(bad[:3])))
    return out


# ---------------------------------------------------------------------------
# aggregation
# ---------------------------------------------------------------------------

def run_suite(
    name: str,
    specs=GRID_SPACES,
    primes=None,
    budget=DEFAULT_BUDGET,
    workers=1,
    only_k=None,
):
    if name == "partition":
        return suite_partition(specs, primes or (3, 5), budget, workers, only_k)
    if name == "degrees":
        return suite_degrees(specs, primes or (3, 5, 7, 11), budget, workers, only_k)
    if name == "paving":
        return suite_paving(None, primes or (3, 5), budget)
    if name == "towers":
        return suite_towers(specs, primes or (3,), budget, only_k=only_k)
    if name == "fibers":
        return suite_fibers(specs, primes or (3, 5, 7), budget, only_k)
    if name == "closure":
        return suite_closure(specs, primes or (3,), budget, only_k)
    if name == "all":
        out = []
        for sub in SUITE_NAMES:
            out.extend(run_suite(sub, specs, primes, budget, workers, only_k))
        out.extend(suite_witt(specs, (3,), 200))
        out.extend(suite_slices(specs, 20))
        return out
    raise ValueError(f"unknown suite {name!r}")
