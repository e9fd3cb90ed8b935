"""Affine pavings of isotropic Grassmannians with respect to an isotropic
flag, built by recursion on the ambient dimension.

The recursion picks an isotropic line L (inside the radical when the form
is degenerate, inside the first flag member otherwise) and splits

    X1 = {H : L in H}             ~ Gr_{k-1}(W)^iso
    X2 = {H : L not in H <= Lp}   ~ rank-k vector bundle over Gr_k(W)^iso
    X3 = {H : H not <= Lp}        ~ affine bundle over the X2-analogue in
                                    dimension k-1 (nondegenerate case only)

where W is a complement of L in Lp = L^perp.  Pieces carry their affine
dimension and the vector of intersection dimensions with the flag; a point
is classified by replaying the case split.

For degenerate forms with flag members outside the radical, the
intersection vector need not be constant on the X2 pieces (the recursion
has no good choice of L there); flags inside the radical, and all flags on
nondegenerate spaces, are fully supported.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .bilinear import SKEW, BilinearSpace, QuotientMap, pairing, perp, standard_space
from .linalg import (
    DEFAULT_BUDGET,
    RowSolver,
    Subspace,
    complement_rows,
    enumerate_subspaces,
    left_kernel,
    span,
    subspace_intersect,
    zero_subspace,
)
from .polynomials import IntPolynomial, monomial
from .orbits import PRIME0, DOUBLEPRIME0


@dataclass(frozen=True)
class PavingPiece:
    piece_id: str
    affine_dim: int
    invariants: tuple[int, ...]


class NotIsotropic(Exception):
    pass


class Paving:
    """Ordered affine paving of Gr_k(space)^iso relative to a flag."""

    def __init__(self, space: BilinearSpace, k: int, flag: tuple[Subspace, ...]):
        _validate_flag(space, flag)
        self.space = space
        self.k = k
        self.flag = flag
        self._root = _build_node(space, k, flag)
        self.pieces: list[PavingPiece] = self._root.pieces

    def count_polynomial(self) -> IntPolynomial:
        total = IntPolynomial([])
        for piece in self.pieces:
            total = total + monomial(piece.affine_dim)
        return total

    def classify(self, h: Subspace) -> int:
        """Index of the piece containing h (isotropic of dimension k)."""
        if h.n != self.space.n or h.p != self.space.p:
            raise ValueError("subspace lives in the wrong space")
        if h.dim != self.k:
            raise ValueError(f"expected dimension {self.k}, got {h.dim}")
        if pairing(self.space, h.basis, h.basis).any():
            raise NotIsotropic("subspace is not isotropic")
        return self._root.classify(h)


def build_paving(space: BilinearSpace, k: int, flag=()) -> Paving:
    return Paving(space, k, tuple(flag))


def classify_point(paving: Paving, h: Subspace) -> str:
    """Piece id of the piece containing h."""
    return paving.pieces[paving.classify(h)].piece_id


def _validate_flag(space: BilinearSpace, flag):
    prev = None
    for m in flag:
        if m.n != space.n or m.p != space.p:
            raise ValueError("flag member lives in the wrong space")
        if pairing(space, m.basis, m.basis).any():
            raise NotIsotropic("flag member is not isotropic")
        if prev is not None and not m.contains(prev):
            raise ValueError("flag members are not nested")
        prev = m


class _Node:
    __slots__ = (
        "kind", "pieces", "k", "line_row", "gram_line", "solver", "w_rows",
        "sub_small", "sub_same", "len1", "len2",
    )

    def classify(self, h: Subspace) -> int:
        if self.kind == "leaf":
            return 0
        if self.kind == "empty":
            raise AssertionError("no pieces to classify into")
        p = h.p
        vals = h.basis @ self.gram_line % p  # <row, L> for each basis row
        in_lperp = not vals.any()
        contains_l = h.contains_vector(self.line_row)
        if contains_l:
            sub_h = self._project(h.basis, p)
            return self.sub_small.classify(sub_h)
        if in_lperp:
            sub_h = self._project(h.basis, p)
            return self.len1 + self.sub_same.classify(sub_h)
        ker = left_kernel(vals.reshape(-1, 1), p)
        f_rows = ker @ h.basis % p
        sub_f = self._project(f_rows, p)
        return self.len1 + self.len2 + self.sub_small.classify(sub_f)

    def _project(self, rows: np.ndarray, p: int) -> Subspace:
        coords = self.solver.solve_rows(rows)
        w_dim = self.w_rows.shape[0]
        return span(coords[:, 1:], w_dim, p) if w_dim else zero_subspace(0, p)


def _find_isotropic_line(space: BilinearSpace) -> np.ndarray | None:
    if space.form_type == SKEW and space.n:
        row = np.zeros(space.n, dtype=np.int64)
        row[0] = 1
        return row
    for line in enumerate_subspaces(space.n, 1, space.p, budget=None):
        v = line.basis
        if not (v @ space.gram @ v.T % space.p).any():
            return v[0].copy()
    return None


def _choose_line(space: BilinearSpace, flag) -> np.ndarray | None:
    rad_rows = left_kernel(space.gram, space.p)
    if rad_rows.shape[0]:
        rad = span(rad_rows, space.n, space.p)
        for m in flag:
            meet = subspace_intersect(rad, m)
            if meet.dim:
                return meet.basis[0].copy()
        return rad.basis[0].copy()
    for m in flag:
        if m.dim:
            return m.basis[0].copy()
    return _find_isotropic_line(space)


def _build_node(space: BilinearSpace, k: int, flag) -> _Node:
    node = _Node()
    node.k = k
    c = len(flag)
    if k == 0:
        node.kind = "leaf"
        node.pieces = [PavingPiece("o", 0, (0,) * c)]
        return node
    if k > space.n or space.n == 0:
        node.kind = "empty"
        node.pieces = []
        return node
    line = _choose_line(space, flag)
    if line is None:
        # anisotropic nondegenerate space: no isotropic subspaces of dim >= 1
        node.kind = "empty"
        node.pieces = []
        return node

    p = space.p
    node.kind = "branch"
    node.line_row = line
    node.gram_line = space.gram @ line % p
    lperp = perp(space, span(line.reshape(1, -1), space.n, p))
    w_rows = complement_rows(line.reshape(1, -1), lperp.basis, p)
    node.w_rows = w_rows
    node.solver = RowSolver(np.vstack([line.reshape(1, -1), w_rows]), p)
    w_dim = w_rows.shape[0]
    gram_w = w_rows @ space.gram @ w_rows.T % p
    w_space = BilinearSpace(w_dim, p, space.form_type, gram_w)

    flag_w = []
    l_in_flag = []
    for m in flag:
        l_in_flag.append(m.contains_vector(line))
        if m.dim:
            coords = node.solver.solve_rows(m.basis)
            flag_w.append(span(coords[:, 1:], w_dim, p))
        else:
            flag_w.append(zero_subspace(w_dim, p))
    flag_w = tuple(flag_w)

    node.sub_small = _build_node(w_space, k - 1, flag_w)
    node.sub_same = _build_node(w_space, k, flag_w)

    pieces: list[PavingPiece] = []
    for sp in node.sub_small.pieces:
        inv = tuple(
            d + (1 if l_in else 0) for d, l_in in zip(sp.invariants, l_in_flag)
        )
        pieces.append(PavingPiece("1." + sp.piece_id, sp.affine_dim, inv))
    node.len1 = len(pieces)
    for sp in node.sub_same.pieces:
        pieces.append(PavingPiece("2." + sp.piece_id, sp.affine_dim + k, sp.invariants))
    node.len2 = len(pieces) - node.len1

    is_degenerate = left_kernel(space.gram, p).shape[0] > 0
    if not is_degenerate:
        fiber = space.n - 2 * k + (1 if space.form_type == SKEW else 0)
        if node.sub_small.pieces:
            if fiber < 0:
                raise AssertionError("negative fiber rank with nonempty base")
            for sp in node.sub_small.pieces:
                pieces.append(
                    PavingPiece(
                        "3." + sp.piece_id, sp.affine_dim + (k - 1) + fiber, sp.invariants
                    )
                )
    node.pieces = pieces
    return node


# ---------------------------------------------------------------------------
# Count polynomials of isotropic Grassmannians
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def iso_grassmannian_count(form_type: str, n: int, k: int) -> IntPolynomial:
    """Point-count polynomial of Gr_k^iso of the split standard form.

    The paving recursion of a split form has the same shape over every odd
    prime, so the sum of q^dim over its pieces is a single polynomial; the
    reference construction uses p = 3.
    """
    space = standard_space(form_type, n, 3)
    return build_paving(space, k).count_polynomial()


def space_iso_count(space: BilinearSpace, k: int) -> IntPolynomial:
    """Piece-count polynomial of Gr_k(space)^iso for this specific space.

    Correct as a point count at the space's own prime; transferable across
    primes only for split forms.
    """
    return build_paving(space, k).count_polynomial()


def component_iso_count(space: BilinearSpace, k: int, tag) -> IntPolynomial:
    """Count polynomial of one family of maximal isotropics (n = 2k)."""
    if tag not in (PRIME0, DOUBLEPRIME0):
        raise ValueError("component tag expected")
    return space_iso_count(space, k).exact_div(2)


def isotropic_subspaces(space: BilinearSpace, k: int, budget: int = DEFAULT_BUDGET):
    """All isotropic k-subspaces, in enumeration order.

    The isotropy test runs on batches of candidate bases; only the
    survivors are materialized as Subspace objects.
    """
    from . import _batch
    from .linalg import BudgetExceeded, subspace_total

    n, p = space.n, space.p
    total = subspace_total(n, k, p)
    if total > budget:
        raise BudgetExceeded(total, budget)
    gram = np.asarray(space.gram)
    for pattern, lo, hi in _batch.iter_chunks(n, k, p, 0, total, 1 << 14):
        mats = _batch.pattern_matrices(n, k, p, pattern, lo, hi)
        keep = _batch.isotropic_filter(mats, gram, p)
        for mat in mats[keep]:
            yield Subspace(mat, n, p)  # pattern matrices are already RREF


# ---------------------------------------------------------------------------
# Pairs (R, H) with R in a fixed Gr_r(M_1 cap rad V) and R <= H isotropic
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FiberedPieceCount:
    piece_id: str
    affine_dim: int
    invariants: tuple[int, ...]
    pairs: int
    fiber_exponent: int


def fibered_partition_counts(
    space: BilinearSpace,
    flag,
    r: int,
    k: int,
    budget: int = DEFAULT_BUDGET,
) -> list[FiberedPieceCount]:
    """Exact per-piece counts of {(R, H) : R <= H}, fibered over Gr_r(M1 cap rad V).

    For each R the quotient V/R carries the induced form and the image flag;
    its paving classifies the H containing R.  The piece lists must agree
    across R (same recursion on isomorphic data), each fiber piece has
    exactly p^f points, and the totals come out as #Gr_r(M1 cap rad V) * p^f.
    All three facts are checked and violations raise AssertionError.
    """
    flag = tuple(flag)
    _validate_flag(space, flag)
    if not 0 <= r <= k:
        raise ValueError("need 0 <= r <= k")
    p = space.p
    rad_rows = left_kernel(space.gram, p)
    rad = span(rad_rows, space.n, p) if rad_rows.size else zero_subspace(space.n, p)
    m1 = flag[0] if flag else zero_subspace(space.n, p)
    base = subspace_intersect(m1, rad)
    if r > base.dim:
        return []

    per_r: list[list[int]] = []
    ref_pieces: list[PavingPiece] | None = None
    n_base = 0
    for rq in enumerate_subspaces(base.dim, r, p, budget=budget):
        rows = rq.basis @ base.basis % p if rq.dim else np.zeros((0, space.n), dtype=np.int64)
        rsub = span(rows, space.n, p) if rows.size else zero_subspace(space.n, p)
        n_base += 1
        qm = QuotientMap(space, rsub)
        flag_q = tuple(qm.project_subspace(m) for m in flag)
        paving = build_paving(qm.quotient, k - r, flag_q)
        if ref_pieces is None:
            ref_pieces = paving.pieces
        else:
            sig = [(pc.affine_dim, pc.invariants, pc.piece_id) for pc in paving.pieces]
            ref_sig = [(pc.affine_dim, pc.invariants, pc.piece_id) for pc in ref_pieces]
            if sig != ref_sig:
                raise AssertionError("piece structure varies across the base")
        tallies = [0] * len(paving.pieces)
        for hq in isotropic_subspaces(qm.quotient, k - r, budget=budget):
            tallies[paving.classify(hq)] += 1
        for idx, (pc, t) in enumerate(zip(paving.pieces, tallies)):
            if t != p**pc.affine_dim:
                raise AssertionError(
                    f"piece {pc.piece_id} has {t} points, expected p^{pc.affine_dim}"
                )
        per_r.append(tallies)

    out = []
    if ref_pieces is None:
        return out
    from .polynomials import gaussian_binomial

    base_count = gaussian_binomial(base.dim, r)(p)
    assert base_count == n_base
    for idx, pc in enumerate(ref_pieces):
        total = sum(t[idx] for t in per_r)
        assert total == base_count * p**pc.affine_dim
        out.append(
            FiberedPieceCount(
                pc.piece_id, pc.affine_dim, pc.invariants, total, pc.affine_dim
            )
        )
    return out
