"""Exact linear algebra over odd prime fields F_p.

Matrices are numpy int64 arrays with entries reduced mod p.  Subspaces of
F_p^n are kept in reduced row-echelon form, which makes equality, hashing
and set membership structural.  Enumeration of Gr_k(F_p^n) is ordered by
(pivot pattern, free entries), both lexicographic, and exposes a global
index range so consumers can partition work into disjoint chunks.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterator, Sequence

import numpy as np

from .polynomials import gaussian_binomial

DEFAULT_BUDGET = 10**8

_SMALL_PRIMES = {
    p
    for p in range(3, 998)
    if p % 2 and all(p % d for d in range(3, int(p**0.5) + 1, 2))
}


class BudgetExceeded(Exception):
    """An enumeration would visit more subspaces than the configured budget."""

    def __init__(self, estimate: int, budget: int):
        self.estimate = estimate
        self.budget = budget
        super().__init__(f"enumeration of ~{estimate} subspaces exceeds budget {budget}")


@dataclass(frozen=True)
class PrimeField:
    """An odd prime field F_p with 3 <= p <= 997."""

    p: int

    def __post_init__(self):
        if self.p not in _SMALL_PRIMES:
            raise ValueError(f"modulus must be an odd prime in [3, 997], got {self.p}")


def as_prime(field_or_p) -> int:
    p = field_or_p.p if isinstance(field_or_p, PrimeField) else int(field_or_p)
    if p not in _SMALL_PRIMES:
        raise ValueError(f"modulus must be an odd prime in [3, 997], got {p}")
    return p


def inv_mod(a: int, p: int) -> int:
    a %= p
    if a == 0:
        raise ZeroDivisionError("no inverse of 0")
    return pow(a, p - 2, p)


def rref(mat: np.ndarray, p: int) -> np.ndarray:
    """Reduced row-echelon form mod p with zero rows dropped."""
    a = np.array(mat, dtype=np.int64) % p
    if a.ndim != 2:
        raise ValueError("expected a 2-d matrix")
    rows, cols = a.shape
    rank = 0
    for col in range(cols):
        piv = -1
        for r in range(rank, rows):
            if a[r, col]:
                piv = r
                break
        if piv < 0:
            continue
        if piv != rank:
            a[[rank, piv]] = a[[piv, rank]]
        a[rank] = a[rank] * inv_mod(int(a[rank, col]), p) % p
        for r in range(rows):
            if r != rank and a[r, col]:
                a[r] = (a[r] - a[r, col] * a[rank]) % p
        rank += 1
        if rank == rows:
            break
    return a[:rank]


def rank_mod(mat: np.ndarray, p: int) -> int:
    return rref(mat, p).shape[0]


class Subspace:
    """A subspace of F_p^n, identified with its canonical RREF basis.

    Two subspaces are equal iff their (n, p, basis) triples are identical;
    the basis array is read-only.
    """

    __slots__ = ("n", "p", "basis", "_key")

    def __init__(self, basis: np.ndarray, n: int, p: int):
        basis = np.ascontiguousarray(basis, dtype=np.int64)
        if basis.size == 0:
            basis = basis.reshape(0, n)
        if basis.shape[1] != n:
            raise ValueError(f"basis has {basis.shape[1]} columns, ambient dim is {n}")
        basis.setflags(write=False)
        self.n = n
        self.p = p
        self.basis = basis
        self._key = (n, p, basis.tobytes())

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def contains(self, other: "Subspace") -> bool:
        self._check_compatible(other)
        if other.dim == 0:
            return True
        stacked = np.vstack([self.basis, other.basis])
        return rank_mod(stacked, self.p) == self.dim

    def contains_vector(self, v: np.ndarray) -> bool:
        v = np.asarray(v, dtype=np.int64) % self.p
        stacked = np.vstack([self.basis, v.reshape(1, -1)])
        return rank_mod(stacked, self.p) == self.dim

    def _check_compatible(self, other: "Subspace"):
        if self.n != other.n or self.p != other.p:
            raise ValueError("ambient mismatch")

    def __eq__(self, other):
        return isinstance(other, Subspace) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        rows = [
            "(" + ",".join(str(int(x)) for x in row) + ")" for row in self.basis
        ]
        return f"Subspace(p={self.p}, n={self.n}, [{' '.join(rows)}])"


def span(rows, n: int, p: int) -> Subspace:
    """Subspace spanned by the given row vectors (any iterable of rows)."""
    mat = np.array(list(rows), dtype=np.int64)
    if n == 0 or mat.size == 0:
        return Subspace(np.zeros((0, n), dtype=np.int64), n, p)
    return Subspace(rref(mat.reshape(-1, n), p), n, p)


def zero_subspace(n: int, p: int) -> Subspace:
    return Subspace(np.zeros((0, n), dtype=np.int64), n, p)


def full_subspace(n: int, p: int) -> Subspace:
    return Subspace(np.eye(n, dtype=np.int64), n, p)


def rref_canonicalize(mat: np.ndarray, p: int, n: int | None = None) -> Subspace:
    """Canonicalize the row space of ``mat`` (idempotent)."""
    mat = np.asarray(mat, dtype=np.int64)
    if mat.size == 0 and n is None:
        raise ValueError("ambient dimension required for an empty matrix")
    if n is None:
        n = mat.shape[1]
    return Subspace(rref(mat.reshape(-1, n), p), n, p)


def subspace_sum(a: Subspace, b: Subspace) -> Subspace:
    a._check_compatible(b)
    return Subspace(rref(np.vstack([a.basis, b.basis]), a.p), a.n, a.p)


def left_kernel(mat: np.ndarray, p: int) -> np.ndarray:
    """Basis (as rows) of {x : x @ mat == 0 mod p}."""
    mat = np.asarray(mat, dtype=np.int64)
    m = mat.shape[0]
    # Row-reduce [mat | I]; rows whose mat-part vanished span the kernel.
    aug = np.hstack([mat % p, np.eye(m, dtype=np.int64)])
    red = rref(aug, p)
    w = mat.shape[1]
    mask = ~red[:, :w].any(axis=1)
    ker = red[mask][:, w:]
    return rref(ker, p)


def right_kernel(mat: np.ndarray, p: int) -> np.ndarray:
    """Basis (as rows) of {v : mat @ v == 0 mod p}."""
    return left_kernel(np.asarray(mat).T, p)


def subspace_intersect(a: Subspace, b: Subspace) -> Subspace:
    a._check_compatible(b)
    if a.dim == 0 or b.dim == 0:
        return zero_subspace(a.n, a.p)
    # Relations (x, y) with x @ A == y @ B are the left kernel of [A; -B].
    stacked = np.vstack([a.basis, -b.basis % a.p])
    ker = left_kernel(stacked, a.p)
    combos = ker[:, : a.dim] @ a.basis % a.p
    return Subspace(rref(combos, a.p), a.n, a.p)


class RowSolver:
    """Solves x @ M = v for v in the row space of a fixed matrix M."""

    def __init__(self, mat: np.ndarray, p: int):
        self.p = p
        self.mat = np.asarray(mat, dtype=np.int64) % p
        m = self.mat.shape[0]
        aug = np.hstack([self.mat, np.eye(m, dtype=np.int64)])
        red = rref(aug, p)
        w = self.mat.shape[1]
        if red.shape[0] != m or not red[:, :w].any(axis=1).all():
            raise ValueError("matrix rows are dependent")
        self.red = red[:, :w]
        self.transform = red[:, w:]  # transform @ mat == red
        self.pivots = [int(np.flatnonzero(row)[0]) for row in self.red]

    def solve(self, v: np.ndarray) -> np.ndarray:
        """Coefficients x with x @ mat == v; raises if v is outside."""
        v = np.asarray(v, dtype=np.int64) % self.p
        x_red = v[self.pivots]
        if np.any((x_red @ self.red - v) % self.p):
            raise ValueError("vector not in row space")
        return x_red @ self.transform % self.p

    def solve_rows(self, rows: np.ndarray) -> np.ndarray:
        return np.array([self.solve(r) for r in np.asarray(rows).reshape(-1, self.mat.shape[1])],
                        dtype=np.int64).reshape(-1, self.mat.shape[0])


def complement_rows(inner: np.ndarray, outer: np.ndarray, p: int) -> np.ndarray:
    """Greedy pivot-completion: rows of ``outer`` extending span(inner) to
    span(inner)+span(outer); the returned rows span a complement."""
    outer = np.asarray(outer, dtype=np.int64)
    width = outer.shape[-1]
    inner = np.asarray(inner, dtype=np.int64).reshape(-1, width)
    taken = inner % p
    picked = []
    for row in outer.reshape(-1, width):
        trial = np.vstack([taken, row.reshape(1, -1)])
        if rank_mod(trial, p) > rank_mod(taken, p):
            picked.append(row % p)
            taken = trial
    return np.array(picked, dtype=np.int64).reshape(-1, width)


# ---------------------------------------------------------------------------
# Enumeration of Gr_k(F_p^n)
# ---------------------------------------------------------------------------

def free_positions(n: int, pattern: Sequence[int]) -> list[tuple[int, int]]:
    """Row-major free entry slots of an RREF matrix with the given pivots."""
    pivots = set(pattern)
    out = []
    for i, piv in enumerate(pattern):
        for j in range(piv + 1, n):
            if j not in pivots:
                out.append((i, j))
    return out


def subspace_total(n: int, k: int, p: int) -> int:
    return gaussian_binomial(n, k)(p)


def enumerate_subspaces(
    n: int,
    k: int,
    field_or_p,
    start: int = 0,
    stop: int | None = None,
    budget: int | None = DEFAULT_BUDGET,
) -> Iterator[Subspace]:
    """Yield every k-dimensional subspace of F_p^n exactly once.

    Order: pivot patterns lexicographically, then free entries as base-p
    digits (first slot most significant).  ``start``/``stop`` select a slice
    of the global index range, so disjoint chunks can run in parallel and be
    combined by any commutative reduction.
    """
    p = as_prime(field_or_p)
    if not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got k={k}, n={n}")
    total = subspace_total(n, k, p)
    if budget is not None and total > budget:
        raise BudgetExceeded(total, budget)
    if stop is None:
        stop = total
    idx = 0
    for pattern in combinations(range(n), k):
        slots = free_positions(n, pattern)
        block = p ** len(slots)
        if idx + block <= start:
            idx += block
            continue
        if idx >= stop:
            return
        base = np.zeros((k, n), dtype=np.int64)
        for i, piv in enumerate(pattern):
            base[i, piv] = 1
        lo = max(start - idx, 0)
        hi = min(stop - idx, block)
        for code in range(lo, hi):
            mat = base.copy()
            rem = code
            for slot in range(len(slots) - 1, -1, -1):
                rem, digit = divmod(rem, p)
                mat[slots[slot]] = digit
            yield Subspace(mat, n, p)
        idx += block
        if idx >= stop:
            return


def intersect_prefix(h: Subspace, c: int) -> Subspace:
    """h intersected with the span of the first c coordinates."""
    if c >= h.n:
        return h
    rows = h.basis
    tail = rows[:, c:]
    ker = left_kernel(tail, h.p)
    combos = ker @ rows % h.p
    return Subspace(rref(combos, h.p), h.n, h.p)


def block_project(h: Subspace, blocks: Sequence[int], i: int) -> Subspace:
    """Graded piece of h for the coordinate filtration given by ``blocks``.

    With B_{<=i} the span of the first blocks, returns
    (h cap B_{<=i}) / (h cap B_{<i}) as a subspace of the i-th block
    (0-indexed), realized via the coordinate projection onto that block.
    """
    blocks = list(blocks)
    if sum(blocks) != h.n:
        raise ValueError(f"block widths {blocks} do not sum to ambient dim {h.n}")
    if not 0 <= i < len(blocks):
        raise ValueError(f"block index {i} out of range")
    lo = sum(blocks[:i])
    hi = lo + blocks[i]
    upto = intersect_prefix(h, hi)
    slab = upto.basis[:, lo:hi]
    return Subspace(rref(slab, h.p), blocks[i], h.p)


def random_matrix(rows: int, cols: int, p: int, rng: np.random.Generator) -> np.ndarray:
    return rng.integers(0, p, size=(rows, cols), dtype=np.int64)


def random_subspace(n: int, k: int, p: int, rng: np.random.Generator) -> Subspace:
    """Uniform-ish random k-subspace via random matrices of full rank."""
    while True:
        mat = random_matrix(k, n, p, rng)
        red = rref(mat, p)
        if red.shape[0] == k:
            return Subspace(red, n, p)


def subspaces_between(
    lower: Subspace, upper: Subspace, d: int, budget: int | None = DEFAULT_BUDGET
) -> Iterator[Subspace]:
    """All X with lower <= X <= upper and dim X = d."""
    lower._check_compatible(upper)
    u, w = lower.dim, upper.dim
    if not (u <= d <= w):
        return
    if not upper.contains(lower):
        raise ValueError("lower is not contained in upper")
    comp = complement_rows(lower.basis, upper.basis, lower.p)
    for q in enumerate_subspaces(w - u, d - u, lower.p, budget=budget):
        rows = q.basis @ comp % lower.p if q.dim else np.zeros((0, lower.n), dtype=np.int64)
        mat = np.vstack([lower.basis, rows])
        yield Subspace(rref(mat, lower.p), lower.n, lower.p)
