"""Bilinear spaces over F_p: symmetric or alternating Gram matrices,
orthogonal complements, radicals, the four-summand decomposition adapted
to a subspace, and a constructive isometry transporter between subspaces
with matching invariants.

Everything is for odd p, so 2 is invertible and symmetric forms
diagonalize.  Over F_p, unlike over an algebraically closed field, two
nondegenerate symmetric forms of equal dimension split into two isometry
classes by discriminant; the transporter surfaces that obstruction as
DiscriminantMismatch instead of working around it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import (
    RowSolver,
    Subspace,
    complement_rows,
    full_subspace,
    inv_mod,
    left_kernel,
    rank_mod,
    rref,
    span,
    subspace_intersect,
    zero_subspace,
)

SYMMETRIC = "symmetric"
SKEW = "skew"
FORM_TYPES = (SYMMETRIC, SKEW)


class DiscriminantMismatch(Exception):
    """The restricted forms are not isometric over this prime field."""


class InvariantMismatch(Exception):
    """Subspaces with different (dim, rank) invariants cannot be transported."""


@dataclass(frozen=True, eq=False)
class BilinearSpace:
    """F_p^n with a symmetric or skew-symmetric Gram matrix.

    ``witness`` is a maximal isotropic subspace; it is required whenever the
    form is symmetric, nondegenerate and n is even, because the two families
    of maximal isotropics are told apart by intersection parity against it.
    """

    n: int
    p: int
    form_type: str
    gram: np.ndarray
    witness: Subspace | None = None

    def __post_init__(self):
        g = np.ascontiguousarray(self.gram, dtype=np.int64) % self.p
        g.setflags(write=False)
        object.__setattr__(self, "gram", g)
        if g.shape != (self.n, self.n):
            raise ValueError("gram shape does not match dimension")
        if self.form_type == SYMMETRIC:
            if (g != g.T % self.p).any():
                raise ValueError("gram is not symmetric")
        elif self.form_type == SKEW:
            if ((g + g.T) % self.p).any() or g.diagonal().any():
                raise ValueError("gram is not alternating")
        else:
            raise ValueError(f"unknown form type {self.form_type!r}")
        if self.witness is not None:
            w = self.witness
            if w.n != self.n or w.p != self.p:
                raise ValueError("witness lives in the wrong space")
            if pairing(self, w.basis, w.basis).any():
                raise ValueError("witness is not isotropic")

    def is_nondegenerate(self) -> bool:
        return rank_mod(self.gram, self.p) == self.n

    def __eq__(self, other):
        return (
            isinstance(other, BilinearSpace)
            and self.n == other.n
            and self.p == other.p
            and self.form_type == other.form_type
            and (self.gram == other.gram).all()
            and self.witness == other.witness
        )

    def __hash__(self):
        return hash((self.n, self.p, self.form_type, self.gram.tobytes(), self.witness))


def pairing(space: BilinearSpace, rows_u: np.ndarray, rows_v: np.ndarray) -> np.ndarray:
    """Matrix of <u_i, v_j> for row stacks u, v."""
    u = np.asarray(rows_u, dtype=np.int64).reshape(-1, space.n)
    v = np.asarray(rows_v, dtype=np.int64).reshape(-1, space.n)
    return u @ space.gram @ v.T % space.p


def standard_space(form_type: str, n: int, field_or_p) -> BilinearSpace:
    """The split standard form: all orbit-level statements are for these.

    Skew: Gram antidiag(1,...,1,-1,...,-1), n even.  Symmetric: Gram
    antidiag(1,...,1), with the witness span(e_1..e_{n/2}) attached for
    even n.
    """
    from .linalg import as_prime

    p = as_prime(field_or_p)
    g = np.zeros((n, n), dtype=np.int64)
    if form_type == SKEW:
        if n % 2:
            raise ValueError("skew forms need even dimension")
        for i in range(n // 2):
            g[i, n - 1 - i] = 1
            g[n - 1 - i, i] = p - 1
        return BilinearSpace(n, p, SKEW, g)
    if form_type != SYMMETRIC:
        raise ValueError(f"unknown form type {form_type!r}")
    for i in range(n):
        g[i, n - 1 - i] = 1
    witness = None
    if n and n % 2 == 0:
        rows = np.eye(n, dtype=np.int64)[: n // 2]
        witness = span(rows, n, p)
    return BilinearSpace(n, p, SYMMETRIC, g, witness)


def perp(space: BilinearSpace, h: Subspace) -> Subspace:
    """Orthogonal complement {v : <v, w> = 0 for all w in h}."""
    if h.n != space.n or h.p != space.p:
        raise ValueError("subspace lives in the wrong space")
    if h.dim == 0:
        return full_subspace(space.n, space.p)
    # v @ (gram @ basis^T) == 0
    constraints = space.gram @ h.basis.T % space.p
    ker = left_kernel(constraints, space.p)
    return span(ker, space.n, space.p) if ker.size else zero_subspace(space.n, space.p)


def radical(space: BilinearSpace, h: Subspace) -> Subspace:
    """Radical of the restricted form: h cap h^perp."""
    return subspace_intersect(h, perp(space, h))


def rank_invariant(space: BilinearSpace, h: Subspace) -> int:
    """r = dim h - dim rad h, the rank of the form restricted to h."""
    gm = pairing(space, h.basis, h.basis)
    return rank_mod(gm, space.p)


def discriminant_class(space: BilinearSpace, rows: np.ndarray) -> int:
    """Square class (+1 residue / -1 nonresidue) of det of the restricted Gram.

    Only meaningful when the restriction is nondegenerate; raises otherwise.
    """
    gm = pairing(space, rows, rows)
    d = _det_mod(gm, space.p)
    if d == 0:
        raise ValueError("restricted form is degenerate")
    return _legendre(d, space.p)


def _legendre(a: int, p: int) -> int:
    v = pow(a % p, (p - 1) // 2, p)
    return 1 if v == 1 else -1


def _det_mod(mat: np.ndarray, p: int) -> int:
    a = np.array(mat, dtype=np.int64) % p
    n = a.shape[0]
    det = 1
    for col in range(n):
        piv = -1
        for r in range(col, n):
            if a[r, col]:
                piv = r
                break
        if piv < 0:
            return 0
        if piv != col:
            a[[col, piv]] = a[[piv, col]]
            det = -det
        det = det * int(a[col, col]) % p
        inv = inv_mod(int(a[col, col]), p)
        for r in range(col + 1, n):
            if a[r, col]:
                a[r] = (a[r] - a[r, col] * inv * a[col]) % p
    return det % p


def smallest_nonresidue(p: int) -> int:
    for a in range(2, p):
        if _legendre(a, p) == -1:
            return a
    raise ValueError("no nonresidue found")  # unreachable for odd p


def sqrt_mod(a: int, p: int) -> int:
    """Any square root of a quadratic residue; brute scan (p <= 997)."""
    a %= p
    for x in range(p):
        if x * x % p == a:
            return x
    raise ValueError(f"{a} is not a square mod {p}")


# ---------------------------------------------------------------------------
# Witt-style decomposition adapted to a subspace
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WittSplit:
    """V = M1 + M2 + M3 + M4 with M1 = rad h, M1+M2 = h, M1+M3 = h^perp and
    the pairing perfect exactly on M1 x M4, M2 x M2, M3 x M3."""

    m1: Subspace
    m2: Subspace
    m3: Subspace
    m4: Subspace


def _witt_bases(space: BilinearSpace, h: Subspace):
    """Raw basis rows (b1, b2, b3, b4) of a four-summand decomposition."""
    p = space.p
    hperp = perp(space, h)
    m1 = subspace_intersect(h, hperp)
    b1 = m1.basis
    b2 = complement_rows(b1, h.basis, p)
    b3 = complement_rows(b1, hperp.basis, p)
    # M4 must pair perfectly with M1 and pair to zero with everything else,
    # so it is found inside (M2 + M3)^perp as an isotropic complement of M1.
    m23 = span(np.vstack([b2, b3]), space.n, p) if (b2.size or b3.size) else zero_subspace(space.n, p)
    w_amb = perp(space, m23)
    c = complement_rows(b1, w_amb.basis, p)
    t = b1.shape[0]
    if t == 0:
        b4 = np.zeros((0, space.n), dtype=np.int64)
    else:
        q = pairing(space, b1, c)
        qinv = _inv_matrix(q, p)
        f0 = qinv.T @ c % p
        s = pairing(space, f0, f0)
        inv2 = inv_mod(2, p)
        b4 = (f0 - inv2 * s @ b1) % p
    return b1, b2, b3, b4


def _inv_matrix(mat: np.ndarray, p: int) -> np.ndarray:
    m = mat.shape[0]
    aug = np.hstack([np.asarray(mat, dtype=np.int64) % p, np.eye(m, dtype=np.int64)])
    red = rref(aug, p)
    if red.shape[0] != m or (red[:, :m] != np.eye(m, dtype=np.int64)).any():
        raise ValueError("matrix is singular")
    return red[:, m:]


def witt_decompose(space: BilinearSpace, h: Subspace) -> WittSplit:
    """Four-summand decomposition adapted to h; ambient must be nondegenerate."""
    if not space.is_nondegenerate():
        raise ValueError("witt_decompose needs a nondegenerate ambient form")
    b1, b2, b3, b4 = _witt_bases(space, h)
    n, p = space.n, space.p
    mk = lambda rows: span(rows, n, p) if rows.size else zero_subspace(n, p)
    return WittSplit(mk(b1), mk(b2), mk(b3), mk(b4))


# ---------------------------------------------------------------------------
# Constructive isometries
# ---------------------------------------------------------------------------

def _diagonalize(gm: np.ndarray, p: int) -> np.ndarray:
    """T with T @ gm @ T^T diagonal and invertible, for nondegenerate
    symmetric gm (odd p)."""
    d = gm.shape[0]
    t = np.eye(d, dtype=np.int64)
    g = np.array(gm, dtype=np.int64) % p
    for i in range(d):
        # find an anisotropic vector among remaining basis combinations
        piv = -1
        for r in range(i, d):
            if g[r, r]:
                piv = r
                break
        if piv < 0:
            found = False
            for r in range(i, d):
                for s in range(r + 1, d):
                    if g[r, s]:
                        t[r] = (t[r] + t[s]) % p
                        g[r] = (g[r] + g[s]) % p
                        g[:, r] = (g[:, r] + g[:, s]) % p
                        piv = r
                        found = True
                        break
                if found:
                    break
            if piv < 0:
                raise ValueError("form is degenerate")
        if piv != i:
            t[[i, piv]] = t[[piv, i]]
            g[[i, piv]] = g[[piv, i]]
            g[:, [i, piv]] = g[:, [piv, i]]
        a_inv = inv_mod(int(g[i, i]), p)
        for r in range(i + 1, d):
            if g[r, i]:
                c = g[r, i] * a_inv % p
                t[r] = (t[r] - c * t[i]) % p
                g[r] = (g[r] - c * g[i]) % p
                g[:, r] = (g[:, r] - c * g[:, i]) % p
    return t


def _represent_one(a: int, b: int, p: int) -> tuple[int, int]:
    """(x, y) with a x^2 + b y^2 = 1; exists for nondegenerate a, b, odd p."""
    for x in range(p):
        rest = (1 - a * x * x) % p
        if rest == 0:
            if x:
                return x, 0
            continue
        val = rest * inv_mod(b, p) % p
        if _legendre(val, p) == 1:
            return x, sqrt_mod(val, p)
    raise ValueError("binary form does not represent 1")  # impossible for p odd


def _canonical_symmetric_basis(gm: np.ndarray, p: int) -> tuple[np.ndarray, int]:
    """T with T gm T^T = diag(1,..,1,delta), delta in {1, nu}; returns (T, delta)."""
    d = gm.shape[0]
    t = _diagonalize(gm, p)
    g = t @ gm @ t.T % p
    for i in range(d - 1):
        a, b = int(g[i, i]), int(g[i + 1, i + 1])
        if a == 1:
            continue
        x, y = _represent_one(a, b, p)
        v1 = (x * t[i] + y * t[i + 1]) % p
        v2 = (b * y * t[i] - a * x * t[i + 1]) % p
        t[i], t[i + 1] = v1, v2
        g = t @ gm @ t.T % p
    delta = int(g[d - 1, d - 1]) if d else 1
    if d:
        if _legendre(delta, p) == 1:
            s = inv_mod(sqrt_mod(delta, p), p)
            t[d - 1] = s * t[d - 1] % p
            delta = 1
        else:
            nu = smallest_nonresidue(p)
            target = nu * inv_mod(delta, p) % p
            s = sqrt_mod(target, p)  # delta * s^2 = nu
            t[d - 1] = s * t[d - 1] % p
            delta = nu
    return t, delta


def _symplectic_basis(gm: np.ndarray, p: int) -> np.ndarray:
    """T with T gm T^T the standard split alternating form antidiag(1,..,-1,..)."""
    d = gm.shape[0]
    if d % 2:
        raise ValueError("alternating forms have even rank")
    g = np.array(gm, dtype=np.int64) % p
    basis = np.eye(d, dtype=np.int64)
    pairs = []
    remaining = list(range(d))
    vecs = {i: basis[i].copy() for i in remaining}
    while remaining:
        i = remaining[0]
        u = vecs[i]
        partner = None
        for j in remaining[1:]:
            val = int(u @ gm @ vecs[j] % p)
            if val:
                partner = j
                break
        if partner is None:
            raise ValueError("form is degenerate")
        v = vecs[partner] * inv_mod(int(u @ gm @ vecs[partner] % p), p) % p
        pairs.append((u.copy(), v.copy()))
        remaining = [r for r in remaining if r not in (i, partner)]
        for r in remaining:
            w = vecs[r]
            cu = int(w @ gm @ v % p)   # <w, v>
            cv = int(w @ gm @ u % p)   # <w, u>
            # subtract components so w pairs to zero with u and v
            vecs[r] = (w - cu * u + cv * v) % p
    half = len(pairs)
    rows = [u for u, _ in pairs] + [v for _, v in reversed(pairs)]
    t = np.array(rows, dtype=np.int64)
    chk = t @ gm @ t.T % p
    expect = np.zeros((d, d), dtype=np.int64)
    for i in range(half):
        expect[i, d - 1 - i] = 1
        expect[d - 1 - i, i] = p - 1
    if (chk != expect).any():
        raise AssertionError("symplectic basis construction failed")
    return t


def isometry_rows(space: BilinearSpace, rows_a: np.ndarray, rows_b: np.ndarray):
    """Re-coordinate two spanning row stacks so their restricted Grams agree.

    Returns (new_a, new_b) spanning the same two subspaces with identical
    pairing matrices; raises DiscriminantMismatch when no isometry exists."""
    p = space.p
    ga = pairing(space, rows_a, rows_a)
    gb = pairing(space, rows_b, rows_b)
    if space.form_type == SKEW:
        ta = _symplectic_basis(ga, p)
        tb = _symplectic_basis(gb, p)
    else:
        ta, da = _canonical_symmetric_basis(ga, p)
        tb, db = _canonical_symmetric_basis(gb, p)
        if da != db:
            raise DiscriminantMismatch(
                f"restricted forms have discriminant classes {da} vs {db}"
            )
    return ta @ rows_a % p, tb @ rows_b % p


def apply_isometry(g: np.ndarray, h: Subspace) -> Subspace:
    """Image of h under the isometry matrix g (column-vector convention)."""
    return span(h.basis @ g.T % h.p, h.n, h.p)


def transport_isometry(space: BilinearSpace, h: Subspace, h2: Subspace) -> np.ndarray:
    """Isometry g (with g^T gram g = gram) carrying h onto h2.

    Requires equal dimension and equal rank invariant; over F_p the
    restricted nondegenerate parts must also lie in the same discriminant
    class or DiscriminantMismatch is raised.  In the symmetric case the
    determinant is normalized to 1 whenever a determinant twist is
    available (r > 0 or n - 2k + r > 0); for the two families of maximal
    isotropics no such twist exists and det g = -1 transports between them.
    """
    if not space.is_nondegenerate():
        raise ValueError("transport needs a nondegenerate ambient form")
    if h.dim != h2.dim:
        raise InvariantMismatch(f"dims differ: {h.dim} vs {h2.dim}")
    r1 = rank_invariant(space, h)
    r2 = rank_invariant(space, h2)
    if r1 != r2:
        raise InvariantMismatch(f"rank invariants differ: {r1} vs {r2}")
    p, n, k, r = space.p, space.n, h.dim, r1

    a1, a2, a3, a4 = _witt_bases(space, h)
    b1, b2, b3, b4 = _witt_bases(space, h2)

    if a2.size:
        a2, b2 = isometry_rows(space, a2, b2)
    if a3.size:
        a3, b3 = isometry_rows(space, a3, b3)

    def assemble(src2, src3, tgt2, tgt3):
        if a1.size:
            pa = pairing(space, a1, a4)
            pb = pairing(space, b1, b4)
            d = pa.T @ _inv_matrix(pb, p).T % p
            img4 = d @ b4 % p
        else:
            img4 = b4
        src = np.vstack([a1, src2, src3, a4])
        img = np.vstack([b1, tgt2, tgt3, img4])
        return _inv_matrix(src, p) @ img % p

    g_rows = assemble(a2, a3, b2, b3)
    if space.form_type == SYMMETRIC:
        det = _det_mod(g_rows, p)
        if det != 1:
            if r > 0:
                tw = b2.copy()
                tw[0] = -tw[0] % p
                g_rows = assemble(a2, a3, tw, b3)
            elif n - 2 * k + r > 0:
                tw = b3.copy()
                tw[0] = -tw[0] % p
                g_rows = assemble(a2, a3, b2, tw)
    g = g_rows.T % p
    if ((g.T @ space.gram @ g - space.gram) % p).any():
        raise AssertionError("constructed matrix is not an isometry")
    if apply_isometry(g, h) != h2:
        raise AssertionError("constructed isometry does not map h to h2")
    return g


# ---------------------------------------------------------------------------
# Quotients by radical-contained subspaces
# ---------------------------------------------------------------------------

class QuotientMap:
    """V/U with the induced form, for U contained in rad V.

    Provides coordinates for the quotient and lifting of quotient
    subspaces back to V (containing U).
    """

    def __init__(self, space: BilinearSpace, u: Subspace):
        if u.dim and pairing(space, u.basis, np.eye(space.n, dtype=np.int64)).any():
            raise ValueError("subspace is not contained in the radical")
        self.space = space
        self.u = u
        p = space.p
        comp = complement_rows(u.basis, np.eye(space.n, dtype=np.int64), p)
        self.comp = comp
        self.dim = comp.shape[0]
        gram_q = comp @ space.gram @ comp.T % p
        self.quotient = BilinearSpace(self.dim, p, space.form_type, gram_q)
        self._solver = RowSolver(np.vstack([u.basis, comp]), p)

    def project_subspace(self, h: Subspace) -> Subspace:
        """(h + U)/U in quotient coordinates."""
        if h.dim == 0:
            return zero_subspace(self.dim, self.space.p)
        coords = self._solver.solve_rows(h.basis)
        return span(coords[:, self.u.dim:], self.dim, self.space.p)

    def lift_subspace(self, hq: Subspace) -> Subspace:
        """Preimage in V of a quotient subspace (always contains U)."""
        rows = hq.basis @ self.comp % self.space.p if hq.dim else np.zeros((0, self.space.n), dtype=np.int64)
        return span(np.vstack([self.u.basis, rows]), self.space.n, self.space.p)
