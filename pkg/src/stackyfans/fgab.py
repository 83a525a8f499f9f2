"""Finitely generated abelian groups, homomorphisms, and mapping cones.

A group is always held in invariant-factor form (:class:`FgAbGroup`, defined
next to the Smith normal form in :mod:`stackyfans.zlinalg` and re-exported
here).  A homomorphism is a matrix whose columns are the images of the
canonical generators, torsion rows reduced.

The centerpiece is :func:`mapping_cone_dual`: for a homomorphism
``beta : Z^l -> N`` it computes the character data of the group

    G_beta = ker(T_{free replacement} -> T_N)

presented diagonally, i.e. the cokernel of the transposed strictification
together with the weight matrix of the induced action on ``A^l``.  The
functorial maps between such groups (:func:`induced_g1_hom`,
:func:`induced_g0_hom`) make the comparison results testable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

from .zlinalg import (
    FgAbGroup,
    IntMatrix,
    Vec,
    cokernel_presentation,
    column_space_basis,
    hermite_row_form,
    kernel_basis,
    normalized_group,
    rank,
    snf,
    solve_integer,
    unimodular_inverse,
)

__all__ = [
    "FgAbGroup",
    "FgAbHom",
    "MalformedHom",
    "HomAnalysis",
    "DiagGroupPresentation",
    "MappingConeDual",
    "analyze_hom",
    "verify_exact",
    "mapping_cone_dual",
    "induced_g1_hom",
    "induced_g0_hom",
    "ext1",
    "direct_sum",
    "identity_hom",
    "free_group",
    "normalized_group",
]


class MalformedHom(Exception):
    """Raised when matrix data does not define a homomorphism."""


def free_group(n: int) -> FgAbGroup:
    return FgAbGroup(n, ())


@dataclass(frozen=True)
class FgAbHom:
    """Homomorphism of finitely generated abelian groups.

    ``matrix`` is target.ngens x source.ngens; column j is the image of the
    j-th canonical generator of the source.  Torsion rows are stored reduced
    into [0, d).  Construction fails with :class:`MalformedHom` when the
    columns do not respect the source relations.
    """

    source: FgAbGroup
    target: FgAbGroup
    matrix: IntMatrix

    def __post_init__(self) -> None:
        m = self.matrix
        if m.rows != self.target.ngens or m.cols != self.source.ngens:
            raise MalformedHom(
                f"matrix is {m.rows}x{m.cols}, expected "
                f"{self.target.ngens}x{self.source.ngens}")
        reduced = IntMatrix.from_columns(
            [self.target.reduce(c) for c in m.columns()], rows=m.rows)
        object.__setattr__(self, "matrix", reduced)
        fs = self.source.free_rank
        ft = self.target.free_rank
        for j, d in enumerate(self.source.torsion):
            col = reduced.column(fs + j)
            for i in range(ft):
                if d * col[i] != 0:
                    raise MalformedHom(
                        f"generator of order {d} sent to infinite-order element")
            for i, e in enumerate(self.target.torsion):
                if (d * col[ft + i]) % e != 0:
                    raise MalformedHom(
                        f"generator of order {d} not killed by {d} in target")

    def apply(self, v: Sequence[int]) -> Vec:
        return self.target.reduce(self.matrix.apply(self.source.reduce(v)))

    def compose(self, other: "FgAbHom") -> "FgAbHom":
        """self after other."""
        if other.target != self.source:
            raise MalformedHom("composition mismatch")
        return FgAbHom(other.source, self.target, self.matrix @ other.matrix)

    def is_zero(self) -> bool:
        return all(self.apply(tuple(1 if k == j else 0 for k in range(self.source.ngens)))
                   == (0,) * self.target.ngens for j in range(self.source.ngens))


def identity_hom(g: FgAbGroup) -> FgAbHom:
    return FgAbHom(g, g, IntMatrix.identity(g.ngens))


def _quotient_group(gens: IntMatrix, rel: IntMatrix) -> FgAbGroup:
    """Abstract type of (lattice spanned by gens) / (lattice spanned by rel).

    Caller guarantees colspan(rel) is contained in colspan(gens).
    """
    basis = column_space_basis(gens)
    cols = []
    for c in rel.columns():
        x = solve_integer(basis, c)
        if x is None:
            raise ValueError("relation lattice not inside generator lattice")
        cols.append(x)
    inner = IntMatrix.from_columns(cols, rows=basis.cols)
    group, _ = cokernel_presentation(inner)
    return group


def _kernel_lattice(f: FgAbHom) -> IntMatrix:
    """Generators (columns in Z^source.ngens) of {v : f(v) = 0}."""
    big = f.matrix.hstack(f.target.relations())
    kb = kernel_basis(big)
    n = f.source.ngens
    cols = [c[:n] for c in kb.columns()]
    # source relations always die, and keeping them makes the span honest
    cols.extend(f.source.relations().columns())
    return IntMatrix.from_columns(cols, rows=n)


@dataclass(frozen=True)
class HomAnalysis:
    kernel: FgAbGroup
    image: FgAbGroup
    cokernel: FgAbGroup
    surjective: bool
    finite_kernel: bool


def analyze_hom(f: FgAbHom) -> HomAnalysis:
    """Kernel, image and cokernel of a homomorphism, as abstract groups."""
    rel_t = f.target.relations()
    rel_s = f.source.relations()
    cok, _ = cokernel_presentation(f.matrix.hstack(rel_t))
    image = _quotient_group(f.matrix.hstack(rel_t), rel_t)
    kl = _kernel_lattice(f)
    kernel = _quotient_group(kl, rel_s)
    return HomAnalysis(
        kernel=kernel,
        image=image,
        cokernel=cok,
        surjective=cok.is_trivial(),
        finite_kernel=kernel.free_rank == 0,
    )


def verify_exact(seq: Sequence[FgAbHom]) -> bool:
    """Exactness at every interior junction of a composable sequence.

    Injectivity or surjectivity at the ends is expressed by placing
    explicit zero groups in the sequence.
    """
    homs = list(seq)
    for a, b in zip(homs, homs[1:]):
        if a.target != b.source:
            raise MalformedHom("sequence is not composable")
    for a, b in zip(homs, homs[1:]):
        g = a.target
        zero = (0,) * b.target.ngens
        for c in a.matrix.columns():
            if b.apply(c) != zero:
                return False
        rep = a.matrix.hstack(g.relations())
        for k in _kernel_lattice(b).columns():
            if solve_integer(rep, k) is None:
                return False
    return True


@dataclass(frozen=True)
class DiagGroupPresentation:
    """Diagonalized presentation of a group acting on affine space.

    ``group`` is the character group; ``weights`` has one row per generator
    of the character group and one column per affine coordinate, so column j
    is the character by which the group scales the j-th coordinate.
    """

    group: FgAbGroup
    weights: IntMatrix

    def dual_name(self) -> str:
        """Readable name of the dual group, e.g. 'G_m x mu_2'."""
        parts = []
        if self.group.free_rank == 1:
            parts.append("G_m")
        elif self.group.free_rank > 1:
            parts.append(f"G_m^{self.group.free_rank}")
        for d in self.group.torsion:
            parts.append(f"mu_{d}")
        return " x ".join(parts) if parts else "1"


@dataclass(frozen=True)
class MappingConeDual:
    g0_rank: int
    g1: DiagGroupPresentation


_UNIT_ENUM_BOUND = 10 ** 4


def _unit_for_row(row: Vec, d: int) -> int:
    """Deterministic unit u of Z/d making u*row canonical."""
    reduced = tuple(x % d for x in row)
    if d <= _UNIT_ENUM_BOUND:
        best = None
        for u in range(1, d):
            if math.gcd(u, d) != 1:
                continue
            cand = tuple((u * x) % d for x in reduced)
            if best is None or (cand, u) < best:
                best = (cand, u)
        return best[1] if best else 1
    x = next((v for v in reduced if v != 0), 0)
    if x == 0:
        return 1
    g = math.gcd(x, d)
    dp = d // g
    u = pow(x // g, -1, dp)
    while math.gcd(u, d) != 1:
        u += dp
    return u


def _normalizing_aut(group: FgAbGroup, block: IntMatrix) -> tuple[IntMatrix, IntMatrix]:
    """Automorphism A of the group with A @ block canonical, plus inverse.

    Free rows go to the unique row Hermite form; each torsion row is scaled
    by the unit from :func:`_unit_for_row`.  A and its inverse are returned
    as ngens x ngens integer matrices in block-diagonal shape.
    """
    f = group.free_rank
    ts = group.torsion
    n = group.ngens
    free_block = IntMatrix.from_rows([block.row(i) for i in range(f)], cols=block.cols)
    _, t_free = hermite_row_form(free_block)
    t_inv = unimodular_inverse(t_free)
    a = [[0] * n for _ in range(n)]
    ai = [[0] * n for _ in range(n)]
    for i in range(f):
        for j in range(f):
            a[i][j] = t_free.entries[i][j]
            ai[i][j] = t_inv.entries[i][j]
    for j, d in enumerate(ts):
        u = _unit_for_row(block.row(f + j), d)
        a[f + j][f + j] = u
        ai[f + j][f + j] = pow(u, -1, d)
    return IntMatrix.from_rows(a, n), IntMatrix.from_rows(ai, n)


def _reduce_rows(group: FgAbGroup, m: IntMatrix) -> IntMatrix:
    """Reduce the torsion rows of a generator-coordinate matrix."""
    f = group.free_rank
    rows = list(m.entries)
    for j, d in enumerate(group.torsion):
        rows[f + j] = tuple(x % d for x in rows[f + j])
    return IntMatrix.from_rows(rows, m.cols)


def _strictification(beta: FgAbHom) -> IntMatrix:
    """The free replacement [B | Q] : Z^(l+s) -> Z^r of beta."""
    if beta.source.torsion:
        raise MalformedHom("mapping cone needs a free source")
    return beta.matrix.hstack(beta.target.relations())


@lru_cache(maxsize=None)
def _g1_data(beta: FgAbHom):
    bt = _strictification(beta)
    raw_group, raw_proj = cokernel_presentation(bt.transpose())
    ell = beta.source.free_rank
    weights_raw = raw_proj.submatrix(range(raw_group.ngens), range(ell))
    aut, aut_inv = _normalizing_aut(raw_group, weights_raw)
    return raw_group, raw_proj, aut, aut_inv, bt


def mapping_cone_dual(beta: FgAbHom) -> MappingConeDual:
    """Character data of the group G_beta attached to beta : Z^l -> N.

    Returns the rank of the connected torus factor G^0 and the diagonal
    presentation of G^1: its character group is the cokernel of the
    transposed free replacement of beta, and the weight matrix restricts the
    cokernel projection to the first l coordinates.  Weights are normalized
    (free rows in Hermite form, torsion rows scaled to their lexicographic
    minimum among unit multiples).
    """
    group, _, aut, _, bt = _g1_data(beta)
    ell = beta.source.free_rank
    g0 = beta.target.ngens - rank(bt)
    weights_raw = _g1_data(beta)[1].submatrix(range(group.ngens), range(ell))
    weights = _reduce_rows(group, aut @ weights_raw)
    return MappingConeDual(g0_rank=g0, g1=DiagGroupPresentation(group, weights))


def _section(proj: IntMatrix, group: FgAbGroup) -> IntMatrix:
    """Right inverse of a surjection proj : Z^amb -> group, as columns."""
    amb = proj.cols
    aug = proj.hstack(group.relations())
    cols = []
    for k in range(group.ngens):
        e = [1 if i == k else 0 for i in range(group.ngens)]
        x = solve_integer(aug, e)
        if x is None:
            raise ValueError("projection is not surjective")
        cols.append(x[:amb])
    return IntMatrix.from_columns(cols, rows=amb)


def _lifted_square(f: FgAbHom, g: FgAbHom, alpha: IntMatrix, b: FgAbHom):
    """Strictify a commuting square (alpha, b) : f -> g.

    Returns (bmat, alpha_tilde) with
    strictification(g) @ alpha_tilde == bmat @ strictification(f) exactly.
    """
    if f.source.torsion or g.source.torsion:
        raise MalformedHom("mapping cone functoriality needs free sources")
    if b.source != f.target or b.target != g.target:
        raise MalformedHom("vertical map has wrong endpoints")
    lf, lg = f.source.free_rank, g.source.free_rank
    if alpha.rows != lg or alpha.cols != lf:
        raise MalformedHom("horizontal map has wrong shape")
    for i in range(lf):
        if g.apply(alpha.column(i)) != b.apply(f.matrix.column(i)):
            raise MalformedHom("square does not commute")
    sf, sg = len(f.target.torsion), len(g.target.torsion)
    ftf, ftg = f.target.free_rank, g.target.free_rank
    bmat = b.matrix
    diff_cols = (bmat @ f.matrix).columns()
    galpha_cols = (g.matrix @ alpha).columns()
    at = [[0] * (lf + sf) for _ in range(lg + sg)]
    for i in range(lg):
        for j in range(lf):
            at[i][j] = alpha.entries[i][j]
    for i in range(lf):
        diff = tuple(x - y for x, y in zip(diff_cols[i], galpha_cols[i]))
        for k in range(ftg):
            if diff[k] != 0:
                raise MalformedHom("square does not commute on free part")
        for k, d in enumerate(g.target.torsion):
            q, r = divmod(diff[ftg + k], d)
            if r != 0:
                raise MalformedHom("square does not commute modulo torsion")
            at[lg + k][i] = q
    for j, dj in enumerate(f.target.torsion):
        col = bmat.column(ftf + j)
        for k, dk in enumerate(g.target.torsion):
            q, r = divmod(dj * col[ftg + k], dk)
            if r != 0:
                raise MalformedHom("torsion image order mismatch")
            at[lg + k][lf + j] = q
    alpha_tilde = IntMatrix.from_rows(at, lf + sf)
    if (_strictification(g) @ alpha_tilde).entries != (bmat @ _strictification(f)).entries:
        raise MalformedHom("strictified square does not commute")
    return bmat, alpha_tilde


def induced_g1_hom(f: FgAbHom, g: FgAbHom, alpha: IntMatrix, b: FgAbHom) -> FgAbHom:
    """The map G^1-characters(g) -> G^1-characters(f) a square induces.

    (alpha, b) is a morphism of two-term complexes from f to g; dualizing
    gives a map on degree-one cohomology in the opposite direction.  The
    result is expressed in the same normalized generators that
    :func:`mapping_cone_dual` publishes for each side.
    """
    bmat, alpha_tilde = _lifted_square(f, g, alpha, b)
    gg, pg, aut_g, aut_g_inv, _ = _g1_data(g)
    gf, pf, aut_f, aut_f_inv, _ = _g1_data(f)
    sec = _section(pg, gg)
    raw = pf @ (alpha_tilde.transpose() @ sec)
    mat = _reduce_rows(gf, aut_f @ (_reduce_rows(gf, raw) @ aut_g_inv))
    return FgAbHom(gg, gf, mat)


def induced_g0_hom(f: FgAbHom, g: FgAbHom, alpha: IntMatrix, b: FgAbHom) -> FgAbHom:
    """The map on degree-zero cohomology of the dual complexes (free groups)."""
    bmat, _ = _lifted_square(f, g, alpha, b)
    kg = kernel_basis(_strictification(g).transpose())
    kf = kernel_basis(_strictification(f).transpose())
    moved = bmat.transpose() @ kg
    cols = []
    for c in moved.columns():
        x = solve_integer(kf, c)
        if x is None:
            raise ValueError("dual image left the kernel lattice")
        cols.append(x)
    mat = IntMatrix.from_columns(cols, rows=kf.cols)
    return FgAbHom(free_group(kg.cols), free_group(kf.cols), mat)


def ext1(n: FgAbGroup) -> FgAbGroup:
    """Ext^1(N, Z), which is the torsion part of N."""
    return FgAbGroup(0, n.torsion)


def direct_sum(a: FgAbGroup, b: FgAbGroup) -> tuple[FgAbGroup, FgAbHom, FgAbHom]:
    """Invariant-factor form of a + b with the two inclusions."""
    na, nb = a.ngens, b.ngens
    rel_cols = []
    for c in a.relations().columns():
        rel_cols.append(tuple(c) + (0,) * nb)
    for c in b.relations().columns():
        rel_cols.append((0,) * na + tuple(c))
    total, proj = cokernel_presentation(IntMatrix.from_columns(rel_cols, rows=na + nb))
    inc_a = proj.submatrix(range(total.ngens), range(na))
    inc_b = proj.submatrix(range(total.ngens), range(na, na + nb))
    return total, FgAbHom(a, total, inc_a), FgAbHom(b, total, inc_b)
