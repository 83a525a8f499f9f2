"""Stacky fans and their morphisms.

A stacky fan is a fan Sigma on Z^l together with a homomorphism
beta : Z^l -> N into a finitely generated abelian group.  It is *strict*
when N is free and beta has finite cokernel.  The group G_beta acting in
the associated quotient presentation comes from
:func:`stackyfans.fgab.mapping_cone_dual`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .fgab import (
    FgAbGroup,
    FgAbHom,
    MappingConeDual,
    analyze_hom,
    free_group,
    mapping_cone_dual,
)
from .polyhedral import Cone, Fan, FanDiagnostics, all_cones, cone_contains, validate_fan
from .zlinalg import IntMatrix, Vec, cokernel_presentation, saturate, solve_integer


class NotSubfanOfAffineSpace(Exception):
    """Raised when a fan is not supported on faces of the standard orthant."""


@dataclass(frozen=True)
class StackyFan:
    """Fan on Z^lattice_rank plus the images of the basis vectors in N.

    ``beta_images[i]`` is beta(e_i) in generator coordinates of ``target``;
    torsion coordinates are stored reduced.
    """

    fan: Fan
    target: FgAbGroup
    beta_images: tuple[Vec, ...]

    def __post_init__(self) -> None:
        if len(self.beta_images) != self.fan.ambient_rank:
            raise ValueError(
                f"{len(self.beta_images)} images for lattice rank {self.fan.ambient_rank}")
        object.__setattr__(
            self, "beta_images",
            tuple(self.target.reduce(v) for v in self.beta_images))

    @property
    def lattice_rank(self) -> int:
        return self.fan.ambient_rank

    @property
    def beta(self) -> FgAbHom:
        return FgAbHom(
            free_group(self.lattice_rank), self.target,
            IntMatrix.from_columns(list(self.beta_images), rows=self.target.ngens))


@dataclass(frozen=True)
class StackyFanDiagnostics:
    valid: bool
    strict: bool
    problems: tuple[str, ...]


def is_strict(sf: StackyFan) -> bool:
    return (not sf.target.torsion) and analyze_hom(sf.beta).cokernel.is_finite()


def validate_stacky_fan(sf: StackyFan) -> StackyFanDiagnostics:
    fd = validate_fan(sf.fan)
    problems = tuple(f"fan: {p}" for p in fd.problems)
    return StackyFanDiagnostics(valid=fd.valid, strict=is_strict(sf), problems=problems)


def gbeta(sf: StackyFan) -> MappingConeDual:
    """The group G_beta of the quotient presentation, diagonalized."""
    return mapping_cone_dual(sf.beta)


def _minimal_supports(families: Sequence[Sequence[int]]) -> list[tuple[int, ...]]:
    sets = {frozenset(f) for f in families}
    keep = [s for s in sets if not any(t < s for t in sets)]
    return sorted(tuple(sorted(s)) for s in keep)


def _minimal_hitting_sets(families: Sequence[Sequence[int]]) -> list[tuple[int, ...]]:
    """Minimal sets meeting every family member; [] if some member is empty."""
    fams = [frozenset(f) for f in families]
    if any(not f for f in fams):
        return []
    found: set[frozenset] = set()

    def rec(chosen: frozenset, rest: list) -> None:
        if not rest:
            found.add(chosen)
            return
        head, tail = rest[0], rest[1:]
        if chosen & head:
            rec(chosen, tail)
            return
        for x in sorted(head):
            rec(chosen | {x}, tail)

    rec(frozenset(), fams)
    keep = [s for s in found if not any(t < s for t in found)]
    return sorted(tuple(sorted(s)) for s in keep)


def _orthant_ray_indices(fan: Fan) -> list[set[int]]:
    """1-based coordinate index sets of the maximal cones, or raise."""
    out = []
    for c in fan.maximal_cones:
        idx = set()
        for r in c.rays:
            ones = [j for j, x in enumerate(r) if x != 0]
            if len(ones) != 1 or r[ones[0]] != 1:
                raise NotSubfanOfAffineSpace(
                    f"ray {r} is not a standard basis vector")
            idx.add(ones[0] + 1)
        out.append(idx)
    return out


def irrelevant_monomials(sf: StackyFan) -> list[tuple[int, ...]]:
    """Supports of the minimal monomial generators of the irrelevant ideal."""
    n = sf.lattice_rank
    idx = _orthant_ray_indices(sf.fan)
    return _minimal_supports([sorted(set(range(1, n + 1)) - s) for s in idx])


@dataclass(frozen=True)
class QuotientPresentation:
    """Global quotient [U / G] with U an open torus-invariant piece of A^n.

    ``removed_locus`` lists index sets S; the removed closed set is the
    union over S of the coordinate subspaces V(x_i : i in S).  ``weights``
    columns give the character acting on each coordinate; generators of the
    character group of G^1 index the rows.  ``g0_rank`` is the rank of the
    torus factor G^0 acting through the same weights' ambient torus (zero in
    the strict case).  ``fixed_coordinates`` are 1-based coordinates pinned
    to zero, describing a closed substack.
    """

    ambient_dim: int
    removed_locus: tuple[tuple[int, ...], ...]
    group: FgAbGroup
    weights: IntMatrix
    fixed_coordinates: tuple[int, ...]
    g0_rank: int = 0

    def describe(self) -> str:
        from .fgab import DiagGroupPresentation
        name = DiagGroupPresentation(self.group, self.weights).dual_name()
        if self.g0_rank:
            pre = f"G_m^{self.g0_rank}" if self.g0_rank > 1 else "G_m"
            name = pre if name == "1" else f"{pre} x {name}"
        space = f"A^{self.ambient_dim}"
        if self.removed_locus:
            cut = " u ".join(
                "V(" + ",".join(f"x{i}" for i in s) + ")" for s in self.removed_locus)
            space = f"{space} - ({cut})" if len(self.removed_locus) > 1 else f"{space} - {cut}"
        cols = [tuple(self.weights.column(j)) for j in range(self.weights.cols)]
        wtxt = ", ".join(str(c if len(c) != 1 else c[0]) for c in cols)
        out = f"[({space}) / {name}]"
        if cols and name != "1":
            out += f" with weights {wtxt}"
        if self.fixed_coordinates:
            out += " on " + ", ".join(f"x{i} = 0" for i in self.fixed_coordinates)
        return out


def present_quotient(sf: StackyFan, fixed_coordinates: Sequence[int] = ()) -> QuotientPresentation:
    """Quotient presentation of the stack of a fan supported on the orthant.

    The open set is A^n minus the union of the coordinate subspaces
    V(x_i : i in S) over the minimal sets S meeting every maximal cone's
    complement (the irreducible components of the vanishing locus of the
    irrelevant ideal).
    """
    n = sf.lattice_rank
    idx = _orthant_ray_indices(sf.fan)
    removed = _minimal_hitting_sets([sorted(set(range(1, n + 1)) - s) for s in idx])
    fixed = tuple(sorted(set(int(i) for i in fixed_coordinates)))
    for i in fixed:
        if not 1 <= i <= n:
            raise ValueError(f"fixed coordinate {i} outside 1..{n}")
    mc = gbeta(sf)
    return QuotientPresentation(
        ambient_dim=n,
        removed_locus=tuple(removed),
        group=mc.g1.group,
        weights=mc.g1.weights,
        fixed_coordinates=fixed,
        g0_rank=mc.g0_rank,
    )


@dataclass(frozen=True)
class StackyMorphism:
    """Pair of maps (Phi on lattices of fans, phi on targets)."""

    source: StackyFan
    target: StackyFan
    Phi: IntMatrix
    phi: FgAbHom


@dataclass(frozen=True)
class MorphismDiagnostics:
    valid: bool
    problems: tuple[str, ...]


def validate_morphism(m: StackyMorphism) -> MorphismDiagnostics:
    problems = []
    ls, lt = m.source.lattice_rank, m.target.lattice_rank
    if m.Phi.rows != lt or m.Phi.cols != ls:
        problems.append(
            f"Phi is {m.Phi.rows}x{m.Phi.cols}, expected {lt}x{ls}")
        return MorphismDiagnostics(False, tuple(problems))
    if m.phi.source != m.source.target or m.phi.target != m.target.target:
        problems.append("phi endpoints do not match the stacky fan targets")
        return MorphismDiagnostics(False, tuple(problems))
    bs, bt = m.source.beta, m.target.beta
    for i in range(ls):
        e = tuple(1 if k == i else 0 for k in range(ls))
        left = m.phi.apply(bs.apply(e))
        right = bt.apply(m.Phi.apply(e))
        if left != right:
            problems.append(
                f"square does not commute on basis vector {i + 1}: "
                f"phi(beta(e)) = {left}, beta'(Phi(e)) = {right}")
    target_cones = all_cones(m.target.fan)
    for c in m.source.fan.maximal_cones:
        imgs = [m.Phi.apply(r) for r in c.rays]
        if not any(all(cone_contains(tc, w) for w in imgs) for tc in target_cones):
            problems.append(
                f"image of cone with rays {c.rays} lies in no target cone")
    return MorphismDiagnostics(valid=not problems, problems=tuple(problems))


def reduce_nonstrict(sf: StackyFan) -> tuple[StackyFan, tuple[int, ...]]:
    """Replace a target with torsion by its free cover.

    Adds one lattice coordinate per torsion invariant d_j of N, one new
    orthogonal ray direction per maximal cone, and sends the new basis
    vectors to d_j times the new free generators.  The result presents the
    same stack; the returned 1-based coordinates cut out the original stack
    as a closed substack (their vanishing).  The output is strict exactly
    when beta has finite cokernel; otherwise split off the torus factor
    first (:func:`split_torus_factor`).
    """
    ell = sf.lattice_rank
    f = sf.target.free_rank
    tors = sf.target.torsion
    s = len(tors)
    new_rank = f + s
    images = [tuple(v) for v in sf.beta_images]
    for j, d in enumerate(tors):
        images.append(tuple(d if k == f + j else 0 for k in range(new_rank)))
    new_cones = []
    extra = [tuple(1 if k == ell + j else 0 for k in range(ell + s))
             for j in range(s)]
    for c in sf.fan.maximal_cones:
        rays = [r + (0,) * s for r in c.rays] + extra
        new_cones.append(Cone(ell + s, tuple(sorted(rays))))
    out = StackyFan(
        Fan(ell + s, tuple(new_cones)), free_group(new_rank), tuple(images))
    return out, tuple(range(ell + 1, ell + s + 1))


def split_torus_factor(sf: StackyFan) -> tuple[StackyFan, int]:
    """Split N into (saturation of the image of beta) + a free complement.

    Returns the stacky fan with target shrunk to the saturation, plus the
    rank of the split-off torus factor B G_m^k it accounts for.
    """
    n = sf.target.ngens
    rel = sf.target.relations()
    gens = IntMatrix.from_columns(list(sf.beta_images), rows=n).hstack(rel)
    w = saturate(gens)
    cols = []
    for c in rel.columns():
        x = solve_integer(w, c)
        if x is None:
            raise ValueError("relation escaped the saturation")
        cols.append(x)
    inner = IntMatrix.from_columns(cols, rows=w.cols)
    grp, proj = cokernel_presentation(inner)
    images = []
    for v in sf.beta_images:
        y = solve_integer(w, v)
        if y is None:
            raise ValueError("image escaped the saturation")
        images.append(grp.reduce(proj.apply(y)))
    out = StackyFan(sf.fan, grp, tuple(images))
    return out, sf.target.free_rank - grp.free_rank
