"""Constructions on stacky fans: fantastacks, canonical stacks, good
moduli spaces, moduli interpretations, and gerbe decompositions.

Everything here consumes and produces the value types of
:mod:`stackyfans.stacky`; no function mutates its input.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .fgab import FgAbHom, FgAbGroup, analyze_hom, free_group, identity_hom
from .polyhedral import (
    Cone,
    Fan,
    ImageCone,
    NotStronglyConvex,
    PreconditionViolated,
    all_cones,
    canonicalize_cone,
    cone_contains,
    cone_contains_all,
    fan_rays,
    image_cone,
    is_smooth_cone,
    is_unstable,
    monoid_iso_on_cone,
    preimage_fan,
    primitive,
)
from .stacky import (
    NotSubfanOfAffineSpace,
    QuotientPresentation,
    StackyFan,
    StackyMorphism,
    _orthant_ray_indices,
    present_quotient,
)
from .zlinalg import (
    IntMatrix,
    Vec,
    cokernel_presentation,
    kernel_basis,
    rank,
    reduce_mod_row_lattice,
    saturate,
    snf,
    solve_integer,
    unimodular_inverse,
)


class NotSmooth(Exception):
    """Raised when an operation needs smooth cones and finds one that isn't."""


class FantastackPreconditionViolated(Exception):
    def __init__(self, condition: str, message: str) -> None:
        super().__init__(message)
        self.condition = condition


def fantastack(fan: Fan, beta_images: Sequence[Sequence[int]]) -> tuple[StackyFan, QuotientPresentation]:
    """Stacky fan over a fan on N whose rays are marked by lattice points.

    ``beta_images[i]`` is the prospective image of e_i in N = Z^rank.
    Preconditions, each reported by name in
    :class:`FantastackPreconditionViolated`:

    * ``finite_cokernel`` -- the images span N rationally;
    * ``ray_coverage`` -- every ray of the fan is hit by a positive
      multiple of some image;
    * ``support`` -- every image lies in the support of the fan.

    The cone over sigma collects the basis vectors whose image lies in
    sigma.  Returns the stacky fan together with its quotient presentation.
    """
    r = fan.ambient_rank
    images = [tuple(int(x) for x in v) for v in beta_images]
    for v in images:
        if len(v) != r:
            raise ValueError("image length does not match fan ambient rank")
    n = len(images)
    if rank(IntMatrix.from_columns(images, rows=r)) != r:
        raise FantastackPreconditionViolated(
            "finite_cokernel", "images do not span the target rationally")
    prims = {primitive(v) for v in images if primitive(v) is not None}
    for ray in fan_rays(fan):
        if ray not in prims:
            raise FantastackPreconditionViolated(
                "ray_coverage", f"no image generates the ray {ray}")
    for v in images:
        if not fan.maximal_cones:
            raise FantastackPreconditionViolated(
                "support", "fan has no cones but images exist")
        if not any(cone_contains(c, v) for c in fan.maximal_cones):
            raise FantastackPreconditionViolated(
                "support", f"image {v} lies outside the fan's support")
    hats = []
    for c in fan.maximal_cones:
        idx = tuple(i for i, v in enumerate(images) if cone_contains(c, v))
        rays = tuple(sorted(tuple(1 if k == i else 0 for k in range(n)) for i in idx))
        hats.append(Cone(n, rays))
    hats = tuple(sorted(hats, key=lambda c: (len(c.rays), c.rays)))
    sf = StackyFan(Fan(n, hats), free_group(r), tuple(images))
    return sf, present_quotient(sf)


@dataclass(frozen=True)
class CanonicalStackResult:
    canonical_sf: StackyFan
    morphism: StackyMorphism


def canonical_stack(sf: StackyFan) -> CanonicalStackResult:
    """Resolve a stacky fan by the cone over its own ray set.

    Rays are enumerated in lexicographic order; the new lattice has one
    coordinate per ray plus a complement of the saturated ray span, and the
    fan becomes a subfan of the orthant.  The morphism maps the new basis
    vectors to the original primitive ray generators (identity on N).
    """
    ell = sf.lattice_rank
    rays = fan_rays(sf.fan)
    span = saturate(IntMatrix.from_columns(rays, rows=ell))
    m = span.cols
    d = snf(span)
    uinv = unimodular_inverse(d.U)
    complement = [uinv.column(j) for j in range(m, ell)]
    phi_cols = list(rays) + complement
    big = IntMatrix.from_columns(phi_cols, rows=ell)
    beta = sf.beta
    images = tuple(beta.apply(c) for c in phi_cols)
    nr = len(phi_cols)
    pos = {ray: i for i, ray in enumerate(rays)}
    new_cones = []
    for c in sf.fan.maximal_cones:
        sel = tuple(sorted(
            tuple(1 if k == pos[r] else 0 for k in range(nr)) for r in c.rays))
        new_cones.append(Cone(nr, sel))
    canonical = StackyFan(
        Fan(nr, tuple(sorted(new_cones, key=lambda c: (len(c.rays), c.rays)))),
        sf.target, images)
    morphism = StackyMorphism(canonical, sf, big, identity_hom(sf.target))
    return CanonicalStackResult(canonical, morphism)


def cox_presentation(fan: Fan) -> StackyFan:
    """Cox quotient datum of the toric variety of a fan."""
    r = fan.ambient_rank
    variety = StackyFan(
        fan, free_group(r),
        tuple(IntMatrix.identity(r).columns()))
    return canonical_stack(variety).canonical_sf


def _require_valid_morphism(m: StackyMorphism) -> None:
    from .stacky import validate_morphism

    diag = validate_morphism(m)
    if not diag.valid:
        raise PreconditionViolated(
            "not a morphism of stacky fans: " + "; ".join(diag.problems))


@dataclass(frozen=True)
class IsoResult:
    verdict: bool
    failing_condition: Optional[int]
    witness_cone: Optional[Cone]


def is_isomorphism(m: StackyMorphism) -> IsoResult:
    """Decide whether a morphism of stacky fans is an isomorphism of stacks.

    Both sides must have finite cokernel (else PreconditionViolated).  The
    three conditions, checked in order with the first failure reported:

    1. phi is an isomorphism of the targets;
    2. every cone of the target fan has a unique maximal preimage cone
       mapping onto it;
    3. that preimage maps isomorphically as a monoid (witness cone given).
    """
    _require_valid_morphism(m)
    for side in (m.source, m.target):
        if not analyze_hom(side.beta).cokernel.is_finite():
            raise PreconditionViolated(
                "isomorphism test needs finite cokernels on both sides")
    an = analyze_hom(m.phi)
    if not (an.surjective and an.kernel.is_trivial()):
        return IsoResult(False, 1, None)
    for sp in all_cones(m.target.fan):
        pf = preimage_fan(m.Phi, m.source.fan, sp)
        if pf.single_cone is None:
            return IsoResult(False, 2, sp)
        img = image_cone(m.Phi, pf.single_cone)
        if not cone_contains_all(img, sp.rays):
            return IsoResult(False, 2, sp)
    for sp in all_cones(m.target.fan):
        pf = preimage_fan(m.Phi, m.source.fan, sp)
        if not monoid_iso_on_cone(m.Phi, pf.single_cone, sp):
            return IsoResult(False, 3, sp)
    return IsoResult(True, None, None)


@dataclass(frozen=True)
class GmsResult:
    verdict: bool
    failing_condition: Optional[str]
    tau: Optional[Cone]
    gms_fan: Optional[Fan]
    morphism: Optional[StackyMorphism] = None


def gms_check(m: StackyMorphism) -> GmsResult:
    """Does a given morphism exhibit its target as the good moduli space?

    Conditions, first failure reported as "1".."4":

    1. every target cone has a unique maximal preimage cone mapping onto
       it (tau is the preimage of the zero cone);
    2. tau is unstable for the source;
    3. phi is surjective;
    4. ker(phi) / beta(tau-span) is finite.
    """
    _require_valid_morphism(m)
    if not analyze_hom(m.source.beta).cokernel.is_finite():
        raise PreconditionViolated("good moduli space check needs finite cokernel")
    tau = None
    for sp in all_cones(m.target.fan):
        pf = preimage_fan(m.Phi, m.source.fan, sp)
        if pf.single_cone is None:
            return GmsResult(False, "1", tau, m.target.fan)
        img = image_cone(m.Phi, pf.single_cone)
        if not cone_contains_all(img, sp.rays):
            return GmsResult(False, "1", tau, m.target.fan)
        if sp.is_zero():
            tau = pf.single_cone
    if tau is None:
        # a fan with no cones at all; nothing to check
        tau = Cone(m.source.lattice_rank, ())
    if not is_unstable(tau, m.source.beta):
        return GmsResult(False, "2", tau, m.target.fan)
    if not analyze_hom(m.phi).surjective:
        return GmsResult(False, "3", tau, m.target.fan)
    if not _finite_kernel_mod_tau(m, tau):
        return GmsResult(False, "4", tau, m.target.fan)
    return GmsResult(True, None, tau, m.target.fan, m)


def _finite_kernel_mod_tau(m: StackyMorphism, tau: Cone) -> bool:
    """Is ker(phi) modulo the image of the tau-span finite?"""
    from .fgab import _kernel_lattice

    n = m.source.target.ngens
    kl = _kernel_lattice(m.phi)
    tspan = saturate(IntMatrix.from_columns(list(tau.rays), rows=m.source.lattice_rank))
    beta_mat = IntMatrix.from_columns(list(m.source.beta_images), rows=n)
    moved = beta_mat @ tspan
    rel = m.source.target.relations()
    return rank(kl) == rank(moved.hstack(rel))


def gms_construct(sf: StackyFan) -> GmsResult:
    """Construct the candidate good moduli space of a stacky fan.

    Requires finite cokernel.  Fails with "(i)" when the unstable cones
    have no unique maximal element tau, with "(ii)" when some cone's image
    does not fit into the constructed fan; otherwise returns the quotient
    fan together with the morphism onto it.
    """
    if not analyze_hom(sf.beta).cokernel.is_finite():
        raise PreconditionViolated("good moduli space construction needs finite cokernel")
    beta = sf.beta
    unstable = [c for c in all_cones(sf.fan) if is_unstable(c, beta)]
    maximal = [c for c in unstable
               if not any(set(c.rays) < set(d.rays) for d in unstable)]
    if len(maximal) != 1:
        return GmsResult(False, "(i)", None, None)
    tau = maximal[0]
    n = sf.target.ngens
    tspan = saturate(IntMatrix.from_columns(list(tau.rays), rows=sf.lattice_rank))
    beta_mat = IntMatrix.from_columns(list(sf.beta_images), rows=n)
    killed = saturate((beta_mat @ tspan).hstack(sf.target.relations()))
    grp, proj = cokernel_presentation(killed)
    if grp.torsion:
        raise AssertionError("quotient by a saturated sublattice must be free")
    phi = FgAbHom(sf.target, grp, proj)
    big_phi = proj @ beta_mat
    rp = grp.free_rank
    candidates = {}
    for c in all_cones(sf.fan):
        gens = [big_phi.apply(r) for r in c.rays]
        try:
            cand = canonicalize_cone(gens, ambient_rank=rp)
        except NotStronglyConvex:
            continue
        candidates[cand.rays] = cand
    kept = []
    for cand in candidates.values():
        pf = preimage_fan(big_phi, sf.fan, cand)
        if pf.single_cone is None:
            continue
        img = image_cone(big_phi, pf.single_cone)
        if cone_contains_all(img, cand.rays):
            kept.append(cand)
    maximal_new = [c for c in kept
                   if not any(c is not d and cone_contains_all(d, c.rays) for d in kept)]
    gms_fan = Fan(rp, tuple(sorted(maximal_new, key=lambda c: (len(c.rays), c.rays))))
    for c in sf.fan.maximal_cones:
        imgs = [big_phi.apply(r) for r in c.rays]
        if not any(all(cone_contains(tc, w) for w in imgs) for tc in gms_fan.maximal_cones):
            return GmsResult(False, "(ii)", tau, gms_fan)
    target_sf = StackyFan(gms_fan, grp, tuple(IntMatrix.identity(rp).columns()))
    morphism = StackyMorphism(sf, target_sf, big_phi, phi)
    return GmsResult(True, None, tau, gms_fan, morphism)


@dataclass(frozen=True)
class ModuliDescription:
    """Linear functional and vanishing data cut out by a moduli problem.

    A point is a tuple of sections (x_1, ..., x_n) with the
    ``intersection_relations`` index sets never vanishing simultaneously,
    the ``forced_zero_sections`` identically zero, and line-bundle degrees
    balanced along each row of ``linear_relations``.
    """

    ambient_dim: int
    linear_relations: tuple[Vec, ...]
    intersection_relations: tuple[tuple[int, ...], ...]
    forced_zero_sections: tuple[int, ...]


def _moduli_preconditions(sf: StackyFan) -> list[set[int]]:
    for c in sf.fan.maximal_cones:
        if not is_smooth_cone(c):
            raise NotSmooth(f"cone with rays {c.rays} is singular")
    idx = _orthant_ray_indices(sf.fan)
    if sf.target.torsion:
        raise PreconditionViolated("moduli reading needs a free target")
    if not analyze_hom(sf.beta).cokernel.is_finite():
        raise PreconditionViolated("moduli reading needs finite cokernel")
    return idx


def _minimal_nonfaces(n: int, facesets: Sequence[set[int]]) -> list[tuple[int, ...]]:
    """Minimal index sets not contained in any faceset, sizes pruned upward."""
    out: list[tuple[int, ...]] = []
    universe = range(1, n + 1)
    for size in range(1, n + 1):
        for comb in itertools.combinations(universe, size):
            s = set(comb)
            if any(set(prev) <= s for prev in out):
                continue
            if not any(s <= f for f in facesets):
                out.append(comb)
    return out


def moduli_description(sf: StackyFan, forced_zero: Sequence[int] = ()) -> ModuliDescription:
    """Functor-of-points reading of a smooth orthant-supported stacky fan."""
    idx = _moduli_preconditions(sf)
    n = sf.lattice_rank
    fz = tuple(sorted(set(int(i) for i in forced_zero)))
    for i in fz:
        if not 1 <= i <= n:
            raise ValueError(f"forced zero section {i} outside 1..{n}")
    beta_mat = IntMatrix.from_columns(list(sf.beta_images), rows=sf.target.ngens)
    return ModuliDescription(
        ambient_dim=n,
        linear_relations=beta_mat.entries,
        intersection_relations=tuple(_minimal_nonfaces(n, idx)),
        forced_zero_sections=fz,
    )


@dataclass(frozen=True)
class RootDatum:
    """One rooted line bundle of a gerbe decomposition.

    The zero coordinate ``coordinate`` contributes the b-th root of the
    bundle on the base whose multidegree is ``exponents`` (one entry per
    surviving coordinate, in their original order).
    """

    coordinate: int
    order: int
    exponents: Vec


@dataclass(frozen=True)
class GerbeData:
    bg_m_rank: int
    roots: tuple[RootDatum, ...]
    base: StackyFan


def gerbe_decomposition(sf: StackyFan, zero_coordinates: Sequence[int]) -> GerbeData:
    """Split the substack at a torus-fixed face into roots over a base.

    ``zero_coordinates`` (1-based) must index the rays of a face of some
    maximal cone; the closed substack they cut out is a gerbe over the
    toric stack of the surviving coordinates, banded by the listed roots
    plus ``bg_m_rank`` full torus gerbe factors.
    """
    idx = _moduli_preconditions(sf)
    n = sf.lattice_rank
    zset = sorted(set(int(i) for i in zero_coordinates))
    for i in zset:
        if not 1 <= i <= n:
            raise ValueError(f"zero coordinate {i} outside 1..{n}")
    if not any(set(zset) <= s for s in idx):
        raise PreconditionViolated(
            "zero coordinates do not index a face of any maximal cone")
    comp = [i for i in range(1, n + 1) if i not in zset]
    beta_mat = IntMatrix.from_columns(list(sf.beta_images), rows=sf.target.ngens)
    dual_rows = beta_mat.entries  # basis of N^ as row vectors in Z^n

    def vanishing_sub(zero_at: Sequence[int]) -> IntMatrix:
        """Row basis of {v in N^ : v_j = 0 for j in zero_at}."""
        if not zero_at:
            return IntMatrix.from_rows(dual_rows, cols=n)
        constraint = IntMatrix.from_rows(
            [[row[j - 1] for row in dual_rows] for j in zero_at])
        y = kernel_basis(constraint)
        rows = [tuple(sum(y.entries[k][c] * dual_rows[k][j] for k in range(len(dual_rows)))
                      for j in range(n))
                for c in range(y.cols)]
        return IntMatrix.from_rows(rows, cols=n)

    base_dual = vanishing_sub(zset)
    mrank = base_dual.rows
    base_cols = [tuple(base_dual.entries[k][j - 1] for k in range(mrank)) for j in comp]
    kept_cones = []
    compset = set(comp)
    reindex = {j: k for k, j in enumerate(comp)}
    for c in sf.fan.maximal_cones:
        ray_idx = {next(j for j, x in enumerate(r) if x != 0) + 1 for r in c.rays}
        inner = sorted(ray_idx & compset)
        rays = tuple(sorted(
            tuple(1 if k == reindex[j] else 0 for k in range(len(comp))) for j in inner))
        kept_cones.append(Cone(len(comp), rays))
    maximal = [c for c in kept_cones
               if not any(set(c.rays) < set(d.rays) for d in kept_cones)]
    base_fan = Fan(len(comp), tuple(sorted(set(maximal), key=lambda c: (len(c.rays), c.rays))))
    base = StackyFan(base_fan, free_group(mrank), tuple(base_cols))
    restricted = IntMatrix.from_rows(
        [tuple(r[j - 1] for j in comp) for r in base_dual.entries], cols=len(comp))
    bg_m = 0
    roots = []
    for i in zset:
        sub = vanishing_sub([z for z in zset if z != i])
        vals = [row[i - 1] for row in sub.entries]
        g = 0
        for x in vals:
            g = math.gcd(g, x)
        if g == 0:
            bg_m += 1
            continue
        y = solve_integer(IntMatrix.from_rows([vals]), [g])
        witness = tuple(sum(y[k] * sub.entries[k][j] for k in range(sub.rows))
                        for j in range(n))
        a = tuple(witness[j - 1] for j in comp)
        a = reduce_mod_row_lattice(a, restricted)
        roots.append(RootDatum(coordinate=i, order=g,
                               exponents=tuple(-x for x in a)))
    return GerbeData(bg_m_rank=bg_m, roots=tuple(roots), base=base)
