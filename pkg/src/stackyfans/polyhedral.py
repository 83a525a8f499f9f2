"""Rational polyhedral cones and fans, exact arithmetic only.

Cones are stored by their sorted primitive extreme rays, which is a
canonical form for strongly convex cones.  The workhorse is an incremental
double-description pass (:func:`halfspace_intersection`) used both to
dualize generator descriptions and to intersect cones.  Everything is desk
scale (ambient rank <= 6 or so, a dozen rays), so clarity wins over
asymptotics throughout.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Optional, Sequence, Union

from .zlinalg import IntMatrix, Vec, determinant, rank, saturate, snf, solve_integer

from math import gcd


class NotStronglyConvex(Exception):
    """Raised when a cone expected to be pointed contains a line."""


class PreconditionViolated(Exception):
    """Raised when an operation's stated precondition fails."""


def _dot(a: Sequence, b: Sequence):
    return sum(x * y for x, y in zip(a, b))


def primitive(v: Sequence[int]) -> Optional[Vec]:
    """Primitive integer vector on the same ray, or None for the zero vector."""
    g = 0
    for x in v:
        g = gcd(g, x)
    if g == 0:
        return None
    return tuple(x // g for x in v)


def _int_rank(rows: Sequence[Sequence[int]]) -> int:
    """Rank of a small integer matrix by fraction-free elimination."""
    work = [list(r) for r in rows if any(r)]
    rk = 0
    ncols = len(work[0]) if work else 0
    col = 0
    while work and col < ncols:
        piv = next((i for i, r in enumerate(work) if r[col] != 0), None)
        if piv is None:
            col += 1
            continue
        pivot = work.pop(piv)
        rk += 1
        p = pivot[col]
        reduced = []
        for r in work:
            if r[col] != 0:
                r = [p * a - r[col] * b for a, b in zip(r, pivot)]
                g = 0
                for x in r:
                    g = gcd(g, x)
                if g > 1:
                    r = [x // g for x in r]
            if any(r):
                reduced.append(r)
        work = reduced
        col += 1
    return rk


def halfspace_intersection(normals: Sequence[Vec], dim: int) -> tuple[list[Vec], list[Vec]]:
    """Lineality basis and extreme rays of {x : n . x >= 0 for all n}.

    Starts from all of Z^dim and adds one halfspace at a time, splitting the
    lineality space and recombining rays across the new hyperplane.  Rays
    are pruned to extreme ones after every step via the active-constraint
    rank test, so intermediate sets stay small.
    """
    lineality: list[Vec] = [tuple(1 if i == j else 0 for j in range(dim)) for i in range(dim)]
    rays: list[Vec] = []
    seen: list[Vec] = []
    for raw in normals:
        a = tuple(int(x) for x in raw)
        if all(x == 0 for x in a):
            continue
        products = [(_dot(a, l), l) for l in lineality]
        pivots = [(s, l) for s, l in products if s != 0]
        if pivots:
            s0, l0 = pivots[0]
            if s0 < 0:
                s0, l0 = -s0, tuple(-x for x in l0)
            new_lin = []
            for s, l in products:
                if l == pivots[0][1]:
                    continue
                if s == 0:
                    new_lin.append(l)
                else:
                    w = primitive(tuple(s0 * x - s * y for x, y in zip(l, l0)))
                    if w is not None:
                        new_lin.append(w)
            projected = []
            for r in rays:
                t = _dot(a, r)
                w = primitive(tuple(s0 * x - t * y for x, y in zip(r, l0)))
                if w is not None:
                    projected.append(w)
            rays = projected + [l0]
            lineality = new_lin
        else:
            plus, zero, minus = [], [], []
            for r in rays:
                t = _dot(a, r)
                (plus if t > 0 else zero if t == 0 else minus).append((t, r))
            kept = [r for _, r in plus] + [r for _, r in zero]
            for tp, p in plus:
                for tm, m in minus:
                    w = primitive(tuple(tp * x - tm * y for x, y in zip(m, p)))
                    if w is not None:
                        kept.append(w)
            rays = kept
        seen.append(a)
        target = dim - len(lineality) - 1
        pruned = []
        for r in dict.fromkeys(rays):
            active = [c for c in seen if _dot(c, r) == 0]
            if _int_rank(active) == target:
                pruned.append(r)
        rays = pruned
    return lineality, sorted(rays)


@lru_cache(maxsize=None)
def _dual_data(gens: tuple[Vec, ...], dim: int) -> tuple[tuple[Vec, ...], tuple[Vec, ...]]:
    """(equation normals, facet normals) of the cone spanned by gens."""
    lin, rays = halfspace_intersection(gens, dim)
    return tuple(lin), tuple(rays)


@dataclass(frozen=True)
class Cone:
    """Strongly convex rational cone, canonical by sorted primitive rays."""

    ambient_rank: int
    rays: tuple[Vec, ...]

    def __post_init__(self) -> None:
        for r in self.rays:
            if len(r) != self.ambient_rank:
                raise ValueError("ray length does not match ambient rank")

    @property
    def dim(self) -> int:
        if not self.rays:
            return 0
        return _int_rank(self.rays)

    def is_zero(self) -> bool:
        return not self.rays


@dataclass(frozen=True)
class ImageCone:
    """A cone given by an arbitrary generating set, not canonicalized.

    Keeps membership queries possible even when the cone is not strongly
    convex (e.g. images of cones under lattice maps).
    """

    ambient_rank: int
    generators: tuple[Vec, ...]


def _gen_key(c: Union[Cone, ImageCone]) -> tuple[tuple[Vec, ...], int]:
    gens = c.rays if isinstance(c, Cone) else c.generators
    cleaned = []
    for g in gens:
        p = primitive(g)
        if p is not None:
            cleaned.append(p)
    return tuple(sorted(set(cleaned))), c.ambient_rank


def cone_contains(c: Union[Cone, ImageCone], v: Sequence, relative_interior: bool = False) -> bool:
    """Membership of a rational vector, optionally in the relative interior."""
    gens, dim = _gen_key(c)
    if len(v) != dim:
        raise ValueError("vector length does not match ambient rank")
    eqs, facets = _dual_data(gens, dim)
    if any(_dot(e, v) != 0 for e in eqs):
        return False
    if relative_interior:
        return all(_dot(f, v) > 0 for f in facets)
    return all(_dot(f, v) >= 0 for f in facets)


def canonicalize_cone(generators: Sequence[Sequence[int]], ambient_rank: Optional[int] = None) -> Cone:
    """Cone from an arbitrary generating set; raises NotStronglyConvex."""
    gens = [tuple(int(x) for x in g) for g in generators]
    if ambient_rank is None:
        if not gens:
            raise ValueError("ambient rank needed for an empty generating set")
        ambient_rank = len(gens[0])
    cleaned = []
    for g in gens:
        if len(g) != ambient_rank:
            raise ValueError("mixed ambient ranks in generating set")
        p = primitive(g)
        if p is not None:
            cleaned.append(p)
    key = tuple(sorted(set(cleaned)))
    eqs, facets = _dual_data(key, ambient_rank)
    constraints = list(facets) + list(eqs) + [tuple(-x for x in e) for e in eqs]
    lin, rays = halfspace_intersection(constraints, ambient_rank)
    if lin:
        raise NotStronglyConvex(f"cone contains the line through {lin[0]}")
    return Cone(ambient_rank, tuple(sorted(rays)))


def faces(c: Cone) -> list[Cone]:
    """All faces, ordered by (number of rays, rays)."""
    gens, dim = _gen_key(c)
    _, facets = _dual_data(gens, dim)
    seen = {}
    for k in range(len(facets) + 1):
        for sub in itertools.combinations(facets, k):
            rayset = tuple(r for r in c.rays
                           if all(_dot(n, r) == 0 for n in sub))
            seen.setdefault(rayset, Cone(c.ambient_rank, rayset))
    return [seen[k] for k in sorted(seen, key=lambda rs: (len(rs), rs))]


def is_smooth_cone(c: Cone) -> bool:
    """Rays extend to a basis of the ambient lattice."""
    if not c.rays:
        return True
    m = IntMatrix.from_columns(c.rays, rows=c.ambient_rank)
    factors = snf(m).invariant_factors
    return len(factors) == len(c.rays) and all(f == 1 for f in factors)


def intersect_cones(a: Cone, b: Cone) -> tuple[list[Vec], list[Vec]]:
    """Lineality and rays of the intersection (lineality empty when pointed)."""
    if a.ambient_rank != b.ambient_rank:
        raise ValueError("ambient mismatch")
    constraints: list[Vec] = []
    for c in (a, b):
        eqs, facets = _dual_data(*_gen_key(c))
        constraints.extend(facets)
        for e in eqs:
            constraints.append(e)
            constraints.append(tuple(-x for x in e))
    return halfspace_intersection(constraints, a.ambient_rank)


def minimal_face_containing(c: Cone, v: Sequence) -> tuple[Vec, ...]:
    """Rays of the smallest face of c containing the vector v (v must lie in c)."""
    gens, dim = _gen_key(c)
    _, facets = _dual_data(gens, dim)
    active = [n for n in facets if _dot(n, v) == 0]
    return tuple(r for r in c.rays if all(_dot(n, r) == 0 for n in active))


@dataclass(frozen=True)
class Fan:
    """Fan described by its maximal cones (faces are implied).

    Cones are stored sorted by (ray count, rays), so equal fans compare
    equal no matter the construction order.
    """

    ambient_rank: int
    maximal_cones: tuple[Cone, ...]

    def __post_init__(self) -> None:
        for c in self.maximal_cones:
            if c.ambient_rank != self.ambient_rank:
                raise ValueError("cone ambient rank does not match fan")
        object.__setattr__(
            self, "maximal_cones",
            tuple(sorted(self.maximal_cones, key=lambda c: (len(c.rays), c.rays))))


def all_cones(fan: Fan) -> list[Cone]:
    """Every cone of the fan (all faces of all maximal cones), deduplicated."""
    seen = {}
    for c in fan.maximal_cones:
        for f in faces(c):
            seen.setdefault(f.rays, f)
    if not fan.maximal_cones:
        return []
    return [seen[k] for k in sorted(seen, key=lambda rs: (len(rs), rs))]


def fan_rays(fan: Fan) -> list[Vec]:
    """Primitive generators of the one-dimensional cones, sorted."""
    out = set()
    for c in fan.maximal_cones:
        out.update(c.rays)
    return sorted(out)


@dataclass(frozen=True)
class FanDiagnostics:
    valid: bool
    problems: tuple[str, ...]


def validate_fan(fan: Fan) -> FanDiagnostics:
    """Check the two fan axioms; diagnostics are values, not exceptions."""
    problems = []
    mc = fan.maximal_cones
    for i, c in enumerate(mc):
        for j, d in enumerate(mc):
            if i != j and cone_contains_all(d, c.rays):
                problems.append(
                    f"cone {i} with rays {c.rays} is contained in cone {j}")
    for i in range(len(mc)):
        for j in range(i + 1, len(mc)):
            a, b = mc[i], mc[j]
            lin, rays = intersect_cones(a, b)
            if lin:
                problems.append(
                    f"intersection of cones {i} and {j} contains a line")
                continue
            if rays:
                probe = tuple(sum(col) for col in zip(*rays))
            else:
                probe = (0,) * fan.ambient_rank
            fa = minimal_face_containing(a, probe)
            fb = minimal_face_containing(b, probe)
            want = tuple(sorted(rays))
            if fa != want or fb != want:
                problems.append(
                    f"cones {i} and {j} do not meet along a common face "
                    f"(intersection rays {want})")
    return FanDiagnostics(valid=not problems, problems=tuple(problems))


def cone_contains_all(c: Cone, vs: Iterable[Sequence]) -> bool:
    return all(cone_contains(c, v) for v in vs)


def image_cone(m: IntMatrix, c: Cone) -> ImageCone:
    """Image of a cone under a lattice map, kept as a generating set."""
    if m.cols != c.ambient_rank:
        raise ValueError("matrix does not act on the cone's ambient lattice")
    return ImageCone(m.rows, tuple(m.apply(r) for r in c.rays))


@dataclass(frozen=True)
class PreimageFan:
    subfan: Fan
    single_cone: Optional[Cone]


def preimage_fan(m: IntMatrix, fan: Fan, target: Cone) -> PreimageFan:
    """Cones of the fan whose image lies in the target cone.

    The collection is closed under faces, hence a subfan; when it has a
    unique maximal element that cone is reported separately.
    """
    hits = [c for c in all_cones(fan)
            if all(cone_contains(target, m.apply(r)) for r in c.rays)]
    maximal = [c for c in hits
               if not any(set(c.rays) < set(d.rays) for d in hits)]
    if not hits:
        sub = Fan(fan.ambient_rank, ())
        return PreimageFan(sub, None)
    sub = Fan(fan.ambient_rank, tuple(sorted(maximal, key=lambda c: (len(c.rays), c.rays))))
    single = maximal[0] if len(maximal) == 1 else None
    return PreimageFan(sub, single)


def monoid_iso_on_cone(m: IntMatrix, sigma: Cone, sigma_prime: Cone) -> bool:
    """Does m restrict to an isomorphism of cone monoids sigma -> sigma'?

    Precondition: m maps sigma into sigma'.  True exactly when the image
    cone fills sigma' and m is a bijection between the lattice spans; for
    saturated monoids of pointed cones that forces a monoid isomorphism.
    """
    imgs = [m.apply(r) for r in sigma.rays]
    if not all(cone_contains(sigma_prime, w) for w in imgs):
        raise PreconditionViolated("cone does not map into the target cone")
    img = ImageCone(sigma_prime.ambient_rank, tuple(imgs))
    if not all(cone_contains(img, r) for r in sigma_prime.rays):
        return False
    span = saturate(IntMatrix.from_columns(list(sigma.rays) or [], rows=sigma.ambient_rank))
    span_p = saturate(IntMatrix.from_columns(list(sigma_prime.rays) or [],
                                             rows=sigma_prime.ambient_rank))
    moved = m @ span
    cols = []
    for c in moved.columns():
        x = solve_integer(span_p, c)
        if x is None:
            return False
        cols.append(x)
    x = IntMatrix.from_columns(cols, rows=span_p.cols)
    if x.rows != x.cols:
        return False
    return abs(determinant(x)) == 1


def is_unstable(tau: Cone, beta) -> bool:
    """Is the image of tau under beta symmetric about the origin?

    ``beta`` is an FgAbHom out of the free ambient lattice of tau; only the
    free part of the target matters.  True when -w lies back in the image
    cone for the image w of every ray, i.e. the image spans a subspace.
    Equivalent formulations (zero in the relative interior, dual functionals
    vanishing on the image) are exercised in tests.
    """
    fr = beta.target.free_rank
    if fr == 0:
        return True
    imgs = [beta.apply(r)[:fr] for r in tau.rays]
    img = ImageCone(fr, tuple(imgs))
    return all(cone_contains(img, tuple(-x for x in w)) for w in imgs)
