"""Finitary stochastic effectivity functions.

An effectivity function assigns each state an upper-closed family of measure
sets, Angel's portfolio.  Only finitary portfolios (finite unions of
principal filters of finite measure sets) are representable; on a finite
discrete space every finitary assignment is t-measurable, so the type
carries no measurability obligation (docs/derivations.md).  A portfolio is
finitely supported when every state has exactly one generator.

All quantifications over the (infinite) represented families reduce to their
finite generator antichains; the reductions are spelled out per operation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import (
    ForeignStateError,
    IncompatiblePartitionError,
    NotACongruenceError,
    NotSurjectiveError,
    SpaceMismatchError,
)
from .measure import SubProb, pushforward, restrict
from .space import (
    DirectSum,
    MeasurableMap,
    Relation,
    Space,
    direct_sum as space_sum,
    sigma_r,
)
from .upperset import MeasureSet, UpperSet, dual, equals

__all__ = [
    "EffFn",
    "is_ef_state_bisim",
    "greatest_ef_bisim",
    "is_ef_morphism",
    "is_strong_morphism",
    "quotient",
    "quotient_space",
    "is_subsystem",
    "dual_ef",
    "sum_ef",
    "from_markov_kernel",
    "push_upperset",
    "restrict_upperset",
]


@dataclass(frozen=True)
class EffFn:
    """A per-state portfolio of upper-closed families over one space."""

    space: Space
    portfolio: tuple[tuple[str, UpperSet], ...]

    def __init__(self, space: Space, portfolio: Mapping[str, UpperSet | Iterable[MeasureSet]]):
        table: dict[str, UpperSet] = {}
        for state, value in portfolio.items():
            space.index(state)
            u = value if isinstance(value, UpperSet) else UpperSet(space, value)
            if u.space != space:
                raise SpaceMismatchError("portfolio values must live on the carrier space")
            table[state] = u
        missing = [s for s in space.carrier if s not in table]
        if missing:
            raise ForeignStateError(f"portfolio missing states {missing}")
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "portfolio", tuple((s, table[s]) for s in space.carrier))

    def __call__(self, state: str) -> UpperSet:
        return self.portfolio[self.space.index(state)][1]

    @property
    def is_finitely_supported(self) -> bool:
        return all(u.is_principal for _, u in self.portfolio)


def _gen_transfer(source: UpperSet, target: UpperSet, agree) -> bool:
    """Generator-level transfer: for every source generator there is a
    target generator each of whose members is matched by an agreeing source
    member.  Upward closure makes this equivalent to the transfer condition
    quantified over all member sets of both families."""
    for g in source.generators:
        ok = False
        for h in target.generators:
            if all(any(agree(mu, nu) for mu in g) for nu in h):
                ok = True
                break
        if not ok:
            return False
    return True


def is_ef_state_bisim(p: EffFn, rel: Relation) -> bool:
    """State bisimulation test for a symmetric relation on a portfolio."""
    if rel.base != p.space:
        raise ForeignStateError("relation must be over the portfolio's space")
    quotient_sp = sigma_r(rel)  # rejects non-symmetric relations
    cache = _restriction_cache(p, quotient_sp)

    def agree(mu: SubProb, nu: SubProb) -> bool:
        return cache[mu] == cache[nu]

    return all(_gen_transfer(p(s), p(t), agree) for s, t in rel.pairs)


def _restriction_cache(p: EffFn, quotient_sp: Space) -> dict[SubProb, tuple]:
    cache: dict[SubProb, tuple] = {}
    for _, u in p.portfolio:
        for g in u.generators:
            for mu in g:
                if mu not in cache:
                    cache[mu] = restrict(mu, quotient_sp).mass
    return cache


def greatest_ef_bisim(p: EffFn) -> Relation:
    """Greatest state bisimulation of a portfolio (an equivalence).

    Same greatest-fixed-point iteration as for kernels, with the
    effectivity transfer condition checked in both directions.
    """
    rel = Relation.full(p.space)
    while True:
        quotient_sp = sigma_r(rel)
        cache = _restriction_cache(p, quotient_sp)

        def agree(mu: SubProb, nu: SubProb) -> bool:
            return cache[mu] == cache[nu]

        refined = Relation(
            p.space,
            [
                (s, t)
                for s, t in rel.pairs
                if _gen_transfer(p(s), p(t), agree) and _gen_transfer(p(t), p(s), agree)
            ],
        )
        if refined == rel:
            return rel
        rel = refined


def push_upperset(f: MeasurableMap, u: UpperSet) -> UpperSet:
    """Image family on the codomain: generated by the pushforward images of
    the generators.  A set belongs to the image family iff its pushforward
    preimage belongs to ``u``."""
    gens = (
        MeasureSet(f.codomain, (pushforward(f, mu) for mu in g))
        for g in u.generators
    )
    return UpperSet(f.codomain, gens)


def restrict_upperset(u: UpperSet, coarser: Space) -> UpperSet:
    """Family of restrictions to a coarser sigma-algebra on the carrier."""
    gens = (
        MeasureSet(coarser, (restrict(mu, coarser) for mu in g))
        for g in u.generators
    )
    return UpperSet(coarser, gens)


def is_ef_morphism(f: MeasurableMap, p: EffFn, q: EffFn) -> bool:
    """Whether ``f`` is a portfolio morphism: the target portfolio at
    ``f(s)`` is exactly the image family of the portfolio at ``s``."""
    if f.domain != p.space or f.codomain != q.space:
        raise SpaceMismatchError("map endpoints must match the portfolio spaces")
    return all(
        equals(q(f(s)), push_upperset(f, p(s))) for s in p.space.carrier
    )


def _preimage_set(f: MeasurableMap, h: MeasureSet) -> MeasureSet | None:
    """Full pushforward preimage of a finite measure set, or None if it is
    infinite."""
    from .nlmp import unique_preimages

    members: list[SubProb] = []
    for nu in h:
        sols = unique_preimages(f, nu)
        if sols is None:
            return None
        members.extend(sols)
    return MeasureSet(f.domain, members)


def is_strong_morphism(f: MeasurableMap, p: EffFn, q: EffFn) -> bool:
    """Whether ``f`` is a strong morphism: it is onto, and each source
    portfolio is the upper family generated by the pushforward preimages of
    the target generators.

    Decided in two directions on generators: every target generator pulls
    back over some source generator (its preimage contains one), and every
    source generator contains the full preimage of some target generator.
    The latter needs the preimage to be finite, which holds exactly when
    positive mass only sits on atoms with singleton preimages.
    """
    if f.domain != p.space or f.codomain != q.space:
        raise SpaceMismatchError("map endpoints must match the portfolio spaces")
    if not f.is_surjective:
        raise NotSurjectiveError("a strong morphism must be surjective")
    for s in p.space.carrier:
        source, target = p(s), q(f(s))
        for h in target.generators:
            if not any(
                all(pushforward(f, mu) in h for mu in g) for g in source.generators
            ):
                return False
        preimages = [_preimage_set(f, h) for h in target.generators]
        for g in source.generators:
            members = set(g.members)
            if not any(
                pre is not None and set(pre.members) <= members for pre in preimages
            ):
                return False
    return True


class NonEquivalence(SpaceMismatchError):
    """The relation handed to a quotient is not an equivalence."""


def quotient_space(space: Space, alpha: Relation) -> tuple[Space, MeasurableMap]:
    """Quotient of a space by an equivalence, with the factor map.

    Classes are named after their least representative.  The quotient
    carries the finest sigma-algebra making the factor map measurable:
    classes are merged into one quotient atom whenever they overlap a common
    base atom.
    """
    if alpha.base != space:
        raise ForeignStateError("equivalence must be over the given space")
    if not alpha.is_equivalence:
        raise NonEquivalence("quotient requires an equivalence relation")
    classes = alpha.classes()
    name_of = {}
    for cls in classes:
        for s in cls:
            name_of[s] = cls[0]
    carrier = tuple(cls[0] for cls in classes)
    parent = {name: name for name in carrier}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for block in space.atoms:
        names = sorted({name_of[s] for s in block}, key=carrier.index)
        for other in names[1:]:
            a, b = find(names[0]), find(other)
            if a != b:
                parent[b] = a
    groups: dict[str, list[str]] = {}
    for name in carrier:
        groups.setdefault(find(name), []).append(name)
    qspace = Space(carrier, groups.values())
    eta = MeasurableMap(space, qspace, {s: name_of[s] for s in space.carrier})
    return qspace, eta


def quotient(p: EffFn, alpha: Relation) -> tuple[EffFn, MeasurableMap]:
    """Quotient portfolio by a congruence, with the factor map.

    The candidate portfolio of a class is the image family of any
    representative; the equivalence is a congruence iff all representatives
    of every class agree, in which case the factor map is a portfolio
    morphism onto the result.
    """
    qspace, eta = quotient_space(p.space, alpha)
    table: dict[str, UpperSet] = {}
    witness_of: dict[str, str] = {}
    for s in p.space.carrier:
        cls = eta(s)
        candidate = push_upperset(eta, p(s))
        if cls not in table:
            table[cls] = candidate
            witness_of[cls] = s
        elif not equals(table[cls], candidate):
            raise NotACongruenceError(
                f"representatives {witness_of[cls]!r} and {s!r} of class {cls!r} "
                "induce different quotient portfolios",
                witness=(witness_of[cls], s),
            )
    return EffFn(qspace, table), eta


def is_subsystem(p: EffFn, coarser: Space) -> bool:
    """Whether a coarser sigma-algebra on the carrier cuts out a subsystem:
    the portfolio restricted to the coarser space must be constant on each
    coarser atom, which is the finite form of t-measurability of the
    restricted portfolio."""
    if not coarser.coarsens(p.space):
        raise IncompatiblePartitionError(
            "subsystem test needs a coarsening of the portfolio space's atoms"
        )
    for block in coarser.atoms:
        seen = {restrict_upperset(p(s), coarser) for s in block}
        if len(seen) > 1:
            return False
    return True


def dual_ef(p: EffFn) -> EffFn:
    """Pointwise dual portfolio (Demon's view)."""
    return EffFn(p.space, {s: dual(p(s)) for s in p.space.carrier})


def sum_ef(p: EffFn, q: EffFn) -> tuple[EffFn, DirectSum]:
    """Piecewise sum portfolio on the tagged sum space, with measures
    embedded by zero extension."""
    ds = space_sum(p.space, q.space)
    table: dict[str, UpperSet] = {}
    for s in p.space.carrier:
        table[ds.left(s)] = push_upperset(ds.left, p(s))
    for t in q.space.carrier:
        table[ds.right(t)] = push_upperset(ds.right, q(t))
    return EffFn(ds.space, table), ds


def from_markov_kernel(space: Space, k: Mapping[str, SubProb]) -> EffFn:
    """Portfolio of a deterministic stochastic relation: each state gets the
    principal ultrafilter of its single successor measure."""
    return EffFn(
        space,
        {s: UpperSet(space, (MeasureSet(space, (k[s],)),)) for s in space.carrier},
    )
