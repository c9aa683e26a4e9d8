"""Image-finite nondeterministic kernels and labelled processes.

A kernel assigns each state a finite set of subprobability measures on its
own space; a labelled process bundles one kernel per label.  On a finite
discrete space every such map is hit-measurable, so no measurability check
is needed at construction time; the nontrivial condition against a coarser
sigma-algebra is exactly the event-bisimulation test (docs/derivations.md).

Empty images are admitted.  Their principal filter is the full family, read
as "Demon is effective for everything": with no moves available for Angel,
every constraint is met vacuously.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import ForeignStateError, IncompatiblePartitionError, SpaceMismatchError
from .measure import SubProb, pushforward, restrict
from .space import (
    DirectSum,
    MeasurableMap,
    Relation,
    Space,
    direct_sum as space_sum,
    sigma_r,
)
from .upperset import MeasureSet, UpperSet

__all__ = [
    "Kernel",
    "Nlmp",
    "is_state_bisim",
    "greatest_bisim",
    "is_event_bisim",
    "is_nk_morphism",
    "direct_sum",
    "filter_generate",
    "angelize",
    "unique_preimages",
]


@dataclass(frozen=True)
class Kernel:
    """A per-state finite set of successor measures."""

    space: Space
    image: tuple[tuple[str, MeasureSet], ...]

    def __init__(self, space: Space, image: Mapping[str, Iterable[SubProb] | MeasureSet]):
        table = {}
        for state, measures in image.items():
            space.index(state)
            ms = measures if isinstance(measures, MeasureSet) else MeasureSet(space, measures)
            if ms.space != space:
                raise SpaceMismatchError("kernel measures must live on the kernel space")
            table[state] = ms
        empty = MeasureSet(space, ())
        normalized = tuple((s, table.get(s, empty)) for s in space.carrier)
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "image", normalized)

    def __call__(self, state: str) -> MeasureSet:
        return self.image[self.space.index(state)][1]


@dataclass(frozen=True)
class Nlmp:
    """A finite labelled family of kernels over one space."""

    space: Space
    labels: tuple[str, ...]
    kernels: tuple[tuple[str, Kernel], ...]

    def __init__(self, space: Space, kernels: Mapping[str, Kernel]):
        labels = tuple(kernels.keys())
        for label, k in kernels.items():
            if k.space != space:
                raise SpaceMismatchError(f"kernel for label {label!r} lives on another space")
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "kernels", tuple((a, kernels[a]) for a in labels))

    def kernel(self, label: str) -> Kernel:
        for a, k in self.kernels:
            if a == label:
                return k
        raise ForeignStateError(f"no kernel for label {label!r}")


def _kernels_of(m: Kernel | Nlmp) -> tuple[Kernel, ...]:
    if isinstance(m, Kernel):
        return (m,)
    return tuple(k for _, k in m.kernels)


def is_state_bisim(m: Kernel | Nlmp, rel: Relation) -> bool:
    """Transfer test: a symmetric relation is a state bisimulation iff every
    successor measure of one related state is matched by a successor of the
    other agreeing on all closed sets of the relation."""
    space = m.space
    if rel.base != space:
        raise ForeignStateError("relation must be over the kernel's space")
    if not rel.is_symmetric:
        return False
    quotient = sigma_r(rel)
    for k in _kernels_of(m):
        if not _transfer_holds(k, rel.pairs, quotient):
            return False
    return True


def _restricted(mu: SubProb, quotient: Space) -> tuple:
    return restrict(mu, quotient).mass


def _transfer_holds(k: Kernel, pairs, quotient: Space) -> bool:
    cache = {s: [_restricted(mu, quotient) for mu in k(s)] for s in k.space.carrier}
    for s, t in pairs:
        targets = set(cache[t])
        if any(m not in targets for m in cache[s]):
            return False
    return True


def greatest_bisim(m: Kernel | Nlmp) -> Relation:
    """Greatest state bisimulation, as an equivalence relation.

    Iterates the two-sided transfer condition from the full relation down to
    its greatest fixed point.  Coarser relations weaken the agreement of
    measures monotonically, so the fixed point contains every state
    bisimulation and is itself one; every iterate stays an equivalence.
    """
    space = m.space
    rel = Relation.full(space)
    while True:
        quotient = sigma_r(rel)
        caches = [
            {s: [_restricted(mu, quotient) for mu in k(s)] for s in space.carrier}
            for k in _kernels_of(m)
        ]

        def related(s: str, t: str) -> bool:
            for cache in caches:
                left, right = set(cache[s]), set(cache[t])
                if any(v not in right for v in cache[s]):
                    return False
                if any(v not in left for v in cache[t]):
                    return False
            return True

        refined = Relation(
            space, [(s, t) for s, t in rel.pairs if related(s, t)]
        )
        if refined == rel:
            return rel
        rel = refined


def is_event_bisim(m: Kernel | Nlmp, coarser: Space) -> bool:
    """Whether a coarser sigma-algebra is respected by the kernel(s).

    Decided by quotienting: restrict every successor measure to the coarser
    space and require the resulting measure set to be constant on each
    coarser atom.  This is the finite reduction of hit-measurability against
    the sub-sigma-algebra (docs/derivations.md).
    """
    space = m.space
    if not coarser.coarsens(space):
        raise IncompatiblePartitionError(
            "event test needs a coarsening of the kernel space's atoms"
        )
    for k in _kernels_of(m):
        for block in coarser.atoms:
            images = {MeasureSet(coarser, (restrict(mu, coarser) for mu in k(s))) for s in block}
            if len(images) > 1:
                return False
    return True


def unique_preimages(f: MeasurableMap, nu: SubProb) -> list[SubProb] | None:
    """All measures on the domain that push forward to ``nu`` along ``f``,
    provided there are finitely many; ``None`` signals an infinite family.

    The solution set is a product of simplex slices, one per codomain atom:
    it is a singleton iff every codomain atom carrying positive mass has a
    single domain atom in its preimage, and empty if some massive atom has
    none.  Multi-atom preimages with positive mass admit infinitely many
    rational splittings.
    """
    masses = [None] * len(f.domain.atoms)
    for i, block in enumerate(f.codomain.atoms):
        pre = f.preimage(block)
        idx = f.domain.atoms_of_set(pre)
        weight = nu.mass[i]
        if not idx:
            if weight > 0:
                return []
            continue
        if weight == 0:
            for j in idx:
                masses[j] = 0
        elif len(idx) == 1:
            masses[idx[0]] = weight
        else:
            return None  # infinitely many splits
    return [SubProb(f.domain, [m or 0 for m in masses])]


def is_nk_morphism(f: MeasurableMap, k: Kernel, k2: Kernel) -> bool:
    """Whether ``f`` commutes with the kernels: the image of every state's
    measure set under pushforward lands in the target, and the full
    pushforward preimage of the target set equals the source set.

    The preimage of a finite measure set is finite only when each positive-
    mass codomain atom pulls back to a single domain atom; otherwise the
    preimage is an infinite polytope and can never equal the finite source.
    """
    if f.domain != k.space or f.codomain != k2.space:
        raise SpaceMismatchError("map endpoints must match the kernel spaces")
    for s in k.space.carrier:
        source = set(k(s).members)
        target = k2(f(s))
        if any(pushforward(f, mu) not in target for mu in source):
            return False
        expected: set[SubProb] = set()
        for nu in target:
            sols = unique_preimages(f, nu)
            if sols is None:
                return False
            expected.update(sols)
        if expected != source:
            return False
    return True


def direct_sum(k: Kernel, k2: Kernel) -> tuple[Kernel, DirectSum]:
    """Piecewise sum kernel on the tagged sum space.

    Measures of each summand are embedded with zero mass on the foreign
    side (pushforward along the injection).
    """
    ds = space_sum(k.space, k2.space)
    image: dict[str, list[SubProb]] = {}
    for s in k.space.carrier:
        image[ds.left(s)] = [pushforward(ds.left, mu) for mu in k(s)]
    for t in k2.space.carrier:
        image[ds.right(t)] = [pushforward(ds.right, mu) for mu in k2(t)]
    return Kernel(ds.space, image), ds


def filter_generate(k: Kernel):
    """Principal-filter embedding of a kernel: each state's portfolio is the
    filter of its measure set (``demonize``)."""
    from .effectivity import EffFn

    return EffFn(
        k.space,
        {s: UpperSet(k.space, (k(s),)) for s in k.space.carrier},
    )


def angelize(k: Kernel):
    """Singleton-filter union of a kernel: each successor measure becomes an
    Angel choice of its own."""
    from .effectivity import EffFn

    return EffFn(
        k.space,
        {
            s: UpperSet(k.space, tuple(MeasureSet(k.space, (mu,)) for mu in k(s)))
            for s in k.space.carrier
        },
    )
