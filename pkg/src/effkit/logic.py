"""The two-level modal logic over finitary effectivity functions.

State formulas are built from truth and conjunction plus two modalities that
cross into the measure level; measure formulas combine threshold tests on
the mass of state-formula extensions with conjunction and disjunction.
Thresholds use strict comparisons against rationals in ``[0, 1)`` only.

Concrete syntax::

    phi  ::=  T  |  phi & phi  |  <> munit  |  [] munit  |  ( phi )
    psi  ::=  psi & psi  |  psi | psi  |  [ phi < q ]  |  [ phi > q ]
              |  [ psi ]  |  ( psi )

``&`` binds tighter than ``|``; the prefix modalities bind tightest and take
a single measure unit, so composite measure formulas under a modality are
bracketed: ``[][ [T<1/3] | [T>2/3] ]``.

Logical equivalence is computed by partition refinement that keeps, next to
the partition, a conjunction-closed family of formulas whose extensions
generate exactly the sets respected by the partition.  States are split
only on an actually synthesized and evaluator-confirmed formula, so the
procedure is an independent witness-producing counterpart of the relational
greatest-bisimulation computation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .effectivity import EffFn, _gen_transfer
from .errors import (
    FormulaSyntaxError,
    InternalInvariantViolation,
    ThresholdOutOfRangeError,
)
from .measure import SubProb, evaluate, restrict
from .space import Relation, Space

__all__ = [
    "StateFormula",
    "MeasureFormula",
    "Top",
    "And",
    "Diamond",
    "Box",
    "MAnd",
    "MOr",
    "Threshold",
    "parse_formula",
    "format_formula",
    "eval_state",
    "eval_measure",
    "logical_equivalence",
    "distinguish",
    "DistinguishResult",
]


# ---------------------------------------------------------------------------
# Abstract syntax
# ---------------------------------------------------------------------------

class StateFormula:
    """Base class of state-level formulas."""

    __slots__ = ()


class MeasureFormula:
    """Base class of measure-level formulas."""

    __slots__ = ()


@dataclass(frozen=True)
class Top(StateFormula):
    pass


@dataclass(frozen=True)
class And(StateFormula):
    left: StateFormula
    right: StateFormula


@dataclass(frozen=True)
class Diamond(StateFormula):
    body: MeasureFormula


@dataclass(frozen=True)
class Box(StateFormula):
    body: MeasureFormula


@dataclass(frozen=True)
class MAnd(MeasureFormula):
    left: MeasureFormula
    right: MeasureFormula


@dataclass(frozen=True)
class MOr(MeasureFormula):
    left: MeasureFormula
    right: MeasureFormula


@dataclass(frozen=True)
class Threshold(MeasureFormula):
    state: StateFormula
    cmp: str
    bound: Fraction

    def __post_init__(self):
        if self.cmp not in ("<", ">"):
            raise FormulaSyntaxError(f"comparison must be < or >, got {self.cmp!r}", 0)
        if not isinstance(self.bound, Fraction):
            object.__setattr__(self, "bound", Fraction(self.bound))
        if not (0 <= self.bound < 1):
            raise ThresholdOutOfRangeError(
                f"threshold {self.bound} outside [0, 1)"
            )


# ---------------------------------------------------------------------------
# Concrete syntax
# ---------------------------------------------------------------------------

_TOKENS = ("<>", "[]", "&", "|", "(", ")", "[", "]", "<", ">", "T")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    out = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        matched = False
        for tok in _TOKENS:
            if text.startswith(tok, i):
                out.append((tok, tok, i))
                i += len(tok)
                matched = True
                break
        if matched:
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            if j < n and text[j] == "/":
                j += 1
                if j >= n or not text[j].isdigit():
                    raise FormulaSyntaxError("missing denominator", j)
                while j < n and text[j].isdigit():
                    j += 1
            out.append(("RAT", text[i:j], i))
            i = j
            continue
        raise FormulaSyntaxError(f"unexpected character {ch!r}", i)
    out.append(("EOF", "", n))
    return out


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.pos]

    def next(self) -> tuple[str, str, int]:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str) -> tuple[str, str, int]:
        tok = self.next()
        if tok[0] != kind:
            raise FormulaSyntaxError(f"expected {kind!r}, found {tok[1] or 'end of input'!r}", tok[2])
        return tok

    def parse_state(self) -> StateFormula:
        left = self.parse_state_unit()
        while self.peek()[0] == "&":
            self.next()
            left = And(left, self.parse_state_unit())
        return left

    def parse_state_unit(self) -> StateFormula:
        kind, text, pos = self.peek()
        if kind == "T":
            self.next()
            return Top()
        if kind == "<>":
            self.next()
            return Diamond(self.parse_measure_unit())
        if kind == "[]":
            self.next()
            return Box(self.parse_measure_unit())
        if kind == "(":
            self.next()
            inner = self.parse_state()
            self.expect(")")
            return inner
        raise FormulaSyntaxError(f"expected a state formula, found {text or 'end of input'!r}", pos)

    def parse_measure(self) -> MeasureFormula:
        left = self.parse_measure_conj()
        while self.peek()[0] == "|":
            self.next()
            left = MOr(left, self.parse_measure_conj())
        return left

    def parse_measure_conj(self) -> MeasureFormula:
        left = self.parse_measure_unit()
        while self.peek()[0] == "&":
            self.next()
            left = MAnd(left, self.parse_measure_unit())
        return left

    def parse_measure_unit(self) -> MeasureFormula:
        kind, text, pos = self.peek()
        if kind == "[":
            self.next()
            mark = self.pos
            try:
                return self._parse_threshold_tail(pos)
            except FormulaSyntaxError:
                self.pos = mark  # brackets group a composite measure formula
            inner = self.parse_measure()
            self.expect("]")
            return inner
        if kind == "(":
            self.next()
            inner = self.parse_measure()
            self.expect(")")
            return inner
        raise FormulaSyntaxError(
            f"expected a measure formula, found {text or 'end of input'!r}", pos
        )

    def _parse_threshold_tail(self, open_pos: int) -> Threshold:
        state = self.parse_state()
        kind, text, pos = self.next()
        if kind not in ("<", ">"):
            raise FormulaSyntaxError(f"expected < or > in threshold, found {text!r}", pos)
        rat = self.expect("RAT")
        bound = Fraction(rat[1])
        if bound >= 1:
            raise ThresholdOutOfRangeError(f"threshold {bound} outside [0, 1)")
        self.expect("]")
        return Threshold(state, kind, bound)


def parse_formula(text: str) -> StateFormula:
    """Parse a state formula; raises FormulaSyntaxError / ThresholdOutOfRangeError."""
    parser = _Parser(text)
    formula = parser.parse_state()
    parser.expect("EOF")
    return formula


def _fmt_rat(q: Fraction) -> str:
    return str(q)


def _fmt_state(f: StateFormula, prec: int) -> str:
    if isinstance(f, Top):
        return "T"
    if isinstance(f, And):
        text = f"{_fmt_state(f.left, 1)} & {_fmt_state(f.right, 2)}"
        return f"({text})" if prec > 1 else text
    if isinstance(f, Diamond):
        return "<>" + _fmt_munit(f.body)
    if isinstance(f, Box):
        return "[]" + _fmt_munit(f.body)
    raise TypeError(f"not a state formula: {f!r}")


def _fmt_munit(m: MeasureFormula) -> str:
    if isinstance(m, Threshold):
        return _fmt_measure(m, 0)
    return f"[ {_fmt_measure(m, 0)} ]"


def _fmt_measure(m: MeasureFormula, prec: int) -> str:
    if isinstance(m, Threshold):
        return f"[{_fmt_state(m.state, 0)} {m.cmp} {_fmt_rat(m.bound)}]"
    if isinstance(m, MAnd):
        text = f"{_fmt_measure(m.left, 2)} & {_fmt_measure(m.right, 3)}"
        return f"({text})" if prec > 2 else text
    if isinstance(m, MOr):
        text = f"{_fmt_measure(m.left, 1)} | {_fmt_measure(m.right, 2)}"
        return f"({text})" if prec > 1 else text
    raise TypeError(f"not a measure formula: {m!r}")


def format_formula(f: StateFormula) -> str:
    """Canonical concrete syntax; ``parse_formula`` inverts it exactly."""
    return _fmt_state(f, 0)


# ---------------------------------------------------------------------------
# Semantics
# ---------------------------------------------------------------------------

class _Evaluator:
    """Extension computation with memoization over shared subformulas."""

    def __init__(self, p: EffFn):
        self.p = p
        self._ext: dict[StateFormula, frozenset[str]] = {}

    def state_ext(self, f: StateFormula) -> frozenset[str]:
        cached = self._ext.get(f)
        if cached is not None:
            return cached
        if isinstance(f, Top):
            ext = frozenset(self.p.space.carrier)
        elif isinstance(f, And):
            ext = self.state_ext(f.left) & self.state_ext(f.right)
        elif isinstance(f, Diamond):
            ext = frozenset(
                s
                for s in self.p.space.carrier
                if any(
                    all(self.msat(f.body, mu) for mu in g)
                    for g in self.p(s).generators
                )
            )
        elif isinstance(f, Box):
            ext = frozenset(
                s
                for s in self.p.space.carrier
                if all(
                    any(self.msat(f.body, mu) for mu in g)
                    for g in self.p(s).generators
                )
            )
        else:
            raise TypeError(f"not a state formula: {f!r}")
        self._ext[f] = ext
        return ext

    def msat(self, m: MeasureFormula, mu: SubProb) -> bool:
        if isinstance(m, MAnd):
            return self.msat(m.left, mu) and self.msat(m.right, mu)
        if isinstance(m, MOr):
            return self.msat(m.left, mu) or self.msat(m.right, mu)
        if isinstance(m, Threshold):
            mass = evaluate(mu, self.state_ext(m.state))
            return mass < m.bound if m.cmp == "<" else mass > m.bound
        raise TypeError(f"not a measure formula: {m!r}")


def eval_state(p: EffFn, f: StateFormula) -> frozenset[str]:
    """Extension of a state formula.

    A state satisfies a diamond iff some generator of its portfolio consists
    of satisfying measures only; it satisfies a box iff every generator
    contains at least one satisfying measure (the dual portfolio reading).
    """
    return _Evaluator(p).state_ext(f)


def eval_measure(p: EffFn, m: MeasureFormula, mu: SubProb) -> bool:
    """Whether a measure satisfies a measure formula."""
    return _Evaluator(p).msat(m, mu)


# ---------------------------------------------------------------------------
# Logical equivalence and distinguishing formulas
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DistinguishResult:
    """Outcome of a distinguishing-formula request.

    When the pair is inequivalent, ``formula`` is satisfied by exactly
    ``satisfied_by`` among the two states; the witness orientation follows
    the synthesis, no canonical orientation is imposed.
    """

    equivalent: bool
    formula: StateFormula | None = None
    satisfied_by: str | None = None


_FALSUM = Threshold(Top(), "<", Fraction(0))


def _ext_key(space: Space):
    index = {s: i for i, s in enumerate(space.carrier)}

    def key(ext: frozenset[str]):
        return (len(ext), tuple(sorted(index[s] for s in ext)))

    return key


class _Refiner:
    """Shared engine for logical equivalence and formula synthesis.

    Maintains a partition of the carrier together with a conjunction-closed
    formula family whose extensions generate exactly the partition's sets.
    Each round checks the modal transfer condition on same-block pairs over
    block masses; failures synthesize a separating formula which is
    confirmed by the evaluator before it refines the partition.
    """

    def __init__(self, p: EffFn):
        self.p = p
        self.ev = _Evaluator(p)
        self.key = _ext_key(p.space)
        self.family: dict[frozenset[str], StateFormula] = {
            frozenset(p.space.carrier): Top()
        }

    # -- partition bookkeeping ---------------------------------------------
    def blocks(self) -> tuple[tuple[str, ...], ...]:
        exts = sorted(self.family, key=self.key)
        sig: dict[str, tuple[bool, ...]] = {
            s: tuple(s in e for e in exts) for s in self.p.space.carrier
        }
        seen: dict[tuple[bool, ...], list[str]] = {}
        for s in self.p.space.carrier:
            seen.setdefault(sig[s], []).append(s)
        return tuple(tuple(block) for block in seen.values())

    def _close_family(self) -> None:
        changed = True
        while changed:
            changed = False
            items = list(self.family.items())
            for (e1, f1), (e2, f2) in itertools.combinations(items, 2):
                meet = e1 & e2
                if meet not in self.family:
                    self.family[meet] = And(f1, f2)
                    changed = True

    def _add(self, formula: StateFormula, ext: frozenset[str]) -> None:
        if ext not in self.family:
            self.family[ext] = formula
            self._close_family()

    # -- transfer over current block masses --------------------------------
    def _mass_cache(self, qspace: Space) -> dict[SubProb, tuple]:
        cache: dict[SubProb, tuple] = {}
        for _, u in self.p.portfolio:
            for g in u.generators:
                for mu in g:
                    if mu not in cache:
                        cache[mu] = restrict(mu, qspace).mass
        return cache

    def refine(self, watch: tuple[str, str] | None = None):
        """Run refinement to the fixed point.

        With ``watch`` set, return the confirmed separating formula for the
        watched pair as soon as it is synthesized, as (formula, satisfier);
        returns None when the fixed point is reached without separating it.
        Without ``watch``, return the final blocks.
        """
        while True:
            blocks = self.blocks()
            qspace = Space(self.p.space.carrier, blocks)
            cache = self._mass_cache(qspace)

            def agree(mu: SubProb, nu: SubProb) -> bool:
                return cache[mu] == cache[nu]

            fresh: list[tuple[StateFormula, frozenset[str]]] = []
            hit = None
            for block in blocks:
                for s, t in itertools.combinations(block, 2):
                    for x, y in ((s, t), (t, s)):
                        if _gen_transfer(self.p(x), self.p(y), agree):
                            continue
                        formula, satisfier = self._synthesize(x, y, cache)
                        ext = self.ev.state_ext(formula)
                        refuted = t if satisfier == s else s
                        if satisfier not in ext or refuted in ext:
                            raise InternalInvariantViolation(
                                "synthesized formula failed evaluator confirmation"
                            )
                        fresh.append((formula, ext))
                        if watch is not None and {x, y} == set(watch):
                            hit = (formula, satisfier)
                        break
                    if hit:
                        break
                if hit:
                    break
            if hit:
                return hit
            if not fresh:
                return None if watch is not None else blocks
            for formula, ext in fresh:
                self._add(formula, ext)

    # -- formula synthesis ---------------------------------------------------
    def _synthesize(
        self, s: str, t: str, cache: dict[SubProb, tuple]
    ) -> tuple[StateFormula, str]:
        """Separating formula for a failed transfer from ``s`` to ``t``.

        Mirrors the completeness argument: pick an unmatched source
        generator, one culprit measure per target generator, and for every
        culprit/source pair a family formula whose mass differs; thresholds
        at the midpoints, oriented toward the culprit, assemble into a box
        over a disjunction of conjunctions satisfied by ``t`` and refuted
        by ``s``.
        """
        source, target = self.p(s), self.p(t)
        if target.is_empty:
            return Box(_FALSUM), t
        if source.is_full:
            return Diamond(_FALSUM), s

        chosen = None
        for g in source.generators:
            culprits = []
            for h in target.generators:
                bad = next(
                    (nu for nu in h if all(cache[nu] != cache[mu] for mu in g)),
                    None,
                )
                if bad is None:
                    culprits = None
                    break
                culprits.append(bad)
            if culprits is not None:
                chosen = (g, culprits)
                break
        if chosen is None:
            raise InternalInvariantViolation("synthesis called on a passing transfer")
        g, culprits = chosen

        exts = sorted(self.family, key=self.key)
        disjuncts = []
        for nu in culprits:
            conj = None
            for mu in g:
                phi, a, b = self._separating_test(mu, nu, exts)
                mid = (a + b) / 2
                test = Threshold(phi, "<" if a < b else ">", mid)
                conj = test if conj is None else MAnd(conj, test)
            disjuncts.append(conj)
        body = disjuncts[0]
        for d in disjuncts[1:]:
            body = MOr(body, d)
        return Box(body), t

    def _separating_test(self, mu: SubProb, nu: SubProb, exts):
        for ext in exts:
            a = evaluate(nu, ext)
            b = evaluate(mu, ext)
            if a != b:
                return self.family[ext], a, b
        raise InternalInvariantViolation(
            "measures disagree on the partition but on no family extension"
        )


def logical_equivalence(p: EffFn) -> Relation:
    """Partition of states by the formulas they satisfy, as an equivalence.

    Computed by confirmed-formula partition refinement; for finitary
    portfolios this coincides with the greatest state bisimulation.
    """
    blocks = _Refiner(p).refine()
    return Relation.from_partition(p.space, blocks)


def distinguish(p: EffFn, s: str, t: str) -> DistinguishResult:
    """Separating formula for a pair of states, or the equivalence verdict."""
    p.space.index(s)
    p.space.index(t)
    if s == t:
        return DistinguishResult(equivalent=True)
    hit = _Refiner(p).refine(watch=(s, t))
    if hit is None:
        return DistinguishResult(equivalent=True)
    formula, satisfier = hit
    return DistinguishResult(equivalent=False, formula=formula, satisfied_by=satisfier)
