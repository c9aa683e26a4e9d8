"""Cospan verification, span construction, support selections."""

from __future__ import annotations

from random import Random

import pytest

from effkit import (
    Cospan,
    CospanVerificationError,
    EffFn,
    Kernel,
    MeasurableMap,
    MeasureSet,
    NotFinitelySupportedError,
    Relation,
    Space,
    SubProb,
    UpperSet,
    build_span,
    equals,
    filter_generate,
    filter_of,
    greatest_ef_bisim,
    intersect,
    is_subsystem,
    quotient,
    support_relations,
    verify_cospan,
)
from effkit.effectivity import push_upperset
from helpers import rand_fin_supported_ef, rand_space

S3 = Space.discrete(["s0", "s1", "s2"])
D2 = SubProb.dirac(S3, "s2")
ZERO = SubProb.zero(S3)
P_A = filter_generate(Kernel(S3, {"s0": [D2], "s1": [D2], "s2": [ZERO]}))


def canonical_cospan(p: EffFn) -> Cospan:
    quotiented, eta = quotient(p, greatest_ef_bisim(p))
    return Cospan(p, p, quotiented, eta, eta)


class TestVerify:
    def test_canonical_cospan_valid(self):
        report = verify_cospan(canonical_cospan(P_A))
        assert report.ok and not report.failures

    def test_non_surjective_leg(self):
        c = canonical_cospan(P_A)
        wide = Space.discrete(list(c.m.space.carrier) + ["extra"])
        m2 = EffFn(
            wide,
            {u: UpperSet(wide, ()) for u in wide.carrier},
        )
        f2 = MeasurableMap(S3, wide, {s: c.f(s) for s in S3.carrier})
        report = verify_cospan(Cospan(P_A, P_A, m2, f2, f2))
        assert not report.ok
        assert any(fail.check == "not_surjective" for fail in report.failures)

    def test_perturbed_mediator_names_state(self):
        c = canonical_cospan(P_A)
        table = {u: c.m(u) for u in c.m.space.carrier}
        bad = c.m.space.carrier[0]
        table[bad] = filter_of(
            MeasureSet(c.m.space, [SubProb.of(c.m.space, {bad: "1/8"})])
        )
        report = verify_cospan(Cospan(c.p, c.q, EffFn(c.m.space, table), c.f, c.g))
        assert not report.ok
        assert any(f.check == "morphism_violation" for f in report.failures)


class TestBuildSpan:
    def test_fixture_pullback(self):
        span = build_span(canonical_cospan(P_A))
        # one pullback point per pair of fiber mates
        assert len(span.w.carrier) == 2 * 2 + 1 * 1
        assert len(span.w.atoms) == 2

    def test_identity_cospan_diagonal(self):
        c = Cospan(P_A, P_A, P_A, MeasurableMap.identity(S3), MeasurableMap.identity(S3))
        span = build_span(c)
        assert span.w.carrier == tuple(f"{s}|{s}" for s in S3.carrier)
        # dynamics transports the original portfolio
        for s in S3.carrier:
            assert equals(push_upperset(span.pi_s, span.tau(f"{s}|{s}")), span.p_f(s))

    def test_quotient_portfolios_are_subsystems(self):
        span = build_span(canonical_cospan(P_A))
        assert is_subsystem(P_A, span.p_f.space)
        assert is_subsystem(P_A, span.q_g.space)

    def test_rejects_unverified_cospans(self):
        c = canonical_cospan(P_A)
        table = {u: c.m(u) for u in c.m.space.carrier}
        bad = c.m.space.carrier[0]
        table[bad] = filter_of(
            MeasureSet(c.m.space, [SubProb.of(c.m.space, {bad: "1/8"})])
        )
        with pytest.raises(CospanVerificationError):
            build_span(Cospan(c.p, c.q, EffFn(c.m.space, table), c.f, c.g))

    def test_rejects_non_finitely_supported(self):
        plural = EffFn(
            S3,
            {
                "s0": UpperSet(
                    S3,
                    (
                        MeasureSet(S3, [D2]),
                        MeasureSet(S3, [ZERO, SubProb.of(S3, {"s0": "1/2"})]),
                    ),
                ),
                "s1": P_A("s1"),
                "s2": P_A("s2"),
            },
        )
        quotiented, eta = quotient(plural, Relation.identity(S3))
        with pytest.raises(NotFinitelySupportedError):
            build_span(Cospan(plural, plural, quotiented, eta, eta))

    def test_random_quotient_cospans_commute(self):
        rng = Random(211)
        for _ in range(40):
            space = rand_space(rng, 2, 4)
            p = rand_fin_supported_ef(rng, space, allow_empty=True)
            span = build_span(canonical_cospan(p))  # raises on a failed square
            assert set(span.pi_s.mapping.values()) == set(space.carrier)

    def test_measure_correspondence_bijective(self):
        span = build_span(canonical_cospan(P_A))
        # every atom of w pairs with exactly one mediator atom
        assert len(span.w.atoms) == len(canonical_cospan(P_A).m.space.atoms)


class TestCanonicalMediator:
    def test_bisimilar_sides_yield_valid_cospan(self):
        from effkit import canonical_mediator_cospan

        c = canonical_mediator_cospan(P_A, P_A)
        report = verify_cospan(c)
        assert report.ok
        span = build_span(c)
        assert len(span.w.atoms) == len(c.m.space.atoms)

    def test_unmatched_state_breaks_surjectivity(self):
        from effkit import canonical_mediator_cospan

        lonely = Space.discrete(["x"])
        q = EffFn(
            lonely,
            {"x": UpperSet(lonely, (MeasureSet(lonely, [SubProb.of(lonely, {"x": "1/2"})]),))},
        )
        c = canonical_mediator_cospan(P_A, q)
        report = verify_cospan(c)
        assert not report.ok
        assert any(f.check == "not_surjective" for f in report.failures)

    def test_random_self_pairs_always_behaviorally_equivalent(self):
        rng = Random(233)
        from effkit import canonical_mediator_cospan

        for _ in range(20):
            space = rand_space(rng, 2, 4)
            p = rand_fin_supported_ef(rng, space, allow_empty=True)
            c = canonical_mediator_cospan(p, p)
            assert verify_cospan(c).ok
            build_span(c)


class TestSupportRelations:
    def test_single_selection(self):
        sels = support_relations(P_A)
        assert len(sels) == 1
        assert sels[0]["s0"] == D2

    def test_padding(self):
        mu = SubProb.of(S3, {"s0": "1/2"})
        p = EffFn(
            S3,
            {
                "s0": UpperSet(S3, (MeasureSet(S3, [mu, D2]),)),
                "s1": UpperSet(S3, (MeasureSet(S3, [ZERO]),)),
                "s2": UpperSet(S3, (MeasureSet(S3, [D2]),)),
            },
        )
        sels = support_relations(p)
        assert len(sels) == 2
        assert sels[0]["s1"] == sels[1]["s1"] == ZERO
        assert {sels[0]["s0"], sels[1]["s0"]} == {mu, D2}

    def test_selections_reassemble_portfolio(self):
        rng = Random(223)
        for _ in range(25):
            space = rand_space(rng, 2, 4)
            p = rand_fin_supported_ef(rng, space)
            sels = support_relations(p)
            for s in space.carrier:
                rebuilt = filter_of(MeasureSet(space, [sels[0][s]]))
                for sel in sels[1:]:
                    rebuilt = intersect(
                        rebuilt, filter_of(MeasureSet(space, [sel[s]]))
                    )
                assert equals(rebuilt, p(s))

    def test_rejects_plural_portfolios(self):
        plural = EffFn(
            S3,
            {
                "s0": UpperSet(
                    S3, (MeasureSet(S3, [D2]), MeasureSet(S3, [ZERO]))
                ),
                "s1": P_A("s1"),
                "s2": P_A("s2"),
            },
        )
        with pytest.raises(NotFinitelySupportedError):
            support_relations(plural)

    def test_rejects_empty_supports(self):
        hollow = EffFn(S3, {s: UpperSet.full(S3) for s in S3.carrier})
        with pytest.raises(NotFinitelySupportedError):
            support_relations(hollow)
