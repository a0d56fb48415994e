"""Tests for the splitting engine: dual lemma, shallow splitting, context reduction and cut elimination."""

from itertools import product

import pytest

from subatomic_kernel.errors import ConfigurationError, GenerationError, SplitError, UnsupportedRuleError
from subatomic_kernel.services.builtin_systems import BUILTIN_DOCUMENTS
from subatomic_kernel.services.derivation_service import (
    Comp,
    Infer,
    Leaf,
    SeqDerivation,
    SeqStep,
    atomize,
    check,
    compose_seq,
    equality_step,
    from_sequential,
    is_proof,
    length_plus,
    sequentialize,
    up_rule_steps,
)
from subatomic_kernel.services.formula import LEFT, RIGHT, App, Const, connectives_along, plug, positions, subterm_at
from subatomic_kernel.services.interpretation_service import is_tame
from subatomic_kernel.services.oracle_service import (
    CorpusSpec,
    SearchConfig,
    SearchStatus,
    cut_detour,
    enumerate_formulae,
    prove,
    random_derivation,
)
from subatomic_kernel.services.splitting_service import (
    context_reduce,
    derive_from_dual,
    eliminate_cut_once,
    eliminate_cuts,
    identity_proof,
    reassemble,
    remove_unit_medials,
    shallow_split,
)
from subatomic_kernel.services.system_service import RuleKind, load_builtin, load_system
from subatomic_kernel.services.theory import equal, negate

DOWN_SYSTEMS = ["samlls.down", "saks.down", "sabvu.down"]


def _seq(sys, start, *steps):
    """A derivation from ``(rule, path, formula text)`` triples."""
    return from_sequential(SeqDerivation(
        sys.parse(start),
        tuple(SeqStep(rule, path, sys.parse(text)) for rule, path, text in steps),
    ))


def _measure(proof, sys):
    return length_plus(atomize(sequentialize(proof), sys), sys)


def _designations(f, plus):
    """Positions of non-plus nodes reachable from the root through plus only."""
    for p in positions(f):
        node = subterm_at(f, p)
        if isinstance(node, App) and node.conn != plus and all(c == plus for c in connectives_along(f, p)):
            yield p


def _assert_split(result, proof, sys):
    check(result.psi, sys)
    check(result.phi1, sys)
    check(result.phi2, sys)
    assert is_proof(result.phi1, sys)
    assert is_proof(result.phi2, sys)
    assert result.phi1.conclusion == App(sys.plus, result.a, result.q1)
    assert result.phi2.conclusion == App(sys.plus, result.b, result.q2)
    assert result.psi.premiss == App(sys.signature.dual(result.alpha), result.q1, result.q2)
    assert equal(result.psi.conclusion, result.c, sys.theory)
    assert length_plus(result.phi1, sys) + length_plus(result.phi2, sys) <= _measure(proof, sys)


@pytest.fixture
def detour(mll_full):
    """A proof of ((one a bot) par (bot a one)) through one atom cut."""
    return _seq(
        mll_full,
        "one",
        ("=", (), "(((bot par one) a (one par bot)) ten ((one par bot) a (bot par one)))"),
        ("atom.down", (LEFT,), "(((bot a one) par (one a bot)) ten ((one par bot) a (bot par one)))"),
        ("atom.down", (RIGHT,), "(((bot a one) par (one a bot)) ten ((one a bot) par (bot a one)))"),
        ("ten.down", (), "(((bot a one) ten (one a bot)) par ((one a bot) par (bot a one)))"),
        ("atom.up", (LEFT,), "(((bot ten one) a (one ten bot)) par ((one a bot) par (bot a one)))"),
        ("=", (), "((one a bot) par (bot a one))"),
    )


class TestDeriveFromDual:
    """Tests for the derivation from the negation of a constant."""

    def test_bot_factor(self, mll):
        phi = Infer(Leaf(Const("one")), "=", Leaf(mll.parse("(bot par one)")))
        d = derive_from_dual(phi, "bot", mll)
        check(d, mll)
        assert d.premiss == Const("one")
        assert d.conclusion == Const("one")

    def test_one_factor(self, mll):
        phi = Infer(Leaf(Const("one")), "=", Leaf(mll.parse("(one par bot)")))
        d = derive_from_dual(phi, "one", mll)
        check(d, mll)
        assert d.premiss == Const("bot")
        assert d.conclusion == Const("bot")

    def test_classical(self, saks):
        """Test the dual lemma on a padded atom proof."""
        phi = _seq(
            saks,
            "t",
            ("=", (), "(f or ((f or t) a (t or f)))"),
            ("atom.down", (RIGHT,), "(f or ((f a t) or (t a f)))"),
        )
        d = derive_from_dual(phi, "f", saks)
        check(d, saks)
        assert d.premiss == Const("t")
        assert d.conclusion == saks.parse("((f a t) or (t a f))")

    def test_missing_factor(self, pi0, mll):
        with pytest.raises(SplitError, match="not of the form"):
            derive_from_dual(pi0, "bot", mll)

    @pytest.mark.slow
    def test_corpus_scale(self):
        """Test the dual lemma on two hundred generated proofs padded with the + unit."""
        for seed in range(200):
            name = DOWN_SYSTEMS[seed % len(DOWN_SYSTEMS)]
            sys = load_builtin(name)
            proof = random_derivation(CorpusSpec(name, seed=seed, max_nodes=11, steps=8), sys)
            c = proof.conclusion
            padded = compose_seq(proof, equality_step(c, App(sys.plus, Const(sys.zero), c)))
            d = derive_from_dual(padded, sys.zero, sys)
            check(d, sys)
            assert d.premiss == Const(sys.signature.negate_constant(sys.zero))
            assert equal(d.conclusion, c, sys.theory)


class TestShallowSplit:
    """Tests for shallow splitting."""

    def test_pi0(self, pi0, mll):
        result = shallow_split(pi0, "a", (LEFT,), mll)
        assert result.a == Const("bot")
        assert result.b == Const("one")
        assert result.c == mll.parse("(one a bot)")
        _assert_split(result, pi0, mll)

    def test_base_case(self, mll):
        phi = Infer(Leaf(Const("one")), "=", Leaf(mll.parse("((one a one) par bot)")))
        trace = []
        result = shallow_split(phi, "a", (LEFT,), mll, trace=trace)
        _assert_split(result, phi, mll)
        assert trace
        assert all(isinstance(case, int) and isinstance(f, str) for case, f in trace)
        assert (result.q1, result.q2) == (Const("bot"), Const("bot"))

    def test_wrong_connective(self, pi0, mll):
        with pytest.raises(SplitError, match="no 'ten' occurrence"):
            shallow_split(pi0, "ten", (LEFT,), mll)

    def test_occurrence_under_strong_connective(self, pi0, mll):
        proof = compose_seq(
            pi0,
            equality_step(pi0.conclusion, mll.parse("((((bot a one) par (one a bot)) ten one) par bot)")),
        )
        with pytest.raises(SplitError, match="under 'ten'"):
            shallow_split(proof, "a", (LEFT, LEFT, LEFT), mll)

    def test_rejects_non_proof(self, mll):
        d = Leaf(mll.parse("((bot a one) par (one a bot))"))
        with pytest.raises(SplitError, match="premiss"):
            shallow_split(d, "a", (LEFT,), mll)

    def test_rejects_unsplittable_system(self, pi0):
        doc = BUILTIN_DOCUMENTS["sabvu.down"].replace("assign par o o = one\n", "")
        with pytest.raises(ConfigurationError):
            shallow_split(pi0, "a", (LEFT,), load_system(doc))

    def test_long_commutation_chain(self, mll):
        """Test a split below more commuting steps than the interpreter stack holds frames."""
        forms = ["(((one ten one) ten bot) par one)", "((bot ten (one ten one)) par one)"]
        steps = [("=comm.ten", (LEFT,), forms[(i + 1) % 2]) for i in range(1500)]
        proof = _seq(mll, "one", ("=", (), forms[0]), *steps)
        result = shallow_split(proof, "ten", (LEFT,), mll)
        _assert_split(result, proof, mll)
        assert result.c == Const("one")

    @pytest.mark.parametrize("name", ["samlls.down", "saks.down", "sabvu.down"])
    @pytest.mark.parametrize("seed", range(4))
    def test_generated_proofs(self, name, seed):
        sys = load_builtin(name)
        proof = random_derivation(CorpusSpec(name, seed=seed, max_nodes=11, steps=8), sys)
        for d in list(_designations(proof.conclusion, sys.plus))[:3]:
            node = subterm_at(proof.conclusion, d)
            _assert_split(shallow_split(proof, node.conn, d, sys), proof, sys)

    @pytest.mark.slow
    def test_corpus_scale(self):
        """Test five hundred splits at every designation of generated proofs."""
        count, seed = 0, 0
        while count < 500:
            name = DOWN_SYSTEMS[seed % len(DOWN_SYSTEMS)]
            sys = load_builtin(name)
            proof = random_derivation(CorpusSpec(name, seed=seed, max_nodes=11, steps=8), sys)
            for d in _designations(proof.conclusion, sys.plus):
                node = subterm_at(proof.conclusion, d)
                _assert_split(shallow_split(proof, node.conn, d, sys), proof, sys)
                count += 1
            seed += 1


class TestContextReduce:
    """Tests for context reduction."""

    def test_hole_context(self, pi0, mll):
        result = context_reduce(pi0, (), mll)
        assert result.k == Const("bot")
        assert result.h.hole_path == ()
        check(result.zeta, mll)
        proof = reassemble(result)
        check(proof, mll)
        assert proof.conclusion == pi0.conclusion

    def test_strong_context(self, pi0, mll):
        target = mll.parse("(((bot a one) ten one) par (one a bot))")
        proof = compose_seq(pi0, equality_step(pi0.conclusion, target))
        result = context_reduce(proof, (LEFT, LEFT), mll)
        assert equal(plug(result.h, Const("one")), Const("one"), mll.theory)
        check(result.zeta, mll)
        assert is_proof(result.zeta, mll)
        assert result.zeta.conclusion == App("par", result.a, result.k)
        rebuilt = reassemble(result)
        check(rebuilt, mll)
        assert rebuilt.conclusion == target

    def test_chi_accepts_other_fillers(self, pi0, mll):
        result = context_reduce(pi0, (LEFT,), mll)
        chi = result.chi(Const("one"))
        check(chi, mll)
        assert chi.conclusion == mll.parse("(one par (one a bot))")

    def test_reassemble_rejects_wrong_filler(self, pi0, mll):
        result = context_reduce(pi0, (), mll)
        assert reassemble(result, result.zeta) == reassemble(result)
        with pytest.raises(SplitError, match="filler must conclude"):
            reassemble(result, pi0)

    def test_filler_must_end_in_k(self, pi0, mll):
        result = context_reduce(pi0, (), mll)
        with pytest.raises(SplitError, match="filler"):
            result.fill(pi0)

    @pytest.mark.slow
    def test_corpus_scale(self):
        """Test three hundred reductions at every position of generated conclusions."""
        count, seed = 0, 0
        while count < 300:
            name = DOWN_SYSTEMS[seed % len(DOWN_SYSTEMS)]
            sys = load_builtin(name)
            one = Const(sys.one)
            proof = random_derivation(CorpusSpec(name, seed=seed, max_nodes=11, steps=8), sys)
            for h in positions(proof.conclusion):
                result = context_reduce(proof, h, sys)
                assert result.a == subterm_at(proof.conclusion, h)
                check(result.zeta, sys)
                assert is_proof(result.zeta, sys)
                assert result.zeta.conclusion == App(sys.plus, result.a, result.k)
                assert equal(plug(result.h, one), one, sys.theory)
                rebuilt = reassemble(result)
                check(rebuilt, sys)
                assert rebuilt.conclusion == proof.conclusion
                count += 1
            seed += 1


class TestCutElimination:
    """Tests for cut elimination."""

    def test_detour_checks(self, detour, mll_full):
        check(detour, mll_full)
        assert up_rule_steps(detour, mll_full) == [4]

    def test_single_cut(self, detour, mll_full):
        out = eliminate_cut_once(detour, mll_full)
        check(out, mll_full)
        assert up_rule_steps(out, mll_full) == []
        assert out.conclusion == detour.conclusion
        assert is_proof(out, mll_full)

    def test_loop_matches_single(self, detour, mll_full):
        out = eliminate_cuts(detour, mll_full)
        assert out == eliminate_cut_once(detour, mll_full)

    def test_no_cuts_unchanged(self, pi0, mll_full):
        assert eliminate_cuts(pi0, mll_full) is pi0

    def test_designated_step_must_be_up(self, detour, mll_full):
        with pytest.raises(SplitError, match="not an up-rule"):
            eliminate_cut_once(detour, mll_full, index=3)

    def test_non_cut_up_rule(self):
        sys = load_system(BUILTIN_DOCUMENTS["samlls.down"] + "rule odd up alpha=par beta=ten\n")
        proof = _seq(
            sys,
            "one",
            ("=", (), "((one ten one) par (bot ten one))"),
            ("odd", (), "((one par bot) ten (one par one))"),
        )
        check(proof, sys)
        with pytest.raises(UnsupportedRuleError):
            eliminate_cuts(proof, sys)

    @pytest.mark.parametrize("name", ["samlls", "saks", "sabvu"])
    @pytest.mark.parametrize("seed", range(3))
    def test_generated_cuts(self, name, seed):
        sys = load_builtin(name)
        proof = random_derivation(CorpusSpec(name, seed=seed, max_nodes=9, steps=6, cuts=1), sys)
        assert len(up_rule_steps(proof, sys)) == 1
        out = eliminate_cuts(proof, sys)
        check(out, sys)
        assert up_rule_steps(out, sys) == []
        assert out.conclusion == proof.conclusion

    def test_two_stacked_cuts(self, mll_full):
        proof = random_derivation(CorpusSpec("samlls", seed=7, max_nodes=7, steps=4, cuts=2), mll_full)
        assert len(up_rule_steps(proof, mll_full)) == 2
        out = eliminate_cuts(proof, mll_full)
        check(out, mll_full)
        assert up_rule_steps(out, mll_full) == []
        assert out.conclusion == proof.conclusion

    @pytest.mark.slow
    @pytest.mark.parametrize("name", ["samlls", "saks", "sabvu"])
    def test_corpus_scale(self, name):
        sys = load_builtin(name)
        for seed in range(25):
            proof = random_derivation(CorpusSpec(name, seed=seed, max_nodes=15, cuts=1 + seed % 2), sys)
            out = eliminate_cuts(proof, sys)
            check(out, sys)
            assert up_rule_steps(out, sys) == []
            assert out.conclusion == proof.conclusion

    @pytest.mark.slow
    @pytest.mark.parametrize("name", ["samlls", "saks", "sabvu"])
    def test_cut_admissible_on_generated_cuts(self, name):
        """Test every generated proof with a cut has a proof in the down fragment."""
        sys, down = load_builtin(name), load_builtin(f"{name}.down")
        cfg = SearchConfig(depth=3, budget=2000)
        for seed in range(40):
            proof = random_derivation(CorpusSpec(name, seed=seed, max_nodes=7, steps=4, cuts=1), sys)
            assert len(up_rule_steps(proof, sys)) == 1
            out = eliminate_cuts(proof, sys)
            check(out, down)
            assert is_proof(out, down)
            assert out.conclusion == proof.conclusion
            searched = prove(proof.conclusion, down, cfg)
            assert searched.status != SearchStatus.UNPROVABLE
            if searched.found:
                check(searched.proof, sys)

    @pytest.mark.slow
    @pytest.mark.parametrize("name", ["samlls", "saks", "sabvu"])
    def test_cut_admissible_on_small_formulae(self, name):
        """Test search with and without up-rules agrees on small formulae."""
        sys, down = load_builtin(name), load_builtin(f"{name}.down")
        ups = {r.name for r in sys.rules if r.kind == RuleKind.UP}
        cfg = SearchConfig(depth=3, budget=2000)
        for f in enumerate_formulae(down, 5, atoms=1):
            with_cuts = prove(f, sys, cfg)
            without = prove(f, down, cfg)
            if with_cuts.found:
                assert without.status != SearchStatus.UNPROVABLE
                if all(down.has_rule(s.rule) or s.rule in ups for s in sequentialize(with_cuts.proof).steps):
                    out = eliminate_cuts(with_cuts.proof, sys)
                    check(out, down)
                    assert out.conclusion == f
            if without.found:
                check(without.proof, sys)
                assert with_cuts.status != SearchStatus.UNPROVABLE

    @pytest.mark.slow
    @pytest.mark.parametrize("name", ["samlls", "saks", "sabvu"])
    def test_tame_proofs_stay_tame(self, name):
        """Test cuts on non-atom formulae are eliminated without leaving the tame fragment."""
        sys = load_builtin(name)
        sig = sys.signature
        one = Const(sys.one)
        pairs = list(product(sig.constants, repeat=2))
        bodies = [Leaf(one)] + [identity_proof(App("a", Const(u), Const(v)), sys) for u, v in pairs]
        count = 0
        for conn in sig.connectives:
            if sig.is_atom(conn):
                continue
            for u, v in pairs:
                try:
                    detour = cut_detour(App(conn, Const(u), Const(v)), sys)
                except GenerationError:
                    continue
                for body in bodies:
                    inner = Comp(sys.times, detour, body)
                    proof = compose_seq(equality_step(one, inner.premiss), inner)
                    assert is_tame(proof, sys)
                    out = eliminate_cuts(proof, sys)
                    check(out, sys)
                    assert up_rule_steps(out, sys) == []
                    assert is_tame(out, sys)
                    count += 1
        assert count > 0

    @pytest.mark.slow
    def test_atom_cut_tame_after_unit_medials(self, saks_full):
        """Test an eliminated atom cut is tame once unit medials become equalities."""
        one = Const("t")
        body = identity_proof(saks_full.parse("(f a t)"), saks_full)
        for u, v in product(["f", "t"], repeat=2):
            inner = Comp("and", cut_detour(App("a", Const(u), Const(v)), saks_full), body)
            proof = compose_seq(equality_step(one, inner.premiss), inner)
            assert is_tame(proof, saks_full)
            out = remove_unit_medials(eliminate_cuts(proof, saks_full), saks_full)
            check(out, saks_full)
            assert out.conclusion == proof.conclusion
            assert is_tame(out, saks_full)


class TestUnitMedials:
    """Tests for replacing unit medial steps by equalities."""

    def test_unit_medial_becomes_equality(self, saks):
        d = _seq(
            saks,
            "t",
            ("=", (), "((t or f) and (t or f))"),
            ("and.down", (), "((t and t) or (f or f))"),
        )
        check(d, saks)
        out = remove_unit_medials(d, saks)
        check(out, saks)
        assert [step.rule for step in sequentialize(out).steps] == ["=", "="]
        assert out.conclusion == d.conclusion

    def test_deep_unit_medial(self, saks):
        d = _seq(
            saks,
            "((f a t) or t)",
            ("=", (), "((f a t) or ((t or f) and (t or f)))"),
            ("and.down", (RIGHT,), "((f a t) or ((t and t) or (f or f)))"),
        )
        out = remove_unit_medials(d, saks)
        steps = sequentialize(out).steps
        assert [(step.rule, step.path) for step in steps] == [("=", ()), ("=", (RIGHT,))]

    def test_proper_steps_kept(self, pi0, mll):
        assert remove_unit_medials(pi0, mll) is pi0


class TestIdentity:
    """Tests for identity proofs."""

    @pytest.mark.parametrize("text", ["(bot a one)", "((bot a one) ten one)", "((one a bot) par (bot ten (bot a bot)))"])
    def test_identity(self, mll, text):
        a = mll.parse(text)
        proof = identity_proof(a, mll)
        check(proof, mll)
        assert is_proof(proof, mll)
        assert proof.conclusion == App("par", a, negate(a, mll.signature))
