"""Tests for natural interpretations into ordinary deep-inference systems."""

import random

import pytest

from subatomic_kernel.errors import NotInterpretable, ParseError, SignatureError, TranslationError
from subatomic_kernel.services.derivation_service import Comp, Infer, Leaf, SeqDerivation, SeqStep, check
from subatomic_kernel.services.formula import App, Const, render_formula
from subatomic_kernel.services.interpretation_service import (
    ORDINARY_SYSTEMS,
    InterpretationMap,
    OAtom,
    audit_preservable,
    builtin_map,
    builtin_map_names,
    check_ordinary,
    export_ordinary,
    interpret_derivation,
    interpret_formula,
    is_interpretable,
    is_tame,
    map_for_system,
    negate_ordinary,
    parse_ordinary_derivation,
    random_ordinary_formula,
    represent_derivation,
    represent_formula,
    render_ordinary,
)

SWITCH = """\
seq smlls
start one
step ai.down @. (a par ~a)
step = @. ((a par ~a) ten one)
step s @. ((a ten one) par ~a)
"""


@pytest.fixture
def mll_map():
    return builtin_map("mll")


class TestMaps:
    """Tests for the built-in interpretation maps."""

    def test_names(self):
        assert builtin_map_names() == ["bv", "classical", "mll"]

    def test_unknown_map(self):
        with pytest.raises(SignatureError, match="unknown interpretation map"):
            builtin_map("lk")

    def test_map_for_system(self):
        assert map_for_system("samlls.down").name == "mll"
        assert map_for_system("saks").name == "classical"

    @pytest.mark.parametrize("name", ["classical", "mll", "bv"])
    def test_builtin_maps_are_natural(self, name):
        assert builtin_map(name).naturality_problems() == []

    def test_equal_units_not_natural(self, mll_full):
        m = InterpretationMap("broken", mll_full, ORDINARY_SYSTEMS["smlls"], "one", "one")
        assert "u1 and u2 are both 'one'" in m.naturality_problems()


class TestInterpretFormula:
    """Tests for reading subatomic formulae as ordinary ones."""

    def test_positive_atom(self, mll_map, mll):
        assert interpret_formula(mll.parse("(bot a one)"), mll_map) == OAtom("a")

    def test_negative_atom(self, mll_map, mll):
        assert interpret_formula(mll.parse("(one a bot)"), mll_map) == OAtom("a", False)

    def test_classical_atom(self, saks):
        assert interpret_formula(saks.parse("(f a t)"), builtin_map("classical")) == OAtom("a")

    def test_folded_atom(self, saks):
        """Test atoms over equal units read as the unit."""
        assert interpret_formula(saks.parse("(f a f)"), builtin_map("classical")) == Const("f")

    def test_connectives_kept(self, mll_map, mll):
        image = interpret_formula(mll.parse("((bot a one) par (one a bot))"), mll_map)
        assert render_ordinary(image) == "(a par ~a)"

    def test_not_interpretable_reports_path(self, mll_map, mll):
        with pytest.raises(NotInterpretable) as exc:
            interpret_formula(mll.parse("(one ten (bot a (bot a one)))"), mll_map)
        assert exc.value.path == "r"
        assert not is_interpretable(mll.parse("(one ten (bot a (bot a one)))"), mll_map)

    def test_represent_inverts(self, mll_map, mll):
        f = mll.parse("((bot a one) ten (one a bot))")
        assert represent_formula(interpret_formula(f, mll_map), mll_map) == f

    def test_negation_commutes(self, mll_map):
        g = mll_map.parse("((a ten ~b) par one)")
        assert render_ordinary(negate_ordinary(g, mll_map)) == "((~a par b) ten bot)"

    def test_classical_example(self, saks):
        f = saks.parse("((((f and t) a t) or t) and (t b f))")
        assert render_ordinary(interpret_formula(f, builtin_map("classical"))) == "((a or t) and ~b)"

    @pytest.mark.parametrize("text", ["(((t b f) and t) a f)"])
    def test_classical_not_interpretable(self, saks, text):
        with pytest.raises(NotInterpretable) as exc:
            interpret_formula(saks.parse(text), builtin_map("classical"))
        assert exc.value.path == "."

    def test_mll_examples(self, mll_map, mll):
        assert render_ordinary(interpret_formula(mll.parse("(((bot par bot) a one) ten bot)"), mll_map)) == "(a ten bot)"
        assert not is_interpretable(mll.parse("((one par one) a bot)"), mll_map)

    def test_represent_classical(self):
        m = builtin_map("classical")
        assert render_formula(represent_formula(m.parse("(a or t)"), m)) == "((f a t) or t)"

    @pytest.mark.parametrize("name", ["classical", "mll", "bv"])
    def test_round_trip_random(self, name):
        m = builtin_map(name)
        rng = random.Random(0)
        for _ in range(200):
            g = random_ordinary_formula(m, rng)
            assert interpret_formula(represent_formula(g, m), m) == g

    def test_ordinary_parse_rejects_undeclared(self, mll_map):
        with pytest.raises(SignatureError):
            mll_map.parse("(a and b)")


class TestTameness:
    """Tests for the tameness check."""

    def test_pi0_is_tame(self, pi0, mll):
        assert is_tame(pi0, mll)

    def test_step_under_atom(self, pi0, mll):
        d = Comp("a", pi0, Leaf(Const("one")))
        assert not is_tame(d, mll)

    def test_equality_under_atom_is_tame(self, mll):
        step = Infer(Leaf(Const("one")), "=", Leaf(mll.parse("(bot par one)")))
        assert is_tame(Comp("a", step, Leaf(Const("bot"))), mll)

    def test_interpret_rejects_wild(self, pi0, mll_map):
        with pytest.raises(TranslationError, match="not tame"):
            interpret_derivation(Comp("a", pi0, Leaf(Const("one"))), mll_map)


class TestDerivations:
    """Tests for translating derivations in both directions."""

    def test_interpret_pi0(self, pi0, mll_map):
        out = interpret_derivation(pi0, mll_map)
        assert export_ordinary(out, mll_map) == "seq smlls\nstart one\nstep ai.down @. (a par ~a)\n"

    def test_represent_identity(self, mll_map):
        d = parse_ordinary_derivation("seq smlls\nstart one\nstep ai.down @. (a par ~a)\n", mll_map)
        proof = represent_derivation(d, mll_map)
        check(proof, mll_map.system)
        assert is_tame(proof, mll_map.system)
        assert proof.premiss == Const("one")
        assert proof.conclusion == App("par", App("a", Const("bot"), Const("one")), App("a", Const("one"), Const("bot")))

    def test_switch_round_trip(self, mll_map):
        """Test a switch step survives representation and interpretation."""
        d = parse_ordinary_derivation(SWITCH, mll_map)
        proof = represent_derivation(d, mll_map)
        check(proof, mll_map.system)
        assert is_tame(proof, mll_map.system)
        back = interpret_derivation(proof, mll_map)
        assert back.start == d.start
        assert back.conclusion == d.conclusion

    def test_export_parse(self, mll_map):
        d = parse_ordinary_derivation(SWITCH, mll_map)
        assert export_ordinary(d, mll_map) == SWITCH

    def test_wrong_target(self, mll_map):
        with pytest.raises(ParseError, match="expected 'smlls'"):
            parse_ordinary_derivation("seq sks.linear\nstart one\n", mll_map)

    def test_invalid_ordinary_step(self, mll_map):
        d = SeqDerivation(Const("one"), (SeqStep("s", (), mll_map.parse("(a par ~a)")),))
        with pytest.raises(TranslationError, match="step 0"):
            check_ordinary(d, mll_map)

    def test_unknown_ordinary_rule(self, mll_map):
        d = SeqDerivation(Const("one"), (SeqStep("mix", (), mll_map.parse("(a par ~a)")),))
        with pytest.raises(TranslationError):
            represent_derivation(d, mll_map)

    def test_deep_step_path(self, mll_map):
        d = parse_ordinary_derivation(
            "seq smlls\nstart (one ten one)\nstep ai.down @r (one ten (a par ~a))\n", mll_map
        )
        proof = represent_derivation(d, mll_map)
        check(proof, mll_map.system)
        assert proof.conclusion.right == represent_formula(mll_map.parse("(a par ~a)"), mll_map)


class TestPreservability:
    """Tests for the sampled preservability audit."""

    def test_report_shape(self, mll_map):
        report = audit_preservable(mll_map.system, mll_map, budget=30, seed=1)
        data = report.to_dict()
        assert data["map"] == "mll"
        assert data["samples"] == 30
        assert [c["condition"] for c in data["conditions"]] == [1, 2, 3, 4, 5]
        assert report.conditions[4].passed

    def test_broken_map_fails_naturality(self, mll_full):
        m = InterpretationMap("broken", mll_full, ORDINARY_SYSTEMS["smlls"], "one", "one")
        report = audit_preservable(mll_full, m, budget=5, seed=0)
        assert not report.passed
        assert report.conditions[3].witness.startswith("u1 and u2")
        assert "counterexamples found" in report.render()
