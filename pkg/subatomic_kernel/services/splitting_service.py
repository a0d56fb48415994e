"""The splitting pipeline for splittable subatomic systems.

Shallow splitting takes a proof of ``(A a B) + C`` and produces formulas
``Q1``, ``Q2`` with proofs of ``A + Q1`` and ``B + Q2`` and a derivation from
``Q1 a~ Q2`` to ``C`` (``a~`` the dual of ``a``). The proof is first flattened
into a chain of single inferences and single-axiom equalities, then peeled
from the bottom: steps away from the designated ``a``-node are replayed into
the witnesses, and the step that builds the node decides the construction.

Context reduction applies shallow splitting along the non-``+`` ancestors
of a designated occurrence; cut elimination combines both.

Every construction follows the measure: for each shallow split,
``|phi1|+ + |phi2|+ <= |phi|+`` where ``phi`` is measured on its
single-axiom chain.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Generator, Optional, Union

from subatomic_kernel.errors import SplitError, UnsupportedRuleError
from subatomic_kernel.services.derivation_service import (
    Comp,
    Derivation,
    Infer,
    Leaf,
    SeqDerivation,
    SeqStep,
    axiom_rule_name,
    compose_seq,
    equality_step,
    from_sequential,
    length_plus,
    plug_derivation,
    render_derivation,
    sequentialize,
    step_cost,
    step_derivation,
    up_rule_steps,
)
from subatomic_kernel.services.formula import (
    IDENTITY_CONTEXT,
    LEFT,
    RIGHT,
    App,
    Const,
    Formula,
    FormulaContext,
    Path,
    connectives_along,
    first_difference,
    is_prefix,
    plug,
    render_formula,
    render_path,
    replace_at,
    subterm_at,
)
from subatomic_kernel.services.system_service import (
    ATOM_FAMILY,
    EQUALITY,
    RuleKind,
    RuleScheme,
    SystemDef,
    is_cut,
    require_splittable,
)
from subatomic_kernel.services.theory import (
    FULL,
    PLUS_ONLY,
    Axiom,
    AxiomKind,
    Move,
    apply_move,
    equal,
    equality_moves,
    negate,
)

logger = logging.getLogger(__name__)

BASE_CASE = 0


@dataclass
class SplitResult:
    """Witnesses of a shallow split of a proof of ``(A alpha B) + C``."""

    alpha: str
    a: Formula
    b: Formula
    c: Formula
    q1: Formula
    q2: Formula
    psi: Derivation
    phi1: Derivation
    phi2: Derivation

    def to_dict(self, sys: Optional[SystemDef] = None) -> dict[str, Any]:
        out: dict[str, Any] = {
            "alpha": self.alpha,
            "a": render_formula(self.a),
            "b": render_formula(self.b),
            "c": render_formula(self.c),
            "q1": render_formula(self.q1),
            "q2": render_formula(self.q2),
            "psi": render_derivation(self.psi),
            "phi1": render_derivation(self.phi1),
            "phi2": render_derivation(self.phi2),
        }
        if sys is not None:
            out["length_phi1"] = length_plus(self.phi1, sys)
            out["length_phi2"] = length_plus(self.phi2, sys)
        return out


# A case that needs the split of the chain above it: yields ``(k, d)`` and is
# resumed with that split.
_Case = Generator[tuple[int, Path], SplitResult, SplitResult]


@dataclass
class ContextReductionResult:
    """``K``, the provable context ``H``, ``zeta`` proving ``A + K`` and the builder of ``chi``.

    ``chi(X)`` is the derivation from ``H{X + K}`` to ``S{X}``.
    """

    a: Formula
    k: Formula
    h: FormulaContext
    zeta: Derivation
    chi: Callable[[Formula], Derivation] = field(repr=False)
    plus: str = "+"

    def fill(self, rho: Derivation) -> Derivation:
        """``H{rho} ; chi(X)`` for a proof ``rho`` of ``X + K``."""
        end = rho.conclusion
        if not (isinstance(end, App) and end.conn == self.plus and end.right == self.k):
            raise SplitError(f"filler must conclude X {self.plus} {render_formula(self.k)}")
        return compose_seq(plug_derivation(self.h, rho), self.chi(end.left))

    def to_dict(self) -> dict[str, Any]:
        return {
            "a": render_formula(self.a),
            "k": render_formula(self.k),
            "h": render_formula(self.h.tree),
            "zeta": render_derivation(self.zeta),
            "chi": render_derivation(self.chi(self.a)),
        }


# ---------------------------------------------------------------------------
# Chains of single steps
# ---------------------------------------------------------------------------

class _Chain:
    """A proof as formulas ``F0 .. Fn`` joined by single inferences or single axioms."""

    def __init__(self, engine: "SplittingEngine", proof: Derivation):
        system = engine.system
        s = sequentialize(proof)
        self.formulas: list[Formula] = [s.start]
        self.steps: list[SeqStep] = []
        self.axioms: list[Optional[Axiom]] = []
        self._prefixes: dict[int, Derivation] = {}
        for before, step, after in s.transitions():
            if not system.has_rule(step.rule):
                raise SplitError(f"rule {step.rule} is outside the splittable fragment of {system.name}")
            rule = system.rule(step.rule)
            if rule.kind == RuleKind.UP:
                raise SplitError(f"up-rule {rule.name} in a proof given to the splitting engine")
            if rule.kind == RuleKind.DOWN and rule.alpha != engine.plus:
                self._push(step, None)
            elif rule.kind == RuleKind.EQUALITY and rule.axiom is not None:
                self._push(step, rule.axiom)
            else:
                self._push_moves(engine, before, step, after)

    def _push(self, step: SeqStep, axiom: Optional[Axiom]) -> None:
        self.steps.append(step)
        self.axioms.append(axiom)
        self.formulas.append(step.result)

    def _push_moves(self, engine: "SplittingEngine", before: Formula, step: SeqStep, after: Formula) -> None:
        moves = equality_moves(subterm_at(before, step.path), subterm_at(after, step.path), engine.theory)
        cur = before
        for move in moves:
            moved = Move(move.axiom, step.path + move.path)
            cur = apply_move(cur, moved)
            self._push(SeqStep(axiom_rule_name(move.axiom, engine.system), moved.path, cur), move.axiom)
        if cur != after:
            raise SplitError("equality step could not be decomposed into axioms")

    def prefix(self, k: int) -> Derivation:
        """The proof ``F0 .. Fk``."""
        found = self._prefixes.get(k)
        if found is None:
            found = from_sequential(SeqDerivation(self.formulas[0], tuple(self.steps[:k])))
            self._prefixes[k] = found
        return found


# ---------------------------------------------------------------------------
# Engine
# ---------------------------------------------------------------------------

class SplittingEngine:
    """Splitting constructions over the down fragment of a splittable system."""

    def __init__(self, sys: SystemDef, trace: Optional[list[tuple[int, str]]] = None):
        self.full = sys
        self.system = require_splittable(sys)
        self.sig = self.system.signature
        self.theory = self.system.theory
        self.times, self.plus, self.one_const, self.zero_const = self.system.require_plus()
        self.one = Const(self.system.one)
        self.zero = Const(self.zero_const)
        self.trace = trace
        self._down: dict[str, RuleScheme] = {}

    # -- small helpers --------------------------------------------------------

    def _note(self, case: int, f: Formula) -> None:
        logger.debug("case %s: %s", case, render_formula(f))
        if self.trace is not None:
            self.trace.append((case, render_formula(f)))

    def P(self, x: Formula, y: Formula) -> Formula:
        return App(self.plus, x, y)

    def neg(self, c: str) -> Const:
        return Const(self.sig.negate_constant(c))

    def down_rule(self, conn: str) -> RuleScheme:
        found = self._down.get(conn)
        if found is None:
            for rule in self.system.rules:
                if rule.kind != RuleKind.DOWN or rule.beta != self.plus:
                    continue
                if rule.alpha == conn or (rule.alpha == ATOM_FAMILY and self.sig.is_atom(conn)):
                    found = rule
                    break
            if found is None:
                raise SplitError(f"no down-rule for {conn!r} over {self.plus!r}")
            self._down[conn] = found
        return found

    def rest(self, f: Formula, d: Path) -> Formula:
        """``f`` without the +-factor at ``d``; the + unit when ``d`` is the root."""
        if not d:
            return self.zero
        parent = subterm_at(f, d[:-1])
        return replace_at(f, d[:-1], parent.right if d[-1] == LEFT else parent.left)

    def glue(self, d: Derivation, target: Formula) -> Derivation:
        return compose_seq(d, equality_step(d.conclusion, target))

    def chain(self, *parts: Derivation) -> Derivation:
        """Compose, joining mismatched endpoints by equality steps."""
        result = parts[0]
        for part in parts[1:]:
            if result.conclusion != part.premiss:
                result = self.glue(result, part.premiss)
            result = compose_seq(result, part)
        return result

    def distribute(self, delta: str, x1: Formula, y1: Formula, x2: Formula, y2: Formula) -> Derivation:
        """From ``((x1 + y1) d (x2 + y2))`` to ``((x1 d x2) + (y1 d' y2))``, ``d'`` the weak member of ``d``."""
        src = App(delta, self.P(x1, y1), self.P(x2, y2))
        if delta == self.plus:
            return equality_step(src, self.P(self.P(x1, x2), self.P(y1, y2)))
        out = self.P(App(delta, x1, x2), App(self.sig.weak(delta), y1, y2))
        return Infer(Leaf(src), self.down_rule(delta).name, Leaf(out))

    def medial(self, delta: str, x1: Formula, y1: Formula, x2: Formula, y2: Formula,
               cx: str, cy: str) -> Derivation:
        """From ``((x1 + y1) d (x2 + y2))`` to ``((x1 cx x2) + (y1 cy y2))`` by one ``d``-down step."""
        weak = self.sig.weak(delta)
        src = App(delta, self.P(x1, y1), self.P(x2, y2))
        if (delta, weak) == (cx, cy):
            return self.distribute(delta, x1, y1, x2, y2)
        if (delta, weak) == (cy, cx):
            swapped = self.distribute(delta, y1, x1, y2, x2)
            target = self.P(App(cx, x1, x2), App(cy, y1, y2))
            return self.chain(equality_step(src, swapped.premiss), swapped, Leaf(target))
        raise SplitError(f"no {delta}-down arrangement yields {cx} and {cy}")

    def pair(self, alpha: str, pi1: Derivation, p1: Formula, r1: Formula,
             pi2: Derivation, p2: Formula, r2: Formula) -> Derivation:
        """From proofs of ``p1 + r1`` and ``p2 + r2``, a proof of ``(p1 a p2) + (r1 a~ r2)``."""
        gamma = self.sig.strong(alpha)
        left = self.glue(pi1, self.P(p1, r1))
        right = self.glue(pi2, self.P(p2, r2))
        return compose_seq(
            Comp(gamma, left, right),
            self.medial(gamma, p1, r1, p2, r2, alpha, self.sig.dual(alpha)),
        )

    # -- dual lemma -----------------------------------------------------------

    def dual(self, proof: Derivation, u: str, c: Formula) -> Derivation:
        """From a proof of ``u + c``, a derivation from the negation of ``u`` to ``c``."""
        proof = self.glue(proof, self.P(Const(u), c))
        ubar = self.neg(u)
        padded = self.P(ubar, self.zero)
        return self.chain(
            equality_step(ubar, App(self.times, padded, proof.premiss)),
            Comp(self.times, Leaf(padded), proof),
            self.distribute(self.times, ubar, self.zero, Const(u), c),
            Leaf(c),
        )

    # -- shallow splitting ----------------------------------------------------

    def check_designation(self, f: Formula, d: Path) -> str:
        try:
            node = subterm_at(f, d)
        except ValueError as e:
            raise SplitError(str(e)) from e
        if not isinstance(node, App) or node.conn == self.plus:
            raise SplitError(f"no non-{self.plus} connective at {render_path(d)}")
        bad = [c for c in connectives_along(f, d) if c != self.plus]
        if bad:
            raise SplitError(f"occurrence at {render_path(d)} is under {bad[0]!r}, not only {self.plus!r}")
        return node.conn

    def split(self, proof: Derivation, d: Path) -> SplitResult:
        """Shallow splitting of ``proof`` at the designated occurrence ``d``."""
        if not equal(proof.premiss, self.one, self.theory):
            raise SplitError(f"premiss {render_formula(proof.premiss)} is not {self.one}")
        return self._split_proof(proof, d)

    def _split_chain(self, chain: _Chain, k: int, d: Path) -> SplitResult:
        """Split ``F0 .. Fk`` at ``d``; cases waiting on the split above them sit on a work stack."""
        pending: list[tuple[_Case, tuple[Derivation, ...]]] = []
        outcome, tails = self._peel(chain, k, d)
        while True:
            if isinstance(outcome, SplitResult):
                piece = self._extend(outcome, *tails)
                if not pending:
                    return piece
                case, tails = pending.pop()
                sent: Optional[SplitResult] = piece
            else:
                case, sent = outcome, None
            try:
                k, d = case.send(sent)
            except StopIteration as done:
                outcome = done.value
                continue
            pending.append((case, tails))
            outcome, tails = self._peel(chain, k, d)

    def _peel(self, chain: _Chain, k: int, d: Path) -> tuple[Union[SplitResult, _Case], tuple[Derivation, ...]]:
        """Replay steps from ``k`` upwards until one decides the construction."""
        f = chain.formulas[k]
        node = subterm_at(f, d)
        psi_tail: Derivation = Leaf(self.rest(f, d))
        a_tail: Derivation = Leaf(node.left)
        b_tail: Derivation = Leaf(node.right)
        while True:
            if k == 0:
                piece = self._base(chain.formulas[0], d)
                break
            before, after = chain.formulas[k - 1], chain.formulas[k]
            step, axiom = chain.steps[k - 1], chain.axioms[k - 1]
            p = step.path
            if not is_prefix(p, d) and not is_prefix(d, p):
                replay = step_derivation(self.rest(before, d), _rest_path(p, d), step.rule, subterm_at(after, p))
                psi_tail = compose_seq(replay, psi_tail)
                self._note(1, after)
            elif is_prefix(d, p) and len(p) > len(d):
                side = p[len(d)]
                part = subterm_at(before, d + (side,))
                inner = step_derivation(part, p[len(d) + 1:], step.rule, subterm_at(after, p))
                if side == LEFT:
                    a_tail = compose_seq(inner, a_tail)
                    self._note(5, after)
                else:
                    b_tail = compose_seq(inner, b_tail)
                    self._note(6, after)
            elif axiom is not None and self.theory.is_plus_axiom(axiom):
                d_before = _transport(axiom, p, d)
                psi_tail = compose_seq(equality_step(self.rest(before, d_before), self.rest(after, d)), psi_tail)
                d = d_before
            else:
                piece = self._bottom_case(chain, k, d, step, axiom)
                break
            k -= 1
        return piece, (psi_tail, a_tail, b_tail)

    def _extend(self, piece: SplitResult, psi_tail: Derivation, a_tail: Derivation, b_tail: Derivation) -> SplitResult:
        psi, phi1, phi2 = piece.psi, piece.phi1, piece.phi2
        if not isinstance(psi_tail, Leaf):
            psi = compose_seq(psi, psi_tail)
        if not isinstance(a_tail, Leaf):
            phi1 = compose_seq(phi1, Comp(self.plus, a_tail, Leaf(piece.q1)))
        if not isinstance(b_tail, Leaf):
            phi2 = compose_seq(phi2, Comp(self.plus, b_tail, Leaf(piece.q2)))
        return SplitResult(piece.alpha, a_tail.conclusion, b_tail.conclusion, psi_tail.conclusion,
                           piece.q1, piece.q2, psi, phi1, phi2)

    def _finish(self, piece: SplitResult, alpha: str, a: Formula, b: Formula, c: Formula) -> SplitResult:
        canon = self.theory.canonicalizer(PLUS_ONLY)
        q1, q2 = canon.canonical(piece.q1), canon.canonical(piece.q2)
        dual = self.sig.dual(alpha)
        psi = compose_seq(equality_step(App(dual, q1, q2), App(dual, piece.q1, piece.q2)), piece.psi)
        phi1 = self.glue(piece.phi1, self.P(a, q1))
        phi2 = self.glue(piece.phi2, self.P(b, q2))
        return SplitResult(
            alpha, a, b, c, q1, q2,
            self.compress(psi, proof=False),
            self.compress(phi1, proof=True),
            self.compress(phi2, proof=True),
        )

    def _result(self, alpha: str, q1: Formula, q2: Formula, psi: Derivation,
                phi1: Derivation, phi2: Derivation) -> SplitResult:
        return SplitResult(alpha, phi1.conclusion.left, phi2.conclusion.left, psi.conclusion, q1, q2, psi, phi1, phi2)

    def _base(self, f: Formula, d: Path) -> SplitResult:
        node = subterm_at(f, d)
        full = self.theory.canonicalizer(FULL)
        v, w = full.canonical(node.left), full.canonical(node.right)
        u = full.canonical(App(node.conn, v, w))
        if not (isinstance(v, Const) and isinstance(w, Const) and isinstance(u, Const)):
            raise SplitError(f"top formula {render_formula(f)} does not reduce to constants")
        self._note(BASE_CASE, f)
        r = self.rest(f, d)
        q1, q2 = self.neg(v.name), self.neg(w.name)
        psi = self.chain(
            equality_step(App(self.sig.dual(node.conn), q1, q2), self.neg(u.name)),
            self.dual(Leaf(self.P(u, r)), u.name, r),
        )
        return self._result(node.conn, q1, q2, psi, Leaf(self.P(node.left, q1)), Leaf(self.P(node.right, q2)))

    def _bottom_case(self, chain: _Chain, k: int, d: Path, step: SeqStep,
                     axiom: Optional[Axiom]) -> Union[SplitResult, _Case]:
        before, after = chain.formulas[k - 1], chain.formulas[k]
        p = step.path
        if axiom is not None:
            if axiom.kind == AxiomKind.UNIT and not axiom.converse:
                return self._unit_elimination(chain, k, d, axiom)
            if p == d:
                if axiom.kind == AxiomKind.COMM:
                    return self._commutation(chain, k, d)
                if axiom.kind == AxiomKind.ASSOC:
                    return self._association(chain, k, d, right_to_left=axiom.converse)
                if axiom.kind == AxiomKind.UNIT:
                    return self._unit_introduction(chain, k, d, axiom)
                if axiom.kind == AxiomKind.ASSIGN and axiom.converse:
                    return self._unfolding(chain, k, d, axiom)
        else:
            rel = d[len(p):]
            if rel in ((LEFT,), (RIGHT,)):
                return self._logical(chain, k, d)
            if rel[:1] == (RIGHT,) and subterm_at(before, p).conn == self.times:
                return self._times_context(chain, k, d)
        raise SplitError(
            f"cannot classify step {step.rule} at {render_path(p)} above {render_path(d)} "
            f"in {render_formula(after)}"
        )

    # cases (13) and (14)
    def _unit_introduction(self, chain: _Chain, k: int, d: Path, axiom: Axiom) -> SplitResult:
        f = chain.formulas[k]
        node = subterm_at(f, d)
        alpha, dual = node.conn, self.sig.dual(node.conn)
        u = axiom.args[0]
        r = self.rest(f, d)
        prefix = chain.prefix(k - 1)
        unit_proof = Leaf(self.P(Const(u), self.neg(u)))
        if axiom.side == RIGHT:
            self._note(13, f)
            psi = equality_step(App(dual, r, self.neg(u)), r)
            return self._result(alpha, r, self.neg(u), psi, self.glue(prefix, self.P(node.left, r)), unit_proof)
        self._note(14, f)
        psi = equality_step(App(dual, self.neg(u), r), r)
        return self._result(alpha, self.neg(u), r, psi, unit_proof, self.glue(prefix, self.P(node.right, r)))

    # case (15)
    def _unfolding(self, chain: _Chain, k: int, d: Path, axiom: Axiom) -> SplitResult:
        f = chain.formulas[k]
        node = subterm_at(f, d)
        self._note(15, f)
        v, w, u = axiom.args
        r = self.rest(f, d)
        q1, q2 = self.neg(v), self.neg(w)
        psi = self.chain(
            equality_step(App(self.sig.dual(node.conn), q1, q2), self.neg(u)),
            self.dual(chain.prefix(k - 1), u, r),
        )
        return self._result(node.conn, q1, q2, psi, Leaf(self.P(node.left, q1)), Leaf(self.P(node.right, q2)))

    # case (10)
    def _commutation(self, chain: _Chain, k: int, d: Path) -> _Case:
        self._note(10, chain.formulas[k])
        inner = yield k - 1, d
        dual = self.sig.dual(inner.alpha)
        psi = compose_seq(equality_step(App(dual, inner.q2, inner.q1), App(dual, inner.q1, inner.q2)), inner.psi)
        return self._result(inner.alpha, inner.q2, inner.q1, psi, inner.phi2, inner.phi1)

    # cases (11) and (12)
    def _association(self, chain: _Chain, k: int, d: Path, right_to_left: bool) -> _Case:
        self._note(12 if right_to_left else 11, chain.formulas[k])
        outer = yield k - 1, d
        alpha = outer.alpha
        dual = self.sig.dual(alpha)
        h1, h2 = outer.q1, outer.q2
        if not right_to_left:
            # ((A a B1) a B2): split the left argument again
            inner = self._split_proof(outer.phi1, (LEFT,))
            b1, b2 = inner.b, outer.b
            q1, h3 = inner.q1, inner.q2
            q2 = App(dual, h3, h2)
            phi2 = self.pair(alpha, inner.phi2, b1, h3, outer.phi2, b2, h2)
            psi = self.chain(
                equality_step(App(dual, q1, q2), App(dual, App(dual, q1, h3), h2)),
                Comp(dual, inner.psi, Leaf(h2)),
                outer.psi,
            )
            return self._result(alpha, q1, q2, psi, inner.phi1, phi2)
        # (A1 a (A2 a B)): split the right argument again
        inner = self._split_proof(outer.phi2, (LEFT,))
        a1, a2 = outer.a, inner.a
        h3, q2 = inner.q1, inner.q2
        q1 = App(dual, h1, h3)
        phi1 = self.pair(alpha, outer.phi1, a1, h1, inner.phi1, a2, h3)
        psi = self.chain(
            equality_step(App(dual, q1, q2), App(dual, h1, App(dual, h3, q2))),
            Comp(dual, Leaf(h1), inner.psi),
            outer.psi,
        )
        return self._result(alpha, q1, q2, psi, phi1, inner.phi2)

    # cases (3) and (4)
    def _unit_elimination(self, chain: _Chain, k: int, d: Path, axiom: Axiom) -> _Case:
        f = chain.formulas[k]
        p = chain.steps[k - 1].path
        q = d[len(p):]
        beta = axiom.conn
        beta_dual = self.sig.dual(beta)
        u = axiom.args[0]
        ubar = self.neg(u)
        outer = yield k - 1, p
        if axiom.side == RIGHT:
            self._note(3, f)
            y, h_y, proof_y = outer.a, outer.q1, outer.phi1
            undo = self.dual(outer.phi2, u, outer.q2)
            absorb = self.chain(
                equality_step(h_y, App(beta_dual, h_y, ubar)),
                Comp(beta_dual, Leaf(h_y), undo),
                outer.psi,
            )
        else:
            self._note(4, f)
            y, h_y, proof_y = outer.b, outer.q2, outer.phi2
            undo = self.dual(outer.phi1, u, outer.q1)
            absorb = self.chain(
                equality_step(h_y, App(beta_dual, ubar, h_y)),
                Comp(beta_dual, undo, Leaf(h_y)),
                outer.psi,
            )
        inner = self._split_proof(proof_y, (LEFT,) + q)
        if q:
            c1 = self.rest(y, q)
            tail = Comp(self.plus, Leaf(c1), absorb)
        else:
            tail = absorb
        psi = self.chain(inner.psi, tail, Leaf(self.rest(f, d)))
        return self._result(inner.alpha, inner.q1, inner.q2, psi, inner.phi1, inner.phi2)

    # cases (7), (8) and (9)
    def _logical(self, chain: _Chain, k: int, d: Path) -> _Case:
        before, f = chain.formulas[k - 1], chain.formulas[k]
        p = d[:-1]
        top = subterm_at(before, p)
        gamma = top.conn
        p1, p2 = top.left.left, top.left.right
        p3, p4 = top.right.left, top.right.right
        gamma_dual = self.sig.dual(gamma)
        outer = yield k - 1, p
        h1, h2 = outer.q1, outer.q2
        alpha = subterm_at(f, d).conn
        dual = self.sig.dual(alpha)
        if d[-1] == LEFT:
            self._note(7 if self.sig.strong(gamma) == gamma else 9, f)
            a, b, x1, x2 = p1, p3, p2, p4
            kept = App(self.sig.weak(gamma), p2, p4)
        else:
            self._note(8, f)
            a, b, x1, x2 = p2, p4, p1, p3
            kept = App(gamma, p1, p3)
        q1, q2 = self.P(x1, h1), self.P(x2, h2)
        phi1 = self.glue(outer.phi1, self.P(a, q1))
        phi2 = self.glue(outer.phi2, self.P(b, q2))
        psi = self.chain(
            self.medial(dual, x1, h1, x2, h2, kept.conn, gamma_dual),
            Comp(self.plus, Leaf(kept), outer.psi),
            Leaf(self.rest(f, d)),
        )
        return self._result(alpha, q1, q2, psi, phi1, phi2)

    # case (2)
    def _times_context(self, chain: _Chain, k: int, d: Path) -> _Case:
        before, f = chain.formulas[k - 1], chain.formulas[k]
        self._note(2, f)
        p = chain.steps[k - 1].path
        top = subterm_at(before, p)
        p1, p2 = top.left.left, top.left.right
        p3, p4 = top.right.left, top.right.right
        side, q = d[len(p) + 1], d[len(p) + 2:]
        outer = yield k - 1, p
        h1, h2 = outer.q1, outer.q2
        T = self.times
        if side == LEFT:
            inner = self._split_proof(self.glue(outer.phi1, self.P(p2, self.P(p1, h1))), (LEFT,) + q)
            c1 = self.rest(p2, q) if q else None
            y1 = self.P(h1, c1) if q else h1
            left = self.glue(inner.psi, self.P(p1, y1))
            right = self.glue(outer.phi2, self.P(p3, self.P(p4, h2)))
            y2 = self.P(p4, h2)
            leftover = self.P(c1, p4) if q else p4
        else:
            inner = self._split_proof(self.glue(outer.phi2, self.P(p4, self.P(p3, h2))), (LEFT,) + q)
            c4 = self.rest(p4, q) if q else None
            y2 = self.P(h2, c4) if q else h2
            right = self.glue(inner.psi, self.P(p3, y2))
            left = self.glue(outer.phi1, self.P(p1, self.P(p2, h1)))
            y1 = self.P(p2, h1)
            leftover = self.P(p2, c4) if q else p2
        start = App(self.sig.dual(inner.alpha), inner.q1, inner.q2)
        padded = App(T, start, right.premiss) if side == LEFT else App(T, left.premiss, start)
        psi = self.chain(
            equality_step(start, padded),
            Comp(T, left, right),
            self.distribute(T, p1, y1, p3, y2),
            Comp(self.plus, Leaf(self.P(App(T, p1, p3), leftover)), outer.psi),
            Leaf(self.rest(f, d)),
        )
        return self._result(inner.alpha, inner.q1, inner.q2, psi, inner.phi1, inner.phi2)

    def _split_proof(self, proof: Derivation, d: Path) -> SplitResult:
        chain = _Chain(self, proof)
        conclusion = chain.formulas[-1]
        alpha = self.check_designation(conclusion, d)
        piece = self._split_chain(chain, len(chain.steps), d)
        node = subterm_at(conclusion, d)
        return self._finish(piece, alpha, node.left, node.right, self.rest(conclusion, d))

    # -- post-processing ------------------------------------------------------

    def compress(self, d: Derivation, proof: bool) -> Derivation:
        """Merge runs of equality steps; proofs also lose their leading equalities."""
        s = sequentialize(d)
        system = self.system
        steps = list(s.steps)
        start = s.start
        if proof:
            while steps and system.rule(steps[0].rule).kind == RuleKind.EQUALITY:
                start = steps.pop(0).result
        merged: list[SeqStep] = []
        i = 0
        before = start
        while i < len(steps):
            if system.rule(steps[i].rule).kind != RuleKind.EQUALITY:
                merged.append(steps[i])
                before = steps[i].result
                i += 1
                continue
            j = i
            run_cost = 0
            cur = before
            while j < len(steps) and system.rule(steps[j].rule).kind == RuleKind.EQUALITY:
                run_cost += step_cost(cur, steps[j], system)
                cur = steps[j].result
                j += 1
            path = first_difference(before, cur)
            if path is not None:
                single = SeqStep(EQUALITY, path, cur)
                if j - i > 1 and step_cost(before, single, system) <= run_cost:
                    merged.append(single)
                else:
                    merged.extend(steps[i:j])
            before = cur
            i = j
        if len(merged) == len(s.steps) and start == s.start:
            return d
        return from_sequential(SeqDerivation(start, tuple(merged)))

    # -- context reduction ----------------------------------------------------

    def reduce(self, proof: Derivation, h: Path) -> ContextReductionResult:
        f = proof.conclusion
        try:
            a = subterm_at(f, h)
        except ValueError as e:
            raise SplitError(str(e)) from e
        k, ctx, zeta, chi = self._reduce(proof, h)
        return ContextReductionResult(a, k, ctx, zeta, chi, self.plus)

    def _reduce(self, proof: Derivation, h: Path):
        f = proof.conclusion
        conns = connectives_along(f, h)
        j = next((i for i, c in enumerate(conns) if c != self.plus), None)
        if j is None:
            k = self.rest(f, h)
            a = subterm_at(f, h)
            zeta = self.glue(proof, self.P(a, k))

            def chi_base(x: Formula) -> Derivation:
                return equality_step(self.P(x, k), replace_at(f, h, x))

            return k, IDENTITY_CONTEXT, zeta, chi_base
        p = h[:j]
        node = subterm_at(f, p)
        beta = node.conn
        strong = self.sig.strong(beta)
        beta_dual = self.sig.dual(beta)
        split = self._split_proof(proof, p)
        one = self.one
        if h[j] == LEFT:
            k, inner_ctx, zeta, inner_chi = self._reduce(split.phi1, (LEFT,) + h[j + 1:])
            ctx = FormulaContext(App(strong, inner_ctx.tree, one), (LEFT,) + inner_ctx.hole_path)
            other = split.phi2
        else:
            k, inner_ctx, zeta, inner_chi = self._reduce(split.phi2, (LEFT,) + h[j + 1:])
            ctx = FormulaContext(App(strong, one, inner_ctx.tree), (RIGHT,) + inner_ctx.hole_path)
            other = split.phi1
        rel = h[j + 1:]
        side = h[j]

        def chi(x: Formula) -> Derivation:
            filled = plug(inner_ctx, self.P(x, k))
            if side == LEFT:
                lx, rx = replace_at(node.left, rel, x), node.right
                top = App(strong, filled, one)
                padded = App(strong, filled, other.premiss)
                comp = Comp(strong, inner_chi(x), other)
            else:
                lx, rx = node.left, replace_at(node.right, rel, x)
                top = App(strong, one, filled)
                padded = App(strong, other.premiss, filled)
                comp = Comp(strong, other, inner_chi(x))
            return self.chain(
                equality_step(top, padded),
                comp,
                self.medial(strong, lx, split.q1, rx, split.q2, beta, beta_dual),
                Comp(self.plus, Leaf(App(beta, lx, rx)), split.psi),
                Leaf(replace_at(f, h, x)),
            )

        return k, ctx, zeta, chi

    # -- cut elimination ------------------------------------------------------

    def eliminate_cut_once(self, proof: Derivation, index: Optional[int] = None) -> Derivation:
        full = self.full
        s = sequentialize(proof)
        ups = up_rule_steps(s, full)
        if index is None:
            if not ups:
                return proof
            index = ups[0]
        rule = full.rule(s.steps[index].rule)
        if rule.kind != RuleKind.UP:
            raise SplitError(f"step {index} ({rule.name}) is not an up-rule")
        if not is_cut(rule, full):
            raise UnsupportedRuleError(f"up-rule {rule.name} is not a cut (outer connective is not {self.times})")
        if any(i < index for i in ups):
            raise SplitError(f"up-rule steps above step {index}")
        formulas = s.formulas
        step = s.steps[index]
        c = step.path
        cut_premiss = subterm_at(formulas[index], c)
        x = subterm_at(step.result, c)
        prefix = from_sequential(SeqDerivation(s.start, s.steps[:index]))
        reduction = self.reduce(prefix, c)
        rho = self._cut_replacement(reduction.zeta, cut_premiss, x, reduction.k)
        result = reduction.fill(rho)
        suffix = from_sequential(SeqDerivation(step.result, s.steps[index + 1:]))
        logger.debug("eliminated %s at %s", rule.name, render_path(c))
        return compose_seq(result, suffix)

    def _cut_replacement(self, zeta: Derivation, cut_premiss: Formula, x: Formula, k: Formula) -> Derivation:
        """A cut-free proof of ``x + k`` from the proof ``zeta`` of the cut premiss plus ``k``."""
        T, P = self.times, self.P
        top = self._split_proof(zeta, (LEFT,))
        left_arg = cut_premiss.left
        alpha = left_arg.conn
        a, b = left_arg.left, left_arg.right
        c, dd = cut_premiss.right.left, cut_premiss.right.right
        s2 = self._split_proof(top.phi2, (LEFT,))
        qc, qd = s2.q1, s2.q2
        if alpha == self.plus:
            q1 = top.q1
            first = self.chain(
                Comp(T, self.glue(top.phi1, P(a, P(b, q1))), s2.phi1),
                self.distribute(T, a, P(b, q1), c, qc),
            )
            first = self.glue(first, P(b, P(App(T, a, c), P(q1, qc))))
            second = self.chain(
                Comp(T, first, s2.phi2),
                self.distribute(T, b, P(App(T, a, c), P(q1, qc)), dd, qd),
            )
            return self.chain(
                second,
                Comp(self.plus, Leaf(x), self.chain(Comp(self.plus, Leaf(q1), s2.psi), top.psi)),
            )
        s1 = self._split_proof(top.phi1, (LEFT,))
        qa, qb = s1.q1, s1.q2
        strong = self.sig.strong(alpha)
        dual = self.sig.dual(alpha)
        eps = self.sig.dual(strong)
        left = compose_seq(Comp(T, s1.phi1, s2.phi1), self.distribute(T, a, qa, c, qc))
        right = compose_seq(Comp(T, s1.phi2, s2.phi2), self.distribute(T, b, qb, dd, qd))
        return self.chain(
            Comp(strong, left, right),
            self.medial(strong, App(T, a, c), P(qa, qc), App(T, b, dd), P(qb, qd), alpha, dual),
            Comp(self.plus, Leaf(x), self.chain(
                self.medial(dual, qa, qc, qb, qd, dual, eps),
                Comp(self.plus, s1.psi, s2.psi),
                top.psi,
            )),
        )

    def eliminate_cuts(self, proof: Derivation) -> Derivation:
        rounds = 0
        while True:
            s = sequentialize(proof)
            ups = up_rule_steps(s, self.full)
            if not ups:
                if rounds:
                    logger.info("Eliminated %d cut(s)", rounds)
                return proof
            rule = self.full.rule(s.steps[ups[0]].rule)
            if not is_cut(rule, self.full):
                raise UnsupportedRuleError(f"up-rule {rule.name} is not a cut")
            proof = self.eliminate_cut_once(proof, ups[0])
            rounds += 1

    # -- identity -------------------------------------------------------------

    def identity_proof(self, a: Formula) -> Derivation:
        """A proof of ``a + ~a`` using down-rules only."""
        if isinstance(a, Const):
            return Leaf(self.P(a, self.neg(a.name)))
        left = self.identity_proof(a.left)
        right = self.identity_proof(a.right)
        return self.pair(a.conn, left, a.left, negate(a.left, self.sig), right, a.right, negate(a.right, self.sig))


def _rest_path(p: Path, d: Path) -> Path:
    """Position of ``p`` once the +-factor at ``d`` is removed (``p`` disjoint from ``d``)."""
    j = next(i for i in range(min(len(p), len(d))) if p[i] != d[i])
    if j == len(d) - 1:
        return d[:-1] + p[len(d):]
    return p


def _transport(axiom: Axiom, p: Path, d: Path) -> Path:
    """Where the occurrence at ``d`` after a + move at ``p`` sat before the move."""
    rel = d[len(p):]
    kind = axiom.kind
    if kind == AxiomKind.COMM:
        return p + ((RIGHT,) if rel[0] == LEFT else (LEFT,)) + rel[1:]
    if kind == AxiomKind.ASSOC and not axiom.converse:
        # ((a b) c) -> (a (b c))
        if rel[0] == LEFT:
            return p + (LEFT, LEFT) + rel[1:]
        if rel[:2] == (RIGHT, LEFT):
            return p + (LEFT, RIGHT) + rel[2:]
        return p + (RIGHT,) + rel[2:]
    if kind == AxiomKind.ASSOC:
        # (a (b c)) -> ((a b) c)
        if rel[0] == RIGHT:
            return p + (RIGHT, RIGHT) + rel[1:]
        if rel[:2] == (LEFT, RIGHT):
            return p + (RIGHT, LEFT) + rel[2:]
        return p + (LEFT,) + rel[2:]
    if kind == AxiomKind.UNIT and not axiom.converse:
        return p + ((LEFT,) if axiom.side == RIGHT else (RIGHT,)) + rel
    if kind == AxiomKind.UNIT:
        return p + rel[1:]
    raise SplitError(f"cannot transport across {axiom.name}")


# ---------------------------------------------------------------------------
# Module-level operations
# ---------------------------------------------------------------------------

def _find_constant_factor(f: Formula, u: str, plus: str) -> Optional[Path]:
    stack: list[tuple[Formula, Path]] = [(f, ())]
    while stack:
        node, path = stack.pop()
        if node == Const(u):
            return path
        if isinstance(node, App) and node.conn == plus:
            stack.append((node.right, path + (RIGHT,)))
            stack.append((node.left, path + (LEFT,)))
    return None


def derive_from_dual(phi: Derivation, u: str, sys: SystemDef) -> Derivation:
    """From a proof of ``u + C``, a derivation from the negation of ``u`` to ``C``.

    Raises:
        SplitError: The conclusion has no +-factor ``u``.
    """
    engine = SplittingEngine(sys)
    if not equal(phi.premiss, engine.one, engine.theory):
        raise SplitError(f"premiss {render_formula(phi.premiss)} is not {engine.one}")
    path = _find_constant_factor(phi.conclusion, u, engine.plus)
    if path is None:
        raise SplitError(f"conclusion {render_formula(phi.conclusion)} is not of the form {u} {engine.plus} C")
    return engine.dual(phi, u, engine.rest(phi.conclusion, path))


def shallow_split(phi: Derivation, alpha: str, split_path: Path, sys: SystemDef,
                  trace: Optional[list[tuple[int, str]]] = None) -> SplitResult:
    engine = SplittingEngine(sys, trace)
    try:
        node = subterm_at(phi.conclusion, split_path)
    except ValueError as e:
        raise SplitError(str(e)) from e
    if not isinstance(node, App) or node.conn != alpha:
        raise SplitError(f"no {alpha!r} occurrence at {render_path(split_path)}")
    return engine.split(phi, split_path)


def context_reduce(phi: Derivation, hole_path: Path, sys: SystemDef,
                   trace: Optional[list[tuple[int, str]]] = None) -> ContextReductionResult:
    engine = SplittingEngine(sys, trace)
    if not equal(phi.premiss, engine.one, engine.theory):
        raise SplitError(f"premiss {render_formula(phi.premiss)} is not {engine.one}")
    return engine.reduce(phi, hole_path)


def reassemble(result: ContextReductionResult, filler: Optional[Derivation] = None) -> Derivation:
    """``H{filler} ; chi(X)``; with no filler, the proof ``H{zeta} ; chi(A)`` of the original conclusion."""
    return result.fill(result.zeta if filler is None else filler)


def eliminate_cut_once(phi: Derivation, sys: SystemDef, index: Optional[int] = None,
                       trace: Optional[list[tuple[int, str]]] = None) -> Derivation:
    return SplittingEngine(sys, trace).eliminate_cut_once(phi, index)


def eliminate_cuts(phi: Derivation, sys: SystemDef,
                   trace: Optional[list[tuple[int, str]]] = None) -> Derivation:
    return SplittingEngine(sys, trace).eliminate_cuts(phi)


def identity_proof(a: Formula, sys: SystemDef) -> Derivation:
    return SplittingEngine(sys).identity_proof(a)


def remove_unit_medials(d: Derivation, sys: SystemDef) -> Derivation:
    """Replace logical steps whose redex is equal to its result by equality steps."""
    s = sequentialize(d)
    steps = []
    changed = False
    before = s.start
    for step in s.steps:
        if sys.rule(step.rule).is_logical and equal(
            subterm_at(before, step.path), subterm_at(step.result, step.path), sys.theory
        ):
            steps.append(SeqStep(EQUALITY, step.path, step.result))
            changed = True
        else:
            steps.append(step)
        before = step.result
    if not changed:
        return d
    return from_sequential(SeqDerivation(s.start, tuple(steps)))
