"""Open-deduction derivations.

A derivation is a formula (``Leaf``), a composition by inference
(``Infer(upper, rule, lower)``: ``upper``, then one instance of ``rule`` from
the conclusion of ``upper`` to the premiss of ``lower``, then ``lower``) or a
composition by a connective (``Comp``). Premiss and conclusion are computed
once, when a node is built.

The sequential form lists every inference with the position of its redex,
composition by connectives being serialized left side first.
"""

import logging
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Union

from subatomic_kernel.errors import CheckError, CompositionError, MatchError, ParseError, SignatureError
from subatomic_kernel.services.formula import (
    LEFT,
    RIGHT,
    App,
    Const,
    Formula,
    FormulaContext,
    Path,
    TokenStream,
    context_at,
    first_difference,
    parse_path,
    positions,
    read_formula,
    render_formula,
    render_path,
    replace_at,
    size,
    subterm_at,
    tokenize,
)
from subatomic_kernel.services.system_service import (
    EQUALITY,
    RuleKind,
    SystemDef,
    match_rule_instance,
    rule_conclusion,
)
from subatomic_kernel.services.theory import (
    EMPTY,
    FULL,
    PLUS_ONLY,
    Axiom,
    Move,
    TheorySubset,
    apply_move,
    equal,
    equality_moves,
    rewrite,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Leaf:
    formula: Formula

    @property
    def premiss(self) -> Formula:
        return self.formula

    @property
    def conclusion(self) -> Formula:
        return self.formula


@dataclass(frozen=True)
class Infer:
    upper: "Derivation"
    rule: str
    lower: "Derivation"
    premiss: Formula = field(init=False, repr=False, compare=False)
    conclusion: Formula = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "premiss", self.upper.premiss)
        object.__setattr__(self, "conclusion", self.lower.conclusion)


@dataclass(frozen=True)
class Comp:
    conn: str
    left: "Derivation"
    right: "Derivation"
    premiss: Formula = field(init=False, repr=False, compare=False)
    conclusion: Formula = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "premiss", App(self.conn, self.left.premiss, self.right.premiss))
        object.__setattr__(self, "conclusion", App(self.conn, self.left.conclusion, self.right.conclusion))


Derivation = Union[Leaf, Infer, Comp]


def premiss(d: Derivation) -> Formula:
    return d.premiss


def conclusion(d: Derivation) -> Formula:
    return d.conclusion


@dataclass(frozen=True)
class SeqStep:
    rule: str
    path: Path
    result: Formula


@dataclass(frozen=True)
class SeqDerivation:
    start: Formula
    steps: tuple[SeqStep, ...] = ()

    @property
    def formulas(self) -> list[Formula]:
        return [self.start] + [s.result for s in self.steps]

    @property
    def conclusion(self) -> Formula:
        return self.steps[-1].result if self.steps else self.start

    def transitions(self) -> Iterator[tuple[Formula, SeqStep, Formula]]:
        """``(before, step, after)`` triples."""
        before = self.start
        for step in self.steps:
            yield before, step, step.result
            before = step.result


# ---------------------------------------------------------------------------
# Traversal
# ---------------------------------------------------------------------------

def inferences(d: Derivation) -> Iterator[tuple[Path, Infer]]:
    """Inference nodes in sequential order, with the position of their redex."""
    stack: list[tuple[Derivation, Path, bool]] = [(d, (), False)]
    while stack:
        node, path, emit = stack.pop()
        if emit:
            yield path, node
        elif isinstance(node, Infer):
            stack.append((node.lower, path, False))
            stack.append((node, path, True))
            stack.append((node.upper, path, False))
        elif isinstance(node, Comp):
            stack.append((node.right, path + (RIGHT,), False))
            stack.append((node.left, path + (LEFT,), False))


def leaves(d: Derivation) -> Iterator[Formula]:
    stack = [d]
    while stack:
        node = stack.pop()
        if isinstance(node, Leaf):
            yield node.formula
        elif isinstance(node, Infer):
            stack.append(node.lower)
            stack.append(node.upper)
        else:
            stack.append(node.right)
            stack.append(node.left)


def sequentialize(d: Derivation) -> SeqDerivation:
    cur = d.premiss
    steps = []
    for path, node in inferences(d):
        cur = replace_at(cur, path, node.lower.premiss)
        steps.append(SeqStep(node.rule, path, cur))
    return SeqDerivation(d.premiss, tuple(steps))


def derivation_size(d: Derivation) -> int:
    """Total number of formula nodes over all leaves."""
    return sum(size(f) for f in leaves(d))


def rule_count(d: Derivation) -> int:
    return sum(1 for _ in inferences(d))


# ---------------------------------------------------------------------------
# Checking
# ---------------------------------------------------------------------------

def _axiom_step_valid(axiom: Axiom, x: Formula, y: Formula) -> bool:
    d = first_difference(x, y)
    if d is None:
        # e.g. comm on (one ten one)
        return any(rewrite(axiom, subterm_at(x, p)) == subterm_at(x, p) for p in positions(x))
    for depth in range(len(d), -1, -1):
        p = d[:depth]
        if rewrite(axiom, subterm_at(x, p)) == subterm_at(y, p):
            return True
    return False


def step_valid(rule_name: str, upper: Formula, lower: Formula, sys: SystemDef) -> bool:
    """Whether ``upper -> lower`` is one instance of the named rule."""
    rule = sys.rule(rule_name)
    if rule.kind == RuleKind.EQUALITY:
        if rule.axiom is None:
            return equal(upper, lower, sys.theory, FULL)
        return _axiom_step_valid(rule.axiom, upper, lower)
    return match_rule_instance(rule, upper, lower, sys.signature) is not None


def check(d: Derivation, sys: SystemDef) -> None:
    """Raise ``CheckError`` at the first invalid inference; return ``None`` when ``d`` checks."""
    sig = sys.signature
    for f in leaves(d):
        try:
            sig.validate(f)
        except SignatureError as e:
            raise CheckError(str(e), "", render_formula(f), "") from e
    for index, (path, node) in enumerate(inferences(d)):
        upper, lower = node.upper.conclusion, node.lower.premiss
        if not sys.has_rule(node.rule):
            raise CheckError(f"step {index}: unknown rule {node.rule!r}", render_path(path),
                             render_formula(upper), render_formula(lower))
        if not step_valid(node.rule, upper, lower, sys):
            raise CheckError(f"step {index}: not an instance of {node.rule}", render_path(path),
                             render_formula(upper), render_formula(lower))


def is_valid(d: Derivation, sys: SystemDef) -> bool:
    try:
        check(d, sys)
    except CheckError:
        return False
    return True


def check_sequential(s: SeqDerivation, sys: SystemDef) -> None:
    for index, (before, step, after) in enumerate(s.transitions()):
        try:
            upper = subterm_at(before, step.path)
            lower = subterm_at(after, step.path)
        except ValueError as e:
            raise CheckError(f"step {index}: {e}", render_path(step.path)) from e
        if replace_at(before, step.path, lower) != after or not sys.has_rule(step.rule) \
                or not step_valid(step.rule, upper, lower, sys):
            raise CheckError(f"step {index}: not an instance of {step.rule}", render_path(step.path),
                             render_formula(upper), render_formula(lower))


def is_proof(d: Derivation, sys: SystemDef) -> bool:
    return equal(d.premiss, Const(sys.one), sys.theory)


# ---------------------------------------------------------------------------
# CoS notation and the splitting measure
# ---------------------------------------------------------------------------

def _is_equality(rule_name: str, sys: SystemDef) -> bool:
    return sys.rule(rule_name).kind == RuleKind.EQUALITY


def _redexes(before: Formula, step: SeqStep) -> tuple[Formula, Formula]:
    return subterm_at(before, step.path), subterm_at(step.result, step.path)


def cos_normalize(s: SeqDerivation, sys: SystemDef, g: TheorySubset = PLUS_ONLY) -> SeqDerivation:
    """Absorb equality steps that ``g`` identifies.

    A maximal run of equality steps whose endpoints are ``g``-equal disappears
    entirely; in other runs the individual ``g``-steps are dropped.
    """
    if g == EMPTY:
        return s
    th = sys.theory
    kept: list[SeqStep] = []
    formulas = s.formulas
    i, n = 0, len(s.steps)
    while i < n:
        if not _is_equality(s.steps[i].rule, sys):
            kept.append(s.steps[i])
            i += 1
            continue
        j = i
        while j < n and _is_equality(s.steps[j].rule, sys):
            j += 1
        if not equal(formulas[i], formulas[j], th, g):
            for k in range(i, j):
                x, y = _redexes(formulas[k], s.steps[k])
                if not equal(x, y, th, g):
                    kept.append(s.steps[k])
        i = j
    return SeqDerivation(s.start, tuple(kept))


def step_cost(before: Formula, step: SeqStep, sys: SystemDef) -> int:
    if not _is_equality(step.rule, sys):
        return 1
    x, y = _redexes(before, step)
    return 0 if equal(x, y, sys.theory, PLUS_ONLY) else 1


def length_plus(d: Union[Derivation, SeqDerivation], sys: SystemDef) -> int:
    """Rule instances other than equalities of ``+``."""
    s = d if isinstance(d, SeqDerivation) else sequentialize(d)
    return sum(step_cost(before, step, sys) for before, step, _ in s.transitions())


def up_rule_steps(d: Union[Derivation, SeqDerivation], sys: SystemDef) -> list[int]:
    s = d if isinstance(d, SeqDerivation) else sequentialize(d)
    return [i for i, step in enumerate(s.steps) if sys.rule(step.rule).kind == RuleKind.UP]


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------

def compose_seq(phi: Derivation, psi: Derivation) -> Derivation:
    """Vertical composition; the conclusion of ``phi`` must be the premiss of ``psi``."""
    if phi.conclusion != psi.premiss:
        raise CompositionError(
            f"cannot compose: {render_formula(phi.conclusion)} is not {render_formula(psi.premiss)}"
        )
    spine: list[tuple[Derivation, str]] = []
    while isinstance(phi, Infer):
        spine.append((phi.upper, phi.rule))
        phi = phi.lower
    if isinstance(phi, Leaf):
        core = psi
    elif isinstance(psi, Leaf):
        core = phi
    elif isinstance(psi, Infer):
        core = Infer(compose_seq(phi, psi.upper), psi.rule, psi.lower)
    else:
        core = Comp(phi.conn, compose_seq(phi.left, psi.left), compose_seq(phi.right, psi.right))
    for upper, rule in reversed(spine):
        core = Infer(upper, rule, core)
    return core


def compose_all(parts: Iterable[Derivation]) -> Derivation:
    parts = list(parts)
    if not parts:
        raise CompositionError("nothing to compose")
    result = parts[0]
    for part in parts[1:]:
        result = compose_seq(result, part)
    return result


def plug_derivation(ctx: FormulaContext, d: Derivation) -> Derivation:
    """``K{d}``: ``d`` wrapped in compositions following the hole of ``ctx``."""
    path = ctx.hole_path
    for depth in range(len(path) - 1, -1, -1):
        node = subterm_at(ctx.tree, path[:depth])
        if path[depth] == LEFT:
            d = Comp(node.conn, d, Leaf(node.right))
        else:
            d = Comp(node.conn, Leaf(node.left), d)
    return d


def step_derivation(before: Formula, path: Path, rule: str, after_redex: Formula) -> Derivation:
    """One inference replacing the subformula of ``before`` at ``path`` by ``after_redex``."""
    sub = subterm_at(before, path)
    return plug_derivation(context_at(before, path), Infer(Leaf(sub), rule, Leaf(after_redex)))


def equality_step(x: Formula, y: Formula) -> Derivation:
    """A generic equality inference from ``x`` to ``y``; no inference when they coincide."""
    if x == y:
        return Leaf(x)
    return Infer(Leaf(x), EQUALITY, Leaf(y))


def apply_at(rule_name: str, path: Path, f: Formula, sys: SystemDef,
             result: Optional[Formula] = None) -> tuple[Formula, Derivation]:
    """Apply a rule at ``path`` of ``f``.

    Args:
        rule_name: A logical rule, an axiom rule, or ``=``.
        path: Position of the redex.
        f: The formula to rewrite.
        sys: The governing system.
        result: For ``=`` only, the subformula replacing the redex.

    Returns:
        The rewritten formula and a one-step derivation realizing it.

    Raises:
        MatchError: The rule does not apply at ``path``.
    """
    rule = sys.rule(rule_name)
    try:
        sub = subterm_at(f, path)
    except ValueError as e:
        raise MatchError(str(e)) from e
    if rule.kind == RuleKind.EQUALITY:
        if rule.axiom is not None:
            out = rewrite(rule.axiom, sub)
        elif result is not None and equal(sub, result, sys.theory):
            out = result
        else:
            out = None
    else:
        out = rule_conclusion(rule, sub, sys.signature)
    if out is None:
        raise MatchError(f"rule {rule_name} does not apply to {render_formula(sub)} at {render_path(path)}")
    return replace_at(f, path, out), step_derivation(f, path, rule_name, out)


def from_sequential(s: SeqDerivation) -> Derivation:
    """A derivation with the steps of ``s``, each wrapped in its context."""
    result: Derivation = Leaf(s.start)
    for before, step, after in s.transitions():
        result = compose_seq(result, step_derivation(before, step.path, step.rule, subterm_at(after, step.path)))
    return result


def axiom_rule_name(axiom: Axiom, sys: SystemDef) -> str:
    """The rule naming ``axiom`` in ``sys``; the generic equality when none does."""
    if sys.has_rule(axiom.name) and sys.rule(axiom.name).axiom == axiom:
        return axiom.name
    return EQUALITY


def atomize(s: SeqDerivation, sys: SystemDef) -> SeqDerivation:
    """Replace generic equality steps by single-axiom steps."""
    steps: list[SeqStep] = []
    th = sys.theory
    for before, step, after in s.transitions():
        if step.rule != EQUALITY:
            steps.append(step)
            continue
        cur = before
        for move in equality_moves(subterm_at(before, step.path), subterm_at(after, step.path), th):
            moved = Move(move.axiom, step.path + move.path)
            cur = apply_move(cur, moved)
            steps.append(SeqStep(axiom_rule_name(move.axiom, sys), moved.path, cur))
        if cur != after:
            raise CheckError("equality step could not be decomposed", render_path(step.path),
                             render_formula(before), render_formula(after))
    return SeqDerivation(s.start, tuple(steps))


# ---------------------------------------------------------------------------
# Documents
# ---------------------------------------------------------------------------

def render_derivation(d: Derivation, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(d, Leaf):
        return f"{pad}(form {render_formula(d.formula)})"
    if isinstance(d, Infer):
        head, a, b = f"step {d.rule}", d.upper, d.lower
    else:
        head, a, b = f"comp {d.conn}", d.left, d.right
    return f"{pad}({head}\n{render_derivation(a, indent + 1)}\n{render_derivation(b, indent + 1)})"


def _read_derivation(stream: TokenStream) -> Derivation:
    stream.expect("(")
    head = stream.next()
    if head == "form":
        f = read_formula(stream)
        stream.expect(")")
        return Leaf(f)
    if head not in ("step", "comp"):
        stream.index -= 1
        stream.error(f"expected 'form', 'step' or 'comp', found {head!r}")
    label = stream.next()
    if label in ("(", ")"):
        stream.index -= 1
        stream.error(f"expected a {'rule' if head == 'step' else 'connective'} name")
    first = _read_derivation(stream)
    second = _read_derivation(stream)
    stream.expect(")")
    if head == "step":
        return Infer(first, label, second)
    return Comp(label, first, second)


def parse_derivation(text: str, sys: Optional[SystemDef] = None, source: Optional[str] = None) -> Derivation:
    """Parse a derivation document; symbols are validated when ``sys`` is given."""
    stream = TokenStream(tokenize(text), source)
    d = _read_derivation(stream)
    if not stream.at_end():
        stream.error(f"trailing input {stream.peek()!r}")
    if sys is not None:
        for f in leaves(d):
            sys.signature.validate(f)
    return d


def export_sequential(s: SeqDerivation, system_name: str) -> str:
    lines = [f"seq {system_name}", f"start {render_formula(s.start)}"]
    for step in s.steps:
        lines.append(f"step {step.rule} @{render_path(step.path)} {render_formula(step.result)}")
    return "\n".join(lines) + "\n"


def parse_sequential(text: str, source: Optional[str] = None) -> tuple[str, SeqDerivation]:
    """Parse the sequential text format; returns the system name and the derivation."""
    rows = [line.split("#", 1)[0].strip() for line in text.splitlines()]
    numbered = [(i + 1, row) for i, row in enumerate(rows) if row]
    if not numbered or not numbered[0][1].startswith("seq "):
        raise ParseError("expected 'seq <system>' header", numbered[0][0] if numbered else 1, 1, source)
    system_name = numbered[0][1].split(None, 1)[1].strip()
    if len(numbered) < 2 or not numbered[1][1].startswith("start "):
        raise ParseError("expected 'start <formula>'", numbered[1][0] if len(numbered) > 1 else 1, 1, source)
    start = _formula_on_line(numbered[1][1][len("start "):], numbered[1][0], source)
    steps = []
    for lineno, row in numbered[2:]:
        parts = row.split(None, 3)
        if len(parts) < 4 or parts[0] != "step" or not parts[2].startswith("@"):
            raise ParseError("expected 'step <rule> @<path> <formula>'", lineno, 1, source)
        try:
            path = parse_path(parts[2])
        except ParseError as e:
            raise ParseError(str(e), lineno, row.index(parts[2]) + 1, source) from e
        steps.append(SeqStep(parts[1], path, _formula_on_line(parts[3], lineno, source)))
    return system_name, SeqDerivation(start, tuple(steps))


def _formula_on_line(text: str, lineno: int, source: Optional[str]) -> Formula:
    stream = TokenStream([(tok, lineno, col) for tok, _, col in tokenize(text)], source)
    f = read_formula(stream)
    if not stream.at_end():
        stream.error(f"trailing input {stream.peek()!r}")
    return f
