"""
Natural interpretation between subatomic formulae and ordinary deep-inference systems.

An interpretation map reads ``(u1 a u2)`` as the positive atom ``a`` and
``(u2 a u1)`` as its negation; every other connective and constant is read
as itself. Ordinary formulae reuse the formula tree types with ``OAtom``
leaves, and ordinary derivations use the sequential text format with
ordinary rule names. Ordinary equality is decided through the natural
representation, which is faithful to the subatomic theory on atom-free
structure.
"""

import logging
import random
from dataclasses import dataclass
from typing import Any, Optional, Union

from subatomic_kernel.errors import NotInterpretable, ParseError, SignatureError, TranslationError
from subatomic_kernel.services.derivation_service import (
    Derivation,
    SeqDerivation,
    SeqStep,
    from_sequential,
    parse_sequential,
    sequentialize,
)
from subatomic_kernel.services.formula import (
    LEFT,
    RIGHT,
    App,
    Const,
    Formula,
    Path,
    TokenStream,
    connectives_along,
    read_formula,
    render_formula,
    render_path,
    replace_at,
    subterm_at,
    tokenize,
)
from subatomic_kernel.services.oracle_service import random_formula
from subatomic_kernel.services.system_service import (
    ATOM_FAMILY,
    EQUALITY,
    ConditionResult,
    RuleKind,
    RuleScheme,
    SystemDef,
    load_builtin,
    match_rule_instance,
)
from subatomic_kernel.services.theory import (
    FULL,
    PLUS_ONLY,
    apply_move,
    elementary_moves,
    equal,
    negate,
)

logger = logging.getLogger(__name__)

NEGATIVE_PREFIX = "~"
METAVARIABLES = ("A", "B", "C", "D")
PATTERN_ATOM = "a"


@dataclass(frozen=True)
class OAtom:
    """An ordinary atom; ``positive=False`` is the negated atom ``~name``."""

    name: str
    positive: bool = True

    def negated(self) -> "OAtom":
        return OAtom(self.name, not self.positive)


OrdinaryFormula = Union[Const, App, OAtom]


def _to_tokens(g: OrdinaryFormula):
    if isinstance(g, OAtom):
        return Const(g.name if g.positive else NEGATIVE_PREFIX + g.name)
    if isinstance(g, App):
        return App(g.conn, _to_tokens(g.left), _to_tokens(g.right))
    return g


def render_ordinary(g: OrdinaryFormula) -> str:
    return render_formula(_to_tokens(g))


def _from_tokens(f, atoms: frozenset[str], constants: frozenset[str], connectives: frozenset[str],
                 patterns: bool = False):
    if isinstance(f, App):
        if f.conn not in connectives:
            raise SignatureError(f"undeclared ordinary connective {f.conn!r}")
        return App(f.conn, _from_tokens(f.left, atoms, constants, connectives, patterns),
                   _from_tokens(f.right, atoms, constants, connectives, patterns))
    name = f.name
    negative = name.startswith(NEGATIVE_PREFIX)
    base = name[len(NEGATIVE_PREFIX):] if negative else name
    if patterns and name in METAVARIABLES:
        return f
    if base in atoms or (patterns and base == PATTERN_ATOM):
        return OAtom(base, not negative)
    if not negative and name in constants:
        return f
    raise SignatureError(f"undeclared ordinary symbol {name!r}")


# ---------------------------------------------------------------------------
# Ordinary systems
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OrdinaryRule:
    name: str
    premiss: OrdinaryFormula
    conclusion: OrdinaryFormula


@dataclass(frozen=True)
class OrdinarySystem:
    name: str
    constants: tuple[str, ...]
    connectives: tuple[str, ...]
    rules: tuple[OrdinaryRule, ...]

    def rule(self, name: str) -> OrdinaryRule:
        for r in self.rules:
            if r.name == name:
                return r
        raise SignatureError(f"ordinary system {self.name} has no rule {name!r}")

    def has_rule(self, name: str) -> bool:
        return any(r.name == name for r in self.rules)


# ai.down/ai.up are the atomic identity and cut; s is switch; q.down/q.up are seq.
_ORDINARY_DOCUMENTS: dict[str, str] = {
    "sks.linear": """\
ordinary sks.linear
constants f t
connectives and or
rule ai.down t -> (a or ~a)
rule s ((A or B) and C) -> ((A and C) or B)
""",
    "smlls": """\
ordinary smlls
constants bot one
connectives ten par
rule ai.down one -> (a par ~a)
rule ai.up (a ten ~a) -> bot
rule s ((A par B) ten C) -> ((A ten C) par B)
""",
    "sbv": """\
ordinary sbv
constants bot one o
connectives ten par seq
rule ai.down one -> (a par ~a)
rule ai.up (a ten ~a) -> bot
rule s ((A par B) ten C) -> ((A ten C) par B)
rule q.down ((A par B) seq (C par D)) -> ((A seq C) par (B seq D))
rule q.up ((A seq B) ten (C seq D)) -> ((A ten C) seq (B ten D))
""",
}


def _pattern(text: str, constants: frozenset[str], connectives: frozenset[str], lineno: int) -> OrdinaryFormula:
    stream = TokenStream([(tok, lineno, col) for tok, _, col in tokenize(text)])
    f = read_formula(stream)
    if not stream.at_end():
        stream.error(f"trailing input {stream.peek()!r}")
    return _from_tokens(f, frozenset(), constants, connectives, patterns=True)


def load_ordinary_system(text: str) -> OrdinarySystem:
    """Parse an ordinary system document (``ordinary``, ``constants``, ``connectives``, ``rule`` lines)."""
    name = None
    constants: tuple[str, ...] = ()
    connectives: tuple[str, ...] = ()
    rules: list[OrdinaryRule] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        if head == "ordinary":
            name = rest.strip()
        elif head == "constants":
            constants = tuple(rest.split())
        elif head == "connectives":
            connectives = tuple(rest.split())
        elif head == "rule":
            rule_name, _, body = rest.partition(" ")
            if "->" not in body:
                raise ParseError("expected 'rule <name> <premiss> -> <conclusion>'", lineno, 1)
            left, right = body.split("->", 1)
            consts, conns = frozenset(constants), frozenset(connectives)
            rules.append(OrdinaryRule(rule_name, _pattern(left, consts, conns, lineno),
                                      _pattern(right, consts, conns, lineno)))
        else:
            raise ParseError(f"unknown directive {head!r}", lineno, 1)
    if name is None:
        raise ParseError("missing 'ordinary <name>' header")
    return OrdinarySystem(name, constants, connectives, tuple(rules))


ORDINARY_SYSTEMS: dict[str, OrdinarySystem] = {
    name: load_ordinary_system(doc) for name, doc in _ORDINARY_DOCUMENTS.items()
}


# ---------------------------------------------------------------------------
# Interpretation maps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InterpretationMap:
    """A natural interpretation of ``system`` into ``target``, atoms paired by name."""

    name: str
    system: SystemDef
    target: OrdinarySystem
    u1: str
    u2: str

    @property
    def atoms(self) -> tuple[str, ...]:
        return self.system.signature.atoms

    @property
    def plus(self) -> str:
        return self.system.plus

    @property
    def times(self) -> str:
        return self.system.times

    def parse(self, text: str, source: Optional[str] = None) -> OrdinaryFormula:
        stream = TokenStream(tokenize(text, source), source)
        f = read_formula(stream)
        if not stream.at_end():
            stream.error(f"trailing input {stream.peek()!r}")
        return _from_tokens(f, frozenset(self.atoms), frozenset(self.target.constants),
                            frozenset(self.target.connectives))

    def naturality_problems(self) -> list[str]:
        """Violations of the naturalness requirements on symbols."""
        sig = self.system.signature
        problems = []
        if self.u1 == self.u2:
            problems.append(f"u1 and u2 are both {self.u1!r}")
        for c in (self.u1, self.u2):
            if not sig.is_constant(c):
                problems.append(f"{c!r} is not a constant of {self.system.name}")
        for c in self.target.constants:
            if not sig.is_constant(c):
                problems.append(f"ordinary constant {c!r} has no subatomic counterpart")
        non_atoms = {n for n, i in sig.connectives.items() if not i.is_atom}
        if non_atoms != set(self.target.connectives):
            problems.append(f"connectives {sorted(non_atoms)} do not match {sorted(self.target.connectives)}")
        return problems


_BUILTIN_MAPS = {
    "classical": ("saks.down", "sks.linear", "f", "t"),
    "mll": ("samlls", "smlls", "bot", "one"),
    "bv": ("sabvu", "sbv", "bot", "one"),
}


def builtin_map_names() -> list[str]:
    return sorted(_BUILTIN_MAPS)


def builtin_map(name: str) -> InterpretationMap:
    try:
        system_name, target, u1, u2 = _BUILTIN_MAPS[name]
    except KeyError:
        raise SignatureError(f"unknown interpretation map {name!r}; choose from {builtin_map_names()}") from None
    return InterpretationMap(name, load_builtin(system_name), ORDINARY_SYSTEMS[target], u1, u2)


def map_for_system(system_name: str) -> InterpretationMap:
    """The built-in map whose subatomic system shares ``system_name``'s logic."""
    family = system_name.split(".", 1)[0]
    for name, (sys_name, _, _, _) in _BUILTIN_MAPS.items():
        if sys_name.split(".", 1)[0] == family:
            return builtin_map(name)
    raise SignatureError(f"no interpretation map for system {system_name!r}")


# ---------------------------------------------------------------------------
# Formulae
# ---------------------------------------------------------------------------

def interpret_formula(a: Formula, m: InterpretationMap, path: Path = ()) -> OrdinaryFormula:
    """The ordinary reading of ``a``.

    Raises:
        NotInterpretable: Some atom node has arguments that are neither
            ``u1``/``u2`` nor fold to a constant; carries that node's path.
    """
    sig = m.system.signature
    if isinstance(a, Const):
        return a
    if not sig.is_atom(a.conn):
        return App(a.conn, interpret_formula(a.left, m, path + (LEFT,)),
                   interpret_formula(a.right, m, path + (RIGHT,)))
    canon = m.system.theory.canonicalizer(FULL)
    v, w = canon.canonical(a.left), canon.canonical(a.right)
    if v == Const(m.u1) and w == Const(m.u2):
        return OAtom(a.conn, True)
    if v == Const(m.u2) and w == Const(m.u1):
        return OAtom(a.conn, False)
    folded = canon.canonical(App(a.conn, v, w))
    if isinstance(folded, Const):
        return folded
    raise NotInterpretable(f"atom {a.conn!r} over {render_formula(v)} and {render_formula(w)}", render_path(path))


def is_interpretable(a: Formula, m: InterpretationMap) -> bool:
    try:
        interpret_formula(a, m)
    except NotInterpretable:
        return False
    return True


def represent_formula(g: OrdinaryFormula, m: InterpretationMap) -> Formula:
    if isinstance(g, OAtom):
        first, second = (m.u1, m.u2) if g.positive else (m.u2, m.u1)
        return App(g.name, Const(first), Const(second))
    if isinstance(g, App):
        return App(g.conn, represent_formula(g.left, m), represent_formula(g.right, m))
    return g


def negate_ordinary(g: OrdinaryFormula, m: InterpretationMap) -> OrdinaryFormula:
    sig = m.system.signature
    if isinstance(g, OAtom):
        return g.negated()
    if isinstance(g, App):
        return App(sig.dual(g.conn), negate_ordinary(g.left, m), negate_ordinary(g.right, m))
    return Const(sig.negate_constant(g.name))


def ordinary_equal(x: OrdinaryFormula, y: OrdinaryFormula, m: InterpretationMap) -> bool:
    return x == y or equal(represent_formula(x, m), represent_formula(y, m), m.system.theory)


# ---------------------------------------------------------------------------
# Ordinary derivations
# ---------------------------------------------------------------------------

def _match(pattern, g, subst: dict[str, Any]) -> bool:
    if isinstance(pattern, Const) and pattern.name in METAVARIABLES:
        bound = subst.get(pattern.name)
        if bound is None:
            subst[pattern.name] = g
            return True
        return bound == g
    if isinstance(pattern, OAtom):
        if not isinstance(g, OAtom):
            return False
        bound = subst.get(PATTERN_ATOM)
        if bound is None:
            subst[PATTERN_ATOM] = g.name
        elif bound != g.name:
            return False
        return pattern.positive == g.positive
    if isinstance(pattern, App):
        return (isinstance(g, App) and g.conn == pattern.conn
                and _match(pattern.left, g.left, subst) and _match(pattern.right, g.right, subst))
    return pattern == g


def _instantiate(pattern, subst: dict[str, Any]):
    if isinstance(pattern, Const) and pattern.name in METAVARIABLES:
        return subst[pattern.name]
    if isinstance(pattern, OAtom):
        return OAtom(subst[PATTERN_ATOM], pattern.positive)
    if isinstance(pattern, App):
        return App(pattern.conn, _instantiate(pattern.left, subst), _instantiate(pattern.right, subst))
    return pattern


def apply_ordinary_rule(rule: OrdinaryRule, redex: OrdinaryFormula) -> Optional[OrdinaryFormula]:
    """The conclusion of ``rule`` at ``redex``; ``None`` when it does not match or leaves an atom open."""
    subst: dict[str, Any] = {}
    if not _match(rule.premiss, redex, subst):
        return None
    try:
        return _instantiate(rule.conclusion, subst)
    except KeyError:
        return None


def ordinary_rule_instance(rule: OrdinaryRule, x: OrdinaryFormula, y: OrdinaryFormula) -> Optional[dict[str, Any]]:
    subst: dict[str, Any] = {}
    if _match(rule.premiss, x, subst) and _match(rule.conclusion, y, subst):
        return subst
    return None


def ordinary_step_valid(rule_name: str, before: OrdinaryFormula, path: Path,
                        after: OrdinaryFormula, m: InterpretationMap) -> bool:
    try:
        x, y = subterm_at(before, path), subterm_at(after, path)
    except ValueError:
        return False
    if replace_at(before, path, y) != after:
        return False
    if rule_name == EQUALITY:
        return ordinary_equal(x, y, m)
    if not m.target.has_rule(rule_name):
        return False
    return ordinary_rule_instance(m.target.rule(rule_name), x, y) is not None


def check_ordinary(d: SeqDerivation, m: InterpretationMap) -> None:
    """Validate every step of an ordinary sequential derivation.

    Raises:
        TranslationError: Names the first step that is neither a rule instance nor an equality.
    """
    for i, (before, step, after) in enumerate(d.transitions()):
        if not ordinary_step_valid(step.rule, before, step.path, after, m):
            raise TranslationError(
                f"step {i} ({step.rule} at {render_path(step.path)}) is not valid in {m.target.name}: "
                f"{render_ordinary(before)} -> {render_ordinary(after)}"
            )


def export_ordinary(d: SeqDerivation, m: InterpretationMap) -> str:
    lines = [f"seq {m.target.name}", f"start {render_ordinary(d.start)}"]
    for step in d.steps:
        lines.append(f"step {step.rule} @{render_path(step.path)} {render_ordinary(step.result)}")
    return "\n".join(lines) + "\n"


def parse_ordinary_derivation(text: str, m: InterpretationMap, source: Optional[str] = None) -> SeqDerivation:
    system_name, raw = parse_sequential(text, source)
    if system_name != m.target.name:
        raise ParseError(f"derivation is over {system_name!r}, expected {m.target.name!r}", 1, 1, source)
    atoms, consts, conns = frozenset(m.atoms), frozenset(m.target.constants), frozenset(m.target.connectives)
    start = _from_tokens(raw.start, atoms, consts, conns)
    steps = tuple(SeqStep(s.rule, s.path, _from_tokens(s.result, atoms, consts, conns)) for s in raw.steps)
    return SeqDerivation(start, steps)


# ---------------------------------------------------------------------------
# Tameness and derivation translation
# ---------------------------------------------------------------------------

def is_tame(d: Derivation, sys: SystemDef) -> bool:
    """True when no logical step sits in the scope of an atom."""
    sig = sys.signature
    for before, step, _ in sequentialize(d).transitions():
        if sys.rule(step.rule).kind == RuleKind.EQUALITY:
            continue
        if any(sig.is_atom(c) for c in connectives_along(before, step.path)):
            return False
    return True


def _find_rule(sys: SystemDef, kind: RuleKind, alpha: str, beta: str) -> RuleScheme:
    for rule in sys.rules:
        if rule.kind == kind and rule.alpha == alpha and rule.beta == beta:
            return rule
    raise TranslationError(f"system {sys.name} has no {kind.value}-rule for {alpha}/{beta}")


class _Steps:
    """Accumulates ordinary steps at redex level, starting from ``start``."""

    def __init__(self, start: OrdinaryFormula):
        self.current = start
        self.steps: list[tuple[str, Path, OrdinaryFormula]] = []

    def add(self, rule: str, path: Path, result_redex: OrdinaryFormula) -> None:
        after = replace_at(self.current, path, result_redex)
        if after != self.current:
            self.steps.append((rule, path, after))
            self.current = after

    def equal_to(self, target: OrdinaryFormula) -> None:
        if target != self.current:
            self.steps.append((EQUALITY, (), target))
            self.current = target


def _switch_candidates(m: InterpretationMap, rule: RuleScheme, subst: dict[str, Formula],
                       x: OrdinaryFormula, y: OrdinaryFormula) -> list[_Steps]:
    if rule.alpha != m.times or rule.beta != m.plus:
        return []
    P, T = m.plus, m.times
    A, B, C, D = (interpret_formula(subst[k], m) for k in METAVARIABLES)
    seq = _Steps(x)
    if rule.kind == RuleKind.DOWN:
        # ((A + B) x (C + D)) -s-> ((A x (C + D)) + B) -s-> (((C x A) + D) + B)
        seq.add("s", (), App(P, App(T, A, App(P, C, D)), B))
        seq.equal_to(App(P, App(T, App(P, C, D), A), B))
        seq.add("s", (LEFT,), App(P, App(T, C, A), D))
    else:
        # ((A + B) x (C x D)) = (((A + B) x C) x D) -s-> (((A x C) + B) x D) -s-> ((B x D) + (A x C))
        seq.equal_to(App(T, App(T, App(P, A, B), C), D))
        seq.add("s", (LEFT,), App(P, App(T, A, C), B))
        seq.equal_to(App(T, App(P, B, App(T, A, C)), D))
        seq.add("s", (), App(P, App(T, B, D), App(T, A, C)))
    seq.equal_to(y)
    return [seq]


def _identity_candidates(m: InterpretationMap, x: OrdinaryFormula, y: OrdinaryFormula) -> list[_Steps]:
    out = []
    for rule in m.target.rules:
        if not rule.name.startswith("ai."):
            continue
        for atom in m.atoms:
            subst = {PATTERN_ATOM: atom}
            premiss, conclusion = _instantiate(rule.premiss, subst), _instantiate(rule.conclusion, subst)
            if ordinary_equal(x, premiss, m) and ordinary_equal(conclusion, y, m):
                seq = _Steps(x)
                seq.equal_to(premiss)
                seq.add(rule.name, (), conclusion)
                seq.equal_to(y)
                out.append(seq)
    return out


def _direct_candidates(m: InterpretationMap, x: OrdinaryFormula, y: OrdinaryFormula) -> list[_Steps]:
    out = []
    for rule in m.target.rules:
        result = apply_ordinary_rule(rule, x)
        if result is not None and ordinary_equal(result, y, m):
            seq = _Steps(x)
            seq.add(rule.name, (), result)
            seq.equal_to(y)
            out.append(seq)
    return out


def _translate_step(m: InterpretationMap, rule: RuleScheme, x: Formula, y: Formula) -> list[tuple[str, Path, OrdinaryFormula]]:
    ix, iy = interpret_formula(x, m), interpret_formula(y, m)
    if ix == iy:
        return []
    if ordinary_equal(ix, iy, m):
        return [(EQUALITY, (), iy)]
    if rule.kind == RuleKind.EQUALITY:
        raise TranslationError(f"equality step interprets to unequal {render_ordinary(ix)} and {render_ordinary(iy)}")
    subst = match_rule_instance(rule, x, y, m.system.signature) or {}
    candidates = _direct_candidates(m, ix, iy) + _identity_candidates(m, ix, iy)
    if subst:
        candidates += _switch_candidates(m, rule, subst, ix, iy)
    for seq in candidates:
        if all(ordinary_step_valid(r, before, p, after, m)
               for (r, p, after), before in zip(seq.steps, [ix] + [s[2] for s in seq.steps])):
            return seq.steps
    raise TranslationError(
        f"no {m.target.name} justification for {rule.name}: {render_ordinary(ix)} -> {render_ordinary(iy)}"
    )


def interpret_derivation(d: Derivation, m: InterpretationMap) -> SeqDerivation:
    """Translate a tame derivation into an ordinary sequential derivation of ``m.target``.

    Raises:
        TranslationError: The derivation is not tame or a step has no ordinary justification.
        NotInterpretable: Some formula of the derivation has no reading.
    """
    sys = m.system
    if not is_tame(d, sys):
        raise TranslationError("derivation is not tame")
    s = sequentialize(d)
    current = interpret_formula(s.start, m)
    start = current
    steps: list[SeqStep] = []
    for before, step, after in s.transitions():
        rule = sys.rule(step.rule)
        x, y = subterm_at(before, step.path), subterm_at(after, step.path)
        if rule.kind == RuleKind.EQUALITY:
            whole = interpret_formula(after, m)
            if whole != current:
                if not ordinary_equal(current, whole, m):
                    raise TranslationError(f"equality step {step.rule} interprets to unequal formulae")
                steps.append(SeqStep(EQUALITY, (), whole))
                current = whole
            continue
        for rule_name, rel, redex_after in _translate_step(m, rule, x, y):
            result = replace_at(current, step.path, redex_after)
            steps.append(SeqStep(rule_name, step.path + rel, result))
            current = result
        expected = interpret_formula(after, m)
        if current != expected:
            raise TranslationError(f"translated step {step.rule} ends at {render_ordinary(current)}, "
                                   f"expected {render_ordinary(expected)}")
    out = SeqDerivation(start, tuple(steps))
    check_ordinary(out, m)
    return out


def represent_derivation(d: SeqDerivation, m: InterpretationMap) -> Derivation:
    """Translate an ordinary derivation into a tame subatomic one using fixed templates.

    Raises:
        TranslationError: Unknown ordinary rule or an invalid ordinary step.
    """
    check_ordinary(d, m)
    sys = m.system
    P, T = m.plus, m.times
    zero = Const(sys.zero)
    u1, u2 = Const(m.u1), Const(m.u2)
    current = represent_formula(d.start, m)
    start = current
    steps: list[SeqStep] = []

    def emit(rule: str, path: Path, redex_after: Formula) -> None:
        nonlocal current
        after = replace_at(current, path, redex_after)
        if after != current:
            steps.append(SeqStep(rule, path, after))
            current = after

    for before, step, after in d.transitions():
        p = step.path
        target_after = represent_formula(after, m)
        if step.rule == EQUALITY:
            emit(EQUALITY, p, subterm_at(target_after, p))
            continue
        redex = subterm_at(before, p)
        subst = ordinary_rule_instance(m.target.rule(step.rule), redex, subterm_at(after, p)) or {}
        rep = {k: represent_formula(v, m) for k, v in subst.items() if k in METAVARIABLES}
        if step.rule == "ai.down":
            atom = subst[PATTERN_ATOM]
            emit(EQUALITY, p, App(atom, App(P, u1, u2), App(P, u2, u1)))
            emit(_find_rule(sys, RuleKind.DOWN, ATOM_FAMILY, P).name, p,
                 App(P, App(atom, u1, u2), App(atom, u2, u1)))
        elif step.rule == "ai.up":
            atom = subst[PATTERN_ATOM]
            emit(_find_rule(sys, RuleKind.UP, T, ATOM_FAMILY).name, p,
                 App(atom, App(T, u1, u2), App(T, u2, u1)))
        elif step.rule == "s":
            emit(EQUALITY, p, App(T, App(P, rep["A"], rep["B"]), App(P, rep["C"], zero)))
            emit(_find_rule(sys, RuleKind.DOWN, T, P).name, p,
                 App(P, App(T, rep["A"], rep["C"]), App(P, rep["B"], zero)))
        elif step.rule == "q.down":
            seq = redex.conn
            emit(_find_rule(sys, RuleKind.DOWN, seq, P).name, p,
                 represent_formula(subterm_at(after, p), m))
        elif step.rule == "q.up":
            seq = redex.right.conn
            emit(_find_rule(sys, RuleKind.UP, T, seq).name, p,
                 represent_formula(subterm_at(after, p), m))
        else:
            raise TranslationError(f"unknown ordinary rule {step.rule!r}")
        emit(EQUALITY, p, subterm_at(target_after, p))
        if current != target_after:
            raise TranslationError(f"template for {step.rule} does not reach {render_ordinary(after)}")
    return from_sequential(SeqDerivation(start, tuple(steps)))


# ---------------------------------------------------------------------------
# Preservability audit
# ---------------------------------------------------------------------------

@dataclass
class PreservabilityReport:
    map_name: str
    samples: int
    conditions: list[ConditionResult]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions)

    def to_dict(self) -> dict[str, Any]:
        return {
            "map": self.map_name,
            "samples": self.samples,
            "preservable": self.passed,
            "conditions": [c.to_dict() for c in self.conditions],
        }

    def render(self) -> str:
        head = f"{self.map_name}: {self.samples} samples, " + ("no counterexamples" if self.passed else "counterexamples found")
        lines = [head]
        for c in self.conditions:
            line = f"  condition {c.number}: {'pass' if c.passed else 'FAIL'} - {c.message}"
            if c.witness:
                line += f" (counterexample: {c.witness})"
            lines.append(line)
        return "\n".join(lines)


def _sample_formula(m: InterpretationMap, rng: random.Random, max_nodes: int) -> Formula:
    if rng.random() < 0.5:
        return represent_formula(random_ordinary_formula(m, rng, max_nodes), m)
    return random_formula(m.system.signature, rng, max_nodes)


def random_ordinary_formula(m: InterpretationMap, rng: random.Random, max_nodes: int = 9) -> OrdinaryFormula:
    """A random ordinary formula with at most ``max_nodes`` nodes."""
    if max_nodes < 3 or rng.random() < 0.3:
        if m.atoms and rng.random() < 0.6:
            return OAtom(rng.choice(m.atoms), rng.random() < 0.5)
        return Const(rng.choice(m.target.constants))
    budget = max_nodes - 1
    left_budget = rng.randint(1, budget - 1)
    return App(rng.choice(m.target.connectives),
               random_ordinary_formula(m, rng, left_budget),
               random_ordinary_formula(m, rng, budget - left_budget))


def audit_preservable(sys: SystemDef, m: InterpretationMap, budget: int, seed: int,
                      max_nodes: int = 9) -> PreservabilityReport:
    """Sample the preservability conditions over random formulae."""
    rng = random.Random(seed)
    th = sys.theory
    sig = sys.signature
    one = Const(sys.one)
    found: dict[int, Optional[str]] = {1: None, 2: None, 3: None, 4: None}
    for problem in m.naturality_problems():
        found[4] = found[4] or problem
    constants = [Const(c) for c in sig.constants]
    for _ in range(budget):
        a = _sample_formula(m, rng, max_nodes)
        try:
            image = interpret_formula(a, m)
        except NotInterpretable:
            continue
        if found[1] is None:
            moves = elementary_moves(a, th, PLUS_ONLY, introductions=False)
            if moves:
                b = apply_move(a, rng.choice(moves))
                if not is_interpretable(b, m):
                    found[1] = render_formula(b)
        if found[2] is None and isinstance(a, App):
            for part in (a.left, a.right):
                if not is_interpretable(part, m):
                    found[2] = render_formula(a)
        if found[3] is None and isinstance(a, App) and sig.is_atom(a.conn):
            lefts = [c for c in constants if equal(App(sys.plus, a.left, c), one, th)]
            rights = [c for c in constants if equal(App(sys.plus, a.right, c), one, th)]
            for x in lefts:
                for y in rights:
                    if not is_interpretable(App(a.conn, x, y), m):
                        found[3] = render_formula(App(a.conn, x, y))
        if found[4] is None:
            neg = negate(a, sig)
            try:
                if interpret_formula(neg, m) != negate_ordinary(image, m):
                    found[4] = render_formula(neg)
            except NotInterpretable:
                found[4] = render_formula(neg)
    messages = {
        1: "interpretability is closed under equality of plus",
        2: "arguments of interpretable formulae are interpretable",
        3: "atoms over complements of interpretable arguments are interpretable",
        4: "negation commutes with interpretation",
    }
    conditions = [ConditionResult(n, found[n] is None, messages[n], found[n]) for n in range(1, 5)]
    structural = [a for a in sig.atoms if sig.info(a).assoc or sig.info(a).comm or sig.info(a).unit]
    conditions.append(ConditionResult(5, not structural, "atoms are non-commutative, non-associative and non-unitary",
                                      ", ".join(structural) or None))
    report = PreservabilityReport(m.name, budget, conditions)
    logger.info("Audited %s over %d samples: %s", m.name, budget, "pass" if report.passed else "counterexamples")
    return report
