"""Subatomic proof systems: documents, rule schemes, matching and the splittability lint.

A system is a signature, a theory and a set of medial-shaped rule schemes.
Down schemes read ``((A b B) a (C b D)) -> ((A a C) b (B a' D))`` with ``a'``
the weak member of ``a``'s pair; up schemes read
``((A b B) a (C b' D)) -> ((A a C) b (B a D))`` with ``b'`` the strong member
of ``b``'s pair. The token ``atom`` in a scheme stands for every atom.
"""

import logging
import threading
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional

from subatomic_kernel.errors import (
    ConfigurationError,
    ParseError,
    SignatureError,
    SystemDefinitionError,
    TheoryError,
)
from subatomic_kernel.services.builtin_systems import BUILTIN_DOCUMENTS
from subatomic_kernel.services.formula import App, Const, Formula, render_formula, tokenize
from subatomic_kernel.services.theory import (
    FULL,
    Axiom,
    ConnectiveInfo,
    Polarity,
    Signature,
    Theory,
    equal,
)

logger = logging.getLogger(__name__)

ATOM_FAMILY = "atom"
EQUALITY = "="
METAVARIABLES = ("A", "B", "C", "D")


class RuleKind(str, Enum):
    DOWN = "down"
    UP = "up"
    EQUALITY = "equality"


@dataclass(frozen=True)
class RuleScheme:
    name: str
    kind: RuleKind
    alpha: Optional[str] = None
    beta: Optional[str] = None
    axiom: Optional[Axiom] = None

    @property
    def is_logical(self) -> bool:
        return self.kind != RuleKind.EQUALITY


GENERIC_EQUALITY = RuleScheme(EQUALITY, RuleKind.EQUALITY)


def _conn_matches(scheme_conn: Optional[str], conn: str, sig: Signature) -> bool:
    if scheme_conn == ATOM_FAMILY:
        return sig.is_atom(conn)
    return scheme_conn == conn


# ---------------------------------------------------------------------------
# System definitions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SystemDef:
    name: str
    signature: Signature
    theory: Theory
    rules: tuple[RuleScheme, ...]
    one: str
    times: Optional[str] = None
    plus: Optional[str] = None
    _by_name: dict[str, RuleScheme] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        by_name = {r.name: r for r in self.rules}
        by_name[EQUALITY] = GENERIC_EQUALITY
        for axiom in self.theory.axioms():
            by_name.setdefault(axiom.name, RuleScheme(axiom.name, RuleKind.EQUALITY, axiom=axiom))
        object.__setattr__(self, "_by_name", by_name)

    @property
    def zero(self) -> Optional[str]:
        if self.plus is None:
            return None
        return self.signature.info(self.plus).unit

    @property
    def equality_rules(self) -> list[RuleScheme]:
        return [r for r in self._by_name.values() if r.kind == RuleKind.EQUALITY and r.axiom is not None]

    def rule(self, name: str) -> RuleScheme:
        try:
            return self._by_name[name]
        except KeyError:
            raise SignatureError(f"system {self.name} has no rule {name!r}") from None

    def has_rule(self, name: str) -> bool:
        return name in self._by_name

    def require_plus(self) -> tuple[str, str, str, str]:
        """The distinguished ``(times, plus, one, zero)``, or a configuration error."""
        if self.times is None or self.plus is None or self.zero is None:
            raise ConfigurationError(f"system {self.name} has no distinguished times/plus pair")
        unit = self.signature.info(self.times).unit
        return self.times, self.plus, unit or self.one, self.zero

    def down_fragment(self) -> "SystemDef":
        down = tuple(r for r in self.rules if r.kind == RuleKind.DOWN)
        if len(down) == len(self.rules):
            return self
        name = self.name if self.name.endswith(".down") else f"{self.name}.down"
        return SystemDef(name, self.signature, self.theory, down, self.one, self.times, self.plus)

    def splitting_fragment(self) -> "SystemDef":
        """The down-rules over plus; the rules the splitting constructions emit."""
        down = tuple(r for r in self.rules if r.kind == RuleKind.DOWN and r.beta == self.plus)
        if len(down) == len(self.rules):
            return self
        name = self.name if self.name.endswith(".down") else f"{self.name}.down"
        return SystemDef(name, self.signature, self.theory, down, self.one, self.times, self.plus)

    def without_rule(self, name: str) -> "SystemDef":
        rules = tuple(r for r in self.rules if r.name != name)
        return SystemDef(self.name, self.signature, self.theory, rules, self.one, self.times, self.plus)

    def parse(self, text: str, source: Optional[str] = None) -> Formula:
        return self.signature.parse(text, source)


# ---------------------------------------------------------------------------
# Rule instances
# ---------------------------------------------------------------------------

def rule_sides(rule: RuleScheme, sig: Signature, subst: dict[str, Formula],
               alpha: Optional[str] = None, beta: Optional[str] = None) -> tuple[Formula, Formula]:
    """Premiss and conclusion of a logical rule instance.

    ``alpha``/``beta`` pick the concrete atom when the scheme uses the atom family.
    """
    a = alpha or rule.alpha
    b = beta or rule.beta
    if a == ATOM_FAMILY or b == ATOM_FAMILY:
        raise SignatureError(f"rule {rule.name} needs a concrete atom")
    A, B, C, D = (subst[k] for k in METAVARIABLES)
    if rule.kind == RuleKind.DOWN:
        premiss = App(a, App(b, A, B), App(b, C, D))
        conclusion = App(b, App(a, A, C), App(sig.weak(a), B, D))
    elif rule.kind == RuleKind.UP:
        premiss = App(a, App(b, A, B), App(sig.strong(b), C, D))
        conclusion = App(b, App(a, A, C), App(a, B, D))
    else:
        raise SignatureError(f"{rule.name} is not a logical rule")
    return premiss, conclusion


def _split_premiss(rule: RuleScheme, premiss: Formula, sig: Signature):
    if not (isinstance(premiss, App) and _conn_matches(rule.alpha, premiss.conn, sig)):
        return None
    left, right = premiss.left, premiss.right
    if not (isinstance(left, App) and isinstance(right, App)):
        return None
    if not _conn_matches(rule.beta, left.conn, sig):
        return None
    subst = {"A": left.left, "B": left.right, "C": right.left, "D": right.right}
    return subst, premiss.conn, left.conn


def rule_conclusion(rule: RuleScheme, premiss: Formula, sig: Signature) -> Optional[Formula]:
    """Apply a logical rule forwards at the root, or ``None`` when it does not match."""
    found = _split_premiss(rule, premiss, sig)
    if found is None:
        return None
    subst, a, b = found
    expected, conclusion = rule_sides(rule, sig, subst, a, b)
    return conclusion if expected == premiss else None


def rule_premiss(rule: RuleScheme, conclusion: Formula, sig: Signature) -> Optional[Formula]:
    """Apply a logical rule backwards at the root, or ``None`` when it does not match."""
    if not (isinstance(conclusion, App) and _conn_matches(rule.beta, conclusion.conn, sig)):
        return None
    left, right = conclusion.left, conclusion.right
    if not (isinstance(left, App) and isinstance(right, App)):
        return None
    if not _conn_matches(rule.alpha, left.conn, sig):
        return None
    subst = {"A": left.left, "C": left.right, "B": right.left, "D": right.right}
    premiss, expected = rule_sides(rule, sig, subst, left.conn, conclusion.conn)
    return premiss if expected == conclusion else None


def match_rule_instance(rule: RuleScheme, premiss: Formula, conclusion: Formula,
                        sig: Signature) -> Optional[dict[str, Formula]]:
    """The structural substitution making ``premiss -> conclusion`` an instance of ``rule``."""
    if not rule.is_logical:
        return None
    found = _split_premiss(rule, premiss, sig)
    if found is None:
        return None
    subst, a, b = found
    expected_premiss, expected_conclusion = rule_sides(rule, sig, subst, a, b)
    if expected_premiss == premiss and expected_conclusion == conclusion:
        return subst
    return None


def is_cut(rule: RuleScheme, sys: SystemDef) -> bool:
    if sys.times is None:
        raise ConfigurationError(f"system {sys.name} has no distinguished times")
    return rule.kind == RuleKind.UP and rule.alpha == sys.times


def equality_rule(sys: SystemDef, name: str = EQUALITY) -> RuleScheme:
    return sys.rule(name)


# ---------------------------------------------------------------------------
# Splittability lint
# ---------------------------------------------------------------------------

@dataclass
class ConditionResult:
    number: int
    passed: bool
    message: str
    witness: Optional[str] = None

    def to_dict(self) -> dict[str, Any]:
        return {"condition": self.number, "passed": self.passed, "message": self.message, "witness": self.witness}


@dataclass
class LintReport:
    system: str
    conditions: list[ConditionResult]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions)

    def failed(self) -> list[int]:
        return [c.number for c in self.conditions if not c.passed]

    def condition(self, number: int) -> ConditionResult:
        return self.conditions[number - 1]

    def to_dict(self) -> dict[str, Any]:
        return {
            "system": self.system,
            "splittable": self.passed,
            "conditions": [c.to_dict() for c in self.conditions],
        }

    def render(self) -> str:
        if self.passed:
            return f"{self.system}: conditions 1-5: pass"
        lines = [f"{self.system}: not splittable"]
        for c in self.conditions:
            verdict = "pass" if c.passed else "FAIL"
            line = f"  condition {c.number}: {verdict} - {c.message}"
            if c.witness:
                line += f" (witness: {c.witness})"
            lines.append(line)
        return "\n".join(lines)


def _condition_distinguished(sys: SystemDef) -> ConditionResult:
    sig = sys.signature
    if sys.times is None:
        return ConditionResult(1, False, "no distinguished times connective declared")
    info = sig.info(sys.times)
    if info.polarity != Polarity.STRONG:
        return ConditionResult(1, False, "times must be strong", sys.times)
    if info.unit is None:
        return ConditionResult(1, False, "times has no unit", sys.times)
    if not equal(Const(info.unit), Const(sys.one), sys.theory):
        return ConditionResult(1, False, "unit of times is not the distinguished one", info.unit)
    if sys.zero is None:
        return ConditionResult(1, False, "plus has no unit", sys.plus)
    return ConditionResult(1, True, f"times={sys.times} (unit {info.unit}), plus={sys.plus} (unit {sys.zero})")


def _condition_rules(sys: SystemDef) -> ConditionResult:
    sig = sys.signature
    for rule in sys.rules:
        if rule.kind != RuleKind.DOWN:
            return ConditionResult(2, False, "system contains rules other than down-rules", rule.name)
        if rule.beta != sys.plus:
            return ConditionResult(2, False, "down-rule with inner connective other than plus", rule.name)
    covered = {r.alpha for r in sys.rules}
    for name, info in sig.connectives.items():
        if name == sys.plus:
            continue
        key = ATOM_FAMILY if info.is_atom else name
        if key not in covered:
            return ConditionResult(2, False, "missing down-rule", f"{key}.down")
    return ConditionResult(2, True, "one down-rule over plus per connective")


def _condition_complements(sys: SystemDef) -> ConditionResult:
    sig = sys.signature
    one = Const(sys.one)
    for c in sig.constants:
        f = App(sys.plus, Const(c), Const(sig.negate_constant(c)))
        if not equal(f, one, sys.theory):
            return ConditionResult(3, False, f"{render_formula(f)} is not equal to {sys.one}", c)
    return ConditionResult(3, True, "u + ~u = 1 for every constant")


def _condition_plus_ac(sys: SystemDef) -> ConditionResult:
    info = sys.signature.info(sys.plus)
    if not info.assoc:
        return ConditionResult(4, False, "plus is not associative", sys.plus)
    if not info.comm:
        return ConditionResult(4, False, "plus is not commutative", sys.plus)
    return ConditionResult(4, True, "plus is associative and commutative")


def _condition_strong_units(sys: SystemDef) -> ConditionResult:
    sig = sys.signature
    one = Const(sys.one)
    for name in sig.connectives:
        f = App(sig.strong(name), one, one)
        if not equal(f, one, sys.theory):
            return ConditionResult(5, False, f"{render_formula(f)} is not equal to {sys.one}", name)
    return ConditionResult(5, True, "1 a 1 = 1 for the strong member of every pair")


def lint_splittable(sys: SystemDef) -> LintReport:
    first = _condition_distinguished(sys)
    if not first.passed:
        rest = [ConditionResult(n, False, "requires condition 1") for n in range(2, 6)]
        return LintReport(sys.name, [first] + rest)
    return LintReport(
        sys.name,
        [
            first,
            _condition_rules(sys),
            _condition_complements(sys),
            _condition_plus_ac(sys),
            _condition_strong_units(sys),
        ],
    )


def require_splittable(sys: SystemDef) -> SystemDef:
    """The down-rules over plus of ``sys`` if they pass the lint, else a configuration error."""
    down = sys.splitting_fragment()
    report = lint_splittable(down)
    if not report.passed:
        raise ConfigurationError(f"system {down.name} is not splittable: conditions {report.failed()} fail")
    return down


# ---------------------------------------------------------------------------
# Documents
# ---------------------------------------------------------------------------

_POLARITIES = {p.value: p for p in Polarity}


class _Line:
    def __init__(self, tokens: list[tuple[str, int, int]], source: Optional[str]):
        self.tokens = tokens
        self.source = source
        self.keyword = tokens[0][0]

    @property
    def words(self) -> list[str]:
        return [t for t, _, _ in self.tokens]

    def error(self, message: str, index: int = 0):
        _, line, col = self.tokens[min(index, len(self.tokens) - 1)]
        raise ParseError(message, line, col, self.source)

    def arity(self, n: int) -> None:
        if len(self.tokens) != n:
            self.error(f"'{self.keyword}' expects {n - 1} argument(s)", min(n, len(self.tokens) - 1))


def _lines(text: str, source: Optional[str]) -> list[_Line]:
    by_line: dict[int, list[tuple[str, int, int]]] = {}
    for tok in tokenize(text, source):
        by_line.setdefault(tok[1], []).append(tok)
    return [_Line(toks, source) for _, toks in sorted(by_line.items())]


def _options(line: _Line, start: int) -> tuple[dict[str, str], set[str]]:
    values: dict[str, str] = {}
    flags: set[str] = set()
    for i, word in enumerate(line.words[start:], start=start):
        if "=" in word:
            key, _, value = word.partition("=")
            if not key or not value:
                line.error(f"malformed option {word!r}", i)
            values[key] = value
        else:
            flags.add(word)
    return values, flags


def load_system(text: str, source: Optional[str] = None) -> SystemDef:
    """Parse and validate a system-definition document.

    Args:
        text: The document.
        source: Name used in parse-error positions.

    Returns:
        The validated system.

    Raises:
        ParseError: Malformed line, with line and column.
        SystemDefinitionError: A semantic invariant is violated.
    """
    name: Optional[str] = None
    constants: list[str] = []
    one: Optional[str] = None
    times: Optional[str] = None
    negation: dict[str, str] = {}
    declared: dict[str, tuple[str, Polarity, bool, bool, Optional[str]]] = {}
    atoms: list[str] = []
    assignments: dict[tuple[str, str, str], str] = {}
    identifications: list[tuple[str, str]] = []
    rule_lines: list[tuple[_Line, str, RuleKind, str, str]] = []

    for line in _lines(text, source):
        kw, words = line.keyword, line.words
        if kw == "system":
            line.arity(2)
            name = words[1]
        elif kw == "constants":
            if len(words) < 2:
                line.error("'constants' expects at least one constant")
            constants.extend(words[1:])
        elif kw == "one":
            line.arity(2)
            one = words[1]
        elif kw == "times":
            line.arity(2)
            times = words[1]
        elif kw == "negation":
            line.arity(4)
            if words[2] != "<->":
                line.error("expected '<->'", 2)
            x, y = words[1], words[3]
            for a, b in ((x, y), (y, x)):
                if negation.get(a, b) != b:
                    line.error(f"negation of {a!r} declared twice", 1)
                negation[a] = b
        elif kw == "connective":
            if len(words) < 2:
                line.error("'connective' expects a name")
            values, flags = _options(line, 2)
            unknown = flags - {"assoc", "comm"}
            if unknown:
                line.error(f"unknown connective flag {sorted(unknown)[0]!r}", 2)
            if "dual" not in values or "polarity" not in values:
                line.error("connective needs dual= and polarity=", 1)
            polarity = _POLARITIES.get(values["polarity"])
            if polarity is None:
                line.error(f"unknown polarity {values['polarity']!r}", 2)
            declared[words[1]] = (values["dual"], polarity, "assoc" in flags, "comm" in flags, values.get("unit"))
        elif kw == "atoms":
            atoms.extend(words[1:])
        elif kw == "assign":
            line.arity(6)
            if words[4] != "=":
                line.error("expected '='", 4)
            key = (words[1], words[2], words[3])
            if assignments.get(key, words[5]) != words[5]:
                line.error(f"conflicting assignment for ({words[2]} {words[1]} {words[3]})", 1)
            assignments[key] = words[5]
        elif kw == "identify":
            line.arity(4)
            if words[2] != "=":
                line.error("expected '='", 2)
            identifications.append((words[1], words[3]))
        elif kw == "rule":
            line.arity(5)
            try:
                kind = RuleKind(words[2])
            except ValueError:
                line.error(f"unknown rule kind {words[2]!r}", 2)
            if kind == RuleKind.EQUALITY:
                line.error("equality rules are generated from the theory", 2)
            values, flags = _options(line, 3)
            if flags or set(values) != {"alpha", "beta"}:
                line.error("rule needs exactly alpha= and beta=", 3)
            rule_lines.append((line, words[1], kind, values["alpha"], values["beta"]))
        else:
            line.error(f"unknown declaration {kw!r}")

    if name is None:
        raise SystemDefinitionError("document", "missing 'system' line")
    if one is None:
        raise SystemDefinitionError("document", "missing 'one' line")

    connectives = _complete_connectives(declared, atoms, negation)
    try:
        sig = Signature(constants, negation, connectives)
    except SignatureError as e:
        raise SystemDefinitionError("signature", str(e)) from e
    if not sig.is_constant(one):
        raise SystemDefinitionError("signature", f"distinguished one {one!r} is undeclared")
    plus = None
    if times is not None:
        if not sig.is_connective(times):
            raise SystemDefinitionError("signature", f"distinguished times {times!r} is undeclared")
        plus = sig.dual(times)
    try:
        theory = Theory(sig, assignments, identifications, plus)
    except SignatureError as e:
        raise SystemDefinitionError("signature", str(e)) from e
    except TheoryError as e:
        raise SystemDefinitionError("theory", str(e)) from e

    rules: list[RuleScheme] = []
    seen: set[str] = set()
    for line, rule_name, kind, alpha, beta in rule_lines:
        for i, conn in ((3, alpha), (4, beta)):
            if conn == ATOM_FAMILY:
                if not sig.atoms:
                    line.error("rule uses the atom family but no atoms are declared", i)
            elif not sig.is_connective(conn):
                line.error(f"undeclared connective {conn!r}", i)
        if rule_name in seen or rule_name == EQUALITY:
            line.error(f"duplicate rule name {rule_name!r}", 1)
        seen.add(rule_name)
        rules.append(RuleScheme(rule_name, kind, alpha, beta))

    system = SystemDef(name, sig, theory, tuple(rules), one, times, plus)
    logger.info("Loaded system %s (%d rules, %d constants)", name, len(rules), len(sig.constants))
    return system


def _complete_connectives(declared, atoms: list[str], negation: dict[str, str]) -> dict[str, ConnectiveInfo]:
    """Connective table with undeclared duals filled in from their partners."""
    connectives: dict[str, ConnectiveInfo] = {}
    for name, (dual, polarity, assoc, comm, unit) in declared.items():
        connectives[name] = ConnectiveInfo(name, dual, polarity, False, assoc, comm, unit)
    for name, info in list(connectives.items()):
        if info.dual not in connectives and info.dual not in atoms:
            flipped = {Polarity.STRONG: Polarity.WEAK, Polarity.WEAK: Polarity.STRONG}.get(info.polarity, info.polarity)
            unit = negation.get(info.unit) if info.unit is not None else None
            connectives[info.dual] = ConnectiveInfo(info.dual, name, flipped, False, info.assoc, info.comm, unit)
    for atom in atoms:
        if atom in connectives:
            raise SystemDefinitionError("signature", f"atom {atom!r} is also declared as a connective")
        connectives[atom] = ConnectiveInfo(atom, atom, Polarity.BOTH, is_atom=True)
    return connectives


def render_system(sys: SystemDef) -> str:
    """Render a system as a document that ``load_system`` reads back to the same system."""
    sig = sys.signature
    lines = [f"system {sys.name}", "constants " + " ".join(sig.constants), f"one {sys.one}"]
    done: set[str] = set()
    for c in sig.constants:
        if c in done:
            continue
        neg = sig.negate_constant(c)
        lines.append(f"negation {c} <-> {neg}")
        done.update((c, neg))
    for name, info in sig.connectives.items():
        if info.is_atom:
            continue
        parts = [f"connective {name}", f"dual={info.dual}", f"polarity={info.polarity.value}"]
        if info.assoc:
            parts.append("assoc")
        if info.comm:
            parts.append("comm")
        if info.unit is not None:
            parts.append(f"unit={info.unit}")
        lines.append(" ".join(parts))
    if sig.atoms:
        lines.append("atoms " + " ".join(sig.atoms))
    if sys.times is not None:
        lines.append(f"times {sys.times}")
    for (conn, x, y), z in sys.theory.assignments.items():
        lines.append(f"assign {conn} {x} {y} = {z}")
    for x, y in sys.theory.identifications:
        lines.append(f"identify {x} = {y}")
    for rule in sys.rules:
        lines.append(f"rule {rule.name} {rule.kind.value} alpha={rule.alpha} beta={rule.beta}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Built-ins
# ---------------------------------------------------------------------------

_builtin_cache: dict[str, SystemDef] = {}
_builtin_lock = threading.Lock()


def builtin_names() -> list[str]:
    return list(BUILTIN_DOCUMENTS)


def load_builtin(name: str) -> SystemDef:
    """Load a built-in system by name (cached)."""
    found = _builtin_cache.get(name)
    if found is not None:
        return found
    text = BUILTIN_DOCUMENTS.get(name)
    if text is None:
        raise SystemDefinitionError("document", f"unknown built-in system {name!r}; known: {', '.join(builtin_names())}")
    with _builtin_lock:
        found = _builtin_cache.get(name)
        if found is None:
            found = load_system(text, source=f"<builtin {name}>")
            _builtin_cache[name] = found
    return found


def reset_builtin_cache() -> None:
    """Forget loaded built-ins (for testing)."""
    _builtin_cache.clear()


def resolve_system(name_or_text: str) -> SystemDef:
    """A built-in by name, or a system document given inline."""
    if name_or_text.strip() in BUILTIN_DOCUMENTS:
        return load_builtin(name_or_text.strip())
    return load_system(name_or_text)
