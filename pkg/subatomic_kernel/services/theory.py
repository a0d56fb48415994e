"""Signatures, negation and equational theories.

Equality modulo a theory is decided through canonical forms:

1. constants are mapped to the representative of their identification class;
2. applications of constants are folded through the constant algebra
   (assignments, unit instances, and their associative closure);
3. associative connectives are flattened into lists with unit children
   dropped; commutative ones are additionally sorted by rendered text;
4. lists are rebuilt as right-nested binary trees.

The same procedure can record the single-axiom rewrites it performs, which
is how generic equality steps are broken into elementary moves.
"""

import itertools
import logging
import threading
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Iterable, Optional

from subatomic_kernel.config import config
from subatomic_kernel.errors import ConfigurationError, SignatureError, TheoryError
from subatomic_kernel.services.formula import (
    LEFT,
    RIGHT,
    App,
    Const,
    Formula,
    Path,
    first_difference,
    positions,
    parse_formula,
    render_formula,
    replace_at,
    subterm_at,
)

logger = logging.getLogger(__name__)


class Polarity(str, Enum):
    STRONG = "strong"
    WEAK = "weak"
    BOTH = "both"


@dataclass(frozen=True)
class ConnectiveInfo:
    name: str
    dual: str
    polarity: Polarity
    is_atom: bool = False
    assoc: bool = False
    comm: bool = False
    unit: Optional[str] = None


class Signature:
    """Declared constants, their negation, and connectives with their attributes."""

    def __init__(
        self,
        constants: Iterable[str],
        negation: dict[str, str],
        connectives: dict[str, ConnectiveInfo],
    ):
        self.constants: tuple[str, ...] = tuple(constants)
        self.negation = dict(negation)
        self.connectives = dict(connectives)
        self._validate()

    def _validate(self) -> None:
        seen: set[str] = set()
        for c in self.constants:
            if c in seen:
                raise SignatureError(f"constant {c!r} declared twice")
            seen.add(c)
            if c in self.connectives:
                raise SignatureError(f"token {c!r} declared as constant and connective")
        for c in self.constants:
            neg = self.negation.get(c)
            if neg is None:
                raise SignatureError(f"constant {c!r} has no negation")
            if self.negation.get(neg) != c:
                raise SignatureError(f"negation of {c!r} is not involutive")
        for name, info in self.connectives.items():
            dual = self.connectives.get(info.dual)
            if dual is None:
                raise SignatureError(f"dual {info.dual!r} of {name!r} is undeclared")
            if dual.dual != name:
                raise SignatureError(f"duality of {name!r} is not involutive")
            if (info.polarity == Polarity.BOTH) != (info.dual == name):
                raise SignatureError(f"{name!r}: polarity 'both' exactly for self-dual connectives")
            if info.polarity == Polarity.STRONG and dual.polarity != Polarity.WEAK:
                raise SignatureError(f"{name!r} is strong but its dual is not weak")
            if info.is_atom and (info.assoc or info.comm or info.unit is not None):
                raise SignatureError(f"atom {name!r} must be non-associative, non-commutative and non-unitary")
            if info.unit is not None:
                if info.unit not in self.negation:
                    raise SignatureError(f"unit {info.unit!r} of {name!r} is undeclared")
                if dual.unit != self.negation[info.unit]:
                    raise SignatureError(
                        f"unit of {info.dual!r} must be the negation of the unit of {name!r}"
                    )

    # -- lookups ------------------------------------------------------------

    @property
    def atoms(self) -> tuple[str, ...]:
        return tuple(n for n, i in self.connectives.items() if i.is_atom)

    def is_constant(self, token: str) -> bool:
        return token in self.negation

    def is_connective(self, token: str) -> bool:
        return token in self.connectives

    def info(self, conn: str) -> ConnectiveInfo:
        try:
            return self.connectives[conn]
        except KeyError:
            raise SignatureError(f"undeclared connective {conn!r}") from None

    def is_atom(self, conn: str) -> bool:
        info = self.connectives.get(conn)
        return bool(info and info.is_atom)

    def dual(self, conn: str) -> str:
        return self.info(conn).dual

    def negate_constant(self, name: str) -> str:
        try:
            return self.negation[name]
        except KeyError:
            raise SignatureError(f"undeclared constant {name!r}") from None

    def strong(self, conn: str) -> str:
        """The strong member of ``conn``'s dual pair (itself when self-dual)."""
        info = self.info(conn)
        return conn if info.polarity != Polarity.WEAK else info.dual

    def weak(self, conn: str) -> str:
        """The weak member of ``conn``'s dual pair (itself when self-dual)."""
        info = self.info(conn)
        return conn if info.polarity != Polarity.STRONG else info.dual

    # -- formulae -----------------------------------------------------------

    def validate(self, f) -> None:
        stack = [f]
        while stack:
            node = stack.pop()
            if isinstance(node, App):
                if node.conn not in self.connectives:
                    raise SignatureError(f"undeclared connective {node.conn!r}")
                stack.append(node.left)
                stack.append(node.right)
            elif isinstance(node, Const):
                if node.name not in self.negation:
                    raise SignatureError(f"undeclared constant {node.name!r}")

    def parse(self, text: str, source: Optional[str] = None) -> Formula:
        f = parse_formula(text, source)
        self.validate(f)
        return f


def negate(f: Formula, sig: Signature) -> Formula:
    """De Morgan negation: constants via their negation, connectives via their duals."""
    if isinstance(f, App):
        return App(sig.dual(f.conn), negate(f.left, sig), negate(f.right, sig))
    if isinstance(f, Const):
        return Const(sig.negate_constant(f.name))
    raise SignatureError(f"cannot negate {f!r}")


# ---------------------------------------------------------------------------
# Axioms and elementary moves
# ---------------------------------------------------------------------------

class AxiomKind(str, Enum):
    ASSOC = "assoc"
    COMM = "comm"
    UNIT = "unit"
    ASSIGN = "assign"
    IDENTIFY = "identify"


@dataclass(frozen=True)
class Axiom:
    """One equational axiom read in one direction.

    ``ASSOC``: ``((A c B) c C) = (A c (B c C))``; ``COMM``: ``(A c B) = (B c A)``;
    ``UNIT``: ``(A c u) = A`` (side ``r``) or ``(u c A) = A`` (side ``l``);
    ``ASSIGN``: ``(x c y) = z`` with ``args = (x, y, z)``;
    ``IDENTIFY``: ``x = y`` with ``args = (x, y)``.
    ``converse`` reads the axiom right to left.
    """

    kind: AxiomKind
    conn: Optional[str] = None
    args: tuple[str, ...] = ()
    side: str = RIGHT
    converse: bool = False

    @property
    def name(self) -> str:
        base = f"={self.kind.value}"
        if self.conn:
            base += f".{self.conn}"
        if self.kind == AxiomKind.UNIT:
            base += f".{self.side}"
        if self.args and self.kind != AxiomKind.UNIT:
            base += "." + ".".join(self.args)
        return base + ("'" if self.converse else "")

    def inverse(self) -> "Axiom":
        if self.kind == AxiomKind.COMM:
            return self
        return Axiom(self.kind, self.conn, self.args, self.side, not self.converse)


@dataclass(frozen=True)
class Move:
    axiom: Axiom
    path: Path


def rewrite(axiom: Axiom, f: Formula) -> Optional[Formula]:
    """Apply ``axiom`` at the root of ``f``; ``None`` when it does not apply."""
    kind, conn = axiom.kind, axiom.conn
    if kind == AxiomKind.COMM:
        if isinstance(f, App) and f.conn == conn:
            return App(conn, f.right, f.left)
        return None
    if kind == AxiomKind.ASSOC:
        if not axiom.converse:
            if isinstance(f, App) and f.conn == conn and isinstance(f.left, App) and f.left.conn == conn:
                return App(conn, f.left.left, App(conn, f.left.right, f.right))
        elif isinstance(f, App) and f.conn == conn and isinstance(f.right, App) and f.right.conn == conn:
            return App(conn, App(conn, f.left, f.right.left), f.right.right)
        return None
    if kind == AxiomKind.UNIT:
        unit = Const(axiom.args[0])
        if axiom.converse:
            return App(conn, f, unit) if axiom.side == RIGHT else App(conn, unit, f)
        if isinstance(f, App) and f.conn == conn:
            if axiom.side == RIGHT and f.right == unit:
                return f.left
            if axiom.side == LEFT and f.left == unit:
                return f.right
        return None
    if kind == AxiomKind.ASSIGN:
        x, y, z = axiom.args
        lhs = App(conn, Const(x), Const(y))
        if axiom.converse:
            return lhs if f == Const(z) else None
        return Const(z) if f == lhs else None
    if kind == AxiomKind.IDENTIFY:
        x, y = axiom.args
        if axiom.converse:
            x, y = y, x
        return Const(y) if f == Const(x) else None
    return None


def apply_move(f: Formula, move: Move) -> Formula:
    sub = subterm_at(f, move.path)
    out = rewrite(move.axiom, sub)
    if out is None:
        raise TheoryError(f"axiom {move.axiom.name} does not apply at {'.'.join(move.path) or '.'}")
    return replace_at(f, move.path, out)


def invert_moves(start: Formula, moves: list[Move]) -> list[Move]:
    """Moves leading from the end of ``moves`` back to ``start``."""
    return [Move(m.axiom.inverse(), m.path) for m in reversed(moves)]


# ---------------------------------------------------------------------------
# Theory subsets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TheorySubset:
    """Selects the axioms an equality check may use.

    ``connectives=None`` selects the axioms of every connective. ``plus_only``
    resolves to the axioms of the distinguished weak connective of the theory.
    """

    name: str
    connectives: Optional[frozenset[str]] = None
    identifications: bool = True
    plus_only: bool = False


FULL = TheorySubset("full")
PLUS_ONLY = TheorySubset("plus", frozenset(), identifications=False, plus_only=True)
EMPTY = TheorySubset("empty", frozenset(), identifications=False)


# ---------------------------------------------------------------------------
# Theory
# ---------------------------------------------------------------------------

class Theory:
    """Axioms over a signature, closed under negation.

    Associativity, commutativity and units come from the connective
    attributes; ``assignments`` maps ``(conn, x, y)`` to ``z`` for axioms
    ``x conn y = z``; ``identifications`` are unordered constant pairs.
    """

    def __init__(
        self,
        sig: Signature,
        assignments: dict[tuple[str, str, str], str],
        identifications: Iterable[tuple[str, str]] = (),
        plus: Optional[str] = None,
    ):
        self.sig = sig
        self.plus = plus
        self.assignments: dict[tuple[str, str, str], str] = {}
        for (conn, x, y), z in assignments.items():
            self._add_assignment(conn, x, y, z)
        for (conn, x, y), z in list(self.assignments.items()):
            self._add_assignment(sig.dual(conn), sig.negate_constant(x), sig.negate_constant(y), sig.negate_constant(z))
        pairs: list[tuple[str, str]] = []
        for x, y in identifications:
            for c in (x, y):
                if not sig.is_constant(c):
                    raise SignatureError(f"undeclared constant {c!r} in identification")
            pairs.append((x, y))
            pairs.append((sig.negate_constant(x), sig.negate_constant(y)))
        self.identifications = tuple(dict.fromkeys(pairs))
        self._canonicalizers: dict[tuple, "Canonicalizer"] = {}
        self._lock = threading.Lock()
        # Eager consistency check of the full constant algebra.
        self.canonicalizer(FULL)

    def _add_assignment(self, conn: str, x: str, y: str, z: str) -> None:
        self.sig.info(conn)
        for c in (x, y, z):
            if not self.sig.is_constant(c):
                raise SignatureError(f"undeclared constant {c!r} in assignment")
        key = (conn, x, y)
        if key in self.assignments and self.assignments[key] != z:
            raise TheoryError(f"conflicting assignments for ({x} {conn} {y}): {self.assignments[key]} and {z}")
        self.assignments[key] = z

    def axioms(self) -> list[Axiom]:
        """Every axiom, each in both directions."""
        out: list[Axiom] = []
        for name, info in self.sig.connectives.items():
            if info.assoc:
                out.append(Axiom(AxiomKind.ASSOC, name))
                out.append(Axiom(AxiomKind.ASSOC, name, converse=True))
            if info.comm:
                out.append(Axiom(AxiomKind.COMM, name))
            if info.unit is not None:
                for side in (RIGHT, LEFT):
                    out.append(Axiom(AxiomKind.UNIT, name, (info.unit,), side))
                    out.append(Axiom(AxiomKind.UNIT, name, (info.unit,), side, converse=True))
        for (conn, x, y), z in self.assignments.items():
            out.append(Axiom(AxiomKind.ASSIGN, conn, (x, y, z)))
            out.append(Axiom(AxiomKind.ASSIGN, conn, (x, y, z), converse=True))
        for x, y in self.identifications:
            out.append(Axiom(AxiomKind.IDENTIFY, None, (x, y)))
            out.append(Axiom(AxiomKind.IDENTIFY, None, (x, y), converse=True))
        return out

    def resolve(self, subset: TheorySubset) -> tuple[Optional[frozenset[str]], bool]:
        if subset.plus_only:
            if self.plus is None:
                raise ConfigurationError("no distinguished + connective declared")
            return frozenset({self.plus}), False
        return subset.connectives, subset.identifications

    def canonicalizer(self, subset: TheorySubset = FULL) -> "Canonicalizer":
        conns, idents = self.resolve(subset)
        key = (conns, idents)
        found = self._canonicalizers.get(key)
        if found is None:
            with self._lock:
                found = self._canonicalizers.get(key)
                if found is None:
                    found = Canonicalizer(self, conns, idents)
                    self._canonicalizers[key] = found
        return found

    def is_plus_axiom(self, axiom: Axiom) -> bool:
        return self.plus is not None and axiom.conn == self.plus and axiom.kind != AxiomKind.IDENTIFY

    def with_plus(self, plus: Optional[str]) -> "Theory":
        if plus == self.plus:
            return self
        return Theory(self.sig, self.assignments, self.identifications, plus)


def canonicalize(f: Formula, th: Theory, g: TheorySubset = FULL) -> Formula:
    return th.canonicalizer(g).canonical(f)


def equal(x: Formula, y: Formula, th: Theory, g: TheorySubset = FULL) -> bool:
    if x == y:
        return True
    canon = th.canonicalizer(g)
    return canon.canonical(x) == canon.canonical(y)


def plus_factors(f: Formula, th: Theory) -> list[Formula]:
    """Maximal +-factors of ``f`` modulo the + axioms; the + unit has none."""
    if th.plus is None:
        raise ConfigurationError("no distinguished + connective declared")
    canon = th.canonicalizer(PLUS_ONLY).canonical(f)
    unit = th.sig.info(th.plus).unit
    if unit is not None and canon == Const(unit):
        return []
    factors = []
    node = canon
    while isinstance(node, App) and node.conn == th.plus:
        factors.append(node.left)
        node = node.right
    factors.append(node)
    return factors


# ---------------------------------------------------------------------------
# Canonical forms
# ---------------------------------------------------------------------------

def _right_spine(f: Formula, conn: str) -> list[Formula]:
    items = []
    while isinstance(f, App) and f.conn == conn:
        items.append(f.left)
        f = f.right
    items.append(f)
    return items


def _right_path(i: int) -> Path:
    return (RIGHT,) * i


class Canonicalizer:
    """Canonical forms for one theory subset."""

    def __init__(self, theory: Theory, conns: Optional[frozenset[str]], identifications: bool):
        self.theory = theory
        self.sig = theory.sig
        self.conns = conns
        self.identifications = identifications
        self._cached = lru_cache(maxsize=config.canonical_cache_size)(self._canonical)
        self._rep = self._representatives()
        self.units: dict[str, str] = {}
        self.table: dict[tuple[str, str, str], str] = {}
        self._build_table()
        self._check_confluence()

    def selects(self, conn: str) -> bool:
        return self.conns is None or conn in self.conns

    def rep(self, name: str) -> str:
        return self._rep.get(name, name)

    def _representatives(self) -> dict[str, str]:
        if not self.identifications:
            return {}
        parent = {c: c for c in self.sig.constants}
        order = {c: i for i, c in enumerate(self.sig.constants)}

        def find(c: str) -> str:
            while parent[c] != c:
                parent[c] = parent[parent[c]]
                c = parent[c]
            return c

        for x, y in self.theory.identifications:
            rx, ry = find(x), find(y)
            if rx != ry:
                # first-declared constant represents its class
                if order[rx] < order[ry]:
                    parent[ry] = rx
                else:
                    parent[rx] = ry
        return {c: find(c) for c in self.sig.constants}

    def _set(self, key: tuple[str, str, str], value: str) -> bool:
        old = self.table.get(key)
        if old is None:
            self.table[key] = value
            return True
        if old != value:
            conn, x, y = key
            raise TheoryError(
                f"constant algebra is ambiguous: ({x} {conn} {y}) equals both {old} and {value}"
            )
        return False

    def _build_table(self) -> None:
        reps = sorted(set(self.rep(c) for c in self.sig.constants))
        for name, info in self.sig.connectives.items():
            if self.selects(name) and info.unit is not None:
                u = self.rep(info.unit)
                self.units[name] = u
                for x in reps:
                    self._set((name, u, x), x)
                    self._set((name, x, u), x)
        for (conn, x, y), z in self.theory.assignments.items():
            if self.selects(conn):
                self._set((conn, self.rep(x), self.rep(y)), self.rep(z))
        changed = True
        while changed:
            changed = False
            for conn, x, y in list(self.table):
                info = self.sig.connectives[conn]
                if info.comm:
                    changed |= self._set((conn, y, x), self.table[(conn, x, y)])
            for name, info in self.sig.connectives.items():
                if not (self.selects(name) and info.assoc):
                    continue
                for x, y, z in itertools.product(reps, repeat=3):
                    p = self.table.get((name, x, y))
                    r = self.table.get((name, y, z))
                    if p is not None and r is not None:
                        q = self.table.get((name, p, z))
                        q2 = self.table.get((name, x, r))
                        if q is not None:
                            changed |= self._set((name, x, r), q)
                        elif q2 is not None:
                            changed |= self._set((name, p, z), q2)

    def _check_confluence(self) -> None:
        reps = sorted(set(self.rep(c) for c in self.sig.constants))
        for name, info in self.sig.connectives.items():
            if not (self.selects(name) and info.assoc):
                continue
            for n in (2, 3):
                for combo in itertools.product(reps, repeat=n):
                    if info.comm and list(combo) != sorted(combo):
                        continue
                    results = self._reductions(name, tuple(combo), info.comm)
                    if len(results) > 1:
                        shown = ", ".join(sorted(" ".join(r) for r in results))
                        raise TheoryError(
                            f"constant algebra of {name!r} is not confluent on {' '.join(combo)}: {shown}"
                        )

    def _reductions(self, conn: str, items: tuple[str, ...], comm: bool) -> set[tuple[str, ...]]:
        unit = self.units.get(conn)
        seen: set[tuple[str, ...]] = set()
        finals: set[tuple[str, ...]] = set()
        todo = [items]
        while todo:
            state = todo.pop()
            key = tuple(sorted(state)) if comm else state
            if key in seen:
                continue
            seen.add(key)
            succ = []
            if unit is not None and len(state) > 1:
                for i, c in enumerate(state):
                    if c == unit:
                        succ.append(state[:i] + state[i + 1:])
            pairs = (
                [(i, j) for i in range(len(state)) for j in range(len(state)) if i != j]
                if comm
                else [(i, i + 1) for i in range(len(state) - 1)]
            )
            for i, j in pairs:
                z = self.table.get((conn, state[i], state[j]))
                if z is None:
                    continue
                rest = [c for k, c in enumerate(state) if k not in (i, j)]
                if comm:
                    succ.append(tuple(rest + [z]))
                else:
                    succ.append(state[:i] + (z,) + state[j + 1:])
            if not succ:
                finals.add(tuple(sorted(state)) if comm else state)
            todo.extend(succ)
        return finals

    # -- normalization ------------------------------------------------------

    def canonical(self, f: Formula) -> Formula:
        return self._cached(f)

    def _canonical(self, f: Formula) -> Formula:
        return self._normalize(f, None, ())

    def cache_info(self):
        return self._cached.cache_info()

    def trace(self, f: Formula) -> tuple[Formula, list[Move]]:
        """Canonical form of ``f`` and the elementary moves that reach it."""
        moves: list[Move] = []
        result = self._normalize(f, moves, ())
        return result, moves

    def _normalize(self, f: Formula, moves: Optional[list[Move]], path: Path) -> Formula:
        if isinstance(f, Const):
            r = self.rep(f.name)
            if r != f.name:
                if moves is not None:
                    moves.append(Move(Axiom(AxiomKind.IDENTIFY, None, (f.name, r)), path))
                return Const(r)
            return f
        if moves is None:
            left = self.canonical(f.left)
            right = self.canonical(f.right)
        else:
            left = self._normalize(f.left, moves, path + (LEFT,))
            right = self._normalize(f.right, moves, path + (RIGHT,))
        node = App(f.conn, left, right)
        if not self.selects(f.conn):
            return node
        info = self.sig.connectives[f.conn]
        work = _NodeWork(self, node, f.conn, moves, path)
        if info.assoc:
            work.normalize_list(info.comm)
        else:
            work.normalize_binary(info.comm)
        return work.cur


class _NodeWork:
    """Local normalization of one application whose children are canonical."""

    def __init__(self, canon: Canonicalizer, node: App, conn: str, moves: Optional[list[Move]], path: Path):
        self.canon = canon
        self.cur: Formula = node
        self.conn = conn
        self.moves = moves
        self.path = path
        unit = canon.units.get(conn)
        self.unit = Const(unit) if unit is not None else None

    def step(self, axiom: Axiom, rel: Path) -> None:
        sub = subterm_at(self.cur, rel)
        out = rewrite(axiom, sub)
        if out is None:
            raise TheoryError(f"internal normalization error applying {axiom.name}")
        self.cur = replace_at(self.cur, rel, out)
        if self.moves is not None:
            self.moves.append(Move(axiom, self.path + rel))

    def fold_value(self, x: Formula, y: Formula) -> Optional[str]:
        if isinstance(x, Const) and isinstance(y, Const):
            return self.canon.table.get((self.conn, x.name, y.name))
        return None

    # -- binary connectives -------------------------------------------------

    def normalize_binary(self, comm: bool) -> None:
        node = self.cur
        assert isinstance(node, App)
        if self.unit is not None and node.right == self.unit:
            self.step(Axiom(AxiomKind.UNIT, self.conn, (self.unit.name,), RIGHT), ())
            return
        if self.unit is not None and node.left == self.unit:
            self.step(Axiom(AxiomKind.UNIT, self.conn, (self.unit.name,), LEFT), ())
            return
        z = self.fold_value(node.left, node.right)
        if z is not None:
            self.step(Axiom(AxiomKind.ASSIGN, self.conn, (node.left.name, node.right.name, z)), ())
            return
        if comm and render_formula(node.right) < render_formula(node.left):
            self.step(Axiom(AxiomKind.COMM, self.conn), ())

    # -- associative connectives --------------------------------------------

    def items(self) -> list[Formula]:
        return _right_spine(self.cur, self.conn)

    def flatten(self) -> None:
        i = 0
        while True:
            sub = subterm_at(self.cur, _right_path(i))
            if not (isinstance(sub, App) and sub.conn == self.conn):
                return
            if isinstance(sub.left, App) and sub.left.conn == self.conn:
                self.step(Axiom(AxiomKind.ASSOC, self.conn), _right_path(i))
                continue
            i += 1

    def drop(self, i: int) -> None:
        n = len(self.items())
        unit = (self.unit.name,)
        if i < n - 1:
            self.step(Axiom(AxiomKind.UNIT, self.conn, unit, LEFT), _right_path(i))
        else:
            self.step(Axiom(AxiomKind.UNIT, self.conn, unit, RIGHT), _right_path(n - 2))

    def swap(self, i: int) -> None:
        n = len(self.items())
        at = _right_path(i)
        if i + 1 < n - 1:
            self.step(Axiom(AxiomKind.ASSOC, self.conn, converse=True), at)
            self.step(Axiom(AxiomKind.COMM, self.conn), at + (LEFT,))
            self.step(Axiom(AxiomKind.ASSOC, self.conn), at)
        else:
            self.step(Axiom(AxiomKind.COMM, self.conn), at)

    def fold(self, i: int, z: str) -> None:
        items = self.items()
        n = len(items)
        args = (items[i].name, items[i + 1].name, z)
        at = _right_path(i)
        if i + 1 < n - 1:
            self.step(Axiom(AxiomKind.ASSOC, self.conn, converse=True), at)
            self.step(Axiom(AxiomKind.ASSIGN, self.conn, args), at + (LEFT,))
        else:
            self.step(Axiom(AxiomKind.ASSIGN, self.conn, args), at)

    def drop_units(self) -> None:
        if self.unit is None:
            return
        while True:
            items = self.items()
            if len(items) < 2:
                return
            for i, item in enumerate(items):
                if item == self.unit:
                    self.drop(i)
                    break
            else:
                return

    def normalize_list(self, comm: bool) -> None:
        self.flatten()
        self.drop_units()
        if comm:
            self._fold_pool()
            self._sort()
        else:
            self._fold_adjacent()

    def _fold_pool(self) -> None:
        while True:
            items = self.items()
            consts = [i for i, item in enumerate(items) if isinstance(item, Const)]
            pick = None
            for a, b in itertools.combinations(consts, 2):
                z = self.fold_value(items[a], items[b])
                if z is not None:
                    pick = (a, b, z)
                    break
            if pick is None:
                return
            a, b, z = pick
            for k in range(b - 1, a, -1):
                self.swap(k)
            self.fold(a, z)
            if self.unit is not None and Const(z) == self.unit and len(self.items()) > 1:
                self.drop(a)

    def _sort(self) -> None:
        changed = True
        while changed:
            changed = False
            items = self.items()
            for k in range(len(items) - 1):
                if render_formula(items[k]) > render_formula(items[k + 1]):
                    self.swap(k)
                    items = self.items()
                    changed = True

    def _fold_adjacent(self) -> None:
        k = 0
        while True:
            items = self.items()
            if k >= len(items) - 1:
                return
            z = self.fold_value(items[k], items[k + 1])
            if z is None:
                k += 1
                continue
            self.fold(k, z)
            if self.unit is not None and Const(z) == self.unit and len(self.items()) > 1:
                self.drop(k)
            k = max(k - 1, 0)


# ---------------------------------------------------------------------------
# Single-axiom detection
# ---------------------------------------------------------------------------

def _candidate_axioms(x: Formula, y: Formula, th: Theory) -> list[Axiom]:
    sig = th.sig
    found: list[Axiom] = []
    if isinstance(x, App):
        info = sig.connectives.get(x.conn)
        if info is not None:
            if info.comm:
                found.append(Axiom(AxiomKind.COMM, x.conn))
            if info.assoc:
                found.append(Axiom(AxiomKind.ASSOC, x.conn))
                found.append(Axiom(AxiomKind.ASSOC, x.conn, converse=True))
            if info.unit is not None:
                found.append(Axiom(AxiomKind.UNIT, x.conn, (info.unit,), RIGHT))
                found.append(Axiom(AxiomKind.UNIT, x.conn, (info.unit,), LEFT))
            if isinstance(x.left, Const) and isinstance(x.right, Const) and isinstance(y, Const):
                found.append(Axiom(AxiomKind.ASSIGN, x.conn, (x.left.name, x.right.name, y.name)))
    if isinstance(y, App):
        info = sig.connectives.get(y.conn)
        if info is not None:
            if info.unit is not None:
                found.append(Axiom(AxiomKind.UNIT, y.conn, (info.unit,), RIGHT, converse=True))
                found.append(Axiom(AxiomKind.UNIT, y.conn, (info.unit,), LEFT, converse=True))
            if isinstance(y.left, Const) and isinstance(y.right, Const) and isinstance(x, Const):
                found.append(Axiom(AxiomKind.ASSIGN, y.conn, (y.left.name, y.right.name, x.name), converse=True))
    if isinstance(x, Const) and isinstance(y, Const):
        found.append(Axiom(AxiomKind.IDENTIFY, None, (x.name, y.name)))
    return found


def _axiom_holds(axiom: Axiom, th: Theory) -> bool:
    if axiom.kind == AxiomKind.ASSIGN:
        x, y, z = axiom.args
        lhs = App(axiom.conn, Const(x), Const(y))
        return equal(lhs, Const(z), th)
    if axiom.kind == AxiomKind.IDENTIFY:
        x, y = axiom.args
        return equal(Const(x), Const(y), th)
    return True


def find_single_move(x: Formula, y: Formula, th: Theory) -> Optional[Move]:
    """The single axiom instance rewriting ``x`` into ``y``, if there is one."""
    d = first_difference(x, y)
    if d is None:
        return None
    for depth in range(len(d), -1, -1):
        p = d[:depth]
        sx, sy = subterm_at(x, p), subterm_at(y, p)
        for axiom in _candidate_axioms(sx, sy, th):
            if rewrite(axiom, sx) == sy and _axiom_holds(axiom, th):
                return Move(axiom, p)
    return None


def equality_moves(x: Formula, y: Formula, th: Theory) -> list[Move]:
    """Elementary moves from ``x`` to ``y`` (which must be equal in the full theory).

    A single axiom instance is returned as is; +-equal endpoints are joined
    through their +-canonical form so every move is a + axiom; otherwise
    both sides are traced to the full canonical form.
    """
    if x == y:
        return []
    single = find_single_move(x, y, th)
    if single is not None:
        return [single]
    if th.plus is not None and equal(x, y, th, PLUS_ONLY):
        canon = th.canonicalizer(PLUS_ONLY)
    else:
        canon = th.canonicalizer(FULL)
    cx, mx = canon.trace(x)
    cy, my = canon.trace(y)
    if cx != cy:
        raise TheoryError(f"{render_formula(x)} and {render_formula(y)} are not equal")
    return mx + invert_moves(y, my)


def elementary_moves(f: Formula, th: Theory, g: TheorySubset = FULL, introductions: bool = True) -> list[Move]:
    """Every single-axiom rewrite of ``f`` allowed by ``g``, in pre-order of positions.

    Unit and assignment introductions apply everywhere and are included only
    when ``introductions`` is set.
    """
    conns, idents = th.resolve(g)
    selected = [a for a in th.axioms() if a.kind == AxiomKind.IDENTIFY and idents
                or a.kind != AxiomKind.IDENTIFY and (conns is None or a.conn in conns)]
    moves = []
    for path in positions(f):
        sub = subterm_at(f, path)
        for axiom in selected:
            is_intro = axiom.converse and axiom.kind in (AxiomKind.UNIT, AxiomKind.ASSIGN)
            if is_intro and not introductions:
                continue
            if rewrite(axiom, sub) is not None:
                moves.append(Move(axiom, path))
    return moves
