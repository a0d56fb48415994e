"""
Proof search and corpus generation.

The oracle is the independent ground truth the other services are tested
against. ``prove`` runs a bounded breadth-first search backwards from a
formula towards the unit, memoized on canonical forms under the full
theory. ``random_derivation`` grows proofs forwards from the unit by random
rule and axiom applications and can inject cuts through an identity
detour. ``enumerate_formulae`` lists small formulae modulo equality.
"""

import json
import logging
import math
import random
import statistics
import time
from collections import deque
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from pathlib import Path as FilePath
from typing import Any, Iterator, Optional, Sequence

from subatomic_kernel.config import config
from subatomic_kernel.errors import CheckError, GenerationError, SearchBudgetExceeded, SplitError
from subatomic_kernel.services.derivation_service import (
    Comp,
    Derivation,
    Leaf,
    SeqDerivation,
    SeqStep,
    axiom_rule_name,
    check,
    derivation_size,
    from_sequential,
    length_plus,
    parse_derivation,
    render_derivation,
    step_derivation,
    up_rule_steps,
)
from subatomic_kernel.services.formula import (
    LEFT,
    App,
    Const,
    Formula,
    Path,
    positions,
    render_formula,
    replace_at,
    size,
    subterm_at,
)
from subatomic_kernel.services.system_service import (
    ATOM_FAMILY,
    EQUALITY,
    RuleKind,
    RuleScheme,
    SystemDef,
    is_cut,
    resolve_system,
    rule_conclusion,
    rule_premiss,
)
from subatomic_kernel.services.splitting_service import SplittingEngine, eliminate_cuts
from subatomic_kernel.services.theory import (
    FULL,
    AxiomKind,
    Signature,
    apply_move,
    elementary_moves,
    equal,
    negate,
)

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
DERIVATION_SUFFIX = ".sad"


# ---------------------------------------------------------------------------
# Random and enumerated formulae
# ---------------------------------------------------------------------------

def _alphabet(sig: Signature, atoms: Optional[int]) -> list[str]:
    """Non-atom connectives plus the first ``atoms`` atoms (all when ``None``)."""
    allowed = set(sig.atoms if atoms is None else sig.atoms[:atoms])
    return [c for c, info in sig.connectives.items() if not info.is_atom or c in allowed]


def random_formula(sig: Signature, rng: random.Random, max_nodes: int,
                   atoms: Optional[int] = None) -> Formula:
    """A random formula of at most ``max_nodes`` nodes."""
    conns = _alphabet(sig, atoms)
    constants = list(sig.constants)

    def build(n: int) -> Formula:
        if n < 3 or not conns:
            return Const(rng.choice(constants))
        left = rng.randrange(1, n - 1, 2)
        return App(rng.choice(conns), build(left), build(n - 1 - left))

    top = max(1, max_nodes)
    return build(rng.randrange(1, top + 1, 2))


def _formulae_of_size(n: int, constants: list[Formula], conns: list[str],
                      table: dict[int, list[Formula]]) -> list[Formula]:
    found = table.get(n)
    if found is None:
        if n == 1:
            found = list(constants)
        else:
            found = []
            for left_size in range(1, n - 1, 2):
                lefts = _formulae_of_size(left_size, constants, conns, table)
                rights = _formulae_of_size(n - 1 - left_size, constants, conns, table)
                found.extend(App(c, x, y) for c in conns for x in lefts for y in rights)
        table[n] = found
    return found


def enumerate_formulae(sys: SystemDef, max_nodes: int, atoms: Optional[int] = 1) -> Iterator[Formula]:
    """Formulae up to ``max_nodes`` nodes, one per equality class.

    Each class is represented by its first member in (size, rendering) order.
    """
    sig = sys.signature
    canon = sys.theory.canonicalizer(FULL)
    constants = [Const(c) for c in sig.constants]
    conns = _alphabet(sig, atoms)
    table: dict[int, list[Formula]] = {}
    seen: set[Formula] = set()
    for n in range(1, max_nodes + 1, 2):
        for f in sorted(_formulae_of_size(n, constants, conns, table), key=render_formula):
            key = canon.canonical(f)
            if key not in seen:
                seen.add(key)
                yield f


# ---------------------------------------------------------------------------
# Proof search
# ---------------------------------------------------------------------------

class SearchStatus(str, Enum):
    PROVED = "proved"
    UNPROVABLE = "unprovable"
    DEPTH_LIMIT = "depth_limit"
    BUDGET_EXHAUSTED = "budget_exhausted"


@dataclass
class SearchConfig:
    depth: int = field(default_factory=lambda: config.search_depth)
    budget: int = field(default_factory=lambda: config.step_budget)
    memo: bool = True


@dataclass
class SearchResult:
    status: SearchStatus
    proof: Optional[Derivation]
    explored: int
    depth: int

    @property
    def found(self) -> bool:
        return self.proof is not None

    def require(self) -> Optional[Derivation]:
        """The proof, ``None`` when absent within bounds.

        Raises:
            SearchBudgetExceeded: The search stopped on its step budget.
        """
        if self.status == SearchStatus.BUDGET_EXHAUSTED:
            raise SearchBudgetExceeded(f"search stopped after {self.explored} states")
        return self.proof

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"status": self.status.value, "explored": self.explored, "depth": self.depth}
        if self.proof is not None:
            out["proof"] = render_derivation(self.proof)
        return out


@dataclass(frozen=True)
class _Edge:
    """A backward step: ``premiss`` rewrites by ``rule`` at ``path`` to ``conclusion``."""

    parent: Formula
    premiss: Formula
    rule: str
    path: Path
    conclusion: Formula


def _right_nest(conn: str, items: Sequence[Formula]) -> Formula:
    result = items[-1]
    for item in reversed(items[:-1]):
        result = App(conn, item, result)
    return result


def _spine(f: Formula, conn: str) -> list[Formula]:
    items = []
    while isinstance(f, App) and f.conn == conn:
        items.append(f.left)
        f = f.right
    items.append(f)
    return items


class _Searcher:
    def __init__(self, sys: SystemDef, cfg: SearchConfig):
        self.sys = sys
        self.sig = sys.signature
        self.cfg = cfg
        self.canon = sys.theory.canonicalizer(FULL)
        self.plus = sys.plus
        self.rules = [r for r in sys.rules if r.is_logical]

    def _matches(self, rule_conn: Optional[str], conn: str) -> bool:
        if rule_conn == ATOM_FAMILY:
            return self.sig.is_atom(conn)
        return rule_conn == conn

    def _unit_factor(self, conn: str) -> Optional[Formula]:
        unit = self.sig.info(conn).unit
        return None if unit is None else App(conn, Const(unit), Const(unit))

    def _pair_redexes(self, rule: RuleScheme, factors: list[Formula]) -> Iterator[tuple[Formula, Optional[list[Formula]], bool]]:
        """Conclusion-shaped regroupings ``(fi + fj)`` of a +-list with the remaining factors."""
        for i, fi in enumerate(factors):
            if not (isinstance(fi, App) and self._matches(rule.alpha, fi.conn)):
                continue
            partner = self.sig.weak(fi.conn) if rule.kind == RuleKind.DOWN else fi.conn
            for j, fj in enumerate(factors):
                if j != i and isinstance(fj, App) and fj.conn == partner:
                    rest = [f for k, f in enumerate(factors) if k not in (i, j)]
                    yield App(self.plus, fi, fj), rest or None, False
            filler = self._unit_factor(partner)
            if filler is not None:
                rest = [f for k, f in enumerate(factors) if k != i]
                yield App(self.plus, fi, filler), rest or None, True

    def successors(self, g: Formula) -> Iterator[_Edge]:
        for p in positions(g):
            node = subterm_at(g, p)
            if not isinstance(node, App):
                continue
            in_spine = bool(p) and node.conn == self.plus and subterm_at(g, p[:-1]).conn == self.plus
            for rule in self.rules:
                if rule.beta == self.plus:
                    if in_spine:
                        continue
                    factors = _spine(node, self.plus)
                    for redex, rest, padded in self._pair_redexes(rule, factors):
                        if rest is None:
                            regrouped, redex_path = redex, p
                        else:
                            regrouped = App(self.plus, redex, _right_nest(self.plus, rest))
                            redex_path = p + (LEFT,)
                        conclusion = replace_at(g, p, regrouped)
                        if padded and not equal(conclusion, g, self.sys.theory):
                            continue
                        premiss = rule_premiss(rule, redex, self.sig)
                        if premiss is not None:
                            yield _Edge(g, replace_at(conclusion, redex_path, premiss), rule.name,
                                        redex_path, conclusion)
                else:
                    premiss = rule_premiss(rule, node, self.sig)
                    if premiss is not None:
                        yield _Edge(g, replace_at(g, p, premiss), rule.name, p, g)

    def run(self, f: Formula) -> SearchResult:
        goal = self.canon.canonical(Const(self.sys.one))
        start = self.canon.canonical(f)
        if start == goal:
            return SearchResult(SearchStatus.PROVED, self._rebuild(f, []), 0, 0)
        parents: dict[Formula, Optional[_Edge]] = {start: None}
        frontier: deque[tuple[Formula, int]] = deque([(start, 0)])
        explored = 0
        truncated = False
        while frontier:
            g, depth = frontier.popleft()
            if depth >= self.cfg.depth:
                truncated = True
                continue
            explored += 1
            if explored > self.cfg.budget:
                logger.debug("Search budget of %d states exhausted", self.cfg.budget)
                return SearchResult(SearchStatus.BUDGET_EXHAUSTED, None, explored - 1, depth)
            for edge in self.successors(g):
                key = self.canon.canonical(edge.premiss)
                if self.cfg.memo and key in parents:
                    continue
                parents.setdefault(key, edge)
                if key == goal:
                    edges = [edge]
                    cur = g
                    while parents.get(cur) is not None:
                        edges.append(parents[cur])
                        cur = parents[cur].parent
                    proof = self._rebuild(f, edges)
                    logger.debug("Proof found at depth %d after %d states", depth + 1, explored)
                    return SearchResult(SearchStatus.PROVED, proof, explored, depth + 1)
                frontier.append((key, depth + 1))
        status = SearchStatus.DEPTH_LIMIT if truncated else SearchStatus.UNPROVABLE
        return SearchResult(status, None, explored, self.cfg.depth)

    def _rebuild(self, f: Formula, edges: list[_Edge]) -> Derivation:
        """Forward proof from the unit through ``edges`` (goal side first) to ``f``."""
        cur: Formula = Const(self.sys.one)
        steps: list[SeqStep] = []
        for edge in edges:
            if cur != edge.premiss:
                steps.append(SeqStep(EQUALITY, (), edge.premiss))
            steps.append(SeqStep(edge.rule, edge.path, edge.conclusion))
            cur = edge.conclusion
        if cur != f:
            steps.append(SeqStep(EQUALITY, (), f))
        proof = from_sequential(SeqDerivation(Const(self.sys.one), tuple(steps)))
        check(proof, self.sys)
        return proof


def prove(f: Formula, sys: SystemDef, cfg: Optional[SearchConfig] = None) -> SearchResult:
    """Search backwards from ``f`` for a proof in ``sys`` within the bounds of ``cfg``.

    Args:
        f: The formula to prove.
        sys: The system whose logical rules drive the search.
        cfg: Depth bound, step budget and memoization switch.

    Returns:
        A ``SearchResult``; ``UNPROVABLE`` only when the reachable space was
        exhausted below the depth bound.
    """
    sys.signature.validate(f)
    return _Searcher(sys, cfg or SearchConfig()).run(f)


# ---------------------------------------------------------------------------
# Random proofs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CorpusSpec:
    system: str
    seed: int = 0
    min_nodes: int = 1
    max_nodes: int = 15
    atoms: int = 2
    cuts: int = 0
    steps: int = 12
    attempts: int = 50

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def _generation_rules(sys: SystemDef) -> list[RuleScheme]:
    return [r for r in sys.rules if r.kind == RuleKind.DOWN and r.beta == sys.plus]


def _logical_moves(f: Formula, rules: list[RuleScheme], sys: SystemDef) -> list[tuple[RuleScheme, Path, Formula]]:
    moves = []
    for p in positions(f):
        sub = subterm_at(f, p)
        for rule in rules:
            out = rule_conclusion(rule, sub, sys.signature)
            if out is not None:
                moves.append((rule, p, out))
    return moves


def _forward_proof(spec: CorpusSpec, sys: SystemDef, rng: random.Random) -> Optional[SeqDerivation]:
    rules = _generation_rules(sys)
    excluded = set(sys.signature.atoms[spec.atoms:])
    start: Formula = Const(sys.one)
    cur = start
    steps: list[SeqStep] = []
    for _ in range(spec.steps * 4):
        if len(steps) >= spec.steps and size(cur) >= spec.min_nodes:
            break
        logical = _logical_moves(cur, rules, sys)
        if logical and rng.random() < 0.5:
            rule, p, out = rng.choice(logical)
            cur = replace_at(cur, p, out)
            steps.append(SeqStep(rule.name, p, cur))
            continue
        moves = [m for m in elementary_moves(cur, sys.theory, FULL)
                 if m.axiom.conn not in excluded and m.axiom.kind != AxiomKind.IDENTIFY]
        rng.shuffle(moves)
        for move in moves:
            nxt = apply_move(cur, move)
            if nxt != cur and size(nxt) <= spec.max_nodes:
                cur = nxt
                steps.append(SeqStep(axiom_rule_name(move.axiom, sys), move.path, cur))
                break
        else:
            return None
    if size(cur) < spec.min_nodes:
        return None
    return SeqDerivation(start, tuple(steps))


def _cut_rule(sys: SystemDef, conn: str) -> Optional[RuleScheme]:
    for rule in sys.rules:
        if not is_cut(rule, sys):
            continue
        if rule.beta == conn or (rule.beta == ATOM_FAMILY and sys.signature.is_atom(conn)):
            return rule
    return None


def cut_detour(x: Formula, sys: SystemDef) -> Derivation:
    """A proof through one cut on ``x``, built from identity proofs of ``x`` and its negation.

    Raises:
        GenerationError: ``sys`` has no cut for the main connective of ``x``.
    """
    engine = SplittingEngine(sys)
    sig = sys.signature
    cut = _cut_rule(sys, x.conn) if isinstance(x, App) else None
    if cut is None:
        raise GenerationError(f"system {sys.name} has no cut on {render_formula(x)}")
    nx = negate(x, sig)
    identities = Comp(engine.times, engine.identity_proof(x), engine.identity_proof(nx))
    spread = engine.chain(identities, engine.distribute(engine.times, x, nx, nx, x))
    before = spread.conclusion
    redex = subterm_at(before, (LEFT,))
    out = rule_conclusion(cut, redex, sig)
    if out is None:
        raise GenerationError(f"cut {cut.name} does not apply to {render_formula(redex)}")
    return engine.chain(spread, step_derivation(before, (LEFT,), cut.name, out))


def _cut_detour(proof: Derivation, sys: SystemDef, rng: random.Random, spec: CorpusSpec) -> Derivation:
    """Pair ``proof`` with a proof of ``~X + X`` that passes through one cut on ``X``."""
    sig = sys.signature
    candidates = [c for c in _alphabet(sig, spec.atoms) if _cut_rule(sys, c) is not None]
    if not candidates:
        raise GenerationError(f"system {sys.name} has no cut to inject")
    conn = rng.choice(candidates)
    budget = max(1, (spec.max_nodes - 1) // 2)
    x = App(conn, random_formula(sig, rng, budget, spec.atoms), random_formula(sig, rng, budget, spec.atoms))
    return SplittingEngine(sys).chain(Leaf(Const(sys.one)), Comp(sys.times, cut_detour(x, sys), proof))


def random_derivation(spec: CorpusSpec, sys: Optional[SystemDef] = None) -> Derivation:
    """A random proof in ``spec.system``, deterministic in ``spec.seed``.

    Raises:
        GenerationError: No proof within the size bounds after ``spec.attempts`` tries.
    """
    sys = sys or resolve_system(spec.system)
    sys.require_plus()
    rng = random.Random(spec.seed)
    for attempt in range(spec.attempts):
        seq = _forward_proof(spec, sys, rng)
        if seq is None:
            continue
        proof = from_sequential(seq)
        try:
            for _ in range(spec.cuts):
                proof = _cut_detour(proof, sys, rng, spec)
        except SplitError as e:
            raise GenerationError(f"cannot inject cuts into {sys.name}: {e}") from e
        try:
            check(proof, sys)
        except CheckError as e:
            raise GenerationError(f"generated proof for seed {spec.seed} does not check: {e}") from e
        logger.debug("Generated proof for seed %d on attempt %d", spec.seed, attempt + 1)
        return proof
    raise GenerationError(f"no proof within {spec.min_nodes}..{spec.max_nodes} nodes after {spec.attempts} attempts")


# ---------------------------------------------------------------------------
# Corpora
# ---------------------------------------------------------------------------

def write_corpus(spec: CorpusSpec, count: int, directory: FilePath) -> FilePath:
    """Write ``count`` proofs (seeds ``spec.seed``, ``spec.seed + 1``, ...) and a manifest.

    Returns:
        Path of the manifest.
    """
    sys = resolve_system(spec.system)
    directory = FilePath(directory)
    directory.mkdir(parents=True, exist_ok=True)
    files = []
    for i in range(count):
        item = replace(spec, seed=spec.seed + i)
        proof = random_derivation(item, sys)
        name = f"{i:04d}{DERIVATION_SUFFIX}"
        (directory / name).write_text(render_derivation(proof) + "\n")
        files.append({
            "file": name,
            "seed": item.seed,
            "conclusion": render_formula(proof.conclusion),
            "length": length_plus(proof, sys),
            "cuts": len(up_rule_steps(proof, sys)),
        })
    manifest = {**spec.to_dict(), "count": count, "files": files}
    path = directory / MANIFEST_NAME
    path.write_text(json.dumps(manifest, indent=2) + "\n")
    logger.info("Wrote %d derivations for %s to %s", count, sys.name, directory)
    return path


def read_corpus(directory: FilePath) -> tuple[SystemDef, list[tuple[str, Derivation]]]:
    """The system and the named derivations of a corpus written by ``write_corpus``."""
    directory = FilePath(directory)
    manifest = json.loads((directory / MANIFEST_NAME).read_text())
    sys = resolve_system(manifest["system"])
    entries = []
    for item in manifest["files"]:
        path = directory / item["file"]
        entries.append((item["file"], parse_derivation(path.read_text(), sys, str(path))))
    return sys, entries


# ---------------------------------------------------------------------------
# Size report
# ---------------------------------------------------------------------------

@dataclass
class SizeRow:
    name: str
    input_size: int
    output_size: int
    cuts: int
    seconds: float

    @property
    def ratio(self) -> float:
        return self.output_size / self.input_size


@dataclass
class SizeReport:
    system: str
    rows: list[SizeRow]
    slope: Optional[float]

    @property
    def max_ratio(self) -> float:
        return max((r.ratio for r in self.rows), default=0.0)

    def to_dict(self) -> dict[str, Any]:
        return {
            "system": self.system,
            "slope": self.slope,
            "max_ratio": self.max_ratio,
            "rows": [{**asdict(r), "ratio": r.ratio} for r in self.rows],
        }

    def render(self) -> str:
        lines = [f"{'name':<12} {'input':>8} {'output':>8} {'ratio':>8} {'cuts':>5} {'seconds':>9}"]
        for r in self.rows:
            lines.append(f"{r.name:<12} {r.input_size:>8} {r.output_size:>8} {r.ratio:>8.2f} {r.cuts:>5} {r.seconds:>9.4f}")
        slope = "n/a" if self.slope is None else f"{self.slope:.3f}"
        lines.append(f"system {self.system}: {len(self.rows)} proofs, max ratio {self.max_ratio:.2f}, log-log slope {slope}")
        return "\n".join(lines)


def size_report(entries: Sequence[tuple[str, Derivation]], sys: SystemDef) -> SizeReport:
    """Eliminate the cuts of every entry, recording sizes and elapsed time."""
    rows = []
    for name, proof in entries:
        started = time.perf_counter()
        out = eliminate_cuts(proof, sys)
        elapsed = time.perf_counter() - started
        rows.append(SizeRow(name, derivation_size(proof), derivation_size(out),
                            len(up_rule_steps(proof, sys)), elapsed))
    xs = [math.log(r.input_size) for r in rows]
    ys = [math.log(r.output_size) for r in rows]
    slope = None
    if len(set(xs)) >= 2:
        slope = statistics.linear_regression(xs, ys).slope
    return SizeReport(sys.name, rows, slope)
