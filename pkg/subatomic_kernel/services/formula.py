"""Subatomic formulae, one-hole contexts and positions.

Formulae are immutable binary trees of connective applications over
constants. Positions inside a formula are tuples of ``"l"``/``"r"`` steps,
rendered as dot-separated text with ``.`` for the root.
"""

import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Optional, Union

from subatomic_kernel.errors import ParseError

LEFT = "l"
RIGHT = "r"
HOLE_TOKEN = "_"

Path = tuple[str, ...]

_TOKEN_RE = re.compile(r"\(|\)|[^\s()]+")


@dataclass(frozen=True)
class Const:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class App:
    conn: str
    left: "Formula"
    right: "Formula"
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_hash", hash((self.conn, self.left, self.right)))

    def __hash__(self) -> int:
        return self._hash

    def __str__(self) -> str:
        return render_formula(self)


@dataclass(frozen=True)
class Hole:
    """The hole of a context; only ever appears inside ``FormulaContext.tree``."""

    def __str__(self) -> str:
        return HOLE_TOKEN


HOLE = Hole()

Formula = Union[Const, App]


@dataclass(frozen=True)
class FormulaContext:
    """A formula with exactly one hole at ``hole_path``."""

    tree: Union[Const, App, Hole]
    hole_path: Path

    def __str__(self) -> str:
        return render_formula(self.tree)


# ---------------------------------------------------------------------------
# Positions
# ---------------------------------------------------------------------------

def render_path(path: Path) -> str:
    return ".".join(path) if path else "."


def parse_path(text: str) -> Path:
    """Parse ``l.r.l`` style positions; ``.`` or empty text is the root."""
    text = text.strip().lstrip("@")
    if text in ("", "."):
        return ()
    steps = []
    for part in text.split("."):
        part = part.strip().lower()
        if part in ("l", "left"):
            steps.append(LEFT)
        elif part in ("r", "right"):
            steps.append(RIGHT)
        else:
            raise ParseError(f"invalid path step {part!r}")
    return tuple(steps)


def other_side(step: str) -> str:
    return RIGHT if step == LEFT else LEFT


def is_prefix(prefix: Path, path: Path) -> bool:
    return len(prefix) <= len(path) and path[: len(prefix)] == prefix


def subterm_at(f, path: Path):
    node = f
    for step in path:
        if not isinstance(node, App):
            raise ValueError(f"path {render_path(path)} leaves the formula")
        node = node.left if step == LEFT else node.right
    return node


def replace_at(f, path: Path, g):
    """Return ``f`` with the subterm at ``path`` replaced by ``g``."""
    if not path:
        return g
    if not isinstance(f, App):
        raise ValueError(f"path {render_path(path)} leaves the formula")
    if path[0] == LEFT:
        return App(f.conn, replace_at(f.left, path[1:], g), f.right)
    return App(f.conn, f.left, replace_at(f.right, path[1:], g))


def connectives_along(f, path: Path) -> list[str]:
    """Connectives of the strict ancestors of ``path``, root first."""
    conns = []
    node = f
    for step in path:
        if not isinstance(node, App):
            raise ValueError(f"path {render_path(path)} leaves the formula")
        conns.append(node.conn)
        node = node.left if step == LEFT else node.right
    return conns


def positions(f, prefix: Path = ()) -> Iterator[Path]:
    """All positions of ``f`` in pre-order."""
    stack = [(f, prefix)]
    while stack:
        node, path = stack.pop()
        yield path
        if isinstance(node, App):
            stack.append((node.right, path + (RIGHT,)))
            stack.append((node.left, path + (LEFT,)))


def size(f) -> int:
    """Number of nodes (constants and applications)."""
    if isinstance(f, App):
        return 1 + size(f.left) + size(f.right)
    return 1


def first_difference(x, y) -> Optional[Path]:
    """The deepest position containing every difference between ``x`` and ``y``."""
    if x == y:
        return None
    path: list[str] = []
    while isinstance(x, App) and isinstance(y, App) and x.conn == y.conn:
        left_same = x.left == y.left
        right_same = x.right == y.right
        if left_same and not right_same:
            path.append(RIGHT)
            x, y = x.right, y.right
        elif right_same and not left_same:
            path.append(LEFT)
            x, y = x.left, y.left
        else:
            break
    return tuple(path)


# ---------------------------------------------------------------------------
# Contexts
# ---------------------------------------------------------------------------

def context_at(f: Formula, path: Path) -> FormulaContext:
    subterm_at(f, path)
    return FormulaContext(replace_at(f, path, HOLE), path)


def plug(ctx: FormulaContext, f: Formula) -> Formula:
    return replace_at(ctx.tree, ctx.hole_path, f)


IDENTITY_CONTEXT = FormulaContext(HOLE, ())


def _find_holes(node, path: Path, found: list[Path]) -> None:
    if isinstance(node, Hole):
        found.append(path)
    elif isinstance(node, App):
        _find_holes(node.left, path + (LEFT,), found)
        _find_holes(node.right, path + (RIGHT,), found)


# ---------------------------------------------------------------------------
# Text form
# ---------------------------------------------------------------------------

@lru_cache(maxsize=65536)
def render_formula(f) -> str:
    if isinstance(f, App):
        return f"({render_formula(f.left)} {f.conn} {render_formula(f.right)})"
    return str(f)


def tokenize(text: str, source: Optional[str] = None) -> list[tuple[str, int, int]]:
    """Split text into ``(token, line, column)`` triples; ``#`` starts a comment."""
    tokens = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0]
        for match in _TOKEN_RE.finditer(line):
            tokens.append((match.group(0), lineno, match.start() + 1))
    return tokens


class TokenStream:
    """Cursor over tokens with position-aware errors."""

    def __init__(self, tokens: list[tuple[str, int, int]], source: Optional[str] = None):
        self.tokens = tokens
        self.index = 0
        self.source = source

    def peek(self, offset: int = 0) -> Optional[str]:
        i = self.index + offset
        return self.tokens[i][0] if i < len(self.tokens) else None

    def next(self) -> str:
        if self.index >= len(self.tokens):
            self.error("unexpected end of input")
        token = self.tokens[self.index][0]
        self.index += 1
        return token

    def expect(self, token: str) -> None:
        got = self.peek()
        if got != token:
            self.error(f"expected {token!r}, found {got!r}")
        self.index += 1

    def at_end(self) -> bool:
        return self.index >= len(self.tokens)

    def error(self, message: str):
        if self.index < len(self.tokens):
            _, line, col = self.tokens[self.index]
        elif self.tokens:
            _, line, col = self.tokens[-1]
        else:
            line, col = 1, 1
        raise ParseError(message, line, col, self.source)


def read_formula(stream: TokenStream, allow_hole: bool = False):
    """Read one formula from the stream (no symbol validation)."""
    token = stream.peek()
    if token is None:
        stream.error("expected a formula")
    if token == "(":
        stream.next()
        left = read_formula(stream, allow_hole)
        conn = stream.next()
        if conn in ("(", ")"):
            stream.index -= 1
            stream.error("expected a connective")
        right = read_formula(stream, allow_hole)
        stream.expect(")")
        return App(conn, left, right)
    if token == ")":
        stream.error("unexpected ')'")
    stream.next()
    if token == HOLE_TOKEN:
        if not allow_hole:
            stream.index -= 1
            stream.error("hole not allowed here")
        return HOLE
    return Const(token)


def parse_formula(text: str, source: Optional[str] = None) -> Formula:
    """Parse a fully parenthesized formula. Symbols are validated by the caller's signature."""
    stream = TokenStream(tokenize(text), source)
    f = read_formula(stream)
    if not stream.at_end():
        stream.error(f"trailing input {stream.peek()!r}")
    return f


def parse_context(text: str, source: Optional[str] = None) -> FormulaContext:
    """Parse a context; ``_`` marks its single hole."""
    stream = TokenStream(tokenize(text), source)
    tree = read_formula(stream, allow_hole=True)
    if not stream.at_end():
        stream.error(f"trailing input {stream.peek()!r}")
    holes: list[Path] = []
    _find_holes(tree, (), holes)
    if len(holes) != 1:
        raise ParseError(f"a context needs exactly one hole, found {len(holes)}", 1, 1, source)
    return FormulaContext(tree, holes[0])
