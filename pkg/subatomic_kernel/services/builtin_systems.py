"""
Built-in subatomic proof systems.

Each system is stored as a system-definition document and loaded by the
same parser as user documents. Only one orientation of each constant
assignment is written; the loader adds the negated axiom.

BUILTIN_DOCUMENTS is the single source of truth. The down fragments and full
systems are generated from a shared signature block per logic.
"""

# =============================================================================
# Signatures and theories
# =============================================================================

_CLASSICAL = """\
constants f t
one t
negation f <-> t
connective and dual=or polarity=strong assoc comm unit=t
connective or dual=and polarity=weak assoc comm unit=f
atoms a b c
times and
assign and f f = f
assign a f f = f
assign b f f = f
assign c f f = f
"""

_MLL = """\
constants bot one
one one
negation bot <-> one
connective ten dual=par polarity=strong assoc comm unit=one
connective par dual=ten polarity=weak assoc comm unit=bot
atoms a b c
times ten
assign a bot bot = bot
assign b bot bot = bot
assign c bot bot = bot
"""

# `o` is the unit of the self-dual seq; `o par o = one` links it to the other units.
_BVU = """\
constants one bot o
one one
negation bot <-> one
negation o <-> o
connective ten dual=par polarity=strong assoc comm unit=one
connective par dual=ten polarity=weak assoc comm unit=bot
connective seq dual=seq polarity=both assoc unit=o
atoms a b c
times ten
assign par o o = one
assign a bot bot = bot
assign b bot bot = bot
assign c bot bot = bot
assign seq bot bot = bot
"""

_BV_IDENTIFICATIONS = """\
identify one = o
identify bot = o
"""


# =============================================================================
# Rule sets
# =============================================================================

_RULES: dict[str, dict[str, list[str]]] = {
    "saks": {
        "down": [
            "rule atom.down down alpha=atom beta=or",
            "rule and.down down alpha=and beta=or",
        ],
        "up": [
            "rule atom.up up alpha=and beta=atom",
            "rule or.up up alpha=and beta=or",
            "rule m down alpha=or beta=and",
            "rule ac down alpha=or beta=atom",
            "rule acbar down alpha=atom beta=and",
        ],
    },
    "samlls": {
        "down": [
            "rule atom.down down alpha=atom beta=par",
            "rule ten.down down alpha=ten beta=par",
        ],
        "up": [
            "rule atom.up up alpha=ten beta=atom",
            "rule par.up up alpha=ten beta=par",
        ],
    },
    "sabvu": {
        "down": [
            "rule atom.down down alpha=atom beta=par",
            "rule ten.down down alpha=ten beta=par",
            "rule seq.down down alpha=seq beta=par",
        ],
        "up": [
            "rule atom.up up alpha=ten beta=atom",
            "rule par.up up alpha=ten beta=par",
            "rule seq.up up alpha=ten beta=seq",
        ],
    },
}

_BASES: dict[str, tuple[str, str]] = {
    "saks": ("saks", _CLASSICAL),
    "samlls": ("samlls", _MLL),
    "sabvu": ("sabvu", _BVU),
    "sabv": ("sabvu", _BVU + _BV_IDENTIFICATIONS),
}


def _document(name: str, rules_key: str, base: str, full: bool) -> str:
    rules = list(_RULES[rules_key]["down"])
    if full:
        rules += _RULES[rules_key]["up"]
    return f"system {name}\n{base}" + "\n".join(rules) + "\n"


def _build_documents() -> dict[str, str]:
    docs: dict[str, str] = {}
    for family, (rules_key, base) in _BASES.items():
        docs[f"{family}.down"] = _document(f"{family}.down", rules_key, base, full=False)
        docs[family] = _document(family, rules_key, base, full=True)
    return docs


BUILTIN_DOCUMENTS: dict[str, str] = _build_documents()
