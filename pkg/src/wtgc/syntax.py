"""Parsing and canonical serialization of grammars, trees and
homomorphisms.

Grammar files are line oriented with `#` comments:

    semiring arctic
    alphabet alpha:0 gamma:1 sigma:2
    nonterminals q q'
    final q' = 0                  # omitted nonterminals get the zero
    prod alpha -> q @ 0
    prod sigma(gamma(q),q) -> q' [eq 1.1=2] @ 1

Serialization is canonical (sorted sections, productions sorted by their
serialized form) and `parse(serialize(g)) == g` holds bit-exactly.
"""

from __future__ import annotations

import re

from .errors import ParseError
from .grammar import Production, Wtgc, production_str
from .homomorphism import TreeHom
from .semiring import Semiring, semiring_from_name
from .trees import (
    NAME_RE,
    RankedAlphabet,
    Tree,
    is_variable,
    parse_pos,
    term_str,
)

_TOKEN_RE = re.compile(rf"\s*({NAME_RE.pattern}|\(|\)|,)")


def parse_term(text: str, alphabet: RankedAlphabet | None = None,
               nonterminals=(), allow_variables: bool = False,
               line: int | None = None) -> Tree:
    """Parse `sigma(gamma(alpha),alpha)`-style terms.

    With an alphabet given, symbol arities are enforced; names that are
    neither symbols nor nonterminals must be variables when those are
    allowed, and are rejected otherwise.
    """
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            if text[pos:].strip():
                raise ParseError(f"unexpected character {text[pos:].strip()[0]!r}",
                                 line)
            break
        tokens.append(m.group(1))
        pos = m.end()
    index = 0

    def peek():
        return tokens[index] if index < len(tokens) else None

    def take(expected=None):
        nonlocal index
        if index >= len(tokens):
            raise ParseError("unexpected end of term", line)
        tok = tokens[index]
        if expected is not None and tok != expected:
            raise ParseError(f"expected {expected!r}, found {tok!r}", line)
        index += 1
        return tok

    def node() -> Tree:
        name = take()
        if name in ("(", ")", ","):
            raise ParseError(f"expected a name, found {name!r}", line)
        children = []
        if peek() == "(":
            take("(")
            children.append(node())
            while peek() == ",":
                take(",")
                children.append(node())
            take(")")
        if alphabet is not None and name in alphabet:
            if alphabet.rank(name) != len(children):
                raise ParseError(f"arity mismatch at {name!r}", line)
        elif name in nonterminals:
            if children:
                raise ParseError(f"nonterminal {name!r} with children", line)
        elif alphabet is not None:
            if not (allow_variables and is_variable(name)):
                raise ParseError(f"unknown symbol {name!r}", line)
            if children:
                raise ParseError(f"variable {name!r} with children", line)
        return Tree(name, children)

    result = node()
    if index != len(tokens):
        raise ParseError(f"trailing input {tokens[index]!r}", line)
    return result


_PROD_RE = re.compile(r"^(?P<lhs>.*?)->(?P<rest>.*)$", re.S)
_BLOCK_RE = re.compile(r"\[\s*(eq|ne)\s+([^]]*)\]")


def _parse_pairs(body: str, line: int):
    pairs = []
    for chunk in body.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        if "=" not in chunk:
            raise ParseError(f"bad constraint {chunk!r}", line)
        left, right = chunk.split("=", 1)
        try:
            pairs.append((parse_pos(left.strip()), parse_pos(right.strip())))
        except Exception:
            raise ParseError(f"bad constraint {chunk!r}", line) from None
    return pairs


def parse_grammar(text: str) -> Wtgc:
    semiring: Semiring | None = None
    alphabet_items: dict[str, int] = {}
    nonterminals: list[str] = []
    finals: list[tuple[str, str, int]] = []
    prod_lines: list[tuple[str, int]] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        content = raw.split("#", 1)[0].strip()
        if not content:
            continue
        keyword, _, rest = content.partition(" ")
        rest = rest.strip()
        if keyword == "semiring":
            if semiring is not None:
                raise ParseError("duplicate semiring line", lineno)
            try:
                semiring = semiring_from_name(rest)
            except Exception as exc:
                raise ParseError(str(exc), lineno) from None
        elif keyword == "alphabet":
            for entry in rest.split():
                if ":" not in entry:
                    raise ParseError(f"bad alphabet entry {entry!r}", lineno)
                name, rank = entry.rsplit(":", 1)
                if not rank.isdigit():
                    raise ParseError(f"bad alphabet entry {entry!r}", lineno)
                alphabet_items[name] = int(rank)
        elif keyword == "nonterminals":
            nonterminals.extend(rest.split())
        elif keyword == "final":
            if "=" not in rest:
                raise ParseError("bad final line", lineno)
            name, literal = rest.split("=", 1)
            finals.append((name.strip(), literal.strip(), lineno))
        elif keyword == "prod":
            prod_lines.append((rest, lineno))
        else:
            raise ParseError(f"unknown directive {keyword!r}", lineno)

    if semiring is None:
        raise ParseError("missing semiring line")
    try:
        alphabet = RankedAlphabet(alphabet_items)
    except Exception as exc:
        raise ParseError(str(exc)) from None

    final = {}
    for name, literal, lineno in finals:
        if name not in nonterminals:
            raise ParseError(f"final weight for unknown nonterminal {name!r}",
                             lineno)
        try:
            final[name] = semiring.parse(literal)
        except Exception as exc:
            raise ParseError(str(exc), lineno) from None

    productions = []
    for body, lineno in prod_lines:
        m = _PROD_RE.match(body)
        if not m:
            raise ParseError("production needs `->`", lineno)
        lhs = parse_term(m.group("lhs").strip(), alphabet, nonterminals,
                         line=lineno)
        rest = m.group("rest").strip()
        if "@" not in rest:
            raise ParseError("production needs a weight (`@ w`)", lineno)
        head, weight_text = rest.rsplit("@", 1)
        try:
            weight = semiring.parse(weight_text.strip())
        except Exception as exc:
            raise ParseError(str(exc), lineno) from None
        eq, ineq = [], []
        blocks = _BLOCK_RE.findall(head)
        target_text = _BLOCK_RE.sub("", head).strip()
        if not NAME_RE.fullmatch(target_text):
            raise ParseError(f"bad target {target_text!r}", lineno)
        for tag, inner in blocks:
            (eq if tag == "eq" else ineq).extend(_parse_pairs(inner, lineno))
        productions.append(Production(lhs, target_text, weight, eq, ineq))

    try:
        return Wtgc(nonterminals, alphabet, final, productions, semiring)
    except Exception as exc:
        raise ParseError(str(exc)) from None


def serialize_grammar(g: Wtgc) -> str:
    lines = [f"semiring {g.semiring.name}"]
    lines.append("alphabet " + " ".join(f"{n}:{r}"
                                        for n, r in g.alphabet.symbols()))
    if g.nonterminals:
        lines.append("nonterminals " + " ".join(sorted(g.nonterminals)))
    for q in sorted(g.nonterminals):
        if g.final[q] != g.semiring.zero:
            lines.append(f"final {q} = {g.semiring.format(g.final[q])}")
    for p in g.productions:
        lines.append("prod " + production_str(p, g.semiring))
    return "\n".join(lines) + "\n"


def parse_hom(text: str, source: RankedAlphabet | None = None) -> TreeHom:
    """Parse a homomorphism file: a `hom` header, then one
    `symbol -> term-over-x1..xk` line per source symbol."""
    rules: dict[str, Tree] = {}
    saw_header = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        content = raw.split("#", 1)[0].strip()
        if not content:
            continue
        if not saw_header:
            if content != "hom":
                raise ParseError("homomorphism files start with `hom`",
                                 lineno)
            saw_header = True
            continue
        m = _PROD_RE.match(content)
        if not m:
            raise ParseError("homomorphism rule needs `->`", lineno)
        name = m.group("lhs").strip()
        if not NAME_RE.fullmatch(name) or is_variable(name):
            raise ParseError(f"bad source symbol {name!r}", lineno)
        if name in rules:
            raise ParseError(f"duplicate rule for {name!r}", lineno)
        rules[name] = parse_term(m.group("rest").strip(),
                                 allow_variables=True, line=lineno)
    if not saw_header:
        raise ParseError("homomorphism files start with `hom`")

    def max_var(t: Tree) -> int:
        if not t.children and is_variable(t.label):
            return int(t.label[1:])
        return max((max_var(c) for c in t.children), default=0)

    if source is None:
        source = RankedAlphabet({name: max_var(rhs)
                                 for name, rhs in rules.items()})
    target_ranks: dict[str, int] = {}

    def collect(t: Tree):
        if not t.children and is_variable(t.label):
            return
        if target_ranks.setdefault(t.label, len(t.children)) \
                != len(t.children):
            raise ParseError(f"inconsistent rank for {t.label!r}")
        for c in t.children:
            collect(c)

    for rhs in rules.values():
        collect(rhs)
    target = RankedAlphabet(target_ranks)
    try:
        return TreeHom(source, target, rules)
    except Exception as exc:
        raise ParseError(str(exc)) from None


def serialize_hom(h: TreeHom) -> str:
    lines = ["hom"]
    for name in h.source:
        lines.append(f"{name} -> {term_str(h.rhs[name])}")
    return "\n".join(lines) + "\n"
