"""Text and JSON forms of differential polynomials.

Grammar (ASCII)::

    expr    := ['+'|'-'] term (('+'|'-') term)*
    term    := factor ('*' factor)*
    factor  := base ('^' ['-'] integer)?
    base    := rational | identifier | '(' expr ')'
    rational:= integer ('/' positive-integer)?

Jets are written ``u_S`` / ``v_S`` with S a string over {t, x}; the letter
order is irrelevant, so ``u_xt`` and ``u_tx`` name the same coordinate.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .algebra import (
    CONST, MAX_ORDER, PARAM, PHI, Atom, DiffPoly, atom_name, const, indep, jet, param, phi,
)

DEFAULT_PARAMS = ("eps", "alpha", "beta", "kappa")
DEFAULT_CONSTANTS = ("a", "b")


class ParseError(ValueError):
    def __init__(self, message: str, text: str = "", pos: int = 0, source: str | None = None):
        self.text = text
        self.pos = pos
        self.source = source
        where = f"{source}: " if source else ""
        super().__init__(f"{where}{message} at position {pos}")


class UnknownIdentifier(ParseError):
    pass


_TOKEN = re.compile(r"\s*(?:(?P<int>\d+)|(?P<name>[A-Za-z][A-Za-z0-9_]*)|(?P<op>[-+*/^()]))")


@dataclass(frozen=True)
class Vocabulary:
    """Names the parser accepts besides u, v, t, x and their jets."""

    params: tuple[str, ...] = DEFAULT_PARAMS
    constants: tuple[str, ...] = DEFAULT_CONSTANTS
    max_order: int = MAX_ORDER
    allow_phi: bool = True

    def extended(self, params=(), constants=()) -> "Vocabulary":
        return Vocabulary(
            tuple(dict.fromkeys(self.params + tuple(params))),
            tuple(dict.fromkeys(self.constants + tuple(constants))),
            self.max_order,
            self.allow_phi,
        )


DEFAULT_VOCAB = Vocabulary()


def _tokenize(text: str, source: str | None):
    pos = 0
    tokens = []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", text, pos, source)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


@dataclass
class _Parser:
    text: str
    vocab: Vocabulary
    source: str | None = None
    tokens: list = field(default_factory=list)
    i: int = 0

    def __post_init__(self):
        self.tokens = _tokenize(self.text, self.source)

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, msg, tok=None, cls=ParseError):
        tok = tok or self.peek()
        return cls(msg, self.text, tok[2], self.source)

    def expect_op(self, op):
        tok = self.take()
        if tok[0] != "op" or tok[1] != op:
            raise self.error(f"expected {op!r}", tok)

    def parse(self) -> DiffPoly:
        if self.peek()[0] == "end":
            raise self.error("empty expression")
        p = self.expr()
        if self.peek()[0] != "end":
            raise self.error(f"unexpected {self.peek()[1]!r}")
        return p

    def expr(self) -> DiffPoly:
        sign = 1
        tok = self.peek()
        if tok[0] == "op" and tok[1] in "+-":
            self.take()
            sign = -1 if tok[1] == "-" else 1
        acc = self.term().scale(sign)
        while True:
            tok = self.peek()
            if tok[0] == "op" and tok[1] in "+-":
                self.take()
                t = self.term()
                acc = acc + t if tok[1] == "+" else acc - t
            else:
                return acc

    def term(self) -> DiffPoly:
        acc = self.factor()
        while self.peek()[0] == "op" and self.peek()[1] == "*":
            self.take()
            acc = acc * self.factor()
        return acc

    def factor(self) -> DiffPoly:
        base = self.base()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            neg = False
            if self.peek()[0] == "op" and self.peek()[1] == "-":
                self.take()
                neg = True
            tok = self.take()
            if tok[0] != "int":
                raise self.error("expected integer exponent", tok)
            n = -int(tok[1]) if neg else int(tok[1])
            try:
                return base ** n
            except ValueError as exc:
                raise self.error(str(exc), tok) from None
        return base

    def base(self) -> DiffPoly:
        tok = self.take()
        kind, val, _ = tok
        if kind == "int":
            num = int(val)
            if self.peek()[0] == "op" and self.peek()[1] == "/":
                self.take()
                den = self.take()
                if den[0] != "int" or int(den[1]) == 0:
                    raise self.error("expected positive integer denominator", den)
                return DiffPoly.const(Fraction(num, int(den[1])))
            return DiffPoly.const(num)
        if kind == "name":
            return DiffPoly.atom(self.identifier(val, tok))
        if kind == "op" and val == "(":
            inner = self.expr()
            self.expect_op(")")
            return inner
        raise self.error(f"unexpected {val!r}" if val else "unexpected end of input", tok)

    def identifier(self, name: str, tok) -> Atom:
        if name in ("t", "x"):
            return indep(name)
        if name in ("u", "v"):
            return jet(name)
        m = re.fullmatch(r"([uv])_([tx]+)", name)
        if m:
            s = m.group(2)
            return jet(m.group(1), s.count("t"), s.count("x"), self.vocab.max_order)
        if name in self.vocab.params:
            return param(name)
        if name in self.vocab.constants:
            return const(name)
        if self.vocab.allow_phi:
            m = re.fullmatch(r"phi(?:_(u+))?", name)
            if m:
                return phi(len(m.group(1) or ""))
        raise self.error(f"unknown identifier {name!r}", tok, UnknownIdentifier)


def parse(text: str, vocab: Vocabulary = DEFAULT_VOCAB, source: str | None = None) -> DiffPoly:
    return _Parser(text, vocab, source).parse()


# -- printing ----------------------------------------------------------------


def _factor_text(a: Atom, e: int) -> str:
    name = atom_name(a)
    return name if e == 1 else f"{name}^{e}"


def _coeff_text(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def to_text(p: DiffPoly) -> str:
    """Deterministic rendering that :func:`parse` reads back to ``p``."""
    if p.is_zero():
        return "0"
    out = []
    for i, (m, c) in enumerate(p.terms()):
        neg = c < 0
        mag = -c if neg else c
        # phi derivatives read best after the u power they multiply
        factors = [_factor_text(a, e) for a, e in sorted(m, key=lambda f: f[0].kind == PHI)]
        if not factors:
            body = _coeff_text(mag)
        elif mag == 1:
            body = "*".join(factors)
        else:
            body = "*".join([_coeff_text(mag)] + factors)
        if i == 0:
            out.append(("-" if neg else "") + body)
        else:
            out.append((" - " if neg else " + ") + body)
    return "".join(out)


def vocabulary_for(*polys: DiffPoly) -> Vocabulary:
    """Default vocabulary extended by every parameter/constant name in polys."""
    params, consts = [], []
    for p in polys:
        for a in p.atoms():
            if a.kind == PARAM:
                params.append(a.name)
            elif a.kind == CONST:
                consts.append(a.name)
    return DEFAULT_VOCAB.extended(sorted(params), sorted(consts))


# -- JSON --------------------------------------------------------------------


def to_json(p: DiffPoly) -> dict:
    """Lossless document: coefficients as exact "p/q" strings."""
    return {
        "text": to_text(p),
        "terms": [
            {"coefficient": _coeff_text(c), "factors": [[atom_name(a), e] for a, e in m]}
            for m, c in p.terms()
        ],
    }


def from_json(doc: dict, vocab: Vocabulary = DEFAULT_VOCAB) -> DiffPoly:
    p = _Parser("0", vocab)
    acc = {}
    for term in doc["terms"]:
        exps = {}
        for name, e in term["factors"]:
            exps[p.identifier(name, ("name", name, 0))] = int(e)
        acc[tuple(sorted(exps.items()))] = Fraction(term["coefficient"])
    return DiffPoly(acc)


__all__ = [
    "ParseError", "UnknownIdentifier", "Vocabulary", "DEFAULT_VOCAB", "parse", "to_text",
    "to_json", "from_json", "vocabulary_for",
]
