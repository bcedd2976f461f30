"""Differential polynomials over the jet space of u(t, x) and v(t, x).

A :class:`DiffPoly` is a finite sum of rational multiples of monomials in
*atoms*: parameters (eps, alpha, ...), free constants (a, b), the independent
variables t and x, the derivatives phi^(k)(u) of an unknown substitution
function, and jet coordinates u_J, v_J.  Every value is kept in canonical
form (like terms merged, zero terms dropped), so structural equality is
mathematical equality.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Callable, Iterable, Iterator, Mapping, NamedTuple, Sequence, Union

MAX_ORDER = 12

PARAM, CONST, FAMEXP, INDEP, PHI, JET = range(6)

DIRS = ("t", "x")


class JetOrderExceeded(ArithmeticError):
    """A jet coordinate of order above the configured maximum was requested."""


class Atom(NamedTuple):
    """Indeterminate of the ring.

    Tuple order is the atom order used for canonical monomials: parameters,
    constants, formal exponents, t/x, phi-derivatives, then jets grouped by
    dependent variable and sorted by total order, then by t-count.
    """

    kind: int
    name: str
    order: int = 0
    nt: int = 0

    @property
    def nx(self) -> int:
        return self.order - self.nt

    @property
    def is_jet(self) -> bool:
        return self.kind == JET

    def __repr__(self) -> str:
        return atom_name(self)


def param(name: str) -> Atom:
    return Atom(PARAM, name)


def const(name: str) -> Atom:
    return Atom(CONST, name)


def famexp(name: str = "m") -> Atom:
    return Atom(FAMEXP, name)


def indep(name: str) -> Atom:
    if name not in DIRS:
        raise ValueError(f"independent variable must be t or x, got {name!r}")
    return Atom(INDEP, name)


def phi(k: int = 0) -> Atom:
    if k < 0:
        raise ValueError("phi derivative order must be >= 0")
    return Atom(PHI, "phi", k)


def jet(dep: str, nt: int = 0, nx: int = 0, max_order: int = MAX_ORDER) -> Atom:
    if dep not in ("u", "v"):
        raise ValueError(f"dependent variable must be u or v, got {dep!r}")
    if nt < 0 or nx < 0:
        raise ValueError("jet index counts must be non-negative")
    if nt + nx > max_order:
        raise JetOrderExceeded(f"{dep} jet of order {nt + nx} exceeds MaxOrder={max_order}")
    return Atom(JET, dep, nt + nx, nt)


U = jet("u")
V = jet("v")


def atom_name(a: Atom) -> str:
    if a.kind == JET:
        return a.name if a.order == 0 else f"{a.name}_{'t' * a.nt}{'x' * a.nx}"
    if a.kind == PHI:
        return "phi" if a.order == 0 else "phi_" + "u" * a.order
    return a.name


# -- monomials ---------------------------------------------------------------

Monomial = tuple  # tuple[tuple[Atom, int], ...], sorted by atom, exponents != 0
ONE_MONO: Monomial = ()


@lru_cache(maxsize=1 << 16)
def mono_mul(m1: Monomial, m2: Monomial) -> Monomial:
    if not m1:
        return m2
    if not m2:
        return m1
    exps = dict(m1)
    for a, e in m2:
        n = exps.get(a, 0) + e
        if n:
            exps[a] = n
        else:
            del exps[a]
    return tuple(sorted(exps.items()))


def mono_pow(m: Monomial, n: int) -> Monomial:
    return tuple((a, e * n) for a, e in m) if n else ONE_MONO


def mono_without(m: Monomial, atom: Atom) -> Monomial:
    return tuple(f for f in m if f[0] != atom)


def mono_degree(m: Monomial, atom: Atom) -> int:
    for a, e in m:
        if a == atom:
            return e
    return 0


def mono_key(m: Monomial) -> tuple:
    """Graded ordering key used for printing terms in a stable order."""
    deg = 0
    weight = 0
    for a, e in m:
        if a.kind >= INDEP:
            deg += e
        if a.kind == JET:
            weight += a.order * e
    var_part = tuple((a, e) for a, e in reversed(m) if a.kind >= INDEP)
    coef_part = tuple((a, e) for a, e in m if a.kind < INDEP)
    return (deg, weight, var_part, coef_part)


# -- the ring ----------------------------------------------------------------

Scalar = Union[int, Fraction]


class DiffPoly:
    """Immutable canonical polynomial with exact rational coefficients."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, Scalar] | None = None):
        clean = {}
        if terms:
            for m, c in terms.items():
                if c:
                    clean[m] = Fraction(c)
        self._terms: dict = clean
        self._hash = None

    @classmethod
    def _raw(cls, terms: dict) -> "DiffPoly":
        p = object.__new__(cls)
        p._terms = terms
        p._hash = None
        return p

    @classmethod
    def const(cls, c: Scalar) -> "DiffPoly":
        return cls._raw({ONE_MONO: Fraction(c)} if c else {})

    @classmethod
    def atom(cls, a: Atom, exp: int = 1) -> "DiffPoly":
        return cls._raw({((a, exp),): Fraction(1)})

    @classmethod
    def from_terms(cls, pairs: Iterable[tuple[Monomial, Scalar]]) -> "DiffPoly":
        acc: dict = {}
        for m, c in pairs:
            acc[m] = acc.get(m, 0) + c
        return cls(acc)

    # container protocol
    def items(self):
        return self._terms.items()

    def terms(self) -> list[tuple[Monomial, Fraction]]:
        """Terms in canonical print order."""
        return sorted(self._terms.items(), key=lambda mc: mono_key(mc[0]))

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self) -> Iterator[tuple[Monomial, Fraction]]:
        return iter(self.terms())

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_const(self) -> bool:
        return not self._terms or (len(self._terms) == 1 and ONE_MONO in self._terms)

    def as_rational(self) -> Fraction | None:
        if not self._terms:
            return Fraction(0)
        if self.is_const():
            return self._terms[ONE_MONO]
        return None

    def atoms(self) -> set[Atom]:
        return {a for m in self._terms for a, _ in m}

    def jets(self, dep: str | None = None) -> set[Atom]:
        return {a for a in self.atoms() if a.kind == JET and (dep is None or a.name == dep)}

    def max_order(self, dep: str | None = None) -> int:
        return max((a.order for a in self.jets(dep)), default=0)

    def degree(self, atom: Atom) -> int:
        return max((mono_degree(m, atom) for m in self._terms), default=0)

    def free_of(self, pred: Callable[[Atom], bool]) -> bool:
        return not any(pred(a) for a in self.atoms())

    # equality / hashing
    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = DiffPoly.const(other)
        if not isinstance(other, DiffPoly):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    # arithmetic
    @staticmethod
    def _lift(x) -> "DiffPoly":
        if isinstance(x, DiffPoly):
            return x
        if isinstance(x, (int, Fraction)):
            return DiffPoly.const(x)
        if isinstance(x, Atom):
            return DiffPoly.atom(x)
        raise TypeError(f"cannot convert {type(x).__name__} to DiffPoly")

    def __add__(self, other) -> "DiffPoly":
        try:
            other = self._lift(other)
        except TypeError:
            return NotImplemented
        acc = dict(self._terms)
        for m, c in other._terms.items():
            n = acc.get(m, 0) + c
            if n:
                acc[m] = n
            else:
                acc.pop(m, None)
        return DiffPoly._raw(acc)

    __radd__ = __add__

    def __neg__(self) -> "DiffPoly":
        return DiffPoly._raw({m: -c for m, c in self._terms.items()})

    def __pos__(self) -> "DiffPoly":
        return self

    def __sub__(self, other) -> "DiffPoly":
        try:
            other = self._lift(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "DiffPoly":
        return self._lift(other) - self

    def __mul__(self, other) -> "DiffPoly":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        try:
            other = self._lift(other)
        except TypeError:
            return NotImplemented
        acc: dict = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = mono_mul(m1, m2)
                n = acc.get(m, 0) + c1 * c2
                if n:
                    acc[m] = n
                else:
                    acc.pop(m, None)
        return DiffPoly._raw(acc)

    __rmul__ = __mul__

    def scale(self, r: Scalar) -> "DiffPoly":
        r = Fraction(r)
        if not r:
            return ZERO
        return DiffPoly._raw({m: c * r for m, c in self._terms.items()})

    def __truediv__(self, r: Scalar) -> "DiffPoly":
        if not isinstance(r, (int, Fraction)):
            return NotImplemented
        return self.scale(1 / Fraction(r))

    def __pow__(self, n: int) -> "DiffPoly":
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            # only c*u^e may be inverted (the log family needs 1/u)
            if len(self._terms) != 1:
                raise ValueError("negative power of a non-monomial")
            (m, c), = self._terms.items()
            if any(a != U for a, _ in m):
                raise ValueError("negative exponents are only allowed on u")
            return DiffPoly._raw({mono_pow(m, n): c ** n})
        result = ONE
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __repr__(self) -> str:
        return f"DiffPoly({self})"

    def __str__(self) -> str:
        from .syntax import to_text

        return to_text(self)


ZERO = DiffPoly()
ONE = DiffPoly.const(1)


def poly(x) -> DiffPoly:
    return DiffPoly._lift(x)


def u_(spec: str = "") -> DiffPoly:
    """Shorthand: ``u_("txx")`` is the jet u_txx; ``u_()`` is u."""
    return DiffPoly.atom(jet("u", spec.count("t"), spec.count("x")))


def v_(spec: str = "") -> DiffPoly:
    return DiffPoly.atom(jet("v", spec.count("t"), spec.count("x")))


# -- derivations -------------------------------------------------------------


@lru_cache(maxsize=4096)
def _atom_total_derivative(a: Atom, d: str, max_order: int) -> tuple:
    """D_d(a) as a tuple of (monomial, coefficient)."""
    if a.kind in (PARAM, CONST, FAMEXP):
        return ()
    if a.kind == INDEP:
        return ((ONE_MONO, Fraction(1)),) if a.name == d else ()
    if a.kind == PHI:
        du = jet("u", d == "t", d == "x", max_order)
        return ((((phi(a.order + 1), 1), (du, 1)), Fraction(1)),)
    nt, nx = a.nt + (d == "t"), a.nx + (d == "x")
    return ((((jet(a.name, nt, nx, max_order), 1),), Fraction(1)),)


def _apply_derivation(p: DiffPoly, atom_rule: Callable[[Atom], tuple]) -> DiffPoly:
    """Extend a rule on atoms to a derivation of the ring via Leibniz."""
    acc: dict = {}
    for m, c in p._terms.items():
        for i, (a, e) in enumerate(m):
            da = atom_rule(a)
            if not da:
                continue
            if e == 1:
                rest = m[:i] + m[i + 1:]
            else:
                rest = m[:i] + ((a, e - 1),) + m[i + 1:]
            ce = c * e
            for dm, dc in da:
                mm = mono_mul(rest, dm)
                n = acc.get(mm, 0) + ce * dc
                if n:
                    acc[mm] = n
                else:
                    acc.pop(mm, None)
    return DiffPoly._raw(acc)


def total_derivative(p: DiffPoly, d: str, max_order: int = MAX_ORDER) -> DiffPoly:
    """Total derivative D_t or D_x.

    Jets shift their index, phi^(k) picks up phi^(k+1) * u_d, t and x give a
    Kronecker delta, parameters and constants are annihilated.
    """
    if d not in DIRS:
        raise ValueError(f"direction must be t or x, got {d!r}")
    return _apply_derivation(p, lambda a: _atom_total_derivative(a, d, max_order))


def total_derivatives(p: DiffPoly, seq: Iterable[str], max_order: int = MAX_ORDER) -> DiffPoly:
    for d in seq:
        p = total_derivative(p, d, max_order)
    return p


def D_multi(p: DiffPoly, nt: int, nx: int, max_order: int = MAX_ORDER) -> DiffPoly:
    return total_derivatives(p, "t" * nt + "x" * nx, max_order)


def partial(p: DiffPoly, atom: Atom) -> DiffPoly:
    """Plain formal partial derivative with respect to one atom."""
    return _apply_derivation(p, lambda a: ((ONE_MONO, Fraction(1)),) if a == atom else ())


def _jet_partial_rule(target: Atom):
    one = ((ONE_MONO, Fraction(1)),)

    def rule(a: Atom) -> tuple:
        if a == target:
            return one
        if target == U and a.kind == PHI:
            return ((((phi(a.order + 1), 1),), Fraction(1)),)
        return ()

    return rule


def jet_partial(p: DiffPoly, dep: str, nt: int = 0, nx: int = 0) -> DiffPoly:
    """Partial derivative with respect to the jet coordinate dep_(nt, nx).

    With respect to u itself, phi^(k)(u) differentiates to phi^(k+1)(u).
    """
    return _apply_derivation(p, _jet_partial_rule(jet(dep, nt, nx, max_order=10 ** 6)))


def multiplicity(seq: Sequence[str]) -> int:
    """Number of distinct orderings of the multiset ``seq`` over {t, x}."""
    return comb(len(seq), sum(1 for d in seq if d == "t"))


def ordered_jet_partial(p: DiffPoly, dep: str, seq: Sequence[str]) -> DiffPoly:
    """Partial derivative with respect to an ordered mixed derivative.

    ``seq`` is an ordered index such as ("t", "x", "x").  The canonical jet
    partial is shared equally among the distinct orderings, which is the
    symmetric-form convention for u_txx = u_xtx = u_xxt.
    """
    nt = sum(1 for d in seq if d == "t")
    return jet_partial(p, dep, nt, len(seq) - nt) / multiplicity(seq)


# -- substitution ------------------------------------------------------------


def substitute(p: DiffPoly, mapping: Mapping[Atom, DiffPoly | Scalar]) -> DiffPoly:
    """Replace atoms by polynomials (no chain rule; see substitute_dependent)."""
    if not mapping:
        return p
    repl = {a: poly(r) for a, r in mapping.items()}
    powers: dict = {}
    acc: dict = {}
    for m, c in p._terms.items():
        rest = []
        factor = None
        for a, e in m:
            if a in repl:
                if e < 0:
                    raise ValueError(f"cannot substitute for {atom_name(a)} with negative exponent")
                key = (a, e)
                if key not in powers:
                    powers[key] = repl[a] ** e
                factor = powers[key] if factor is None else factor * powers[key]
            else:
                rest.append((a, e))
        if factor is None:
            acc[m] = acc.get(m, 0) + c
            continue
        rest = tuple(rest)
        for fm, fc in factor._terms.items():
            mm = mono_mul(rest, fm)
            acc[mm] = acc.get(mm, 0) + c * fc
    return DiffPoly(acc)


def closure(replacement: DiffPoly, nt: int, nx: int, max_order: int = MAX_ORDER,
            _cache: dict | None = None) -> DiffPoly:
    """D_t^nt D_x^nx applied to a replacement expression, memoized per call."""
    cache = {} if _cache is None else _cache
    key = (nt, nx)
    if key in cache:
        return cache[key]
    if nt == 0 and nx == 0:
        out = replacement
    elif nx > 0:
        out = total_derivative(closure(replacement, nt, nx - 1, max_order, cache), "x", max_order)
    else:
        out = total_derivative(closure(replacement, nt - 1, nx, max_order, cache), "t", max_order)
    cache[key] = out
    return out


PHI_CLOSURE = DiffPoly.atom(phi(0))


def substitute_dependent(p: DiffPoly, replacement: DiffPoly | Scalar, dep: str = "v",
                         max_order: int = MAX_ORDER) -> DiffPoly:
    """Replace every jet of ``dep`` by the matching total derivative of ``replacement``.

    ``replacement`` may be :data:`PHI_CLOSURE` (v = phi(u)), an explicit
    expression in u-jets, or a constant.
    """
    replacement = poly(replacement)
    cache: dict = {}
    mapping = {a: closure(replacement, a.nt, a.nx, max_order, cache) for a in p.jets(dep)}
    return substitute(p, mapping)


def substitute_params(p: DiffPoly, values: Mapping[str, DiffPoly | Scalar]) -> DiffPoly:
    """Replace parameters or constants (looked up by name) by values."""
    mapping = {}
    for a in p.atoms():
        if a.kind in (PARAM, CONST, FAMEXP) and a.name in values:
            mapping[a] = values[a.name]
    return substitute(p, mapping)


# -- coefficient extraction --------------------------------------------------


def collect_monomials(p: DiffPoly, designated: Callable[[Atom], bool] | Iterable[Atom]) -> dict:
    """Split p by monomials in the designated atoms.

    Returns ``{monomial over designated atoms: coefficient DiffPoly}``; the
    sum of key * coefficient over the result reconstructs p.
    """
    if not callable(designated):
        chosen = set(designated)
        designated = chosen.__contains__
    out: dict = {}
    for m, c in p._terms.items():
        key = tuple(f for f in m if designated(f[0]))
        rest = tuple(f for f in m if not designated(f[0]))
        out.setdefault(key, {})
        out[key][rest] = out[key].get(rest, 0) + c
    return {k: DiffPoly(v) for k, v in out.items() if any(v.values())}


def positive_order_jet(a: Atom) -> bool:
    return a.kind == JET and a.order > 0


def reassemble(collection: Mapping[Monomial, DiffPoly]) -> DiffPoly:
    acc = ZERO
    for key, coeff in collection.items():
        acc = acc + coeff * DiffPoly._raw({key: Fraction(1)})
    return acc


def monomial_poly(m: Monomial) -> DiffPoly:
    return DiffPoly._raw({m: Fraction(1)})


def content(p: DiffPoly) -> DiffPoly:
    """Primitive part: divide out the rational content and fix the sign so
    the leading term (in print order) is positive."""
    if p.is_zero():
        return p
    from math import gcd, lcm

    nums = [c.numerator for _, c in p.items()]
    dens = [c.denominator for _, c in p.items()]
    g = 0
    for n in nums:
        g = gcd(g, n)
    scale = Fraction(lcm(*dens), g)
    if p.terms()[0][1] < 0:
        scale = -scale
    return p.scale(scale)
