"""Quasi self-adjointness: F*|_{v=phi(u)} = lambda F.

The adjoint is restricted to v = phi(u), matched against lambda F in every
jet monomial, and the resulting ODEs in phi are solved for the shapes that
arise in the generalized Camassa-Holm family:

* ``c * phi^(k) = 0`` with c a rational or a parameter expression,
* ``u * phi^(k+1) + c * phi^(k) = 0`` (Euler type, k = 1).

Every candidate family is substituted back into *all* constraints.  Power
families with a symbolic exponent are checked in a small private subring in
which u^(m + i) is tracked by its integer offset i.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Mapping

from .algebra import (
    CONST, FAMEXP, JET, PARAM, PHI, PHI_CLOSURE, Atom, DiffPoly, ONE, U, ZERO, collect_monomials,
    const, content, famexp, jet, mono_key, monomial_poly, phi, positive_order_jet, substitute,
    substitute_dependent, substitute_params,
)
from .equations import EquationSpec
from .syntax import to_text
from .variational import adjoint


class InconsistentMultiplier(ValueError):
    pass


class UnsupportedConstraintShape(ValueError):
    pass


A_CONST = DiffPoly.atom(const("a"))
B_CONST = DiffPoly.atom(const("b"))
M_SYMBOL = famexp("m")
U_T = jet("u", 1, 0)


# -- conditions and families -------------------------------------------------


@dataclass(frozen=True)
class Condition:
    """``expr == 0`` or ``expr != 0`` for a polynomial in parameters."""

    expr: DiffPoly
    holds: bool = True  # True: expr = 0, False: expr != 0

    def __str__(self) -> str:
        rel = "=" if self.holds else "!="
        syms = [a for a in self.expr.atoms()]
        if len(syms) == 1 and self.expr.degree(syms[0]) == 1:
            s = syms[0]
            c1 = substitute(self.expr, {s: 1}) - substitute(self.expr, {s: 0})
            c0 = substitute(self.expr, {s: 0}).as_rational()
            k = c1.as_rational()
            if k is not None and c0 is not None:
                return f"{s.name} {rel} {to_text(DiffPoly.const(-c0 / k))}"
        return f"{to_text(self.expr)} {rel} 0"


@dataclass(frozen=True)
class PhiFamily:
    """Substitution v = phi(u) with free constants a, b (b != 0)."""

    kind: str  # "affine" | "power" | "log" | "generic"
    exponent: DiffPoly | None = None  # power only

    @staticmethod
    def affine() -> "PhiFamily":
        return PhiFamily("affine")

    @staticmethod
    def power(m) -> "PhiFamily":
        m = DiffPoly._lift(m)
        if m.as_rational() == 1:
            return PhiFamily.affine()
        return PhiFamily("power", m)

    @staticmethod
    def log() -> "PhiFamily":
        return PhiFamily("log")

    @staticmethod
    def generic() -> "PhiFamily":
        return PhiFamily("generic")

    @property
    def nondegeneracy(self) -> tuple[str, ...]:
        if self.kind == "power":
            return ("b != 0", f"{_poly_text(self.exponent)} != 0")
        return ("b != 0",) if self.kind != "generic" else ("phi_u != 0",)

    def text(self) -> str:
        if self.kind == "affine":
            return "a + b*u"
        if self.kind == "log":
            return "a + b*ln(u)"
        if self.kind == "generic":
            return "phi(u)"
        return f"a + b*u^{_exponent_text(self.exponent)}"

    def multiplier_text(self) -> str:
        """lambda = -phi'(u) for this family."""
        if self.kind == "generic":
            return "-phi_u"
        if self.kind == "power" and self.exponent.as_rational() is None:
            m = self.exponent
            return f"-({_poly_text(m)})*b*u^{_exponent_text(m - 1)}"
        return to_text(-self.derivative(1))

    def __str__(self) -> str:
        return self.text()

    def expression(self) -> DiffPoly | None:
        """phi(u) as a DiffPoly when representable (affine, integer powers)."""
        if self.kind == "affine":
            return A_CONST + B_CONST * DiffPoly.atom(U)
        if self.kind == "power":
            r = self.exponent.as_rational()
            if r is not None and r.denominator == 1:
                return A_CONST + B_CONST * DiffPoly.atom(U) ** int(r)
        return None

    def derivative(self, k: int) -> DiffPoly:
        """phi^(k)(u) for k >= 1 (or k = 0 when representable)."""
        if self.kind == "affine":
            return [A_CONST + B_CONST * DiffPoly.atom(U), B_CONST][k] if k < 2 else ZERO
        if self.kind == "log":
            if k == 0:
                raise UnsupportedConstraintShape("phi itself is not polynomial for the log family")
            return B_CONST.scale((-1) ** (k - 1) * factorial(k - 1)) * DiffPoly.atom(U) ** -k
        if self.kind == "power":
            r = self.exponent.as_rational()
            if r is None or r.denominator != 1:
                raise UnsupportedConstraintShape("symbolic or fractional exponent")
            n = int(r)
            if k == 0:
                return self.expression()
            fall = 1
            for i in range(k):
                fall *= n - i
            return B_CONST.scale(fall) * DiffPoly.atom(U) ** (n - k) if fall else ZERO
        raise UnsupportedConstraintShape("generic family has no closed form")

    def specialize(self, values: Mapping[str, Fraction]) -> "PhiFamily":
        if self.kind != "power" or not values:
            return self
        return PhiFamily.power(substitute_params(self.exponent, values))


def _poly_text(p: DiffPoly) -> str:
    """Symbols first: 'beta - 1' rather than '-1 + beta'."""
    c = p.as_rational()
    if c is not None:
        return to_text(p)
    c0 = substitute(p, {a: 0 for a in p.atoms()}).as_rational()
    head = to_text(p - c0)
    if c0 == 0:
        return head
    return f"{head} {'-' if c0 < 0 else '+'} {to_text(DiffPoly.const(abs(c0)))}"


def _exponent_text(m: DiffPoly) -> str:
    r = m.as_rational()
    if r is not None:
        return str(r.numerator) if r.denominator == 1 and r >= 0 else f"({to_text(m)})"
    return f"({_poly_text(m)})"


@dataclass(frozen=True)
class Constraint:
    monomial: tuple
    expr: DiffPoly

    def __str__(self) -> str:
        key = to_text(monomial_poly(self.monomial)) if self.monomial else "1"
        return f"[{key}]  {to_text(self.expr)} = 0"


@dataclass(frozen=True)
class ConstraintSystem:
    constraints: tuple[Constraint, ...]
    multiplier: DiffPoly  # lambda, after elimination from the u_t coefficient

    @property
    def exprs(self) -> list[DiffPoly]:
        return [c.expr for c in self.constraints]


@dataclass(frozen=True)
class Solution:
    family: PhiFamily
    conditions: tuple[Condition, ...] = ()
    multiplier: DiffPoly | None = None  # lambda = -phi'(u) for this family

    def __str__(self) -> str:
        conds = ", ".join(str(c) for c in self.conditions)
        return f"v = {self.family}" + (f"  [{conds}]" if conds else "")


@dataclass(frozen=True)
class Classification:
    kind: str  # SelfAdjoint | QuasiSelfAdjoint | NotQuasiSelfAdjoint | Undetermined
    solutions: tuple[Solution, ...] = ()
    residual: tuple[DiffPoly, ...] = ()
    system: ConstraintSystem | None = field(default=None, compare=False)


# -- pipeline ----------------------------------------------------------------


def substitute_phi(fstar: DiffPoly) -> DiffPoly:
    """Replace every v-jet by the total derivatives of phi(u)."""
    return substitute_dependent(fstar, PHI_CLOSURE)


def extract_constraints(fstar_phi: DiffPoly, eq: EquationSpec) -> ConstraintSystem:
    """Match fstar_phi = lambda F monomial by monomial in the positive-order jets."""
    fs = collect_monomials(fstar_phi, positive_order_jet)
    fc = collect_monomials(eq.lhs, positive_order_jet)
    key_t = ((U_T, 1),)
    denom = fc.get(key_t, ZERO).as_rational()
    if not denom:
        raise InconsistentMultiplier("the u_t coefficient of F must be a nonzero constant")
    lam = fs.get(key_t, ZERO) / denom
    out = []
    for key in sorted(set(fs) | set(fc), key=mono_key):
        if key == key_t:
            continue
        expr = fs.get(key, ZERO) - lam * fc.get(key, ZERO)
        if expr:
            out.append(Constraint(key, content(expr)))
    return ConstraintSystem(tuple(out), lam)


# -- solving -----------------------------------------------------------------


def _phi_atoms(p: DiffPoly) -> list[Atom]:
    return sorted(a for a in p.atoms() if a.kind == PHI)


def _is_param_poly(p: DiffPoly) -> bool:
    return all(a.kind in (PARAM, CONST) for a in p.atoms())


def solve_zero(c: DiffPoly) -> list[dict] | None:
    """Parameter assignments making c vanish, or None if the shape is unsupported."""
    r = c.as_rational()
    if r is not None:
        return [{}] if r == 0 else []
    syms = sorted(c.atoms())
    if len(syms) == 1 and c.degree(syms[0]) == 1:
        s = syms[0]
        c0 = substitute(c, {s: 0}).as_rational()
        c1 = (substitute(c, {s: 1}) - substitute(c, {s: 0})).as_rational()
        if c0 is not None and c1:
            return [{s.name: -c0 / c1}]
    if len(c) == 1:
        return [{s.name: Fraction(0)} for s in syms]
    return None


@dataclass
class _Branch:
    constraints: list
    conditions: list
    values: dict

    def assign(self, values: dict) -> "_Branch | None":
        vals = {k: Fraction(v) for k, v in values.items()}
        new_conds = []
        for cond in self.conditions:
            e = substitute_params(cond.expr, vals)
            if not cond.holds and e.is_zero():
                return None
            new_conds.append(Condition(e, cond.holds) if cond.holds is False else cond)
        for name, val in vals.items():
            atom_kind = CONST if name in ("a", "b") else PARAM
            sym = DiffPoly.atom(Atom(atom_kind, name))
            new_conds.append(Condition(sym - val, True))
        cs = [substitute_params(c, vals) for c in self.constraints]
        return _Branch(cs, new_conds, {**self.values, **vals})

    def require_nonzero(self, expr: DiffPoly) -> "_Branch | None":
        e = substitute_params(expr, self.values)
        r = e.as_rational()
        if r is not None:
            return self if r != 0 else None
        return _Branch(self.constraints, self.conditions + [Condition(e, False)], self.values)


def _shape_a(c: DiffPoly):
    """c == coeff * phi^(k) with coeff free of u: return (k, coeff)."""
    atoms = _phi_atoms(c)
    if len(atoms) != 1 or c.degree(atoms[0]) != 1 or U in c.atoms():
        return None
    k = atoms[0].order
    coeff = substitute(c, {atoms[0]: 1})
    if not _is_param_poly(coeff):
        return None
    if (coeff * DiffPoly.atom(atoms[0]) - c).is_zero():
        return k, coeff
    return None


def _shape_euler(c: DiffPoly):
    """c == u * phi^(k+1) + coeff * phi^k: return (k, coeff)."""
    atoms = _phi_atoms(c)
    if len(atoms) != 2 or atoms[1].order != atoms[0].order + 1:
        return None
    lo, hi = atoms
    k = lo.order
    if c.degree(hi) != 1 or c.degree(lo) != 1:
        return None
    rest = substitute(c, {hi: 0})
    lead = substitute(c - rest, {hi: 1})
    parts = collect_monomials(lead, {U})
    if set(parts) != {((U, 1),)}:
        return None
    r = parts[((U, 1),)].as_rational()
    if not r:
        return None
    coeff = substitute(rest, {lo: 1}) / r
    if not _is_param_poly(coeff) or coeff * DiffPoly.atom(lo) != rest / r:
        return None
    return k, coeff


def _verify(family: PhiFamily, constraints: list) -> list[DiffPoly] | None:
    """Residual parameter polynomials that must vanish for the family to
    satisfy every constraint; None if the family cannot be checked."""
    residuals = []
    for c in constraints:
        try:
            groups = _family_residual(family, c)
        except UnsupportedConstraintShape:
            return None
        for g in groups:
            for coeff in collect_monomials(g, lambda a: a.kind == JET or
                                           (a.kind == CONST and a.name in ("a", "b"))).values():
                if coeff:
                    residuals.append(coeff)
    return residuals


def _family_residual(family: PhiFamily, c: DiffPoly) -> list[DiffPoly]:
    """Substitute the family into c, grouped so each group must vanish."""
    if family.kind == "power":
        r = family.exponent.as_rational()
        if r is None or r.denominator != 1:
            return _power_subring(family.exponent, c)
    if family.kind == "generic":
        return [] if not _phi_atoms(c) else [c]
    mapping = {a: family.derivative(a.order) for a in _phi_atoms(c)}
    return [substitute(c, mapping)]


def _falling(k: int) -> DiffPoly:
    m = DiffPoly.atom(M_SYMBOL)
    out = ONE
    for i in range(k):
        out = out * (m - i)
    return out


def _power_subring(exponent: DiffPoly, c: DiffPoly) -> list[DiffPoly]:
    """Evaluate c at phi = a + b u^m for symbolic m, grouped by u^(m + offset)."""
    groups: dict = {}
    plain = ZERO
    for mono, coef in c.items():
        phis = [(a, e) for a, e in mono if a.kind == PHI]
        rest = tuple(f for f in mono if f[0].kind != PHI)
        j = next((e for a, e in rest if a == U), 0)
        rest = tuple(f for f in rest if f[0] != U)
        base = monomial_poly(rest).scale(coef)
        if not phis:
            plain = plain + base * DiffPoly.atom(U) ** j if j else plain + base
            continue
        if len(phis) != 1 or phis[0][1] != 1:
            raise UnsupportedConstraintShape("constraint is nonlinear in phi")
        k = phis[0][0].order
        if k == 0:
            plain = plain + base * A_CONST * (DiffPoly.atom(U) ** j if j else ONE)
            groups[j] = groups.get(j, ZERO) + base * B_CONST
        else:
            groups[j - k] = groups.get(j - k, ZERO) + base * B_CONST * _falling(k)
    out = [plain] if plain else []
    for offset in sorted(groups):
        out.append(substitute(groups[offset], {M_SYMBOL: exponent}))
    return out


def _candidates(br: _Branch):
    """Yield ('family', family, branch) or ('branch', branch) or ('stuck', None)."""
    cs = [content(c) for c in br.constraints if c]
    cs = list(dict.fromkeys(cs))
    br = _Branch(cs, br.conditions, br.values)
    if not cs:
        return [("family", PhiFamily.generic(), br)]
    for c in cs:
        if not _phi_atoms(c):
            alts = solve_zero(c)
            if alts is None:
                return [("stuck", c)]
            return [("branch", nb) for nb in (br.assign(a) for a in alts) if nb is not None]
    shape_a = [(s, c) for c in cs if (s := _shape_a(c))]
    constant = [(k, c) for (k, coeff), c in shape_a if coeff.as_rational() is not None]
    if constant:
        k = min(k for k, _ in constant)
        if k <= 1:
            return []  # phi' = 0 is excluded
        if k == 2:
            return [("family", PhiFamily.affine(), br)]
        return [("stuck", next(c for kk, c in constant if kk == k))]
    if shape_a:
        (k, coeff), c = shape_a[0]
        out = []
        alts = solve_zero(coeff)
        if alts is None:
            return [("stuck", c)]
        out += [("branch", nb) for nb in (br.assign(a) for a in alts) if nb is not None]
        nz = br.require_nonzero(coeff)
        if nz is not None:
            rest = [x for x in cs if x != c] + [DiffPoly.atom(phi(k))]
            out.append(("branch", _Branch(rest, nz.conditions, nz.values)))
        return out
    eulers = [(s, c) for c in cs if (s := _shape_euler(c))]
    first = [(coeff, c) for (k, coeff), c in eulers if k == 1]
    if first:
        coeff, _ = first[0]
        m = ONE - coeff
        r = m.as_rational()
        if r is not None:
            return [("family", PhiFamily.log() if r == 0 else PhiFamily.power(m), br)]
        out = []
        nz = br.require_nonzero(m)
        if nz is not None:
            out.append(("family", PhiFamily.power(m), nz))
        alts = solve_zero(m)
        if alts is None:
            out.append(("stuck", m))
        else:
            out += [("branch", nb) for nb in (br.assign(a) for a in alts) if nb is not None]
        return out
    return [("stuck", cs[0])]


def _solve_branch(br: _Branch, depth: int = 0):
    sols, stuck = [], []
    if depth > 16:
        return sols, br.constraints
    for item in _candidates(br):
        kind = item[0]
        if kind == "stuck":
            stuck.append(item[1])
        elif kind == "branch":
            s, u = _solve_branch(item[1], depth + 1)
            sols += s
            stuck += u
        else:
            family, fb = item[1], item[2]
            family = family.specialize(fb.values)
            residuals = _verify(family, fb.constraints)
            if residuals is None:
                stuck += fb.constraints
                continue
            if not residuals:
                sols.append(Solution(family, tuple(fb.conditions), _multiplier(family)))
                continue
            c = residuals[0]
            alts = solve_zero(c)
            if alts is None:
                stuck.append(c)
                continue
            for a in alts:
                nb = fb.assign(a)
                if nb is not None:
                    s, u = _solve_branch(nb, depth + 1)
                    sols += s
                    stuck += u
    return sols, stuck


def _multiplier(family: PhiFamily) -> DiffPoly | None:
    try:
        return -family.derivative(1)
    except UnsupportedConstraintShape:
        return None


def solve_constraints(cs: ConstraintSystem) -> tuple[list[Solution], list[DiffPoly]]:
    """Solution families with their parameter conditions, plus unsolved constraints."""
    sols, stuck = _solve_branch(_Branch(cs.exprs, [], {}))
    return sols, list(dict.fromkeys(stuck))


def satisfies(family: PhiFamily, cs: ConstraintSystem, values: Mapping[str, Fraction] = {}) -> bool:
    res = _verify(family.specialize(values), [substitute_params(c, values) for c in cs.exprs])
    return res is not None and not res


def identity_substitution_works(cs: ConstraintSystem) -> bool:
    """phi(u) = u, i.e. the affine family with a = 0, b = 1."""
    res = _verify(PhiFamily.affine(), cs.exprs)
    if res is None:
        return False
    return all(substitute_params(r, {"a": 0, "b": 1}).is_zero() for r in res)


def classify_equation(eq: EquationSpec) -> Classification:
    cs = extract_constraints(substitute_phi(adjoint(eq)), eq)
    sols, stuck = solve_constraints(cs)
    if identity_substitution_works(cs):
        return Classification("SelfAdjoint", tuple(sols), tuple(stuck), cs)
    if sols:
        return Classification("QuasiSelfAdjoint", tuple(sols), tuple(stuck), cs)
    if stuck:
        return Classification("Undetermined", (), tuple(stuck), cs)
    return Classification("NotQuasiSelfAdjoint", (), (), cs)


__all__ = [
    "Condition", "PhiFamily", "Constraint", "ConstraintSystem", "Solution", "Classification",
    "InconsistentMultiplier", "UnsupportedConstraintShape", "substitute_phi", "extract_constraints",
    "solve_constraints", "solve_zero", "satisfies", "identity_substitution_works",
    "classify_equation", "FAMEXP",
]
