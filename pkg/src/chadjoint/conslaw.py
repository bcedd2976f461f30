"""Conserved vectors from Lie point symmetries.

The construction takes a formal Lagrangian L = v F and a generator
X = xi_t d/dt + xi_x d/dx + eta d/du and produces (C1, C2) with
D_t C1 + D_x C2 = 0 on solutions of F = 0 and its adjoint.  Reduction on
solutions, moving x-divergences from C1 into C2, and splitting by free
constants turn that raw vector into the local conservation laws.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Sequence

from .algebra import (
    CONST, DIRS, INDEP, JET, MAX_ORDER, ONE_MONO, PARAM, Atom, DiffPoly, ZERO, collect_monomials,
    indep, jet, jet_partial, mono_mul, monomial_poly, ordered_jet_partial, substitute,
    substitute_dependent, total_derivative, total_derivatives, u_, U,
)
from .equations import EquationSpec, InvalidEquation, choose_leading, is_prolongation
from .variational import adjoint, formal_lagrangian, variational_derivative

T = DiffPoly.atom(indep("t"))
X = DiffPoly.atom(indep("x"))


class NonTerminating(RuntimeError):
    pass


class NotLinearInConstants(ValueError):
    pass


class VerificationFailed(AssertionError):
    def __init__(self, report: "VerificationReport"):
        self.report = report
        super().__init__(f"divergence does not vanish on solutions; residual = {report.residual}")


@dataclass(frozen=True)
class Symmetry:
    """Point generator; components may depend on t, x, u and parameters only."""

    xi_t: DiffPoly
    xi_x: DiffPoly
    eta: DiffPoly

    def __post_init__(self):
        for name in ("xi_t", "xi_x", "eta"):
            p = getattr(self, name)
            bad = [a for a in p.atoms() if a.kind == JET and (a.name != "u" or a.order > 0)]
            if bad:
                raise ValueError(f"{name} may depend on t, x, u only; found {bad}")

    @property
    def xi(self) -> dict:
        return {"t": self.xi_t, "x": self.xi_x}

    @classmethod
    def of(cls, xi_t=0, xi_x=0, eta=0) -> "Symmetry":
        return cls(DiffPoly._lift(xi_t), DiffPoly._lift(xi_x), DiffPoly._lift(eta))


def scaling_symmetry() -> Symmetry:
    """X = u d/du - t d/dt."""
    return Symmetry.of(xi_t=-T, eta=u_())


def camassa_holm_symmetry(kappa: DiffPoly | int | None = None) -> Symmetry:
    """X = -2t d/dt + kappa t d/dx + (kappa + 2u) d/du."""
    from .equations import KAPPA

    k = KAPPA if kappa is None else DiffPoly._lift(Fraction(kappa))
    return Symmetry.of(xi_t=T.scale(-2), xi_x=k * T, eta=k + u_().scale(2))


def x_translation() -> Symmetry:
    return Symmetry.of(xi_x=1)


def characteristic(sym: Symmetry) -> DiffPoly:
    """W = eta - xi_t u_t - xi_x u_x."""
    return sym.eta - sym.xi_t * u_("t") - sym.xi_x * u_("x")


# -- reduction on solutions --------------------------------------------------


class ReductionTable:
    """Rewrite rules lead -> rhs plus their prolongations D_J(lead) -> D_J(rhs)."""

    def __init__(self, rules: Iterable[tuple[Atom, DiffPoly]], max_order: int = MAX_ORDER):
        self.base = list(rules)
        self.max_order = max_order
        self._derived: dict = {lead: rhs for lead, rhs in self.base}

    @classmethod
    def for_equation(cls, eq: EquationSpec, max_order: int = MAX_ORDER) -> "ReductionTable":
        return cls([(eq.require_leading(), eq.solved())], max_order)

    def base_for(self, a: Atom) -> Atom | None:
        for lead, _ in self.base:
            if is_prolongation(a, lead):
                return lead
        return None

    def rule(self, a: Atom) -> DiffPoly:
        if a in self._derived:
            return self._derived[a]
        lead = self.base_for(a)
        if lead is None:
            raise KeyError(a)
        if a.nx > lead.nx:
            out = total_derivative(self.rule(jet(a.name, a.nt, a.nx - 1)), "x", self.max_order)
        else:
            out = total_derivative(self.rule(jet(a.name, a.nt - 1, a.nx)), "t", self.max_order)
        self._derived[a] = out
        return out

    def reduce(self, p: DiffPoly, max_rounds: int = 64) -> DiffPoly:
        for _ in range(max_rounds):
            hits = [a for a in p.jets() if self.base_for(a) is not None]
            if not hits:
                return p
            p = substitute(p, {a: self.rule(a) for a in hits})
        raise NonTerminating(f"reduction did not terminate within {max_rounds} rounds")


def reduce_on_solutions(p: DiffPoly, eq: EquationSpec) -> DiffPoly:
    """Eliminate the leading jet of eq and all its derivatives from p."""
    return ReductionTable.for_equation(eq).reduce(p)


def adjoint_table(eq: EquationSpec) -> ReductionTable:
    """Rules for the system F = 0, F* = 0 (u-leading and v-leading jets)."""
    fstar = adjoint(eq)
    try:
        vlead = choose_leading(fstar, "v")
    except InvalidEquation:
        raise InvalidEquation(f"adjoint {fstar} cannot be solved for a v-jet") from None
    c = jet_partial(fstar, "v", vlead.nt, vlead.nx).as_rational()
    vrhs = (fstar - DiffPoly.atom(vlead).scale(c)).scale(-1 / c)
    return ReductionTable([(eq.require_leading(), eq.solved()), (vlead, vrhs)])


# -- symmetry admission ------------------------------------------------------


def prolonged_action(F: DiffPoly, sym: Symmetry, max_order: int = MAX_ORDER) -> DiffPoly:
    """pr X (F) = sum_J D_J(W) dF/du_J + xi_t D_t F + xi_x D_x F (u-jets only)."""
    W = characteristic(sym)
    out = sym.xi_t * total_derivative(F, "t", max_order) + sym.xi_x * total_derivative(F, "x", max_order)
    for a in sorted(F.jets("u") | {U}):
        dF = jet_partial(F, "u", a.nt, a.nx)
        if dF:
            out = out + total_derivatives(W, "t" * a.nt + "x" * a.nx, max_order) * dF
    return out


@dataclass(frozen=True)
class AdmissionResult:
    admitted: bool
    residual: DiffPoly

    def __bool__(self) -> bool:
        return self.admitted


def check_admission(eq: EquationSpec, sym: Symmetry) -> AdmissionResult:
    residual = reduce_on_solutions(prolonged_action(eq.lhs, sym), eq)
    return AdmissionResult(residual.is_zero(), residual)


# -- conserved vectors -------------------------------------------------------


@dataclass(frozen=True)
class ConservedVector:
    c1: DiffPoly
    c2: DiffPoly
    provenance: tuple = ()
    # the xi^i L contributions when they were included, so normalize can drop them
    xi_l: tuple | None = field(default=None, compare=False)

    def components(self) -> tuple[DiffPoly, DiffPoly]:
        return self.c1, self.c2

    def divergence(self) -> DiffPoly:
        return total_derivative(self.c1, "t") + total_derivative(self.c2, "x")

    def with_step(self, step: str, **changes) -> "ConservedVector":
        return replace(self, provenance=self.provenance + (step,), **changes)


def _ordered(n: int) -> list[tuple[str, ...]]:
    return list(itertools.product(DIRS, repeat=n))


def conserved_vector_from_lagrangian(L: DiffPoly, sym: Symmetry, include_xiL: bool = True,
                                     max_order: int = MAX_ORDER) -> tuple[DiffPoly, DiffPoly]:
    """C^i = [xi^i L] + sum_{J,K} (-1)^|K| D_J(W) D_K(dL/du_{iJK}).

    The partials are taken with respect to ordered indices using the
    symmetric-form convention; for third-order L this is exactly the
    W[...] + D_j(W)[...] + D_j D_k(W)[...] formula.
    """
    W = characteristic(sym)
    order = L.max_order("u")
    dW: dict = {}
    dL: dict = {}

    def D_W(seq):
        key = (seq.count("t"), seq.count("x"))
        if key not in dW:
            dW[key] = total_derivatives(W, seq, max_order)
        return dW[key]

    def D_partial(idx, seq):
        key = ((idx.count("t"), idx.count("x")), (seq.count("t"), seq.count("x")), len(idx))
        if key not in dL:
            dL[key] = total_derivatives(ordered_jet_partial(L, "u", idx), seq, max_order)
        return dL[key]

    out = {}
    for i in DIRS:
        acc = sym.xi[i] * L if include_xiL else ZERO
        for s in range(order):
            for r in range(order - s):
                sign = -1 if r % 2 else 1
                for J in _ordered(s):
                    w = D_W(J)
                    if not w:
                        continue
                    for K in _ordered(r):
                        term = D_partial((i,) + J + K, K)
                        if term:
                            acc = acc + (w * term).scale(sign)
        out[i] = acc
    return out["t"], out["x"]


def conserved_vector(eq: EquationSpec, sym: Symmetry, subst: DiffPoly | None = None,
                     include_xiL: bool = False) -> ConservedVector:
    """Raw conserved vector of eq for sym; v-jets are replaced by subst at the end."""
    L = formal_lagrangian(eq).value
    c1, c2 = conserved_vector_from_lagrangian(L, sym, include_xiL)
    steps = ["raw" + (" with xi*L" if include_xiL else "")]
    xi_l = (sym.xi_t * L, sym.xi_x * L) if include_xiL else None
    if subst is not None:
        c1 = substitute_dependent(c1, subst)
        c2 = substitute_dependent(c2, subst)
        if xi_l is not None:
            xi_l = tuple(substitute_dependent(p, subst) for p in xi_l)
        steps.append(f"v = {subst}")
    return ConservedVector(c1, c2, tuple(steps), xi_l)


# -- moving x-divergences ----------------------------------------------------


def _label(a: Atom) -> tuple:
    return (a.name, a.nt)


def _integration_step(m: tuple):
    """Integrate one monomial by parts in x, or return None.

    The top x-order jet w = lbl_k must be unique at its order and appear
    linearly; other jets at order k-1 must carry a smaller label than w so
    that derivatives only move towards lower labels (this rules out cycles).
    Returns (potential, leftover) with m = D_x(potential) + leftover.
    """
    jets = [(a, e) for a, e in m if a.kind == JET]
    if not jets:
        # polynomial in x (and constants/t): integrate the x power directly
        n = sum(e for a, e in m if a.kind == INDEP and a.name == "x")
        rest = tuple((a, e) for a, e in m if not (a.kind == INDEP and a.name == "x"))
        pot = monomial_poly(mono_mul(rest, ((indep("x"), n + 1),))).scale(Fraction(1, n + 1))
        return pot, ZERO
    k = max(a.nx for a, _ in jets)
    if k == 0:
        return None
    top = [(a, e) for a, e in jets if a.nx == k]
    if len(top) != 1 or top[0][1] != 1:
        return None
    w = top[0][0]
    lower = jet(w.name, w.nt, k - 1)
    for a, _ in jets:
        if a.nx == k - 1 and a != lower and _label(a) > _label(w):
            return None
    return _integration_by_parts(m, w)


def _process_key(m: tuple) -> tuple:
    return tuple(sorted(((a.nx, a.name, a.nt) for a, _ in m if a.kind == JET), reverse=True))


def extract_x_derivative(p: DiffPoly, max_steps: int = 10_000) -> tuple[DiffPoly, DiffPoly]:
    """Split p = D_x(A) + remainder by descending integration by parts."""
    work = dict(p.items())
    potential: dict = {}
    remainder: dict = {}
    steps = 0
    while work:
        m = max(work, key=_process_key)
        c = work.pop(m)
        step = _integration_step(m) if steps < max_steps else None
        steps += 1
        if step is None:
            remainder[m] = remainder.get(m, 0) + c
            continue
        pot, left = step
        for mm, cc in pot.items():
            potential[mm] = potential.get(mm, 0) + c * cc
        for mm, cc in left.items():
            n = work.get(mm, 0) + c * cc
            if n:
                work[mm] = n
            else:
                work.pop(mm, None)
    return DiffPoly(potential), DiffPoly(remainder)


def _raising_step(m: tuple, table: ReductionTable):
    """Integrate a stuck monomial by moving a derivative onto a jet g whose
    x-derivative is reducible, e.g. u_x*u_tx = D_x(u*u_tx) - u*u_txx with
    u_txx then eliminated through the equation."""
    jets = [(a, e) for a, e in m if a.kind == JET]
    gs = [a for a, _ in jets if table.base_for(jet(a.name, a.nt, a.nx + 1, 10 ** 6)) is not None]
    if not gs:
        return None
    g = gs[0]
    hs = [a for a, e in jets if a != g and a.nx >= 1 and e == 1]
    if not hs:
        return None
    h = max(hs, key=lambda a: (a.nx, a.name, a.nt))
    return _integration_by_parts(m, h)


def _integration_by_parts(m: tuple, w: Atom):
    lower = jet(w.name, w.nt, w.nx - 1)
    e = next((ex for a, ex in m if a == lower), 0)
    if e == -1:
        return None
    rest = tuple((a, ex) for a, ex in m if a != w and a != lower)
    lifted = monomial_poly(mono_mul(rest, ((lower, e + 1),))).scale(Fraction(1, e + 1))
    leftover = -(DiffPoly.atom(lower, e + 1) * total_derivative(monomial_poly(rest), "x")).scale(
        Fraction(1, e + 1))
    return lifted, leftover


def extract_x_derivative_on_solutions(p: DiffPoly, eq: EquationSpec,
                                      max_raise: int = 64) -> tuple[DiffPoly, DiffPoly]:
    """Like :func:`extract_x_derivative` but modulo the equation.

    Returns (A, remainder) with p = D_x(A) + remainder on solutions; the
    remainder is reduced.  Terms that only integrate after an elimination
    (the u_txx-leading case) are handled by a raising step.
    """
    table = ReductionTable.for_equation(eq)
    potential = ZERO
    work = table.reduce(p)
    for _ in range(max_raise):
        A, rem = extract_x_derivative(work)
        potential = potential + A
        if rem.is_zero():
            return potential, rem
        for m, c in rem.terms():
            step = _raising_step(m, table)
            if step is not None:
                break
        else:
            return potential, rem
        lifted, leftover = step
        potential = potential + lifted.scale(c)
        work = table.reduce(rem - monomial_poly(m).scale(c) + leftover.scale(c))
    return potential, work


def x_euler(p: DiffPoly) -> dict:
    """x-only Euler operators of p, one per (dependent variable, t-count) label."""
    out = {}
    labels = {(a.name, a.nt) for a in p.jets()}
    for dep, nt in sorted(labels):
        acc = ZERO
        for a in p.jets(dep):
            if a.nt != nt:
                continue
            term = total_derivatives(jet_partial(p, dep, a.nt, a.nx), "x" * a.nx)
            acc = acc + (-term if a.nx % 2 else term)
        out[(dep, nt)] = acc
    return out


def is_x_divergence(p: DiffPoly) -> bool:
    """Exactness test: p = D_x(A) for some A iff every x-Euler operator vanishes
    and the jet-free part integrates (it always does, polynomially)."""
    return all(e.is_zero() for e in x_euler(p).values())


# -- normalization -----------------------------------------------------------


def normalize(cv: ConservedVector, eq: EquationSpec) -> ConservedVector:
    """Drop xi*L, reduce C1, move its x-divergence into C2, reduce C2."""
    table = ReductionTable.for_equation(eq)
    c1, c2 = cv.c1, cv.c2
    out = cv
    if cv.xi_l is not None:
        c1, c2 = c1 - cv.xi_l[0], c2 - cv.xi_l[1]
        out = out.with_step("drop xi*L", c1=c1, c2=c2, xi_l=None)
    c1 = table.reduce(c1)
    out = out.with_step("reduce C1", c1=c1)
    A, rest = extract_x_derivative_on_solutions(c1, eq)
    if A:
        c1 = rest
        c2 = c2 + total_derivative(A, "t")
        out = out.with_step(f"shift D_x({A}) from C1 into C2", c1=c1, c2=c2)
    c2 = table.reduce(c2)
    return out.with_step("reduce C2", c2=c2)


def split_by_constants(cv: ConservedVector, constants: Sequence[str] = ("a", "b")) -> list[ConservedVector]:
    """Coefficient vectors of each free constant (plus any constant-free part)."""
    chosen = set(constants)

    def is_const(a: Atom) -> bool:
        return a.kind == CONST and a.name in chosen

    parts = [collect_monomials(cv.c1, is_const), collect_monomials(cv.c2, is_const)]
    keys = set(parts[0]) | set(parts[1])
    for key in keys:
        if sum(e for _, e in key) > 1:
            raise NotLinearInConstants(f"vector is not linear in {sorted(chosen)}: {key}")
    if keys <= {ONE_MONO}:
        return [cv]
    out = []
    for key in sorted(keys, key=lambda k: (len(k), k)):
        label = key[0][0].name if key else "free part"
        c1 = parts[0].get(key, ZERO)
        c2 = parts[1].get(key, ZERO)
        out.append(cv.with_step(f"coefficient of {label}", c1=c1, c2=c2))
    return out


# -- verification ------------------------------------------------------------


@dataclass(frozen=True)
class VerificationReport:
    divergence: DiffPoly
    residual: DiffPoly
    multiplier: DiffPoly | None

    @property
    def ok(self) -> bool:
        return self.residual.is_zero()


def multiplier_of(div: DiffPoly, eq: EquationSpec) -> DiffPoly | None:
    """Lambda with div == Lambda * F exactly, if div is such a plain multiple."""
    lead = eq.require_leading()
    if div.is_zero():
        return ZERO
    if div.degree(lead) != 1:
        return None
    lam = jet_partial(div, lead.name, lead.nt, lead.nx) / eq.leading_coeff
    if lam.degree(lead) or any(is_prolongation(a, lead) for a in lam.jets("u")):
        return None
    return lam if (div - lam * eq.lhs).is_zero() else None


def verify_local(cv: ConservedVector, eq: EquationSpec, strict: bool = True) -> VerificationReport:
    div = cv.divergence()
    report = VerificationReport(div, reduce_on_solutions(div, eq), None)
    if report.ok:
        report = replace(report, multiplier=multiplier_of(div, eq))
    if strict and not report.ok:
        raise VerificationFailed(report)
    return report


def verify_nonlocal(cv: ConservedVector, eq: EquationSpec, strict: bool = True) -> VerificationReport:
    div = cv.divergence()
    report = VerificationReport(div, adjoint_table(eq).reduce(div), None)
    if strict and not report.ok:
        raise VerificationFailed(report)
    return report


@dataclass(frozen=True)
class Equivalence:
    c1_x_exact: bool
    divergence_vanishes: bool
    c1_potential: DiffPoly
    factor: Fraction = Fraction(1)  # cv ~ factor * other

    def __bool__(self) -> bool:
        return self.c1_x_exact and self.divergence_vanishes


def _equivalent_exact(cv, other, eq, table) -> Equivalence:
    d1 = table.reduce(cv.c1 - other.c1)
    d2 = cv.c2 - other.c2
    A, rest = extract_x_derivative_on_solutions(d1, eq)
    exact = rest.is_zero() or is_x_divergence(rest)
    div = table.reduce(total_derivative(d1, "t") + total_derivative(d2, "x"))
    return Equivalence(exact, div.is_zero(), A)


def equivalent(cv: ConservedVector, other: ConservedVector, eq: EquationSpec,
               up_to_factor: bool = False) -> Equivalence:
    """Equal up to a trivial vector: the C1 difference is D_x(A) on solutions
    and the difference vector's divergence vanishes on solutions.

    With ``up_to_factor`` a nonzero rational multiple of ``other`` is also
    accepted; candidate factors come from coefficient ratios of the reduced
    C1 components and the one found is reported.
    """
    table = ReductionTable.for_equation(eq)
    plain = _equivalent_exact(cv, other, eq, table)
    if plain or not up_to_factor:
        return plain
    mine, theirs = table.reduce(cv.c1), table.reduce(other.c1)
    ratios = []
    for m, c in theirs.items():
        r = dict(mine.items()).get(m)
        if r is not None and r / c not in ratios:
            ratios.append(r / c)
    for r in ratios:
        scaled = ConservedVector(other.c1.scale(r), other.c2.scale(r))
        res = _equivalent_exact(cv, scaled, eq, table)
        if res:
            return replace(res, factor=r)
    return plain


# -- correctness oracle ------------------------------------------------------


def fundamental_identity_check(L: DiffPoly, sym: Symmetry) -> DiffPoly:
    """Residual of pr X(L) + L div(xi) = W E_u(L) + D_t C1 + D_x C2.

    Holds for any L and any point generator (admitted or not); the residual
    must be identically zero.
    """
    W = characteristic(sym)
    lhs = prolonged_action(L, sym) + L * (total_derivative(sym.xi_t, "t") + total_derivative(sym.xi_x, "x"))
    c1, c2 = conserved_vector_from_lagrangian(L, sym, include_xiL=True)
    return lhs - W * variational_derivative(L, "u") - total_derivative(c1, "t") - total_derivative(c2, "x")


__all__ = [
    "Symmetry", "ConservedVector", "ReductionTable", "VerificationReport", "VerificationFailed",
    "NotLinearInConstants", "NonTerminating", "AdmissionResult", "Equivalence",
    "scaling_symmetry", "camassa_holm_symmetry", "x_translation", "characteristic",
    "check_admission", "prolonged_action", "conserved_vector", "conserved_vector_from_lagrangian",
    "reduce_on_solutions", "adjoint_table", "extract_x_derivative",
    "extract_x_derivative_on_solutions", "is_x_divergence", "normalize",
    "split_by_constants", "verify_local", "verify_nonlocal", "multiplier_of", "equivalent",
    "fundamental_identity_check", "T", "X",
]
