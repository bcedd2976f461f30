"""Evolution equations F = 0 and the members of the generalized CH family."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .algebra import (
    PARAM, Atom, DiffPoly, jet_partial, param, substitute_params, u_,
)


class InvalidEquation(ValueError):
    pass


def is_prolongation(j: Atom, lead: Atom) -> bool:
    """True when jet j is a derivative of the jet lead (or lead itself)."""
    return j.name == lead.name and j.nt >= lead.nt and j.nx >= lead.nx


def solvable_in(lhs: DiffPoly, a: Atom) -> bool:
    if lhs.degree(a) != 1:
        return False
    coeff = jet_partial(lhs, a.name, a.nt, a.nx)
    c = coeff.as_rational()
    if c is None or c == 0:
        return False
    # the solved form must not feed derivatives of a back in
    rest = lhs - DiffPoly.atom(a).scale(c)
    return not any(is_prolongation(j, a) for j in rest.jets(a.name))


def choose_leading(lhs: DiffPoly, dep: str = "u") -> Atom:
    """Pick the jet to eliminate when reducing on solutions.

    Candidates are u-jets in which ``lhs`` is linear with a nonzero rational
    coefficient; t-derivatives are preferred, then the highest order.  For the
    generalized family this is u_txx when eps != 0 and u_t when eps = 0.
    """
    cands = [a for a in lhs.jets(dep) if solvable_in(lhs, a)]
    if not cands:
        raise InvalidEquation(f"no jet coordinate can be solved for in {lhs}")
    return max(cands, key=lambda a: (a.nt > 0, a.order, a.nt))


@dataclass(frozen=True)
class EquationSpec:
    """F = 0 with F a differential polynomial in u-jets and parameters."""

    lhs: DiffPoly
    leading: Atom | None
    name: str = ""
    values: Mapping[str, Fraction] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.lhs.jets("v"):
            raise InvalidEquation("equation must not involve v")
        if not self.lhs.jets("u"):
            raise InvalidEquation("equation must involve u")
        if self.leading is not None and not solvable_in(self.lhs, self.leading):
            raise InvalidEquation(f"lhs is not solvable for {self.leading!r}")

    @classmethod
    def from_lhs(cls, lhs: DiffPoly, name: str = "", leading: Atom | None = None) -> "EquationSpec":
        """Build an equation; with symbolic eps no jet is solvable and leading is None."""
        if leading is None:
            try:
                leading = choose_leading(lhs)
            except InvalidEquation:
                leading = None
        return cls(lhs, leading, name)

    def require_leading(self) -> Atom:
        if self.leading is None:
            raise InvalidEquation(
                f"{self.lhs} has no jet with a constant coefficient to solve for; "
                "give the parameters numeric values")
        return self.leading

    @property
    def params(self) -> set[str]:
        return {a.name for a in self.lhs.atoms() if a.kind == PARAM}

    @property
    def leading_coeff(self) -> Fraction:
        a = self.require_leading()
        return jet_partial(self.lhs, a.name, a.nt, a.nx).as_rational()

    def solved(self) -> DiffPoly:
        """Right-hand side R with leading = R on solutions."""
        a = self.require_leading()
        c = self.leading_coeff
        rest = self.lhs - DiffPoly.atom(a).scale(c)
        return rest.scale(-1 / c)

    def specialize(self, **values) -> "EquationSpec":
        vals = {k: Fraction(v) for k, v in values.items() if v is not None}
        lhs = substitute_params(self.lhs, vals)
        return EquationSpec.from_lhs(lhs, self.name).with_values({**self.values, **vals})

    def with_values(self, values) -> "EquationSpec":
        return EquationSpec(self.lhs, self.leading, self.name, dict(values))

    def scaled(self, r) -> "EquationSpec":
        return EquationSpec(self.lhs.scale(r), self.leading, self.name, self.values)

    def __str__(self) -> str:
        return str(self.lhs)


EPS, ALPHA, BETA, KAPPA = (DiffPoly.atom(param(n)) for n in ("eps", "alpha", "beta", "kappa"))


def _val(v, symbol: DiffPoly) -> DiffPoly:
    return symbol if v is None else DiffPoly.const(Fraction(v))


def generalized_family(eps=None, alpha=None, beta=None, kappa=None, name="generalized") -> EquationSpec:
    """u_t - eps u_txx - u u_xxx - beta u_x u_xx - alpha u u_x + kappa u_x.

    Any parameter left as ``None`` stays symbolic.
    """
    u = u_()
    lhs = (u_("t") - _val(eps, EPS) * u_("txx") - u * u_("xxx")
           - _val(beta, BETA) * u_("x") * u_("xx") - _val(alpha, ALPHA) * u * u_("x")
           + _val(kappa, KAPPA) * u_("x"))
    values = {k: Fraction(v) for k, v in
              dict(eps=eps, alpha=alpha, beta=beta, kappa=kappa).items() if v is not None}
    return EquationSpec.from_lhs(lhs, name).with_values(values)


def camassa_holm(kappa=None) -> EquationSpec:
    return generalized_family(eps=1, alpha=-3, beta=2, kappa=kappa, name="camassa-holm")


def fornberg_whitham() -> EquationSpec:
    return generalized_family(eps=1, alpha=-1, beta=3, kappa=1, name="fornberg-whitham")


def rosenau_hyman() -> EquationSpec:
    return generalized_family(eps=0, alpha=1, beta=3, kappa=0, name="rosenau-hyman")


NAMED = {
    "generalized": generalized_family,
    "camassa-holm": camassa_holm,
    "fornberg-whitham": fornberg_whitham,
    "rosenau-hyman": rosenau_hyman,
}


__all__ = [
    "EquationSpec", "InvalidEquation", "choose_leading", "is_prolongation", "generalized_family", "camassa_holm",
    "fornberg_whitham", "rosenau_hyman", "NAMED",
]
