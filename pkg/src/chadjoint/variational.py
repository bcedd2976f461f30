"""Formal Lagrangians, the Euler operator and adjoint equations."""
from __future__ import annotations

from dataclasses import dataclass

from .algebra import MAX_ORDER, DiffPoly, D_multi, jet, jet_partial, substitute_dependent, v_, ZERO
from .equations import EquationSpec


@dataclass(frozen=True)
class FormalLagrangian:
    value: DiffPoly

    def equation(self) -> DiffPoly:
        """Recover F from L = v*F."""
        return substitute_dependent(self.value, 1)


def formal_lagrangian(eq: EquationSpec) -> FormalLagrangian:
    return FormalLagrangian(v_() * eq.lhs)


def variational_derivative(L: DiffPoly, dep: str = "u", max_order: int = MAX_ORDER) -> DiffPoly:
    """Euler operator: sum over jets J of (-D)^J dL/d(dep_J)."""
    out = ZERO
    for a in sorted(L.jets(dep) | {jet(dep)}):
        term = D_multi(jet_partial(L, dep, a.nt, a.nx), a.nt, a.nx, max_order)
        out = out + (-term if a.order % 2 else term)
    return out


def adjoint(eq: EquationSpec) -> DiffPoly:
    """F* = delta(v F) / delta u."""
    return variational_derivative(formal_lagrangian(eq).value, "u")
