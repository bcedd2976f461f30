"""Algebraic identities checked on random instances (100 each)."""
import itertools

from hypothesis import given, settings, strategies as st

from chadjoint.algebra import (
    PHI_CLOSURE, DiffPoly, collect_monomials, jet_partial, ordered_jet_partial, positive_order_jet,
    reassemble, substitute_dependent, total_derivative,
)
from chadjoint.conslaw import (
    ConservedVector, Symmetry, extract_x_derivative, fundamental_identity_check, reduce_on_solutions,
    split_by_constants,
)
from chadjoint.equations import camassa_holm, rosenau_hyman
from chadjoint.syntax import from_json, parse, to_json, to_text
from chadjoint.variational import variational_derivative

from strategies import point_coefficients, polys, printable_polys

N = settings(max_examples=100, deadline=None)
DIRS = st.sampled_from("tx")


@N
@given(polys(deps=("u", "v"), max_order=3))
def test_total_derivatives_commute(p):
    assert total_derivative(total_derivative(p, "t"), "x") == total_derivative(total_derivative(p, "x"), "t")


@N
@given(polys(deps=("u", "v")), polys(deps=("u", "v")), DIRS)
def test_leibniz(p, q, d):
    assert total_derivative(p * q, d) == total_derivative(p, d) * q + p * total_derivative(q, d)


@N
@given(polys(deps=("u", "v")), st.one_of(st.just(PHI_CLOSURE), polys(max_order=1, max_terms=3)), DIRS)
def test_substitution_commutes_with_derivatives(p, repl, d):
    lhs = substitute_dependent(total_derivative(p, d), repl)
    rhs = total_derivative(substitute_dependent(p, repl), d)
    assert lhs == rhs


@N
@given(polys(deps=("u", "v")), polys(deps=("u", "v")), st.sampled_from("uv"))
def test_euler_operator_kills_divergences(a, b, dep):
    div = total_derivative(a, "t") + total_derivative(b, "x")
    assert variational_derivative(div, dep).is_zero()


@N
@given(polys(deps=("u",)), polys(deps=("u",)), st.fractions(-3, 3, max_denominator=4))
def test_euler_operator_is_linear(p, q, c):
    assert variational_derivative(p + q.scale(c)) == variational_derivative(p) + variational_derivative(q).scale(c)


@N
@given(polys(deps=("u", "v"), max_order=3, max_terms=3, max_factors=3),
       point_coefficients, point_coefficients, point_coefficients)
def test_fundamental_identity(L, xi_t, xi_x, eta):
    sym = Symmetry(xi_t, xi_x, eta)
    assert fundamental_identity_check(L, sym).is_zero()


@N
@given(printable_polys())
def test_parse_print_round_trip(p):
    text = to_text(p)
    assert parse(text) == p
    assert to_text(parse(text)) == text
    assert from_json(to_json(p)) == p


@N
@given(polys(deps=("u", "v"), max_order=3), st.integers(0, 3), st.integers(0, 3))
def test_ordered_partials_partition(p, nt, nx):
    seqs = set(itertools.permutations("t" * nt + "x" * nx))
    total = DiffPoly()
    for seq in seqs:
        total = total + ordered_jet_partial(p, "u", seq)
    assert total == jet_partial(p, "u", nt, nx)


@N
@given(printable_polys())
def test_collect_reassembles(p):
    assert reassemble(collect_monomials(p, positive_order_jet)) == p


@N
@given(polys(deps=("u", "v"), max_order=3))
def test_x_extraction_is_exact(p):
    A, rest = extract_x_derivative(p)
    assert total_derivative(A, "x") + rest == p


@N
@given(polys(deps=("u",), max_order=2), st.sampled_from([rosenau_hyman(), camassa_holm()]))
def test_reduction_is_idempotent_and_kills_the_equation(p, eq):
    r = reduce_on_solutions(p, eq)
    assert reduce_on_solutions(r, eq) == r
    assert reduce_on_solutions(p * eq.lhs + total_derivative(eq.lhs, "x") * p, eq).is_zero()


@N
@given(polys(max_terms=3), polys(max_terms=3), polys(max_terms=3), polys(max_terms=3))
def test_split_recombines(p1, p2, q1, q2):
    def clean(p):  # a, b must not occur inside the pieces
        return DiffPoly.from_terms((m, c) for m, c in p.items() if all(x.name not in ("a", "b") for x, _ in m))

    a, b = parse("a"), parse("b")
    cv = ConservedVector(a * clean(p1) + b * clean(p2), a * clean(q1) + b * clean(q2))
    c1 = c2 = DiffPoly()
    for part in split_by_constants(cv):
        label = part.provenance[-1].split()[-1] if part.provenance else "1"
        factor = parse(label) if label in ("a", "b") else parse("1")
        c1, c2 = c1 + factor * part.c1, c2 + factor * part.c2
    assert (c1, c2) == (cv.c1, cv.c2)
