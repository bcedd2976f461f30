import pytest

from chadjoint.algebra import DiffPoly, ZERO, jet, total_derivative, total_derivatives, u_, v_
from chadjoint.conslaw import (
    ConservedVector, NotLinearInConstants, ReductionTable, Symmetry, VerificationFailed, camassa_holm_symmetry,
    characteristic, check_admission, conserved_vector, conserved_vector_from_lagrangian, equivalent,
    extract_x_derivative, extract_x_derivative_on_solutions, fundamental_identity_check, is_x_divergence,
    normalize, reduce_on_solutions, scaling_symmetry, split_by_constants, verify_local, verify_nonlocal,
    x_translation,
)
from chadjoint.equations import EquationSpec, camassa_holm, generalized_family, rosenau_hyman
from chadjoint.syntax import parse as P
from chadjoint.variational import formal_lagrangian

RH = rosenau_hyman()
CH = camassa_holm()


def test_characteristics():
    assert characteristic(scaling_symmetry()) == P("u + t*u_t")
    assert characteristic(x_translation()) == P("-u_x")
    assert characteristic(camassa_holm_symmetry()) == P("kappa + 2*u + 2*t*u_t - kappa*t*u_x")


def test_symmetry_rejects_jets():
    with pytest.raises(ValueError):
        Symmetry.of(eta=P("u_x"))
    with pytest.raises(ValueError):
        Symmetry.of(xi_t=P("v"))


def test_admission():
    assert check_admission(RH, scaling_symmetry())
    assert check_admission(CH, camassa_holm_symmetry())
    for eq in (RH, CH, generalized_family(eps=2, alpha=1, beta=5, kappa=3)):
        assert check_admission(eq, x_translation())
    res = check_admission(RH, Symmetry.of(xi_t=P("t"), eta=P("u")))
    assert not res and res.residual == P("-2*u*u_x - 6*u_x*u_xx - 2*u*u_xxx")


def test_reduction_rules():
    assert reduce_on_solutions(P("u_t"), RH) == P("u*u_xxx + 3*u_x*u_xx + u*u_x")
    assert reduce_on_solutions(P("u_txx"), CH) == P("u_t - u*u_xxx - 2*u_x*u_xx + 3*u*u_x + kappa*u_x")
    for eq in (RH, CH):
        assert reduce_on_solutions(eq.lhs, eq).is_zero()
        for seq in ("x", "t", "tx", "xx"):
            assert reduce_on_solutions(total_derivatives(eq.lhs, seq), eq).is_zero()
    p = P("u_txxx*u_tt + u_tx")
    once = reduce_on_solutions(p, CH)
    assert reduce_on_solutions(once, CH) == once


def test_raw_rosenau_hyman_vector():
    cv = conserved_vector(RH, scaling_symmetry())
    W = P("u + t*u_t")
    DW, DDW = total_derivative(W, "x"), total_derivatives(W, "xx")
    assert cv.c1 == v_() * W
    assert cv.c2 == (P("-u*v + u_x*v_x - v*u_xx - u*v_xx") * W + P("u*v_x - 2*v*u_x") * DW - P("u*v") * DDW)
    assert verify_nonlocal(cv, RH).ok


def test_trivial_lagrangian_vector():
    L = P("v*u_t")
    for sym, W in [(Symmetry.of(xi_x=-1), "u_x"), (Symmetry.of(eta=P("t*u + x")), "t*u + x")]:
        c1, c2 = conserved_vector_from_lagrangian(L, sym, include_xiL=False)
        assert c1 == v_() * P(W) and c2.is_zero()


def test_extract_x_derivative_examples():
    assert extract_x_derivative(P("u_x^2 + u*u_xx")) == (P("u*u_x"), ZERO)
    assert extract_x_derivative(P("u*u_x")) == (P("1/2*u^2"), ZERO)
    A, rest = extract_x_derivative(P("u^2"))
    assert A.is_zero() and rest == P("u^2")
    p = P("t*u*v*u_xx + 3/2*t*v*u_x^2")
    A, rest = extract_x_derivative(P("t*u*v*u_xxx + t*u_x*v*u_xx + t*u*v_x*u_xx + 3*t*v*u_x*u_xx + 3/2*t*v_x*u_x^2"))
    assert A == p and rest.is_zero()


def test_extract_is_exact_on_mixed_labels():
    p = P("u_t*u_txx + v_x*u_xx^2 + x*u_x + u^3*u_tx")
    A, rest = extract_x_derivative(p)
    assert total_derivative(A, "x") + rest == p


def test_on_solutions_extraction_needs_raising():
    p = P("u*u_t + u_x*u_tx")
    assert not is_x_divergence(p)
    A, rest = extract_x_derivative_on_solutions(p, CH)
    assert rest.is_zero()
    assert reduce_on_solutions(total_derivative(A, "x") - p, CH).is_zero()


def test_rosenau_hyman_normalized_and_split():
    cv = normalize(conserved_vector(RH, scaling_symmetry(), P("a + b*u^2")), RH)
    assert cv.c1 == P("a*u + b*u^3")
    assert cv.c2 == P("-a*(1/2*u^2 + u_x^2 + u*u_xx) - b*(3/4*u^4 + 3*u^3*u_xx)")
    mass, cubic = split_by_constants(cv)
    assert (mass.c1, mass.c2) == (P("u"), P("-1/2*u^2 - u_x^2 - u*u_xx"))
    assert (cubic.c1, cubic.c2) == (P("u^3"), P("-3/4*u^4 - 3*u^3*u_xx"))
    assert verify_local(mass, RH).multiplier == P("1")
    assert verify_local(cubic, RH).multiplier == P("3*u^2")
    assert mass.divergence() == RH.lhs
    assert cv.provenance[0].startswith("raw")


def test_split_recombines_and_rejects_nonlinear():
    cv = ConservedVector(P("a*u + b*u^3 + u_x"), P("a*u_t"))
    free, pa, pb = split_by_constants(cv)
    assert free.c1 + P("a") * pa.c1 + P("b") * pb.c1 == cv.c1
    assert free.c2 + P("a") * pa.c2 + P("b") * pb.c2 == cv.c2
    assert split_by_constants(ConservedVector(P("u"), P("0"))) == [ConservedVector(P("u"), P("0"))]
    with pytest.raises(NotLinearInConstants):
        split_by_constants(ConservedVector(P("a*b*u"), P("0")))


def test_every_stage_stays_conserved():
    cv = conserved_vector(RH, scaling_symmetry(), P("a + b*u^2"), include_xiL=True)
    assert verify_local(cv, RH).ok
    assert verify_local(normalize(cv, RH), RH).ok
    raw = conserved_vector(CH, camassa_holm_symmetry(), u_())
    assert verify_local(normalize(raw, CH), CH).multiplier == P("4*u + kappa")


def test_camassa_holm_vector():
    cv = normalize(conserved_vector(CH, camassa_holm_symmetry(), u_()), CH)
    displayed = ConservedVector(
        P("2*(u^2 + u_x^2) + kappa*u"),
        P("4*(u^3 - u^2*u_xx - u*u_tx) + kappa*(7/2*u^2 - 1/2*u_x^2 - u*u_xx - u_tx + kappa*u)"))
    assert equivalent(cv, displayed, CH)
    assert verify_local(displayed, CH).multiplier == P("4*u + kappa")


def test_equivalence_up_to_factor():
    eq = camassa_holm(kappa=0)
    cv = normalize(conserved_vector(eq, camassa_holm_symmetry(0), u_()), eq)
    half = ConservedVector(P("u^2 + u_x^2"), P("2*(u^3 - u^2*u_xx - u*u_tx)"))
    assert not equivalent(cv, half, eq)
    res = equivalent(cv, half, eq, up_to_factor=True)
    assert res and res.factor == 2


def test_inequivalent_vectors():
    a = ConservedVector(P("u"), P("-1/2*u^2 - u_x^2 - u*u_xx"))
    b = ConservedVector(P("u^3"), P("-3/4*u^4 - 3*u^3*u_xx"))
    assert not equivalent(a, b, RH, up_to_factor=True)


def test_verification_failures():
    with pytest.raises(VerificationFailed) as info:
        verify_local(ConservedVector(P("u"), ZERO), RH)
    assert info.value.report.residual == P("u*u_xxx + 3*u_x*u_xx + u*u_x")
    t_only = EquationSpec.from_lhs(P("u_t"))
    # the adjoint of u_t = 0 is v_t = 0, so (v, 0) is conserved on the pair
    assert verify_nonlocal(ConservedVector(P("v"), ZERO), t_only).ok
    with pytest.raises(VerificationFailed) as info:
        verify_nonlocal(ConservedVector(ZERO, P("v")), t_only)
    assert info.value.report.residual == P("v_x")


def test_fundamental_identity_examples():
    assert fundamental_identity_check(P("v*u_t"), x_translation()).is_zero()
    assert fundamental_identity_check(formal_lagrangian(RH).value, scaling_symmetry()).is_zero()
    assert fundamental_identity_check(formal_lagrangian(CH).value, camassa_holm_symmetry()).is_zero()
