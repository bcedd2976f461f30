"""Derive the Rosenau-Hyman and Camassa-Holm conserved vectors and check them."""
from chadjoint.algebra import u_
from chadjoint.conslaw import (
    camassa_holm_symmetry, conserved_vector, normalize, scaling_symmetry, split_by_constants, verify_local,
)
from chadjoint.equations import camassa_holm, rosenau_hyman
from chadjoint.syntax import parse, to_text


def show(label, cv, eq):
    rep = verify_local(cv, eq, strict=False)
    print(f"{label}\n   C1 = {to_text(cv.c1)}\n   C2 = {to_text(cv.c2)}")
    print(f"   D_t C1 + D_x C2 = ({to_text(rep.multiplier)}) * F   residual {to_text(rep.residual)}")


if __name__ == "__main__":
    rh = rosenau_hyman()
    cv = normalize(conserved_vector(rh, scaling_symmetry(), parse("a + b*u^2")), rh)
    show("Rosenau-Hyman, scaling symmetry, v = a + b*u^2", cv, rh)
    for part in split_by_constants(cv):
        show("  component", part, rh)

    ch = camassa_holm()
    show("Camassa-Holm, v = u", normalize(conserved_vector(ch, camassa_holm_symmetry(), u_()), ch), ch)
    ch0 = camassa_holm(kappa=0)
    show("Camassa-Holm kappa = 0, scaling symmetry, v = u",
         normalize(conserved_vector(ch0, scaling_symmetry(), u_()), ch0), ch0)
