"""Print the quasi self-adjointness classification of the generalized family and its named members."""
from chadjoint.equations import camassa_holm, fornberg_whitham, generalized_family, rosenau_hyman
from chadjoint.selfadjoint import classify_equation
from chadjoint.syntax import to_text
from chadjoint.variational import adjoint


def show(title, eq):
    print(f"== {title}")
    print(f"   F*  = {to_text(adjoint(eq))}")
    result = classify_equation(eq)
    print(f"   {result.kind}")
    for s in result.solutions:
        conds = ", ".join(str(c) for c in s.conditions) or "always"
        print(f"   v = {s.family.text()}   [{conds}]   lambda = {s.family.multiplier_text()}")


if __name__ == "__main__":
    show("generalized family, eps = 0", generalized_family(eps=0))
    show("generalized family, eps = 1", generalized_family(eps=1))
    show("Camassa-Holm", camassa_holm())
    show("Fornberg-Whitham", fornberg_whitham())
    show("Rosenau-Hyman", rosenau_hyman())
