"""Relative drift of conserved integrals under time-step refinement.

Writes one CSV row per (case, dt).  Usage: python3 drift_convergence.py [out.csv]
"""
import csv
import sys

from chadjoint.equations import camassa_holm, rosenau_hyman
from chadjoint.numerics import Grid, monitor_functional, profile, relative_drift, simulate
from chadjoint.syntax import parse

CASES = [
    # name, equation, n, t_end, u0, densities, time steps
    ("ch-roundoff", camassa_holm(kappa=0), 256, 1.0, "0.2 + 0.1*cos(x)", ["u", "u^2 + u_x^2"], [1e-3, 5e-4]),
    ("ch-truncation", camassa_holm(kappa=0), 64, 2.0, "0.2 + 0.1*cos(x)", ["u^2 + u_x^2"], [0.2, 0.1, 0.05, 0.025]),
    ("rh", rosenau_hyman(), 16, 0.5, "1 + 0.01*cos(x)", ["u", "u^3", "u^2"], [1e-3, 5e-4, 2.5e-4]),
]


def main(out):
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["case", "dt", "density", "relative_drift"])
    for name, eq, n, t_end, u0, densities, steps in CASES:
        for dt in steps:
            tr = simulate(eq, Grid(n=n, dt=dt, t_end=t_end), profile(u0))
            for d in densities:
                w.writerow([name, dt, d, repr(relative_drift(monitor_functional(tr, parse(d), eq)))])


if __name__ == "__main__":
    if len(sys.argv) > 1:
        with open(sys.argv[1], "w", newline="") as fh:
            main(fh)
    else:
        main(sys.stdout)
