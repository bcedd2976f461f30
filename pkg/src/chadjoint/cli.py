"""Command-line entry points.

Exit codes: 0 success, 1 parse/config error, 2 mathematical precondition
violated, 3 verification failed, 4 numerical blowup.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from .algebra import JetOrderExceeded, DiffPoly
from .config import ConfigError, load_config, parse_config
from .conslaw import (
    ConservedVector, NotLinearInConstants, Symmetry, VerificationFailed, check_admission,
    conserved_vector, normalize, split_by_constants, verify_local, verify_nonlocal,
)
from .equations import NAMED, EquationSpec, InvalidEquation
from .numerics import BlowupDetected, StabilityViolated, UnsupportedJet, profile, relative_drift, simulate, write_csv
from .selfadjoint import InconsistentMultiplier, classify_equation
from .syntax import ParseError, parse, to_json, to_text
from .variational import adjoint

OK, PARSE_ERROR, PRECONDITION, VERIFICATION_FAILED, BLOWUP = range(5)


class Precondition(Exception):
    pass


class Failed(Exception):
    def __init__(self, message: str, payload: dict):
        self.payload = payload
        super().__init__(message)


# -- argument helpers ----------------------------------------------------------


def _read_arg(value: str) -> tuple[str, str | None]:
    """``@path`` reads the file; returns (text, source name)."""
    if value.startswith("@"):
        path = Path(value[1:])
        try:
            return path.read_text(encoding="ascii"), str(path)
        except (OSError, UnicodeDecodeError) as exc:
            raise ConfigError(f"cannot read {path}: {exc}") from None
    return value, None


def load_equation(value: str, assignments=()) -> EquationSpec:
    """An expression, a named equation, or @file (expression or [equation] config)."""
    text, source = _read_arg(value)
    text = text.strip()
    if text in NAMED:
        eq = NAMED[text]()
    elif source is not None and "[" in text.split("\n", 1)[0]:
        eq = parse_config(text, source).equation
        if eq is None:
            raise ConfigError("no [equation] section", source)
    else:
        lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
        eq = EquationSpec.from_lhs(parse(" ".join(ln for ln in lines if ln), source=source))
    values = {}
    for item in assignments:
        name, _, val = item.partition("=")
        if not val:
            raise ConfigError(f"expected name=value, got {item!r}")
        if val.strip() == "symbolic":
            continue
        try:
            values[name.strip()] = Fraction(val.strip())
        except ValueError:
            raise ConfigError(f"{name} must be rational or 'symbolic', got {val!r}") from None
    return eq.specialize(**values) if values else eq


def load_symmetry(value: str) -> Symmetry:
    text, source = _read_arg(value)
    if source is not None and "[symmetry]" in text:
        sym = parse_config(text, source).symmetry
        if sym is None:
            raise ConfigError("no [symmetry] section", source)
        return sym
    parts = {}
    for chunk in text.replace("\n", ";").split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        key, sep, expr = chunk.partition("=")
        key = key.strip()
        if not sep or key not in ("xi_t", "xi_x", "eta"):
            raise ConfigError(f"symmetry entries look like xi_t=<expr>; got {chunk!r}")
        parts[key] = parse(expr, source=source or "--symmetry")
    try:
        return Symmetry.of(**parts)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def load_substitution(value: str) -> DiffPoly:
    text, source = _read_arg(value)
    key, sep, expr = text.strip().partition("=")
    if not sep or key.strip() != "v":
        raise ConfigError(f"substitution looks like v=<expr>; got {text.strip()!r}")
    return parse(expr, source=source or "--substitution")


def _poly_arg(value: str, name: str) -> DiffPoly:
    text, source = _read_arg(value)
    return parse(text.strip(), source=source or name)


# -- subcommands ---------------------------------------------------------------


def cmd_adjoint(args) -> tuple[list[str], dict]:
    eq = load_equation(args.equation, args.set)
    fstar = adjoint(eq)
    return [to_text(fstar)], {"equation": to_json(eq.lhs), "adjoint": to_json(fstar)}


def cmd_check_selfadjoint(args) -> tuple[list[str], dict]:
    sets = list(args.set) + ([f"beta={args.beta}"] if args.beta is not None else [])
    eq = load_equation(args.equation, sets)
    try:
        c = classify_equation(eq)
    except InconsistentMultiplier as exc:
        raise Precondition(str(exc)) from None
    lines = [f"classification: {c.kind}"]
    for con in c.system.constraints:
        lines.append(f"constraint {con}")
    lines.append(f"lambda: {to_text(c.system.multiplier)}")
    for s in c.solutions:
        lines.append(f"solution: {s}")
        lines.append(f"  lambda = {s.family.multiplier_text()}")
    for r in c.residual:
        lines.append(f"residual: {to_text(r)} = 0")
    doc = {
        "classification": c.kind,
        "constraints": [{"monomial": to_text(DiffPoly._raw({k.monomial: Fraction(1)})),
                         "expr": to_json(k.expr)} for k in c.system.constraints],
        "lambda": to_json(c.system.multiplier),
        "solutions": [{
            "family": s.family.kind,
            "phi": s.family.text(),
            "exponent": to_json(s.family.exponent) if s.family.exponent is not None else None,
            "conditions": [str(k) for k in s.conditions],
            "nondegeneracy": list(s.family.nondegeneracy),
            "lambda": s.family.multiplier_text(),
        } for s in c.solutions],
        "residual": [to_json(r) for r in c.residual],
    }
    return lines, doc


def _vector_doc(cv: ConservedVector) -> dict:
    return {"c1": to_json(cv.c1), "c2": to_json(cv.c2), "provenance": list(cv.provenance)}


def cmd_conserved(args) -> tuple[list[str], dict]:
    eq = load_equation(args.equation, args.set)
    sym = load_symmetry(args.symmetry)
    subst = load_substitution(args.substitution) if args.substitution else None
    if eq.leading is None:
        raise Precondition("the equation needs numeric parameters so it can be solved for a jet")
    adm = check_admission(eq, sym)
    if not adm:
        raise Precondition(f"symmetry is not admitted; residual {to_text(adm.residual)}")
    cv = conserved_vector(eq, sym, subst)
    if not (args.raw or args.no_normalize or subst is None):
        cv = normalize(cv, eq)
    lines = [f"C1 = {to_text(cv.c1)}", f"C2 = {to_text(cv.c2)}"]
    doc = {"equation": to_json(eq.lhs), "vector": _vector_doc(cv), "components": []}
    if subst is not None and not args.raw:
        try:
            parts = split_by_constants(cv)
        except NotLinearInConstants as exc:
            raise Precondition(str(exc)) from None
        if len(parts) > 1:
            for part in parts:
                label = part.provenance[-1].removeprefix("coefficient of ")
                lines.append(f"C1[{label}] = {to_text(part.c1)}")
                lines.append(f"C2[{label}] = {to_text(part.c2)}")
                doc["components"].append({"constant": label, **_vector_doc(part)})
    return lines, doc


def cmd_verify(args) -> tuple[list[str], dict]:
    eq = load_equation(args.equation, args.set)
    if eq.leading is None:
        raise Precondition("the equation needs numeric parameters so it can be solved for a jet")
    cv = ConservedVector(_poly_arg(args.c1, "--c1"), _poly_arg(args.c2, "--c2"))
    check = verify_nonlocal if args.adjoint_system else verify_local
    rep = check(cv, eq, strict=False)
    lines = [f"divergence: {to_text(rep.divergence)}", f"residual: {to_text(rep.residual)}"]
    if rep.ok:
        mult = "none" if rep.multiplier is None else to_text(rep.multiplier)
        lines.append(f"multiplier: {mult}")
    lines.append("status: " + ("conserved" if rep.ok else "not conserved"))
    doc = {
        "divergence": to_json(rep.divergence),
        "residual": to_json(rep.residual),
        "multiplier": to_json(rep.multiplier) if rep.multiplier is not None else None,
        "conserved": rep.ok,
    }
    if not rep.ok:
        raise Failed("\n".join(lines), doc)
    return lines, doc


def cmd_admits(args) -> tuple[list[str], dict]:
    eq = load_equation(args.equation, args.set)
    if eq.leading is None:
        raise Precondition("the equation needs numeric parameters so it can be solved for a jet")
    res = check_admission(eq, load_symmetry(args.symmetry))
    lines = ["yes" if res.admitted else "no", f"residual: {to_text(res.residual)}"]
    return lines, {"admitted": res.admitted, "residual": to_json(res.residual)}


def cmd_simulate(args) -> tuple[list[str], dict]:
    cfg = load_config(args.config)
    if cfg.equation is None or cfg.simulate is None:
        raise ConfigError("simulate needs [equation] and [simulate] sections", args.config)
    sim = cfg.simulate
    try:
        u0 = profile(sim.u0)
    except (ValueError, SyntaxError) as exc:
        raise ConfigError(f"bad u0: {exc}", args.config) from None
    try:
        traj = simulate(cfg.equation, sim.grid, u0)
    except ValueError as exc:
        raise Precondition(str(exc)) from None
    for name, c1 in sim.monitors.items():
        try:
            traj.monitor(name, c1, cfg.equation)
        except UnsupportedJet as exc:
            raise Precondition(str(exc)) from None
    output = args.output or sim.output
    if output:
        out = Path(output)
        if not out.is_absolute():
            out = Path(args.config).parent / out if args.output is None else out
        with open(out, "w", encoding="ascii") as fh:
            write_csv(fh, traj)
    lines = [f"steps: {sim.grid.steps}", f"snapshots: {len(traj.times)}"]
    drifts = {}
    for name, series in traj.monitors.items():
        drifts[name] = relative_drift(series)
        lines.append(f"{name}: initial {float(series[0])!r} relative drift {drifts[name]:.3e}")
    if output:
        lines.append(f"wrote {output}")
    doc = {"steps": sim.grid.steps, "times": len(traj.times), "output": output,
           "monitors": {n: {"initial": float(s[0]), "final": float(s[-1]), "relative_drift": drifts[n]}
                        for n, s in traj.monitors.items()}}
    return lines, doc


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="chadjoint", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, equation=True):
        if equation:
            sp.add_argument("--equation", required=True, help="expression, named equation, or @file")
            sp.add_argument("--set", action="append", default=[], metavar="NAME=VALUE",
                            help="fix a parameter (repeatable)")
        sp.add_argument("--json", action="store_true", help="machine-readable output")

    sp = sub.add_parser("adjoint", help="print the adjoint F*")
    common(sp)
    sp.set_defaults(func=cmd_adjoint)

    sp = sub.add_parser("check-selfadjoint", help="classify quasi self-adjointness")
    common(sp)
    sp.add_argument("--beta", help="rational value or 'symbolic'")
    sp.set_defaults(func=cmd_check_selfadjoint)

    sp = sub.add_parser("conserved", help="conserved vector from a point symmetry")
    common(sp)
    sp.add_argument("--symmetry", required=True, help='"xi_t=..;xi_x=..;eta=.." or @file')
    sp.add_argument("--substitution", help='"v=<expr>" or @file')
    sp.add_argument("--raw", action="store_true", help="skip normalization and splitting")
    sp.add_argument("--no-normalize", action="store_true", help="skip normalization")
    sp.set_defaults(func=cmd_conserved)

    sp = sub.add_parser("verify", help="check D_t C1 + D_x C2 = 0 on solutions")
    common(sp)
    sp.add_argument("--c1", required=True)
    sp.add_argument("--c2", required=True)
    sp.add_argument("--nonlocal", dest="adjoint_system", action="store_true", help="reduce modulo the adjoint as well")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("admits", help="check that a point symmetry is admitted")
    common(sp)
    sp.add_argument("--symmetry", required=True)
    sp.set_defaults(func=cmd_admits)

    sp = sub.add_parser("simulate", help="run the periodic solver from a config file")
    common(sp, equation=False)
    sp.add_argument("--config", required=True)
    sp.add_argument("--output", help="CSV path (overrides the config)")
    sp.set_defaults(func=cmd_simulate)
    return p


def _emit(lines, doc, args, out) -> None:
    if args.json:
        out.write(json.dumps({"command": args.command, **doc}, indent=2, sort_keys=True) + "\n")
    else:
        out.write("\n".join(lines) + "\n")


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        lines, doc = args.func(args)
    except (ParseError, ConfigError, JetOrderExceeded, InvalidEquation) as exc:
        err.write(f"error: {exc}\n")
        return PARSE_ERROR
    except (Precondition, NotLinearInConstants) as exc:
        err.write(f"precondition violated: {exc}\n")
        return PRECONDITION
    except (Failed, VerificationFailed) as exc:
        if isinstance(exc, Failed):
            _emit(str(exc).split("\n"), exc.payload, args, out)
        else:
            err.write(f"verification failed: {exc}\n")
        return VERIFICATION_FAILED
    except (BlowupDetected, StabilityViolated) as exc:
        err.write(f"blowup: {exc}\n")
        return BLOWUP
    _emit(lines, doc, args, out)
    return OK


def main() -> None:
    sys.exit(run())


__all__ = ["run", "main", "build_parser", "load_equation", "load_symmetry", "load_substitution"]
