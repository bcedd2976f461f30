"""Periodic pseudospectral solver and monitoring of conserved densities.

Equations of the form ``a u_t - e u_txx + G(u, u_x, u_xx, ...) = 0`` are
advanced with the classical RK4 scheme after inverting ``a - e d_xx`` in
Fourier space.  G is evaluated straight from the symbolic left-hand side,
so any member of the generalized family (and anything else of that shape)
runs without hand-written right-hand sides.
"""
from __future__ import annotations

import ast
import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .algebra import CONST, INDEP, JET, PARAM, Atom, DiffPoly, jet, jet_partial, substitute_params
from .equations import EquationSpec


class BlowupDetected(RuntimeError):
    def __init__(self, time: float):
        self.time = time
        super().__init__(f"non-finite sample at t = {time:.6g}")


class StabilityViolated(RuntimeError):
    def __init__(self, time: float, amplitude: float):
        self.time = time
        self.amplitude = amplitude
        super().__init__(f"max |u| = {amplitude:.6g} exceeds the bound at t = {time:.6g}")


class UnsupportedJet(ValueError):
    pass


@dataclass(frozen=True)
class Grid:
    n: int = 256
    length: float = 2 * math.pi
    dt: float = 1e-3
    t_end: float = 1.0
    save_every: int = 1
    max_amplitude: float = 1e3

    def __post_init__(self):
        if self.n < 16 or self.n & (self.n - 1):
            raise ValueError("n must be a power of two and at least 16")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.t_end < self.dt:
            raise ValueError("t_end must be at least dt")
        if self.save_every < 1:
            raise ValueError("save_every must be positive")

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.n) * (self.length / self.n)

    @property
    def steps(self) -> int:
        return int(round(self.t_end / self.dt))

    @property
    def wavenumbers(self) -> np.ndarray:
        return 2 * np.pi / self.length * np.arange(self.n // 2 + 1)


def spectral_derivative(u: np.ndarray, order: int, length: float = 2 * math.pi) -> np.ndarray:
    if order == 0:
        return u
    n = u.shape[-1]
    k = 2 * np.pi / length * np.arange(n // 2 + 1)
    symbol = (1j * k) ** order
    if order % 2:
        symbol[-1] = 0  # the Nyquist mode has no odd derivative
    return np.fft.irfft(symbol * np.fft.rfft(u), n)


def evaluate(p: DiffPoly, u: np.ndarray, length: float = 2 * math.pi, t: float = 0.0,
             values: Mapping[str, float] | None = None) -> np.ndarray:
    """Pointwise value of a t-derivative-free differential polynomial."""
    values = dict(values or {})
    n = u.shape[-1]
    x = np.arange(n) * (length / n)
    cache: dict = {}

    def field_of(a: Atom):
        if a in cache:
            return cache[a]
        if a.kind == JET:
            if a.name != "u" or a.nt:
                raise UnsupportedJet(f"cannot evaluate {a!r} from samples of u")
            val = spectral_derivative(u, a.nx, length)
        elif a.kind == INDEP:
            val = x if a.name == "x" else t
        elif a.kind in (PARAM, CONST) and a.name in values:
            val = float(values[a.name])
        else:
            raise UnsupportedJet(f"no numeric value for {a.name}")
        cache[a] = val
        return val

    out = np.zeros(n)
    for mono, c in p.items():
        term = np.full(n, float(c))
        for a, e in mono:
            term = term * field_of(a) ** e
        out = out + term
    return out


@dataclass
class Trajectory:
    grid: Grid
    times: np.ndarray
    samples: np.ndarray  # shape (snapshots, n)
    monitors: dict = field(default_factory=dict)

    def __post_init__(self):
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("snapshot times must be strictly increasing")

    @property
    def final(self) -> np.ndarray:
        return self.samples[-1]

    def monitor(self, name: str, c1: DiffPoly, eq: EquationSpec | None = None) -> np.ndarray:
        series = monitor_functional(self, c1, eq)
        self.monitors[name] = series
        return series


@dataclass(frozen=True)
class _Split:
    a: float
    e: float
    g: DiffPoly


def _split(eq: EquationSpec) -> _Split:
    lhs = eq.lhs
    if any(a.kind == PARAM for a in lhs.atoms()):
        raise ValueError("all parameters need numeric values before simulation")
    ut, utxx = jet("u", 1, 0), jet("u", 1, 2)
    a = _linear_coeff(lhs, ut)
    e = -_linear_coeff(lhs, utxx)
    g = lhs - DiffPoly.atom(ut).scale(a) + DiffPoly.atom(utxx).scale(e)
    if any(j.nt for j in g.jets()):
        raise ValueError("only u_t and u_txx may carry t-derivatives")
    if a == 0 or e / a < 0:
        raise ValueError("need a nonzero u_t coefficient and eps >= 0")
    return _Split(float(a), float(e), g)


def _linear_coeff(p: DiffPoly, a: Atom):
    if p.degree(a) > 1:
        raise ValueError(f"equation is nonlinear in {a!r}")
    c = jet_partial(p, a.name, a.nt, a.nx).as_rational()
    if c is None:
        raise ValueError(f"coefficient of {a!r} must be a number")
    return c


def simulate(eq: EquationSpec, grid: Grid, u0) -> Trajectory:
    """Integrate from u0 (array or callable of x) to grid.t_end."""
    sp = _split(eq)
    x = grid.x
    u = np.asarray(u0(x) if callable(u0) else u0, dtype=float).copy()
    if u.shape != (grid.n,):
        raise ValueError("initial profile has the wrong shape")
    k = grid.wavenumbers
    helmholtz = sp.a + sp.e * k ** 2

    def rhs(v, t):
        return np.fft.irfft(np.fft.rfft(-evaluate(sp.g, v, grid.length, t)) / helmholtz, grid.n)

    dt = grid.dt
    times, samples = [0.0], [u.copy()]
    _check(u, 0.0, grid)
    # overflow shows up as non-finite samples and is reported by _check
    with np.errstate(over="ignore", invalid="ignore"):
        for step in range(1, grid.steps + 1):
            t = (step - 1) * dt
            k1 = rhs(u, t)
            k2 = rhs(u + 0.5 * dt * k1, t + 0.5 * dt)
            k3 = rhs(u + 0.5 * dt * k2, t + 0.5 * dt)
            k4 = rhs(u + dt * k3, t + dt)
            u = u + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            _check(u, step * dt, grid)
            if step % grid.save_every == 0 or step == grid.steps:
                times.append(step * dt)
                samples.append(u.copy())
    return Trajectory(grid, np.array(times), np.array(samples))


def _check(u: np.ndarray, t: float, grid: Grid) -> None:
    if not np.all(np.isfinite(u)):
        raise BlowupDetected(t)
    amp = float(np.max(np.abs(u)))
    if amp > grid.max_amplitude:
        raise StabilityViolated(t, amp)


def integrate(f: np.ndarray, length: float) -> float:
    """Periodic trapezoid rule, compensated summation."""
    return math.fsum(f) * (length / f.shape[-1])


def monitor_functional(traj: Trajectory, c1: DiffPoly, eq: EquationSpec | None = None,
                       values: Mapping[str, float] | None = None) -> np.ndarray:
    """Time series of the integral of c1 over the period."""
    if eq is not None and eq.leading is not None:
        from .conslaw import reduce_on_solutions

        c1 = reduce_on_solutions(c1, eq)
    if values:
        c1 = substitute_params(c1, values)
    bad = [a for a in c1.jets() if a.nt]
    if bad:
        raise UnsupportedJet(f"{c1} still involves t-derivatives")
    g = traj.grid
    return np.array([integrate(evaluate(c1, s, g.length, t, values), g.length)
                     for t, s in zip(traj.times, traj.samples)])


def relative_drift(series: np.ndarray) -> float:
    i0 = series[0]
    scale = abs(i0) if i0 != 0 else 1.0
    return float(np.max(np.abs(series - i0)) / scale)


def write_csv(handle, traj: Trajectory, names=None) -> None:
    names = list(traj.monitors) if names is None else list(names)
    w = csv.writer(handle, lineterminator="\n")
    w.writerow(["time", *names])
    for i, t in enumerate(traj.times):
        w.writerow([repr(float(t)), *(repr(float(traj.monitors[n][i])) for n in names)])


# -- initial profiles ----------------------------------------------------------

_FUNCS: dict[str, Callable] = {
    "sin": np.sin, "cos": np.cos, "exp": np.exp, "tanh": np.tanh,
    "cosh": np.cosh, "sinh": np.sinh, "sqrt": np.sqrt,
}
_NODES = (ast.Expression, ast.BinOp, ast.UnaryOp, ast.Call, ast.Name, ast.Constant, ast.Load,
          ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow, ast.USub, ast.UAdd)


def profile(text: str) -> Callable[[np.ndarray], np.ndarray]:
    """Numeric profile such as ``0.2 + 0.1*cos(x)``; ``^`` means power."""
    tree = ast.parse(text.replace("^", "**"), mode="eval")
    for node in ast.walk(tree):
        if not isinstance(node, _NODES):
            raise ValueError(f"unsupported syntax in profile: {text!r}")
        if isinstance(node, ast.Name) and node.id not in (*_FUNCS, "x", "pi"):
            raise ValueError(f"unknown name {node.id!r} in profile")
        if isinstance(node, ast.Call) and not (isinstance(node.func, ast.Name) and node.func.id in _FUNCS):
            raise ValueError(f"unsupported function in profile: {text!r}")
    code = compile(tree, "<profile>", "eval")

    def f(x):
        val = eval(code, {"__builtins__": {}}, {**_FUNCS, "x": x, "pi": math.pi})
        return np.broadcast_to(np.asarray(val, dtype=float), np.shape(x)).copy()

    return f


__all__ = [
    "Grid", "Trajectory", "BlowupDetected", "StabilityViolated", "UnsupportedJet", "simulate",
    "evaluate", "spectral_derivative", "monitor_functional", "relative_drift", "integrate",
    "write_csv", "profile",
]
