"""Powell's conjugate-direction minimizer with Brent line searches.

Derivative free. The direction set starts as the coordinate axes; after
each sweep the net displacement may replace the direction of largest
decrease (Powell's extrapolation test).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import InvalidArgumentError, NumericalError

_GOLD = 1.618033988749895
_CGOLD = 0.3819660112501051
_GROW_LIMIT = 100.0
_TINY = 1e-20
_ZEPS = 1e-10


@dataclass(frozen=True)
class OptimizerSettings:
    relative_tolerance: float = 1e-6
    max_iterations: int = 1000
    line_search_tolerance: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if self.relative_tolerance <= 0 or self.line_search_tolerance <= 0:
            raise InvalidArgumentError("optimizer tolerances must be > 0")
        if self.max_iterations < 0:
            raise InvalidArgumentError("max_iterations must be >= 0")


@dataclass
class PowellResult:
    x: np.ndarray
    fun: float
    iterations: int
    n_evaluations: int
    converged: bool
    # trace[0] is f(x0); trace[i] is the value after sweep i
    trace: list[float] = field(default_factory=list)


class _Counted:
    def __init__(self, f: Callable[[np.ndarray], float]):
        self.f = f
        self.calls = 0

    def __call__(self, x: np.ndarray) -> float:
        self.calls += 1
        value = float(self.f(x))
        if not math.isfinite(value):
            raise NumericalError(f"objective returned {value} at x={np.array2string(x, precision=6)}")
        return value


def bracket_minimum(g: Callable[[float], float], a: float, b: float, fa: float | None = None):
    """Golden-ratio expansion with parabolic steps until ``f(b) <= min(f(a), f(c))``.

    Returns ``(a, b, c, fa, fb, fc)`` with ``b`` between ``a`` and ``c``.
    """
    fa = g(a) if fa is None else fa
    fb = g(b)
    if fb > fa:
        a, b, fa, fb = b, a, fb, fa
    c = b + _GOLD * (b - a)
    fc = g(c)
    while fb > fc:
        r = (b - a) * (fb - fc)
        q = (b - c) * (fb - fa)
        denom = 2.0 * math.copysign(max(abs(q - r), _TINY), q - r)
        u = b - ((b - c) * q - (b - a) * r) / denom
        ulim = b + _GROW_LIMIT * (c - b)
        if (b - u) * (u - c) > 0.0:
            fu = g(u)
            if fu < fc:
                return b, u, c, fb, fu, fc
            if fu > fb:
                return a, b, u, fa, fb, fu
            u = c + _GOLD * (c - b)
            fu = g(u)
        elif (c - u) * (u - ulim) > 0.0:
            fu = g(u)
            if fu < fc:
                b, c, u = c, u, u + _GOLD * (u - c)
                fb, fc, fu = fc, fu, g(u)
        elif (u - ulim) * (ulim - c) >= 0.0:
            u = ulim
            fu = g(u)
        else:
            u = c + _GOLD * (c - b)
            fu = g(u)
        a, b, c = b, c, u
        fa, fb, fc = fb, fc, fu
    return a, b, c, fa, fb, fc


def brent_minimize(g: Callable[[float], float], a: float, b: float, c: float, fb: float,
                   tol: float = 1e-6, max_iter: int = 200) -> tuple[float, float]:
    """Brent's parabolic/golden-section search inside the bracket ``(a, b, c)``."""
    lo, hi = min(a, c), max(a, c)
    x = w = v = b
    fx = fw = fv = fb
    d = e = 0.0
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        tol1 = tol * abs(x) + _ZEPS
        tol2 = 2.0 * tol1
        if abs(x - mid) <= tol2 - 0.5 * (hi - lo):
            break
        parabolic = False
        if abs(e) > tol1:
            r = (x - w) * (fx - fv)
            q = (x - v) * (fx - fw)
            p = (x - v) * q - (x - w) * r
            q = 2.0 * (q - r)
            if q > 0.0:
                p = -p
            q = abs(q)
            if abs(p) < abs(0.5 * q * e) and q * (lo - x) < p < q * (hi - x):
                e, d = d, p / q
                u = x + d
                if u - lo < tol2 or hi - u < tol2:
                    d = math.copysign(tol1, mid - x)
                parabolic = True
        if not parabolic:
            e = (lo - x) if x >= mid else (hi - x)
            d = _CGOLD * e
        u = x + (d if abs(d) >= tol1 else math.copysign(tol1, d))
        fu = g(u)
        if fu <= fx:
            if u >= x:
                lo = x
            else:
                hi = x
            v, w, x = w, x, u
            fv, fw, fx = fw, fx, fu
        else:
            if u < x:
                lo = u
            else:
                hi = u
            if fu <= fw or w == x:
                v, w = w, u
                fv, fw = fw, fu
            elif fu <= fv or v == x or v == w:
                v, fv = u, fu
    return x, fx


def _line_minimize(f: _Counted, x: np.ndarray, fx: float, direction: np.ndarray, tol: float):
    def g(alpha: float) -> float:
        return f(x + alpha * direction)

    a, b, c, fa, fb, fc = bracket_minimum(g, 0.0, 1.0, fa=fx)
    alpha, f_new = brent_minimize(g, a, b, c, fb, tol=tol)
    if f_new > fx:
        return x, fx
    return x + alpha * direction, f_new


def powell_minimize(f: Callable[[np.ndarray], float], x0, settings: OptimizerSettings | None = None,
                    callback: Callable[[int, np.ndarray, float], None] | None = None) -> PowellResult:
    """Minimize ``f`` from ``x0``.

    Stops when a full sweep improves ``f`` by less than
    ``relative_tolerance * (|f_old| + |f_new|) / 2`` or after
    ``max_iterations`` sweeps. Raises :class:`NumericalError` on a
    non-finite objective value.
    """
    settings = settings or OptimizerSettings()
    fun = _Counted(f)
    x = np.array(x0, dtype=float).ravel()
    fx = fun(x)
    n = x.size
    directions = [row for row in np.eye(n)]
    trace = [fx]
    converged = False
    iterations = 0
    for iterations in range(1, settings.max_iterations + 1):
        x_start, f_start = x.copy(), fx
        biggest_drop, i_big = 0.0, 0
        for i, d in enumerate(directions):
            f_before = fx
            x, fx = _line_minimize(fun, x, fx, d, settings.line_search_tolerance)
            if f_before - fx > biggest_drop:
                biggest_drop, i_big = f_before - fx, i
        done = 2.0 * (f_start - fx) <= settings.relative_tolerance * (abs(f_start) + abs(fx)) + 1e-12
        if not done:
            displacement = x - x_start
            f_ext = fun(x + displacement)
            if f_ext < f_start:
                t = (2.0 * (f_start - 2.0 * fx + f_ext) * (f_start - fx - biggest_drop) ** 2
                     - biggest_drop * (f_start - f_ext) ** 2)
                if t < 0.0:
                    x, fx = _line_minimize(fun, x, fx, displacement, settings.line_search_tolerance)
                    directions[i_big] = directions[-1]
                    directions[-1] = displacement
        trace.append(fx)
        if callback is not None:
            callback(iterations, x, fx)
        if done:
            converged = True
            break
    return PowellResult(x=x, fun=fx, iterations=iterations, n_evaluations=fun.calls,
                        converged=converged, trace=trace)
