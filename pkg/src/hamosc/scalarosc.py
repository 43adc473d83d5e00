"""Planar scalar systems: the two checkable oscillation tests and the
phase-angle oracle.

The system is  phi' = a11 phi + a12 psi,  psi' = a21 phi + a22 psi.  With
E = a11 - a22 and the weights A12 = a12 exp(-int E), A21 = a21 exp(+int E),
the polar angle theta of the weighted solution obeys

    theta' = A12 cos^2(theta) - A21 sin^2(theta),

and zeros of phi are exactly the crossings theta = k pi.  The interval test
integrates min(A12, -A21) and compares against pi (which is sharp); the
half-line test watches partial integrals of A12 and -A21 on a geometric
ladder of horizons.  Divergence declared from a finite ladder is a
disclosed heuristic, never a theorem.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .config import DEFAULT_TOLERANCES, Tolerances
from .expr import Binary, Expr, EvalError, Num, Unary, compile_expr
from .verdict import (
    INCONCLUSIVE, OSCILLATORY, OSCILLATORY_ON_INTERVAL,
    Condition, CriterionVerdict, conclusive, inconclusive,
)

__all__ = [
    "ScalarSystem", "E_function", "QuadratureError",
    "theorem23_check", "theorem24_check",
    "PruferTrace", "prufer_integrate", "sl_oscillation_check",
]

RealFunc = Callable[[float], float]


class QuadratureError(RuntimeError):
    pass


def _real_valued(fn: Callable[[float], complex], tol: float, what: str) -> RealFunc:
    def call(t: float) -> float:
        v = complex(fn(t))
        if abs(v.imag) > tol * max(1.0, abs(v)):
            raise EvalError(f"{what} is not real at t={t}: {v}")
        return v.real
    return call


@dataclass
class ScalarSystem:
    """Four real coefficient functions; optionally backed by expression trees."""

    a11: RealFunc
    a12: RealFunc
    a21: RealFunc
    a22: RealFunc
    exprs: tuple[Expr, Expr, Expr, Expr] | None = None
    label: str = ""

    @classmethod
    def from_expressions(cls, e11: Expr, e12: Expr, e21: Expr, e22: Expr,
                         validation_grid: Sequence[float] = (),
                         tol: float | None = None, label: str = "") -> "ScalarSystem":
        tol = DEFAULT_TOLERANCES.real_imag if tol is None else tol
        funcs = [_real_valued(compile_expr(e), tol, f"a{i}")
                 for i, e in zip((11, 12, 21, 22), (e11, e12, e21, e22))]
        sys = cls(*funcs, exprs=(e11, e12, e21, e22), label=label)
        for t in validation_grid:
            for f in funcs:
                f(t)
        return sys

    @classmethod
    def from_callables(cls, a11, a12, a21, a22, label: str = "") -> "ScalarSystem":
        return cls(a11, a12, a21, a22, label=label)

    def E(self, t: float) -> float:
        return self.a11(t) - self.a22(t)


def E_function(sys: ScalarSystem) -> Expr:
    """The difference a11 - a22 as an expression tree (expression-backed
    systems only)."""
    if sys.exprs is None:
        raise ValueError("system is not expression-backed; use sys.E(t)")
    return Binary("-", sys.exprs[0], sys.exprs[3])


# ------------------------------------------------- adaptive Simpson machinery

def _simpson(fl: float, fm: float, fr: float, h: float) -> float:
    return h * (fl + 4.0 * fm + fr) / 6.0


def _adaptive_simpson(f: RealFunc, a: float, b: float, tol: float,
                      max_depth: int = 48) -> float:
    """Classic recursive adaptive Simpson with absolute tolerance."""

    def rec(l, r, fl, fm, fr, whole, tol_loc, depth):
        m = 0.5 * (l + r)
        lm, rm = 0.5 * (l + m), 0.5 * (m + r)
        flm, frm = f(lm), f(rm)
        left = _simpson(fl, flm, fm, m - l)
        right = _simpson(fm, frm, fr, r - m)
        err = (left + right - whole) / 15.0
        if abs(err) <= tol_loc or depth >= max_depth:
            if depth >= max_depth and abs(err) > 1e3 * tol_loc:
                raise QuadratureError(
                    f"quadrature did not converge near t={m:.6g} (err {err:.3e})")
            return left + right + err
        return (rec(l, m, fl, flm, fm, left, tol_loc / 2.0, depth + 1)
                + rec(m, r, fm, frm, fr, right, tol_loc / 2.0, depth + 1))

    if b <= a:
        return 0.0
    fa, fm_, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = _simpson(fa, fm_, fb, b - a)
    return rec(a, b, fa, fm_, fb, whole, tol, 0)


class ExponentAccumulator:
    """Cumulative integral of E from a fixed base point, built once.

    The base pass subdivides adaptively until each panel's Simpson error is
    resolved; a query lands in a panel and adds a partial Simpson from the
    panel's left edge, so the inner integral seen by the outer quadrature
    is consistent across all its evaluation points.
    """

    def __init__(self, E: RealFunc, a: float, b: float, tol: float,
                 max_depth: int = 48):
        self.E = E
        self.a = a
        self.bounds = [a]
        self.cum = [0.0]
        self._cache: dict[float, float] = {}
        if b > a:
            self._build(a, b, tol, max_depth)

    def _Eval(self, t: float) -> float:
        v = self._cache.get(t)
        if v is None:
            v = self.E(t)
            self._cache[t] = v
        return v

    def _build(self, a, b, tol, max_depth):
        stack = [(a, b, tol, 0)]
        # children pushed right-first so panels complete left to right and
        # the cumulative list stays ordered
        while stack:
            l, r, tol_loc, depth = stack.pop()
            m = 0.5 * (l + r)
            fl, fm, fr = self._Eval(l), self._Eval(m), self._Eval(r)
            whole = _simpson(fl, fm, fr, r - l)
            lm, rm = 0.5 * (l + m), 0.5 * (m + r)
            left = _simpson(fl, self._Eval(lm), fm, m - l)
            right = _simpson(fm, self._Eval(rm), fr, r - m)
            err = (left + right - whole) / 15.0
            if abs(err) <= tol_loc or depth >= max_depth:
                self.bounds.append(r)
                self.cum.append(self.cum[-1] + left + right + err)
            else:
                stack.append((m, r, tol_loc / 2.0, depth + 1))
                stack.append((l, m, tol_loc / 2.0, depth + 1))

    def __call__(self, t: float) -> float:
        if t <= self.a:
            return 0.0
        k = bisect.bisect_right(self.bounds, t) - 1
        if k >= len(self.bounds) - 1:
            k = len(self.bounds) - 2
        l = self.bounds[k]
        if t == self.bounds[k + 1]:
            return self.cum[k + 1]
        part = _simpson(self._Eval(l), self._Eval(0.5 * (l + t)), self._Eval(t), t - l)
        return self.cum[k] + part


_EXP_CAP = 700.0  # beyond this exp() overflows double precision


def _signed_exp_product(coeff: float, exponent: float) -> float:
    """coeff * exp(exponent) computed in log space to dodge overflow."""
    if coeff == 0.0:
        return 0.0
    combined = math.log(abs(coeff)) + exponent
    if combined > _EXP_CAP:
        raise OverflowError(
            f"exp weighting overflows even after log rescaling (exponent {combined:.3g})")
    return math.copysign(math.exp(combined), coeff)


# ------------------------------------------------------------- interval test

def _sign_grid_condition(sys: ScalarSystem, a: float, b: float,
                         tols: Tolerances) -> Condition:
    ts = np.linspace(a, b, tols.grid_n)
    lo = min(sys.a12(t) for t in ts)
    return Condition(name="a12_nonnegative", passed=lo >= -tols.sign,
                     value=float(lo), tol=tols.sign,
                     detail=f"grid minimum over {tols.grid_n} points")


def theorem23_check(sys: ScalarSystem, a: float, b: float,
                    tols: Tolerances = DEFAULT_TOLERANCES) -> CriterionVerdict:
    """Interval test: a12 >= 0 on a grid and
    int_a^b min(a12 e^{-int E}, -a21 e^{+int E}) dt >= pi.

    The pi threshold is sharp, so the comparison allows only the quadrature
    tolerance as slack.
    """
    if b <= a:
        raise ValueError(f"empty interval [{a}, {b}]")
    cond_sign = _sign_grid_condition(sys, a, b, tols)
    method = "interval min-weight integral test"
    try:
        IE = ExponentAccumulator(sys.E, a, b, tols.quad / 10.0)

        def integrand(t: float) -> float:
            e = IE(t)
            return min(_signed_exp_product(sys.a12(t), -e),
                       _signed_exp_product(-sys.a21(t), e))

        integral = _adaptive_simpson(integrand, a, b, tols.quad)
    except (QuadratureError, OverflowError, EvalError) as exc:
        cond_int = Condition(name="min_weight_integral_ge_pi", passed=False,
                             value=str(exc), tol=tols.quad,
                             detail="quadrature failed")
        return inconclusive(method, [cond_sign, cond_int], interval=(a, b))
    cond_int = Condition(name="min_weight_integral_ge_pi",
                         passed=integral >= math.pi - tols.quad,
                         value=float(integral), tol=tols.quad,
                         detail=f"threshold pi = {math.pi!r}")
    conditions = [cond_sign, cond_int]
    if all(c.passed for c in conditions):
        return conclusive(OSCILLATORY_ON_INTERVAL, method, conditions, interval=(a, b))
    return inconclusive(method, conditions, interval=(a, b))


# ------------------------------------------------------------ half-line test

def _ladder(t0: float, horizon: float, ratio: float) -> list[float]:
    rungs = []
    step = 1.0
    T = t0 + step
    while T < horizon:
        rungs.append(T)
        step *= ratio
        T = t0 + step
    rungs.append(horizon)
    return rungs


def _divergence_condition(name: str, values: np.ndarray, threshold: float) -> Condition:
    tail_increasing = (len(values) >= 3
                       and values[-1] > values[-2] > values[-3])
    passed = len(values) > 0 and values[-1] > threshold and tail_increasing
    return Condition(
        name=name, passed=bool(passed),
        value=float(values[-1]) if len(values) else None, tol=threshold,
        detail="ladder " + ", ".join(f"{v:.6g}" for v in values))


def theorem24_check(sys: ScalarSystem, t0: float, horizon: float | None = None,
                    growth_threshold: float | None = None,
                    tols: Tolerances = DEFAULT_TOLERANCES) -> CriterionVerdict:
    """Half-line test: a12 >= 0 plus divergence of both weighted integrals.

    Divergence of int a12 e^{-int E} and -int a21 e^{+int E} cannot be
    decided from a finite run; each is declared divergent only when its
    partial integral exceeds the growth threshold and keeps increasing
    across the last three rungs of a geometric horizon ladder.  The ladder
    values are recorded in the evidence so the heuristic is auditable.

    The three running integrals (the exponent and the two partials) are
    advanced together by one adaptive integration, which keeps their
    discretizations consistent over long horizons.
    """
    horizon = tols.horizon if horizon is None else horizon
    threshold = tols.growth_threshold if growth_threshold is None else growth_threshold
    if horizon <= t0:
        raise ValueError(f"horizon {horizon} must exceed start {t0}")
    method = "half-line divergence ladder test"
    cond_sign = _sign_grid_condition(sys, t0, horizon, tols)
    rungs = _ladder(t0, horizon, tols.ladder_ratio)

    def rhs(t, y):
        ie = y[0]
        return (sys.E(t),
                _signed_exp_product(sys.a12(t), -ie),
                _signed_exp_product(-sys.a21(t), ie))

    try:
        # ladder values are compared against O(10) thresholds; modest
        # tolerances keep long horizons affordable
        sol = solve_ivp(rhs, (t0, horizon), (0.0, 0.0, 0.0), t_eval=rungs,
                        rtol=1e-6, atol=1e-9, method="RK45")
        if sol.status != 0:
            raise QuadratureError(f"ladder integration stopped: {sol.message}")
        P, Q = sol.y[1], sol.y[2]
    except (QuadratureError, OverflowError, EvalError) as exc:
        cond = Condition(name="weighted_integrals_diverge", passed=False,
                         value=str(exc), detail="integration failed")
        return inconclusive(method, [cond_sign, cond], horizon=horizon)
    cond_p = _divergence_condition("first_weighted_integral_diverges", P, threshold)
    cond_q = _divergence_condition("second_weighted_integral_diverges", Q, threshold)
    conditions = [cond_sign, cond_p, cond_q]
    if all(c.passed for c in conditions):
        return conclusive(
            OSCILLATORY, method, conditions, horizon=horizon,
            notes=("divergence declared from a finite ladder (heuristic); "
                   "ladder values recorded in the evidence",))
    return inconclusive(method, conditions, horizon=horizon)


# ------------------------------------------------------------- Prufer oracle

@dataclass
class PruferTrace:
    times: np.ndarray
    thetas: np.ndarray
    crossing_times: list[float]
    count: int
    theta0: float
    interval: tuple[float, float]
    reliable: bool
    message: str = ""

    def crossings_in(self, lo: float, hi: float) -> int:
        return sum(1 for t in self.crossing_times if lo < t <= hi)


def prufer_integrate(sys: ScalarSystem, a: float, b: float, theta0: float = 0.0,
                     rtol: float = 1e-10, atol: float = 1e-12,
                     samples: int = 4001) -> PruferTrace:
    """Integrate the phase angle and count crossings of multiples of pi.

    The angle is tracked continuously (no wrapping); each crossing of
    theta = k pi is a zero of phi.  For the scalar problem this is
    conclusive up to integrator tolerance.
    """
    if b <= a:
        raise ValueError(f"empty interval [{a}, {b}]")

    def rhs(t, y):
        th, ie = y
        a12w = _signed_exp_product(sys.a12(t), -ie)
        a21w = _signed_exp_product(sys.a21(t), ie)
        c, s = math.cos(th), math.sin(th)
        return (a12w * c * c - a21w * s * s, sys.E(t))

    sol = solve_ivp(rhs, (a, b), (theta0, 0.0), rtol=rtol, atol=atol,
                    dense_output=True, method="RK45")
    reliable = sol.status == 0
    message = "" if reliable else f"integrator stopped: {sol.message}"
    t_end = sol.t[-1]
    ts = np.linspace(a, t_end, samples)
    thetas = sol.sol(ts)[0]

    crossings: list[float] = []
    k_lo = math.floor(thetas.min() / math.pi) - 1
    k_hi = math.ceil(thetas.max() / math.pi) + 1
    theta_of = lambda t: float(sol.sol(t)[0])
    for k in range(k_lo, k_hi + 1):
        target = k * math.pi
        g = thetas - target
        for i in range(len(ts) - 1):
            if g[i] == 0.0:
                if ts[i] > a:
                    crossings.append(float(ts[i]))
            elif g[i] * g[i + 1] < 0.0:
                crossings.append(float(brentq(lambda t: theta_of(t) - target,
                                              ts[i], ts[i + 1], xtol=1e-12)))
        # a crossing sitting exactly on the right endpoint: count it only
        # if the angle arrived there (not a flat line on the target)
        if (abs(g[-1]) <= 1e-9 * (1.0 + abs(target))
                and abs(g[-2]) > 1e-9 * (1.0 + abs(target))):
            crossings.append(float(ts[-1]))
    min_sep = max(1e-10, (b - a) * 1e-10)
    merged: list[float] = []
    for c in sorted(crossings):
        if c > a and (not merged or c - merged[-1] > min_sep):
            merged.append(c)
    return PruferTrace(times=ts, thetas=thetas, crossing_times=merged,
                       count=len(merged), theta0=theta0,
                       interval=(a, b), reliable=reliable, message=message)


def sl_oscillation_check(q, a: float, b: float, mode: str = "oracle",
                         tols: Tolerances = DEFAULT_TOLERANCES,
                         theta0: float = 0.0, rtol: float = 1e-10,
                         atol: float = 1e-12) -> CriterionVerdict:
    """Oscillation check for  phi'' + q(t) phi = 0  on [a, b].

    ``q`` may be an expression tree or a plain real callable.  The equation
    runs as the planar system (a11 = a22 = 0, a12 = 1, a21 = -q).  In
    criterion mode the interval min-weight test decides; in oracle mode the
    phase angle is integrated and two crossings are required, because two
    zeros of one solution hand a zero to every other solution by separation
    of zeros.
    """
    if callable(q):
        qf: RealFunc = q
        sys = ScalarSystem(a11=lambda t: 0.0, a12=lambda t: 1.0,
                           a21=lambda t: -qf(t), a22=lambda t: 0.0,
                           label="second-order wrap")
    else:
        sys = ScalarSystem.from_expressions(
            Num(0.0), Num(1.0), Unary("neg", q), Num(0.0),
            label="second-order wrap")
    if mode == "criterion":
        inner = theorem23_check(sys, a, b, tols)
        return CriterionVerdict(
            status=inner.status,
            method="second-order equation via " + inner.method,
            conditions=inner.conditions, interval=(a, b), notes=inner.notes)
    if mode != "oracle":
        raise ValueError(f"unknown mode {mode!r}")
    trace = prufer_integrate(sys, a, b, theta0=theta0, rtol=rtol, atol=atol)
    cond = Condition(
        name="phase_crossings_at_least_two",
        passed=trace.reliable and trace.count >= 2,
        value=trace.count, tol=2,
        detail="two zeros of one solution give every solution a zero in "
               "between (zero separation)")
    method = "second-order equation via phase-angle oracle"
    if cond.passed:
        return conclusive(OSCILLATORY_ON_INTERVAL, method, [cond], interval=(a, b))
    return inconclusive(method, [cond], interval=(a, b),
                        notes=(trace.message,) if trace.message else ())
