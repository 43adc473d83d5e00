"""Matrix-level sufficient oscillation tests.

Each test reduces the matrix system to a planar scalar system through a
hermitian gauge S(t) and hands the scalar oscillation question to
:mod:`hamosc.scalarosc`.  The reductions need three ingredients:

* ``D_S(t) = S' + S B S + A* S + S A - C``, the gauged Riccati defect;
* ``sigma_S(t)``, the common eigenvalue real part of ``A* + S B`` when that
  matrix is normal with a single real part (else the test is inapplicable);
* the least eigenvalue of ``B(t)`` divided by the dimension.

"For all t" hypotheses are sampled on a disclosed uniform grid (with local
refinement near near-violations); every verdict records what was checked,
the computed values and the tolerances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .expr import EvalError, Expr, compile_expr, parse_scalar_expr
from .linalg import (
    Eq27UnsolvableError, LyapunovUnsolvableError, NotPSDError, maxabs,
    omega_membership, solve_eq27, solve_lyapunov, sqrt_psd,
)
from .matfun import MatrixFunction, default_step
from .scalarosc import (
    ScalarSystem, _real_valued, prufer_integrate, sl_oscillation_check,
    theorem23_check, theorem24_check,
)
from .verdict import (
    INCONCLUSIVE, OSCILLATORY, OSCILLATORY_ON_INTERVAL,
    Condition, CriterionVerdict, conclusive, inconclusive,
)

__all__ = [
    "SChoice", "OmegaMembershipError", "SuggestSError",
    "build_DS", "sigma_S", "DFFunction",
    "theorem21_check", "theorem22_check", "theorem25_check",
    "suggest_S", "remark21_aggregate", "corollary_check",
]


class OmegaMembershipError(EvalError):
    """The gauged coefficient left the admissible class at some time."""

    def __init__(self, t: float, report):
        super().__init__(
            f"A* + S B is not normal-with-common-real-part at t={t}: "
            f"normality residual {report.normality_residual:.3e} "
            f"(tol {report.tol_norm:.3e}), spread {report.re_spread:.3e} "
            f"(tol {report.tol_spread:.3e})")
        self.t = t
        self.report = report


class SuggestSError(ValueError):
    def __init__(self, case: str, what: str, residual: float, tol: float):
        super().__init__(f"case {case} pattern does not match: {what} residual "
                         f"{residual:.3e} > {tol:.3e}")
        self.case = case
        self.what = what
        self.residual = residual


def _hermitize(M: np.ndarray) -> np.ndarray:
    return (M + M.conj().T) / 2.0


@dataclass
class SChoice:
    """A hermitian gauge: a matrix-valued function of time plus provenance."""

    func: Callable[[float], np.ndarray]
    provenance: str
    dfunc: Callable[[float], np.ndarray] | None = None
    label: str = ""

    def S(self, t: float) -> np.ndarray:
        return self.func(t)

    def dS(self, t: float) -> np.ndarray:
        if self.dfunc is not None:
            return self.dfunc(t)
        h = default_step(t)
        return (self.func(t + h) - self.func(t - h)) / (2.0 * h)

    @classmethod
    def zero(cls, n: int, provenance: str = "caseI") -> "SChoice":
        Z = np.zeros((n, n), dtype=complex)
        return cls(func=lambda t: Z, provenance=provenance,
                   dfunc=lambda t: Z, label="S = 0")

    @classmethod
    def from_matrix_function(cls, mf: MatrixFunction,
                             provenance: str = "user") -> "SChoice":
        dfunc = None
        if mf.has_smooth_entries():
            dmf = mf.symbolic_derivative()
            dfunc = dmf.eval
        return cls(func=mf.eval, provenance=provenance, dfunc=dfunc,
                   label=mf.label)


def build_DS(spec, S: SChoice, t: float) -> np.ndarray:
    """The gauged defect S' + S B S + A* S + S A - C at time t."""
    St = S.S(t)
    Bt = spec.B.eval(t)
    At = spec.A.eval(t)
    return (S.dS(t) + St @ Bt @ St + At.conj().T @ St + St @ At
            - spec.C.eval(t))


def _gauged_coefficient(spec, S: SChoice, t: float) -> np.ndarray:
    return spec.A.eval(t).conj().T + S.S(t) @ spec.B.eval(t)


def sigma_S(spec, S: SChoice, t: float,
            tols: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Common real part of the eigenvalues of A* + S B.

    Raises :class:`OmegaMembershipError` (carrying the membership report)
    when the matrix is not normal with a single eigenvalue real part.
    """
    M = _gauged_coefficient(spec, S, t)
    rep = omega_membership(M, tols=tols)
    if not rep.is_member:
        raise OmegaMembershipError(t, rep)
    return rep.W


def _sigma_value(spec, S: SChoice, t: float) -> float:
    # cheap path used inside scalar reductions once membership is certified
    # on the hypothesis grid: the common real part equals Re tr / n
    M = _gauged_coefficient(spec, S, t)
    return float(np.trace(M).real) / spec.n


def _lambda_B(spec, t: float) -> float:
    return float(np.linalg.eigvalsh(_hermitize(spec.B.eval(t)))[0])


# ------------------------------------------------------- grid hypothesis checks

def _grid(a: float, b: float, n: int) -> np.ndarray:
    return np.linspace(a, b, n)


def check_B_psd_on_grid(spec, a: float, b: float,
                        tols: Tolerances = DEFAULT_TOLERANCES) -> Condition:
    ts = _grid(a, b, tols.grid_n)
    lams = np.array([_lambda_B(spec, t) for t in ts])
    # refine near near-violations so sign dips between grid points are seen
    near = np.where(lams < 10.0 * tols.psd)[0]
    extra_worst = math.inf
    refined = 0
    spacing = (b - a) / (tols.grid_n - 1)
    for i in near:
        lo = max(a, ts[i] - spacing)
        hi = min(b, ts[i] + spacing)
        for t in np.linspace(lo, hi, 7):
            extra_worst = min(extra_worst, _lambda_B(spec, t))
            refined += 1
    worst = float(min(lams.min(), extra_worst))
    t_worst = float(ts[int(np.argmin(lams))])
    return Condition(
        name="B_psd_on_grid", passed=worst >= -tols.psd, value=worst,
        tol=tols.psd,
        detail=f"least eigenvalue over {tols.grid_n} grid points"
               + (f" plus {refined} refined" if refined else "")
               + f"; worst near t={t_worst:.6g}")


def check_omega_on_grid(spec, S: SChoice, a: float, b: float,
                        tols: Tolerances = DEFAULT_TOLERANCES) -> Condition:
    ts = _grid(a, b, tols.grid_n)
    worst_resid = 0.0
    for t in ts:
        rep = omega_membership(_gauged_coefficient(spec, S, t), tols=tols)
        if not rep.is_member:
            return Condition(
                name="gauged_coefficient_in_omega", passed=False,
                value=float(max(rep.normality_residual, rep.re_spread)),
                tol=rep.tol_norm,
                detail=f"membership fails at t={t:.9g}: normality residual "
                       f"{rep.normality_residual:.3e}, spread {rep.re_spread:.3e}")
        worst_resid = max(worst_resid, rep.normality_residual, rep.re_spread)
    return Condition(
        name="gauged_coefficient_in_omega", passed=True,
        value=worst_resid, tol=None,
        detail=f"membership holds at all {tols.grid_n} grid points")


def _prefixed(conds: Sequence[Condition], prefix: str) -> list[Condition]:
    return [Condition(name=f"{prefix}{c.name}", passed=c.passed, value=c.value,
                      tol=c.tol, detail=c.detail) for c in conds]


def _scalar_check(ssys: ScalarSystem, a: float, b: float, scalar_mode: str,
                  tols: Tolerances) -> tuple[list[Condition], bool, str]:
    """Run the scalar oscillation question in the requested mode."""
    if scalar_mode == "criterion":
        inner = theorem23_check(ssys, a, b, tols)
        return (_prefixed(inner.conditions, "scalar:"), inner.oscillatory,
                "scalar condition by " + inner.method)
    if scalar_mode == "oracle":
        try:
            trace = prufer_integrate(ssys, a, b)
        except (EvalError, OverflowError) as exc:
            return ([Condition(name="scalar:phase_crossings_at_least_two",
                               passed=False, value=str(exc),
                               detail="phase integration failed")],
                    False, "scalar condition by phase-angle oracle")
        cond = Condition(
            name="scalar:phase_crossings_at_least_two",
            passed=trace.reliable and trace.count >= 2,
            value=trace.count, tol=2,
            detail="two crossings make every scalar solution vanish on the "
                   "window (zero separation)")
        return [cond], cond.passed, "scalar condition by phase-angle oracle"
    raise ValueError(f"unknown scalar mode {scalar_mode!r}")


# ---------------------------------------------------------------- theorem 2.1

def theorem21_check(spec, S: SChoice, a: float, b: float,
                    scalar_mode: str = "criterion",
                    tols: Tolerances = DEFAULT_TOLERANCES) -> CriterionVerdict:
    """Gauge test on an interval.

    Hypotheses: B PSD on [a, b]; A* + S B normal with a common eigenvalue
    real part; the reduced scalar system (a11 = sigma_S, a12 = lambda(B)/n,
    a21 = -tr D_S, a22 = -sigma_S) oscillatory on [a, b].
    """
    method = f"interval gauge test (S from {S.provenance}, scalar {scalar_mode})"
    cond_psd = check_B_psd_on_grid(spec, a, b, tols)
    cond_omega = check_omega_on_grid(spec, S, a, b, tols)
    conditions = [cond_psd, cond_omega]
    if not cond_omega.passed:
        return inconclusive(method, conditions, interval=(a, b))

    ssys = _reduction_system(spec, S, label="gauge reduction")
    scalar_conds, scalar_ok, scalar_note = _scalar_check(ssys, a, b, scalar_mode, tols)
    conditions += scalar_conds
    if cond_psd.passed and scalar_ok:
        return conclusive(OSCILLATORY_ON_INTERVAL, method, conditions,
                          interval=(a, b), notes=(scalar_note,))
    return inconclusive(method, conditions, interval=(a, b), notes=(scalar_note,))


# ---------------------------------------------------------------- theorem 2.2

def _as_real_func(f, tols: Tolerances, what: str) -> Callable[[float], float]:
    if callable(f):
        return f
    if isinstance(f, str):
        f = parse_scalar_expr(f)
    return _real_valued(compile_expr(f), tols.real_imag, what)


def _reduction_system(spec, gauge: SChoice, muf=None, label="") -> ScalarSystem:
    """The planar reduction of the matrix system under a gauge.

    a11 = sigma (or mu), a12 = least eigenvalue of B over n, a21 = -tr D_S,
    a22 = -a11.  One cached evaluation per time point serves all four
    coefficients, which matters inside the scalar integrators.
    """
    n = spec.n

    @lru_cache(maxsize=64)
    def vals(t: float) -> tuple[float, float, float]:
        At = spec.A.eval(t)
        Bt = spec.B.eval(t)
        St = gauge.S(t)
        if muf is not None:
            a11 = muf(t)
        else:
            a11 = float(np.trace(At.conj().T + St @ Bt).real) / n
        lam = float(np.linalg.eigvalsh(_hermitize(Bt))[0])
        DS = (gauge.dS(t) + St @ Bt @ St + At.conj().T @ St + St @ At
              - spec.C.eval(t))
        return a11, lam / n, -float(np.trace(DS).real)

    return ScalarSystem.from_callables(
        a11=lambda t: vals(t)[0],
        a12=lambda t: vals(t)[1],
        a21=lambda t: vals(t)[2],
        a22=lambda t: -vals(t)[0],
        label=label)


def _lyapunov_gauge(spec, muf: Callable[[float], float]) -> SChoice:
    def solve_at(t: float) -> np.ndarray:
        Bt = _hermitize(spec.B.eval(t))
        At = spec.A.eval(t)
        R = 2.0 * muf(t) * np.eye(spec.n, dtype=complex) - At - At.conj().T
        return solve_lyapunov(Bt, R)
    return SChoice(func=solve_at, provenance="lyapunov(mu)",
                   label="hermitian solution of the shift equation")


def theorem22_check(spec, mu, a: float, b: float,
                    scalar_mode: str = "criterion",
                    tols: Tolerances = DEFAULT_TOLERANCES) -> CriterionVerdict:
    """Shift-equation test on an interval.

    At every grid point the hermitian solution S(t) of
    ``B X + X B = 2 mu I - A - A*`` is computed; grid continuity and
    bounded second differences certify the branch is usable.  The reduced
    scalar system has a11 = mu, a12 = lambda(B)/n, a21 = -tr D_S,
    a22 = -mu.
    """
    method = f"interval shift-equation test (scalar {scalar_mode})"
    muf = _as_real_func(mu, tols, "mu")
    cond_psd = check_B_psd_on_grid(spec, a, b, tols)
    gauge = _lyapunov_gauge(spec, muf)

    ts = _grid(a, b, tols.grid_n)
    spacing = (b - a) / (tols.grid_n - 1)
    jump_tol = tols.jump_factor * spacing
    mats = []
    for t in ts:
        try:
            mats.append(gauge.S(t))
        except LyapunovUnsolvableError as exc:
            cond = Condition(name="shift_equation_solvable", passed=False,
                             value=str(exc),
                             detail=f"unsolvable at t={t:.9g}")
            return inconclusive(method, [cond_psd, cond], interval=(a, b))
    cond_solv = Condition(name="shift_equation_solvable", passed=True,
                          value=None,
                          detail=f"solved at all {tols.grid_n} grid points")
    d1 = max(maxabs(mats[k + 1] - mats[k]) for k in range(len(mats) - 1))
    d2 = max(maxabs(mats[k + 1] - 2 * mats[k] + mats[k - 1])
             for k in range(1, len(mats) - 1)) if len(mats) > 2 else 0.0
    cond_cont = Condition(
        name="gauge_branch_continuous", passed=d1 <= jump_tol, value=float(d1),
        tol=jump_tol, detail="max adjacent-grid jump of S")
    cond_diff = Condition(
        name="gauge_branch_differentiable", passed=d2 <= jump_tol, value=float(d2),
        tol=jump_tol, detail="max second difference of S on the grid")
    conditions = [cond_psd, cond_solv, cond_cont, cond_diff]
    if not (cond_cont.passed and cond_diff.passed):
        return inconclusive(method, conditions, interval=(a, b))

    ssys = _reduction_system(spec, gauge, muf=muf, label="shift reduction")
    scalar_conds, scalar_ok, scalar_note = _scalar_check(ssys, a, b, scalar_mode, tols)
    conditions += scalar_conds
    if cond_psd.passed and scalar_ok:
        return conclusive(OSCILLATORY_ON_INTERVAL, method, conditions,
                          interval=(a, b), notes=(scalar_note,))
    return inconclusive(method, conditions, interval=(a, b), notes=(scalar_note,))


# ---------------------------------------------------------------- theorem 2.5

class DFFunction:
    """Effective potential built from sqrt(B), its derivative and a solution
    of the rank-deficient matrix equation.

    With G = sqrt(B) A* - sqrt(B)' and F solving G X sqrt(B) = G, set
    L = (G F + (G F)*) / 2; the potential is
    q = tr(-L' - L^2 - B C) / n.  All pieces are assembled numerically
    per time point; grid checks certify PSD-ness, solvability and branch
    smoothness before q is trusted.
    """

    def __init__(self, spec, tols: Tolerances = DEFAULT_TOLERANCES):
        self.spec = spec
        self.tols = tols
        self._cache: dict[float, float] = {}
        # per-time-point pieces are pure; memoize them (results must not be
        # mutated by callers)
        self.sqrtB = lru_cache(maxsize=None)(self._sqrtB)
        self.L = lru_cache(maxsize=None)(self._L)

    def _sqrtB(self, t: float) -> np.ndarray:
        return sqrt_psd(_hermitize(self.spec.B.eval(t)))

    def dsqrtB(self, t: float) -> np.ndarray:
        h = default_step(t)
        return (self.sqrtB(t + h) - self.sqrtB(t - h)) / (2.0 * h)

    def G(self, t: float) -> np.ndarray:
        return self.sqrtB(t) @ self.spec.A.eval(t).conj().T - self.dsqrtB(t)

    def F(self, t: float) -> np.ndarray:
        return solve_eq27(self.G(t), self.sqrtB(t), tol_res=self.tols.res)

    def _L(self, t: float) -> np.ndarray:
        GF = self.G(t) @ self.F(t)
        return _hermitize(GF)

    def potential(self, t: float) -> float:
        """q(t) = tr(-L' - L^2 - B C) / n."""
        v = self._cache.get(t)
        if v is not None:
            return v
        h = default_step(t)
        Lp = (self.L(t + h) - self.L(t - h)) / (2.0 * h)
        Lt = self.L(t)
        D = -Lp - Lt @ Lt - self.spec.B.eval(t) @ self.spec.C.eval(t)
        tr = np.trace(D)
        if abs(tr.imag) > self.tols.trace_imag * max(1.0, abs(tr)):
            raise EvalError(f"effective-potential trace is not real at t={t}: {tr}")
        v = float(tr.real) / self.spec.n
        self._cache[t] = v
        return v

    def grid_conditions(self, a: float, b: float) -> list[Condition]:
        tols = self.tols
        cond_psd = check_B_psd_on_grid(self.spec, a, b, tols)
        ts = _grid(a, b, tols.grid_n)
        spacing = (b - a) / (tols.grid_n - 1)
        jump_tol = tols.jump_factor * spacing
        sqrts = []
        Ls = []
        for t in ts:
            try:
                sqrts.append(self.sqrtB(t))
                Ls.append(self.L(t))
            except NotPSDError as exc:
                return [cond_psd,
                        Condition(name="matrix_equation_solvable", passed=False,
                                  value=str(exc), detail=f"B not PSD at t={t:.9g}")]
            except Eq27UnsolvableError as exc:
                return [cond_psd,
                        Condition(name="matrix_equation_solvable", passed=False,
                                  value=float(exc.residual), tol=float(exc.tol),
                                  detail=f"unsolvable at t={t:.9g}")]
        cond_solv = Condition(name="matrix_equation_solvable", passed=True,
                              value=None,
                              detail=f"solved at all {tols.grid_n} grid points")
        d2 = max(maxabs(sqrts[k + 1] - 2 * sqrts[k] + sqrts[k - 1])
                 for k in range(1, len(sqrts) - 1)) if len(sqrts) > 2 else 0.0
        cond_sqrt = Condition(
            name="sqrtB_differentiable", passed=d2 <= jump_tol, value=float(d2),
            tol=jump_tol,
            detail="max second difference of sqrt(B); blow-ups flag "
                   "eigenvalue-crossing kinks")
        dL = max(maxabs(Ls[k + 1] - Ls[k]) for k in range(len(Ls) - 1))
        cond_branch = Condition(
            name="solution_branch_continuous", passed=dL <= jump_tol,
            value=float(dL), tol=jump_tol,
            detail="max adjacent-grid jump of the symmetrized product")
        # trace realness spot check on a subsample
        worst_imag = 0.0
        for t in ts[:: max(1, len(ts) // 40)]:
            h = default_step(t)
            Lp = (self.L(t + h) - self.L(t - h)) / (2.0 * h)
            Lt = self.L(t)
            D = -Lp - Lt @ Lt - self.spec.B.eval(t) @ self.spec.C.eval(t)
            worst_imag = max(worst_imag, abs(np.trace(D).imag))
        cond_real = Condition(
            name="potential_trace_real", passed=worst_imag <= tols.trace_imag,
            value=float(worst_imag), tol=tols.trace_imag,
            detail="imaginary part of the potential trace on a subsample")
        return [cond_psd, cond_solv, cond_sqrt, cond_branch, cond_real]


def theorem25_check(spec, a: float, b: float, scalar_mode: str = "oracle",
                    tols: Tolerances = DEFAULT_TOLERANCES) -> CriterionVerdict:
    """Square-root test on an interval.

    Assembles the effective potential q from sqrt(B), its derivative and a
    solution of the rank-deficient matrix equation, then decides the scalar
    equation  phi'' + q phi = 0  on [a, b] in the requested mode.
    """
    method = f"interval square-root test (scalar {scalar_mode})"
    df = DFFunction(spec, tols)
    conditions = df.grid_conditions(a, b)
    if not all(c.passed for c in conditions):
        return inconclusive(method, conditions, interval=(a, b))
    # the assembled potential costs several decompositions per evaluation;
    # crossing counting does not need the tight default tolerances
    inner = sl_oscillation_check(df.potential, a, b, mode=scalar_mode, tols=tols,
                                 rtol=1e-8, atol=1e-10)
    conditions += _prefixed(inner.conditions, "scalar:")
    if inner.oscillatory:
        return conclusive(OSCILLATORY_ON_INTERVAL, method, conditions,
                          interval=(a, b), notes=inner.notes)
    return inconclusive(method, conditions, interval=(a, b), notes=inner.notes)


# ---------------------------------------------------------- particular cases

def _struct_tol(scale: float, tols: Tolerances) -> float:
    return 1e-8 * max(1.0, scale)


def suggest_S(spec, case: str, a: float, b: float,
              tols: Tolerances = DEFAULT_TOLERANCES, *,
              m: int | None = None, A1: MatrixFunction | None = None,
              J=None, a_fn=None, b_fn=None,
              grid_points: int = 41) -> SChoice:
    """Construct the gauge S for one of the recognized structural patterns.

    The pattern is checked numerically on a grid over [a, b]; a violated
    residual raises :class:`SuggestSError`.  Cases:

    * ``I``    A* already admissible: S = 0.
    * ``II1``  block structure with a commuting top block: S has the block
               ``-A2 B1^{-1}``.
    * ``II2``  block structure with hermitian-part commutation: the block is
               ``-(A2 + A2*)/2 B1^{-1}``.
    * ``III``  rank-one direction: A* = A1 + a(t) J, B = b(t) J with a
               constant hermitian projection J: S = -(a/b) J.
    * ``IV``   A* = A1 B with hermitian A1: S = -A1.
    """
    ts = _grid(a, b, grid_points)
    n = spec.n

    if case == "I":
        for t in ts:
            rep = omega_membership(spec.A.eval(t).conj().T, tols=tols)
            if not rep.is_member:
                raise SuggestSError("I", f"membership at t={t:.6g}",
                                    max(rep.normality_residual, rep.re_spread),
                                    rep.tol_norm)
        return SChoice.zero(n, provenance="caseI")

    if case in ("II1", "II2"):
        if m is None or not (0 < m < n):
            raise ValueError("case II needs a block size m with 0 < m < n")
        A1f = (A1.eval if A1 is not None else
               (lambda t: np.zeros((n, n), dtype=complex)))
        for t in ts:
            Ast = spec.A.eval(t).conj().T - A1f(t)
            Bt = spec.B.eval(t)
            scale = max(maxabs(Ast), maxabs(Bt))
            tol = _struct_tol(scale, tols)
            off = max(maxabs(Ast[:m, m:]), maxabs(Ast[m:, :m]),
                      maxabs(Bt[:m, m:]), maxabs(Bt[m:, :m]))
            if off > tol:
                raise SuggestSError(case, f"block zero structure at t={t:.6g}", off, tol)
            B1 = Bt[:m, :m]
            lam = float(np.linalg.eigvalsh(_hermitize(B1))[0])
            if lam <= tols.psd:
                raise SuggestSError(case, f"top block of B positive definite at t={t:.6g}",
                                    lam, tols.psd)
            A3 = Ast[m:, m:]
            rep = omega_membership(A3, tols=tols)
            if not rep.is_member or abs(rep.W) > tols.spread_coeff * (1 + maxabs(A3)):
                raise SuggestSError(case, f"trailing block admissible with zero "
                                    f"real part at t={t:.6g}",
                                    rep.re_spread if rep.is_member else rep.normality_residual,
                                    rep.tol_norm)
            A2 = Ast[:m, :m]
            A2c = A2 if case == "II1" else (A2 + A2.conj().T) / 2.0
            comm = maxabs(A2c @ B1 - B1 @ A2c)
            if comm > tol:
                raise SuggestSError(case, f"commutation with the top block at t={t:.6g}",
                                    comm, tol)

        def S_of(t: float) -> np.ndarray:
            Ast = spec.A.eval(t).conj().T - A1f(t)
            Bt = spec.B.eval(t)
            A2 = Ast[:m, :m]
            if case == "II2":
                A2 = (A2 + A2.conj().T) / 2.0
            block = -A2 @ np.linalg.inv(Bt[:m, :m])
            S = np.zeros((n, n), dtype=complex)
            S[:m, :m] = block
            return S

        for t in ts:
            asym = maxabs(S_of(t) - S_of(t).conj().T)
            if asym > _struct_tol(maxabs(S_of(t)), tols):
                raise SuggestSError(case, f"gauge hermitian at t={t:.6g}", asym,
                                    _struct_tol(maxabs(S_of(t)), tols))
        return SChoice(func=S_of, provenance=f"case{case}")

    if case == "III":
        if J is None or a_fn is None or b_fn is None:
            raise ValueError("case III needs J, a_fn and b_fn")
        Jm = np.asarray(J, dtype=complex)
        af = _as_real_func(a_fn, tols, "a(t)")
        bf = _as_real_func(b_fn, tols, "b(t)")
        tolJ = _struct_tol(maxabs(Jm), tols)
        if maxabs(Jm @ Jm - Jm) > tolJ:
            raise SuggestSError("III", "J idempotent", maxabs(Jm @ Jm - Jm), tolJ)
        if maxabs(Jm - Jm.conj().T) > tolJ:
            raise SuggestSError("III", "J hermitian", maxabs(Jm - Jm.conj().T), tolJ)
        A1f = (A1.eval if A1 is not None else
               (lambda t: np.zeros((n, n), dtype=complex)))
        for t in ts:
            Bt = spec.B.eval(t)
            bt = bf(t)
            if bt < -tols.psd:
                raise SuggestSError("III", f"b(t) nonnegative at t={t:.6g}", bt, tols.psd)
            if bt <= tols.psd:
                raise SuggestSError("III", f"b(t) bounded away from zero at t={t:.6g} "
                                    "(the ratio a/b must stay differentiable)",
                                    bt, tols.psd)
            resB = maxabs(Bt - bt * Jm)
            if resB > _struct_tol(maxabs(Bt), tols):
                raise SuggestSError("III", f"B = b(t) J at t={t:.6g}", resB,
                                    _struct_tol(maxabs(Bt), tols))
            resA = maxabs(spec.A.eval(t).conj().T - A1f(t) - af(t) * Jm)
            if resA > _struct_tol(maxabs(spec.A.eval(t)), tols):
                raise SuggestSError("III", f"A* = A1 + a(t) J at t={t:.6g}", resA,
                                    _struct_tol(maxabs(spec.A.eval(t)), tols))
            rep = omega_membership(A1f(t), tols=tols)
            if not rep.is_member:
                raise SuggestSError("III", f"A1 admissible at t={t:.6g}",
                                    rep.normality_residual, rep.tol_norm)
        return SChoice(func=lambda t: -(af(t) / bf(t)) * Jm, provenance="caseIII")

    if case == "IV":
        def A1_of(t: float) -> np.ndarray:
            if A1 is not None:
                return A1.eval(t)
            Bt = spec.B.eval(t)
            return spec.A.eval(t).conj().T @ np.linalg.inv(Bt)
        for t in ts:
            A1t = A1_of(t)
            herm = maxabs(A1t - A1t.conj().T)
            tol = _struct_tol(maxabs(A1t), tols)
            if herm > tol:
                raise SuggestSError("IV", f"A1 hermitian at t={t:.6g}", herm, tol)
            res = maxabs(spec.A.eval(t).conj().T - A1t @ spec.B.eval(t))
            if res > _struct_tol(maxabs(spec.A.eval(t)), tols):
                raise SuggestSError("IV", f"A* = A1 B at t={t:.6g}", res,
                                    _struct_tol(maxabs(spec.A.eval(t)), tols))
        return SChoice(func=lambda t: -A1_of(t), provenance="caseIV")

    raise ValueError(f"unknown case {case!r}; expected I, II1, II2, III or IV")


# ----------------------------------------------------------- interval gluing

def remark21_aggregate(verdicts: Sequence[CriterionVerdict]) -> CriterionVerdict:
    """Glue interval verdicts on a growing family of windows.

    A genuinely oscillatory conclusion needs window starts marching to
    infinity; a finite family only certifies the verdict up to the last
    window, which the result records as a caveat.  The PSD hypothesis on B
    need not hold outside the union of the windows.
    """
    method = "growing-window aggregation"
    if not verdicts:
        return inconclusive(method, [Condition(
            name="nonempty_window_family", passed=False, value=0,
            detail="no interval verdicts supplied")])
    for v in verdicts:
        if v.status != OSCILLATORY_ON_INTERVAL or v.interval is None:
            raise ValueError("aggregation needs interval-oscillatory verdicts "
                             "with intervals attached")
    intervals = [v.interval for v in verdicts]
    for (a1, b1), (a2, b2) in zip(intervals, intervals[1:]):
        if not (a2 > a1 and a2 >= b1):
            raise ValueError(f"windows must be sorted and non-overlapping: "
                             f"[{a1},{b1}] then [{a2},{b2}]")
    if len(verdicts) == 1:
        return verdicts[0]
    conds = [Condition(
        name=f"window_{k}_oscillatory", passed=True,
        value=f"[{v.interval[0]:.9g}, {v.interval[1]:.9g}]",
        detail=v.method) for k, v in enumerate(verdicts, 1)]
    return conclusive(
        OSCILLATORY, method, conds, horizon=intervals[-1][1],
        notes=("conclusion requires window starts growing without bound; "
               f"verified here for {len(verdicts)} windows up to "
               f"t={intervals[-1][1]:.9g} only",
               "the PSD hypothesis on B is not required outside the union "
               "of the windows"))


# ------------------------------------------------------------ half-line tests

def corollary_check(spec, variant: str, horizon: float | None = None,
                    scalar_mode: str = "criterion",
                    S: SChoice | None = None, mu=None,
                    tols: Tolerances = DEFAULT_TOLERANCES) -> CriterionVerdict:
    """Half-line versions of the three interval tests.

    Hypotheses are sampled on a grid up to the horizon; the scalar
    condition runs the divergence ladder (variants ``2.1`` and ``2.2``) or
    the phase-angle oracle on [t0, horizon] (variant ``2.3``).  A positive
    verdict always carries the horizon caveat.
    """
    horizon = tols.horizon if horizon is None else horizon
    t0 = spec.t0
    if horizon <= t0:
        raise ValueError(f"horizon {horizon} must exceed t0 = {t0}")
    caveat = (f"half-line hypotheses sampled up to the horizon t={horizon:.9g}; "
              "beyond it nothing was checked")

    if variant == "2.1":
        if S is None:
            raise ValueError("variant 2.1 needs a gauge S")
        method = f"half-line gauge test (S from {S.provenance})"
        cond_psd = check_B_psd_on_grid(spec, t0, horizon, tols)
        cond_omega = check_omega_on_grid(spec, S, t0, horizon, tols)
        conditions = [cond_psd, cond_omega]
        if not cond_omega.passed:
            return inconclusive(method, conditions, horizon=horizon)
        ssys = _reduction_system(spec, S, label="gauge reduction")
    elif variant == "2.2":
        if mu is None:
            raise ValueError("variant 2.2 needs the shift function mu")
        method = "half-line shift-equation test"
        muf = _as_real_func(mu, tols, "mu")
        cond_psd = check_B_psd_on_grid(spec, t0, horizon, tols)
        gauge = _lyapunov_gauge(spec, muf)
        try:
            for t in _grid(t0, horizon, 101):
                gauge.S(t)
        except LyapunovUnsolvableError as exc:
            cond = Condition(name="shift_equation_solvable", passed=False,
                             value=str(exc), detail="spot check failed")
            return inconclusive(method, [cond_psd, cond], horizon=horizon)
        conditions = [cond_psd,
                      Condition(name="shift_equation_solvable", passed=True,
                                value=None, detail="spot-checked at 101 points")]
        ssys = _reduction_system(spec, gauge, muf=muf, label="shift reduction")
    elif variant == "2.3":
        method = "half-line square-root test"
        df = DFFunction(spec, tols)
        conditions = df.grid_conditions(t0, horizon)
        if not all(c.passed for c in conditions):
            return inconclusive(method, conditions, horizon=horizon)
        inner = sl_oscillation_check(df.potential, t0, horizon, mode="oracle",
                                     tols=tols, rtol=1e-8, atol=1e-10)
        conditions = conditions + _prefixed(inner.conditions, "scalar:")
        if inner.oscillatory:
            return conclusive(OSCILLATORY, method, conditions, horizon=horizon,
                              notes=(caveat,) + inner.notes)
        return inconclusive(method, conditions, horizon=horizon,
                            notes=(caveat,) + inner.notes)
    else:
        raise ValueError(f"unknown variant {variant!r}; expected 2.1, 2.2 or 2.3")

    try:
        inner = theorem24_check(ssys, t0, horizon=horizon, tols=tols)
    except (EvalError, OverflowError) as exc:
        conditions.append(Condition(name="scalar:half_line_divergence",
                                    passed=False, value=str(exc),
                                    detail="ladder integration failed"))
        return inconclusive(method, conditions, horizon=horizon)
    conditions = conditions + _prefixed(inner.conditions, "scalar:")
    if all(c.passed for c in conditions):
        return conclusive(OSCILLATORY, method, conditions, horizon=horizon,
                          notes=(caveat,) + inner.notes)
    return inconclusive(method, conditions, horizon=horizon,
                        notes=(caveat,) + inner.notes)
