"""Hamiltonian system instances and the numerical oracles.

The system is  Phi' = A(t) Phi + B(t) Psi,  Psi' = C(t) Phi - A*(t) Psi
with hermitian B, C.  A solution pair with hermitian Phi* Psi stays that
way along the flow; the conserved defect |Phi* Psi - Psi* Phi| is monitored
as an integration-quality invariant.  Zeros of det Phi are located through
the smallest singular value of Phi, which is real, nonnegative and vanishes
exactly at the zeros (det Phi itself is complex-valued and may have
even-order zeros).

Everything this module reports is sampled numerical evidence.  Finding
zeros witnesses oscillation on the window; finding none never proves
nonoscillation.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .config import DEFAULT_INTEGRATOR, DEFAULT_TOLERANCES, IntegratorSettings, Tolerances
from .linalg import HermitianCheckReport, check_hermitian_on_grid, maxabs
from .matfun import MatrixFunction

__all__ = [
    "SystemSpec", "PreparedInitial", "OracleTrace", "RiccatiTrace",
    "OracleVerdict", "validate_system", "make_prepared_initial",
    "integrate_system", "detect_det_zeros", "integrate_riccati",
    "oracle_verdict", "trace_to_csv", "trace_events",
]


@dataclass(frozen=True)
class SystemSpec:
    n: int
    A: MatrixFunction
    B: MatrixFunction
    C: MatrixFunction
    t0: float
    label: str = ""

    def __post_init__(self):
        for name, mf in (("A", self.A), ("B", self.B), ("C", self.C)):
            if mf.n != self.n:
                raise ValueError(f"coefficient {name} has dimension {mf.n}, spec says {self.n}")

    def A_star(self, t: float) -> np.ndarray:
        return self.A.eval(t).conj().T


def validate_system(spec: SystemSpec, grid, tol: float | None = None
                    ) -> dict[str, HermitianCheckReport]:
    """Hermitian diagnostics for B and C over a time grid (A is unconstrained)."""
    return {
        "B": check_hermitian_on_grid(spec.B, grid, tol),
        "C": check_hermitian_on_grid(spec.C, grid, tol),
    }


@dataclass(frozen=True)
class PreparedInitial:
    """Initial pair with hermitian Phi0* Psi0 (conserved along the flow)."""

    Phi0: np.ndarray
    Psi0: np.ndarray

    def __post_init__(self):
        P, Q = np.asarray(self.Phi0), np.asarray(self.Psi0)
        defect = maxabs(P.conj().T @ Q - Q.conj().T @ P)
        scale = max(1.0, maxabs(P) * maxabs(Q))
        if defect > 1e-12 * scale:
            raise ValueError(f"initial pair is not prepared: defect {defect:.3e}")

    @property
    def invariant_defect(self) -> float:
        P, Q = self.Phi0, self.Psi0
        return maxabs(P.conj().T @ Q - Q.conj().T @ P)


def make_prepared_initial(n: int, kind: str = "random", seed: int = 0,
                          hermitian_part=None, t0: float | None = None) -> PreparedInitial:
    """Build (Phi0, Psi0) = (I, H) for a hermitian H, so det Phi0 != 0.

    Kinds: ``zero`` (H = 0), ``identity`` (H = I), ``random`` (seeded
    complex hermitian), ``custom`` (H given), and ``sin-phase`` which
    starts on the reference pair (sin(t0) I, cos(t0) I); the latter needs
    sin(t0) != 0 so the start is nondegenerate.
    """
    I = np.eye(n, dtype=complex)
    if kind == "zero":
        return PreparedInitial(I, np.zeros((n, n), dtype=complex))
    if kind == "identity":
        return PreparedInitial(I, I.copy())
    if kind == "random":
        rng = np.random.default_rng(seed)
        X = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        H = (X + X.conj().T) / 2.0
        return PreparedInitial(I, H)
    if kind == "custom":
        H = np.asarray(hermitian_part, dtype=complex)
        return PreparedInitial(I, (H + H.conj().T) / 2.0)
    if kind == "sin-phase":
        if t0 is None or abs(math.sin(t0)) < 1e-12:
            raise ValueError("sin-phase start needs t0 with sin(t0) != 0")
        return PreparedInitial(math.sin(t0) * I, math.cos(t0) * I)
    raise ValueError(f"unknown prepared-initial kind {kind!r}")


@dataclass
class OracleTrace:
    times: np.ndarray
    sigma_min: np.ndarray
    drift: np.ndarray
    det_zero_times: tuple[float, ...]
    riccati_blowups: tuple[float, ...]
    reliable: bool
    messages: tuple[str, ...]
    step_stats: dict
    interval: tuple[float, float]
    drift_tol: float
    _phi_of: object = field(repr=False, default=None)

    def phi(self, t: float) -> np.ndarray:
        return self._phi_of(t)


def integrate_system(spec: SystemSpec, init: PreparedInitial,
                     interval: tuple[float, float],
                     ctrl: IntegratorSettings = DEFAULT_INTEGRATOR,
                     drift_tol: float | None = None) -> OracleTrace:
    """Integrate the full matrix system with an embedded 5(4) pair.

    Records the smallest singular value of Phi and the prepared-invariant
    drift on a dense grid.  A drift above tolerance flags the trace as
    unreliable rather than aborting.
    """
    a, b = interval
    if b <= a:
        raise ValueError(f"empty interval [{a}, {b}]")
    n = spec.n
    if drift_tol is None:
        init_scale = max(maxabs(init.Phi0), maxabs(init.Psi0))
        drift_tol = DEFAULT_TOLERANCES.drift * (1.0 + init_scale ** 2)

    def rhs(t, y):
        Phi = y[:n * n].reshape(n, n)
        Psi = y[n * n:].reshape(n, n)
        At = spec.A.eval(t)
        dPhi = At @ Phi + spec.B.eval(t) @ Psi
        dPsi = spec.C.eval(t) @ Phi - At.conj().T @ Psi
        return np.concatenate([dPhi.ravel(), dPsi.ravel()])

    y0 = np.concatenate([init.Phi0.ravel(), init.Psi0.ravel()]).astype(complex)
    sol = solve_ivp(rhs, (a, b), y0, method=ctrl.method, rtol=ctrl.rtol,
                    atol=ctrl.atol, max_step=ctrl.max_step, dense_output=True)
    messages = []
    if sol.status != 0:
        messages.append(f"integrator stopped at t={sol.t[-1]:.9g}: {sol.message}")
    t_end = sol.t[-1]
    ts = np.linspace(a, t_end, ctrl.samples)
    sigma = np.empty(len(ts))
    drift = np.empty(len(ts))
    for k, t in enumerate(ts):
        y = sol.sol(t)
        Phi = y[:n * n].reshape(n, n)
        Psi = y[n * n:].reshape(n, n)
        sigma[k] = np.linalg.svd(Phi, compute_uv=False)[-1]
        drift[k] = maxabs(Phi.conj().T @ Psi - Psi.conj().T @ Phi
                          - (init.Phi0.conj().T @ init.Psi0
                             - init.Psi0.conj().T @ init.Phi0))
    reliable = sol.status == 0 and float(drift.max()) <= drift_tol
    if drift.max() > drift_tol:
        messages.append(f"invariant drift {drift.max():.3e} exceeds {drift_tol:.3e}")

    def phi_of(t: float) -> np.ndarray:
        return sol.sol(t)[:n * n].reshape(n, n)

    return OracleTrace(
        times=ts, sigma_min=sigma, drift=drift,
        det_zero_times=(), riccati_blowups=(),
        reliable=reliable, messages=tuple(messages),
        step_stats={"nfev": int(sol.nfev), "steps": int(len(sol.t)),
                    "status": int(sol.status)},
        interval=(a, t_end), drift_tol=drift_tol, _phi_of=phi_of)


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_min(f, lo: float, hi: float, xtol: float = 1e-10) -> float:
    x1 = hi - _GOLDEN * (hi - lo)
    x2 = lo + _GOLDEN * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while hi - lo > xtol:
        if f1 < f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _GOLDEN * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _GOLDEN * (hi - lo)
            f2 = f(x2)
    return 0.5 * (lo + hi)


def detect_det_zeros(trace: OracleTrace, zero_tol: float | None = None,
                     tols: Tolerances = DEFAULT_TOLERANCES) -> list[float]:
    """Times where det Phi vanishes, from minima of the smallest singular value.

    Every local minimum of the sampled sigma_min is refined by golden-section
    minimization over its bracketing window; refined minima below the zero
    threshold count as zeros.  An empty list means no zero was found on the
    window, never that the system is nonoscillatory.
    """
    ts, sigma = trace.times, trace.sigma_min
    if zero_tol is None:
        zero_tol = tols.zero_rel * max(float(np.median(sigma)), 1e3 * np.finfo(float).tiny)

    def sigma_of(t: float) -> float:
        return float(np.linalg.svd(trace.phi(t), compute_uv=False)[-1])

    candidates = []
    m = len(ts)
    for i in range(m):
        left = sigma[i - 1] if i > 0 else math.inf
        right = sigma[i + 1] if i < m - 1 else math.inf
        if sigma[i] <= left and sigma[i] <= right:
            lo = ts[max(i - 1, 0)]
            hi = ts[min(i + 1, m - 1)]
            if hi > lo:
                candidates.append((lo, hi))
    zeros = []
    span = ts[-1] - ts[0]
    for lo, hi in candidates:
        tstar = _golden_min(sigma_of, lo, hi, xtol=max(1e-12, 1e-10 * span))
        if sigma_of(tstar) < zero_tol:
            zeros.append(tstar)
    zeros.sort()
    merged: list[float] = []
    min_sep = max(1e-9, 1e-8 * span)
    for z in zeros:
        if not merged or z - merged[-1] > min_sep:
            merged.append(z)
    return merged


@dataclass
class RiccatiTrace:
    times: np.ndarray
    norm: np.ndarray
    herm_drift: np.ndarray
    blowups: tuple[float, ...]
    reliable: bool
    messages: tuple[str, ...]
    interval: tuple[float, float]
    _y_of: object = field(repr=False, default=None)

    def Y(self, t: float) -> np.ndarray:
        return self._y_of(t)


def integrate_riccati(spec: SystemSpec, Y0, interval: tuple[float, float],
                      ctrl: IntegratorSettings = DEFAULT_INTEGRATOR,
                      blowup_threshold: float | None = None,
                      tols: Tolerances = DEFAULT_TOLERANCES) -> RiccatiTrace:
    """Integrate  Y' = C - A* Y - Y A - Y B Y  and record finite-time escape.

    A blow-up (norm crossing the threshold, or the integrator dying under a
    runaway solution) witnesses a zero of det Phi for the prepared solution
    with Psi = Y Phi.  Integration stops at the first blow-up; continuation
    through the pole is out of scope.
    """
    a, b = interval
    if b <= a:
        raise ValueError(f"empty interval [{a}, {b}]")
    n = spec.n
    threshold = tols.blowup if blowup_threshold is None else blowup_threshold
    Y0 = np.asarray(Y0, dtype=complex)

    def rhs(t, y):
        Y = y.reshape(n, n)
        At = spec.A.eval(t)
        dY = spec.C.eval(t) - At.conj().T @ Y - Y @ At - Y @ spec.B.eval(t) @ Y
        return dY.ravel()

    def escape(t, y):
        return threshold - float(np.max(np.abs(y)))
    escape.terminal = True
    escape.direction = -1

    sol = solve_ivp(rhs, (a, b), Y0.ravel(), method=ctrl.method, rtol=ctrl.rtol,
                    atol=ctrl.atol, dense_output=True, events=escape)
    messages = []
    blowups: list[float] = []
    if sol.t_events and len(sol.t_events[0]):
        blowups.append(float(sol.t_events[0][0]))
    if sol.status == -1:
        last_norm = float(np.max(np.abs(sol.y[:, -1]))) if sol.y.size else 0.0
        if last_norm >= math.sqrt(threshold):
            blowups.append(float(sol.t[-1]))
            messages.append(
                f"integrator failed at t={sol.t[-1]:.9g} with |Y|={last_norm:.3e}; "
                "treated as blow-up")
        else:
            messages.append(f"integrator failed at t={sol.t[-1]:.9g}: {sol.message}")
    t_end = sol.t[-1]
    ts = np.linspace(a, t_end, ctrl.samples)
    norm = np.empty(len(ts))
    herm = np.empty(len(ts))
    for k, t in enumerate(ts):
        Y = sol.sol(t).reshape(n, n)
        norm[k] = np.max(np.abs(Y))
        herm[k] = maxabs(Y - Y.conj().T)
    reliable = sol.status in (0, 1)

    def y_of(t: float) -> np.ndarray:
        return sol.sol(t).reshape(n, n)

    return RiccatiTrace(times=ts, norm=norm, herm_drift=herm,
                        blowups=tuple(sorted(set(blowups))), reliable=reliable,
                        messages=tuple(messages), interval=(a, t_end), _y_of=y_of)


@dataclass(frozen=True)
class OracleVerdict:
    verdict: str  # AllTrialsOscillated | SomeTrialDidNot | Unreliable
    trials: tuple[dict, ...]
    interval: tuple[float, float]
    note: str

    @property
    def zero_counts(self) -> list[int]:
        return [len(tr["zeros"]) for tr in self.trials]


def oracle_verdict(spec: SystemSpec, interval: tuple[float, float],
                   trials: int = 3, seed: int = 0,
                   ctrl: IntegratorSettings = DEFAULT_INTEGRATOR,
                   tols: Tolerances = DEFAULT_TOLERANCES) -> OracleVerdict:
    """Run several seeded prepared solutions and aggregate their zero findings.

    This is sampled numerical evidence about Definition-level oscillation:
    ``AllTrialsOscillated`` means every sampled prepared solution showed a
    det Phi zero on the window.  It is not a proof, and a trial without
    zeros is not a proof of nonoscillation; both facts are recorded in the
    note.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    results = []
    all_oscillated = True
    any_unreliable = False
    for k in range(trials):
        init = make_prepared_initial(spec.n, kind="random", seed=seed + k)
        trace = integrate_system(spec, init, interval, ctrl)
        zeros = detect_det_zeros(trace, tols=tols)
        if not trace.reliable:
            any_unreliable = True
        if not zeros:
            all_oscillated = False
        results.append({"seed": seed + k, "zeros": tuple(zeros),
                        "reliable": trace.reliable,
                        "messages": trace.messages})
    if any_unreliable:
        verdict = "Unreliable"
    elif all_oscillated:
        verdict = "AllTrialsOscillated"
    else:
        verdict = "SomeTrialDidNot"
    return OracleVerdict(
        verdict=verdict, trials=tuple(results), interval=interval,
        note="sampled numerical evidence over finitely many prepared "
             "solutions on a finite window; not a proof, and absence of "
             "zeros never certifies nonoscillation")


# ----------------------------------------------------------------- exporters

def trace_to_csv(trace: OracleTrace) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "sigma_min", "drift"])
    for t, s, d in zip(trace.times, trace.sigma_min, trace.drift):
        w.writerow([format(t, ".17g"), format(s, ".17g"), format(d, ".17g")])
    return buf.getvalue()


def trace_events(trace: OracleTrace, zeros=None) -> dict:
    return {
        "det_zero_times": list(zeros if zeros is not None else trace.det_zero_times),
        "riccati_blowups": list(trace.riccati_blowups),
        "reliable": trace.reliable,
        "drift_max": float(trace.drift.max()) if len(trace.drift) else 0.0,
        "drift_tol": trace.drift_tol,
        "interval": list(trace.interval),
        "messages": list(trace.messages),
        "step_stats": trace.step_stats,
    }
