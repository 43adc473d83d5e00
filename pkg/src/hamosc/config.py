"""Central tolerance and settings defaults.

Every numeric threshold used by the checks lives here so that reports can
embed the exact tolerance set and reruns are auditable.  All values can be
overridden per run (CLI: repeated ``--tol KEY=VAL``).
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace


@dataclass(frozen=True)
class Tolerances:
    # matrix diagnostics
    herm: float = 1e-10          # hermitian pass: |M - M*|_inf <= herm
    norm_coeff: float = 1e-8     # normality pass: residual <= norm_coeff * max(1, |M|)^2
    spread_coeff: float = 1e-8   # eigenvalue real-part spread: <= spread_coeff * (1 + |M|)
    psd: float = 1e-10           # least-eigenvalue floor for PSD tests / sqrt clamping
    sing: float = 1e-10          # near-singular eigenvalue pair in the Lyapunov solve
    res: float = 1e-8            # relative residual for the rank-deficient matrix equation
    real_imag: float = 1e-12     # realness checks on scalar-system coefficients
    trace_imag: float = 1e-10    # imaginary part allowed in the effective-potential trace

    # scalar criterion machinery
    sign: float = 1e-9           # grid sign checks (a12 >= -sign)
    quad: float = 1e-9           # adaptive Simpson absolute tolerance
    growth_threshold: float = 10.0
    ladder_ratio: float = 2.0
    horizon: float = 1e4

    # grid policy for hypothesis checks
    grid_n: int = 2001
    jump_factor: float = 1e3     # jump_tol = jump_factor * grid spacing

    # oracle integrations
    drift: float = 1e-8          # invariant drift before a trace is flagged unreliable
    zero_rel: float = 1e-5       # zero threshold = zero_rel * median(sigma_min)
    blowup: float = 1e8
    min_step: float = 1e-12

    def updated(self, **overrides) -> "Tolerances":
        return replace(self, **overrides)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_strings(cls, pairs: list[str]) -> "Tolerances":
        """Build from CLI strings like ``quad=1e-8``; unknown keys raise KeyError."""
        known = {f.name: f.type for f in fields(cls)}
        overrides = {}
        for item in pairs:
            key, _, raw = item.partition("=")
            key = key.strip()
            if key not in known:
                raise KeyError(f"unknown tolerance key {key!r}; known: {sorted(known)}")
            value = float(raw)
            if value <= 0:
                raise ValueError(f"tolerance override {key}={value} must be positive")
            overrides[key] = int(value) if key == "grid_n" else value
        return cls(**overrides)


DEFAULT_TOLERANCES = Tolerances()


@dataclass(frozen=True)
class IntegratorSettings:
    """Settings for the adaptive Runge-Kutta oracle integrations."""

    rtol: float = 1e-9
    atol: float = 1e-11
    max_step: float = field(default=float("inf"))
    samples: int = 2001          # dense-output sampling of the trace
    method: str = "RK45"

    def updated(self, **overrides) -> "IntegratorSettings":
        return replace(self, **overrides)


DEFAULT_INTEGRATOR = IntegratorSettings()
