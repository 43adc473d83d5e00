"""Time-dependent complex matrix functions built from parsed scalar entries."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .expr import (
    Binary, Const, Expr, EvalError, ExprError, Num, NonSmoothExprError, Unary,
    compile_expr, differentiate, parse_scalar_expr, to_source,
)

__all__ = [
    "MatrixFunction", "MatrixConfigError", "EntryEvalError", "DomainError",
    "parse_matrix_function", "num_derivative", "default_step",
]


class MatrixConfigError(ExprError):
    """Bad matrix configuration; carries per-entry parse errors when present."""

    def __init__(self, message: str, entry_errors: list[tuple[int, int, str]] | None = None):
        self.entry_errors = entry_errors or []
        if self.entry_errors:
            details = "; ".join(f"({i},{j}): {msg}" for i, j, msg in self.entry_errors)
            message = f"{message}: {details}"
        super().__init__(message)


class EntryEvalError(EvalError):
    def __init__(self, row: int, col: int, cause: Exception):
        super().__init__(f"entry ({row},{col}): {cause}")
        self.row = row
        self.col = col


class DomainError(ExprError):
    pass


def _expr_from_complex(z: complex) -> Expr:
    re, im = float(z.real), float(z.imag)

    def num(v: float) -> Expr:
        return Num(v) if v >= 0 else Unary("neg", Num(-v))

    if im == 0.0:
        return num(re)
    imag = Binary("*", Const("i"), Num(abs(im)))
    if re == 0.0:
        return imag if im > 0 else Unary("neg", imag)
    return Binary("+" if im > 0 else "-", num(re), imag)


class MatrixFunction:
    """An n-by-n grid of scalar expressions evaluated at real times.

    Instances are immutable after construction; ``eval`` is a pure function
    of (self, t) and safe for concurrent use.
    """

    def __init__(self, entries: Sequence[Sequence[Expr]], *,
                 hermitian: bool = False, t_min: float | None = None,
                 label: str = ""):
        rows = tuple(tuple(row) for row in entries)
        n = len(rows)
        if n == 0 or any(len(row) != n for row in rows):
            raise MatrixConfigError("entries must form a square, non-empty grid")
        self.n = n
        self.entries = rows
        self.hermitian = bool(hermitian)
        self.t_min = t_min
        self.label = label
        self._compiled = tuple(tuple(compile_expr(e) for e in row) for row in rows)

    # construction helpers -------------------------------------------------

    @classmethod
    def from_strings(cls, rows: Sequence[Sequence[str]], **kwargs) -> "MatrixFunction":
        errors: list[tuple[int, int, str]] = []
        parsed: list[list[Expr]] = []
        for i, row in enumerate(rows):
            prow = []
            for j, src in enumerate(row):
                try:
                    prow.append(parse_scalar_expr(src))
                except ExprError as exc:
                    errors.append((i, j, str(exc)))
                    prow.append(Num(0.0))
            parsed.append(prow)
        if errors:
            raise MatrixConfigError("entry parse failures", errors)
        return cls(parsed, **kwargs)

    @classmethod
    def constant(cls, array, **kwargs) -> "MatrixFunction":
        arr = np.asarray(array, dtype=complex)
        rows = [[_expr_from_complex(arr[i, j]) for j in range(arr.shape[1])]
                for i in range(arr.shape[0])]
        return cls(rows, **kwargs)

    @classmethod
    def identity(cls, n: int, **kwargs) -> "MatrixFunction":
        return cls.constant(np.eye(n), hermitian=True, **kwargs)

    @classmethod
    def zero(cls, n: int, **kwargs) -> "MatrixFunction":
        return cls.constant(np.zeros((n, n)), hermitian=True, **kwargs)

    # evaluation ------------------------------------------------------------

    def _check_domain(self, t: float):
        if self.t_min is not None and t < self.t_min - 1e-12 * max(1.0, abs(self.t_min)):
            raise DomainError(f"t={t} below domain start {self.t_min}"
                              + (f" of {self.label}" if self.label else ""))

    def eval(self, t: float) -> np.ndarray:
        self._check_domain(t)
        out = np.empty((self.n, self.n), dtype=complex)
        for i, row in enumerate(self._compiled):
            for j, fn in enumerate(row):
                try:
                    out[i, j] = fn(t)
                except EvalError as exc:
                    raise EntryEvalError(i, j, exc) from exc
        return out

    __call__ = eval

    def source(self) -> list[list[str]]:
        return [[to_source(e) for e in row] for row in self.entries]

    def symbolic_derivative(self) -> "MatrixFunction":
        """Entrywise symbolic derivative; raises NonSmoothExprError if any
        entry involves abs/max/min."""
        rows = [[differentiate(e) for e in row] for row in self.entries]
        return MatrixFunction(rows, t_min=self.t_min,
                              label=f"d/dt {self.label}" if self.label else "")

    def has_smooth_entries(self) -> bool:
        try:
            self.symbolic_derivative()
        except NonSmoothExprError:
            return False
        return True

    def __repr__(self):
        tag = f" {self.label!r}" if self.label else ""
        return f"<MatrixFunction{tag} n={self.n} hermitian={self.hermitian}>"


def parse_matrix_function(config: dict) -> MatrixFunction:
    """Build a MatrixFunction from a JSON-compatible config fragment.

    Expected keys: ``n`` (int), ``entries`` (n lists of n expression
    strings); optional ``hermitian`` (bool), ``t_min`` (float), ``label``.
    """
    if not isinstance(config, dict):
        raise MatrixConfigError("matrix config must be a mapping")
    try:
        n = int(config["n"])
        entries = config["entries"]
    except KeyError as exc:
        raise MatrixConfigError(f"matrix config missing key {exc}") from exc
    if n <= 0:
        raise MatrixConfigError(f"dimension must be positive, got {n}")
    if len(entries) != n or any(len(row) != n for row in entries):
        shape = (len(entries), *(len(r) for r in entries))
        raise MatrixConfigError(f"entries shape {shape} does not match n={n}")
    return MatrixFunction.from_strings(
        entries,
        hermitian=bool(config.get("hermitian", False)),
        t_min=config.get("t_min"),
        label=config.get("label", ""),
    )


def default_step(t: float) -> float:
    """Central-difference step balancing truncation against rounding."""
    return 1e-5 * max(1.0, abs(t))


def num_derivative(mf: MatrixFunction, t: float, h: float | None = None) -> np.ndarray:
    """Central difference (M(t+h) - M(t-h)) / (2h)."""
    if h is None:
        h = default_step(t)
    if h <= 0:
        raise ValueError("step h must be positive")
    if mf.t_min is not None and t - h < mf.t_min - 1e-12 * max(1.0, abs(mf.t_min)):
        raise DomainError(f"central difference at t={t} with h={h} leaves the domain")
    return (mf.eval(t + h) - mf.eval(t - h)) / (2.0 * h)
