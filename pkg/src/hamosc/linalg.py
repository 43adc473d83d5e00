"""Dense complex matrix kernels used by the oscillation criteria.

Everything here works on small matrices (n of order 10 at most), so the
implementations favor clarity and tight accuracy over scalability.  The
hermitian eigenproblems go through LAPACK (``numpy.linalg.eigh``); the tests
cross-check against independent oracles (inertia bisection, Kronecker
solves, construct-then-invert).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances

__all__ = [
    "HermitianCheckReport", "OmegaReport",
    "NonHermitianError", "NotPSDError", "LyapunovUnsolvableError",
    "Eq27UnsolvableError",
    "maxabs", "trace", "hermitian_check", "check_hermitian_on_grid",
    "least_eigenvalue", "is_psd", "sqrt_psd", "omega_membership",
    "solve_lyapunov", "solve_eq27",
]


class NonHermitianError(ValueError):
    pass


class NotPSDError(ValueError):
    pass


class LyapunovUnsolvableError(ValueError):
    def __init__(self, pair: tuple[float, float], residual_entry: float):
        super().__init__(
            "equation B X + X B = R is not solvable: eigenvalue pair "
            f"({pair[0]:.6g}, {pair[1]:.6g}) sums to ~0 while the projected "
            f"right-hand side entry is {residual_entry:.3e}")
        self.pair = pair
        self.residual_entry = residual_entry


class Eq27UnsolvableError(ValueError):
    def __init__(self, residual: float, tol: float):
        super().__init__(f"no solution within tolerance: residual {residual:.3e} > {tol:.3e}")
        self.residual = residual
        self.tol = tol


def maxabs(M) -> float:
    """Entrywise max-modulus norm."""
    M = np.asarray(M)
    return float(np.max(np.abs(M))) if M.size else 0.0


def trace(M) -> complex:
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"trace needs a square matrix, got shape {M.shape}")
    return complex(np.trace(M))


@dataclass(frozen=True)
class HermitianCheckReport:
    max_asymmetry: float
    passed: bool
    tol: float


@dataclass(frozen=True)
class OmegaReport:
    """Result of the normal-with-common-real-part membership test."""

    is_member: bool
    W: float | None
    normality_residual: float
    re_spread: float
    tol_norm: float
    tol_spread: float


def hermitian_check(M, tol: float | None = None) -> HermitianCheckReport:
    tol = DEFAULT_TOLERANCES.herm if tol is None else tol
    M = np.asarray(M, dtype=complex)
    asym = maxabs(M - M.conj().T)
    return HermitianCheckReport(max_asymmetry=asym, passed=asym <= tol, tol=tol)


def check_hermitian_on_grid(mf, grid, tol: float | None = None) -> HermitianCheckReport:
    """Worst-case hermitian check of a MatrixFunction over a time grid."""
    tol = DEFAULT_TOLERANCES.herm if tol is None else tol
    worst = 0.0
    for t in grid:
        worst = max(worst, hermitian_check(mf.eval(t), tol).max_asymmetry)
    return HermitianCheckReport(max_asymmetry=worst, passed=worst <= tol, tol=tol)


def _require_hermitian(M, tol: float | None = None) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    rep = hermitian_check(M, tol)
    if not rep.passed:
        raise NonHermitianError(
            f"matrix is not hermitian: asymmetry {rep.max_asymmetry:.3e} > {rep.tol:.3e}")
    return (M + M.conj().T) / 2.0


def least_eigenvalue(H, tol: float | None = None) -> float:
    """Smallest eigenvalue of a hermitian matrix (all eigenvalues are real)."""
    H = _require_hermitian(H, tol)
    return float(np.linalg.eigvalsh(H)[0])


def is_psd(H, tol: float | None = None) -> bool:
    tol = DEFAULT_TOLERANCES.psd if tol is None else tol
    return least_eigenvalue(H) >= -tol


def sqrt_psd(H, tol: float | None = None) -> np.ndarray:
    """Hermitian PSD square root via eigendecomposition.

    Eigenvalues in [-tol, 0) are clamped to zero (coefficients like B(t) with
    an exact kernel hit zero up to rounding); anything below -tol raises
    :class:`NotPSDError`.
    """
    H = _require_hermitian(H)
    if tol is None:
        tol = DEFAULT_TOLERANCES.psd * max(1.0, maxabs(H))
    w, V = np.linalg.eigh(H)
    if w[0] < -tol:
        raise NotPSDError(f"least eigenvalue {w[0]:.3e} below -{tol:.3e}")
    w = np.where(w < 0.0, 0.0, w)
    P = (V * np.sqrt(w)) @ V.conj().T
    return (P + P.conj().T) / 2.0


def omega_membership(M, tol_norm: float | None = None,
                     tol_spread: float | None = None,
                     tols: Tolerances = DEFAULT_TOLERANCES) -> OmegaReport:
    """Test whether M is normal with all eigenvalue real parts equal.

    For a normal matrix the hermitian part (M + M*)/2 commutes with the
    skew part and its eigenvalues are exactly the real parts of the
    eigenvalues of M, so the spread and the common value W are read off a
    hermitian eigendecomposition; normality itself is certified by the
    commutator residual |M*M - MM*|.
    """
    M = np.asarray(M, dtype=complex)
    scale = maxabs(M)
    if tol_norm is None:
        tol_norm = tols.norm_coeff * max(1.0, scale) ** 2
    if tol_spread is None:
        tol_spread = tols.spread_coeff * (1.0 + scale)
    residual = maxabs(M.conj().T @ M - M @ M.conj().T)
    H = (M + M.conj().T) / 2.0
    re_parts = np.linalg.eigvalsh(H)
    spread = float(re_parts[-1] - re_parts[0])
    member = residual <= tol_norm and spread <= tol_spread
    return OmegaReport(
        is_member=member,
        W=float(np.mean(re_parts)) if member else None,
        normality_residual=residual,
        re_spread=spread,
        tol_norm=tol_norm,
        tol_spread=tol_spread,
    )


def solve_lyapunov(B, R, tol_sing: float | None = None,
                   compat_tol: float | None = None) -> np.ndarray:
    """Solve B X + X B = R for hermitian B, R; returns the hermitian part.

    Works in the eigenbasis of B: with B = V diag(beta) V*, the projected
    equation reads X~_ij (beta_i + beta_j) = R~_ij.  Pairs with
    beta_i + beta_j ~ 0 are admissible only when the matching projected
    right-hand side entry vanishes; the corresponding free entries are set
    to zero (minimum-norm choice).  An incompatible near-zero pair raises
    :class:`LyapunovUnsolvableError` naming the offending eigenvalues.
    """
    B = _require_hermitian(B)
    R = np.asarray(R, dtype=complex)
    if tol_sing is None:
        tol_sing = DEFAULT_TOLERANCES.sing * max(1.0, maxabs(B))
    if compat_tol is None:
        compat_tol = 1e-8 * max(1.0, maxabs(R))
    beta, V = np.linalg.eigh(B)
    Rt = V.conj().T @ R @ V
    denom = beta[:, None] + beta[None, :]
    Xt = np.zeros_like(Rt)
    small = np.abs(denom) < tol_sing
    bad = small & (np.abs(Rt) > compat_tol)
    if np.any(bad):
        i, j = map(int, np.argwhere(bad)[0])
        raise LyapunovUnsolvableError((float(beta[i]), float(beta[j])), float(abs(Rt[i, j])))
    ok = ~small
    Xt[ok] = Rt[ok] / denom[ok]
    X = V @ Xt @ V.conj().T
    return (X + X.conj().T) / 2.0


def solve_eq27(G, sqrtB, tol_res: float | None = None) -> np.ndarray:
    """Solve G X sqrtB = G for X, allowing rank-deficient G and sqrtB.

    When sqrtB is invertible and G is nonzero the unique solution is the
    inverse of sqrtB and is returned directly.  Otherwise the equation is
    solved as a least-squares problem on the vectorized system; it counts
    as solvable only if the attained residual is small relative to |G|_F,
    else :class:`Eq27UnsolvableError` reports the residual.
    """
    G = np.asarray(G, dtype=complex)
    P = np.asarray(sqrtB, dtype=complex)
    n = G.shape[0]
    if G.shape != (n, n) or P.shape != (n, n):
        raise ValueError("G and sqrtB must be square and of equal dimension")
    if tol_res is None:
        tol_res = DEFAULT_TOLERANCES.res
    gnorm = float(np.linalg.norm(G))
    if gnorm == 0.0:
        return np.zeros_like(G)
    w = np.linalg.eigvalsh((P + P.conj().T) / 2.0)
    if w[0] > 1e-10 * max(1.0, float(w[-1])):
        wv, V = np.linalg.eigh((P + P.conj().T) / 2.0)
        return (V / wv) @ V.conj().T
    # row-major vec: vec(G F P) = kron(G, P^T) vec(F)
    A = np.kron(G, P.T)
    x, *_ = np.linalg.lstsq(A, G.ravel(), rcond=None)
    F = x.reshape(n, n)
    residual = float(np.linalg.norm(G @ F @ P - G))
    if residual > tol_res * max(1.0, gnorm):
        raise Eq27UnsolvableError(residual, tol_res * max(1.0, gnorm))
    return F
