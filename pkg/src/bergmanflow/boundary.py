"""Leading boundary singularity of the Bergman kernel.

For a strongly pseudoconvex domain the kernel (in the function/Lebesgue
convention) blows up like |r|^{-(n+1)} (c_n + o(1)) along a defining function
r normalized so that the bordered Monge-Ampere determinant J[r] equals 1 at
the boundary, with c_n = n!/pi^n.  This module evaluates J[r], fits the
leading coefficient and exponent from kernel samples along an interior path,
and documents the sign convention: paths carry r < 0 (interior values of a
defining function negative inside) and the fit is against log|r|.

Kernel inputs here are Lebesgue-convention densities; Lambda-convention
fields convert by the constant factor 2^n (see ``lambda_to_lebesgue_log``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .domains import Domain

__all__ = [
    "FeffermanFit",
    "j_functional",
    "fit_boundary_coefficient",
    "boundary_coefficient",
    "lambda_to_lebesgue_log",
]


def lambda_to_lebesgue_log(log_lambda_density: np.ndarray, n: int) -> np.ndarray:
    """Convert a Lambda-convention log density to the Lebesgue/function convention."""
    return np.asarray(log_lambda_density) + n * math.log(2.0)


def boundary_coefficient(n: int) -> float:
    """The universal leading coefficient n!/pi^n of the kernel blow-up."""
    return math.factorial(n) / math.pi**n


def j_functional(r_jet: Callable[[np.ndarray], tuple], point) -> float:
    """Bordered Monge-Ampere determinant of a defining function at a point.

    ``r_jet`` returns (r, dr/dz_j, d^2 r/dz_j dzbar_k); the functional is
    (-1)^n det [[r, dr/dz_j], [dr/dzbar_k, d^2 r/dz_j dzbar_k]].
    """
    z = np.atleast_1d(np.asarray(point, complex))
    r, grad, hess = r_jet(z)
    n = len(grad)
    M = np.empty((n + 1, n + 1), complex)
    M[0, 0] = r
    M[0, 1:] = grad                      # row: dr/dz_j
    M[1:, 0] = np.conj(grad)             # column: dr/dzbar_k
    M[1:, 1:] = np.asarray(hess).T       # entry (k, j): d^2 r/dz_j dzbar_k
    return float(np.real((-1) ** n * np.linalg.det(M)))


def domain_r_jet(domain: Domain) -> Callable:
    """Jet of r = -phi (positive inside), for J-functional evaluation."""

    def jet(z):
        v, g, h = domain.phi(np.atleast_1d(np.asarray(z, complex)))
        return -v, -g, -np.asarray(h)

    return jet


@dataclass(frozen=True)
class FeffermanFit:
    path: np.ndarray            # interior points approaching the boundary
    kernel_values: np.ndarray   # Lebesgue-convention kernel densities
    r_values: np.ndarray        # defining function values (negative interior)
    fitted_coefficient: float
    fitted_exponent: float
    residuals: np.ndarray
    monotone: bool


def fit_boundary_coefficient(
    log_kernel_lebesgue: np.ndarray,
    r_values: np.ndarray,
    path: Sequence | None = None,
) -> FeffermanFit:
    """Least-squares fit log K = exponent * log|r| + log c along a boundary path.

    ``r_values`` must be negative (interior) and increase toward 0 along the
    path; a non-monotone kernel along the path signals an under-resolved
    kernel and is flagged rather than fitted silently.
    """
    logK = np.asarray(log_kernel_lebesgue, dtype=float)
    r = np.asarray(r_values, dtype=float)
    if np.any(r >= 0):
        raise ValueError("r_values must be negative (interior points)")
    order = np.argsort(r)  # toward the boundary means r increasing to 0
    monotone = bool(np.all(np.diff(logK[order]) > 0))
    x = np.log(np.abs(r))
    A = np.stack([x, np.ones_like(x)], axis=1)
    coef, *_ = np.linalg.lstsq(A, logK, rcond=None)
    exponent, logc = float(coef[0]), float(coef[1])
    resid = logK - (exponent * x + logc)
    pts = np.asarray(path) if path is not None else np.full(len(r), np.nan)
    return FeffermanFit(
        pts, np.exp(logK), r, math.exp(logc), exponent, resid, monotone
    )
