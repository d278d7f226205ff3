"""Weighted Bergman kernel diagonals from finite section bases.

Sections of the m-th canonical power are f(z) (dz_1 ^ ... ^ dz_n)^{tensor m}
with f polynomial (Laurent polynomial on annuli).  All densities are stored
in log form against Lambda^{tensor m}, Lambda = 2^n * Lebesgue, which makes
the canonical inner product exactly  integral f gbar e^{-W} dLambda  for a
twist-(m-1) log-weight W.

Two code paths compute the kernel diagonal:

* circular fast path -- for circular n=1 domains with rotation-invariant
  weights the Gram matrix is diagonal per monomial frequency and everything
  reduces to one-dimensional radial integrals in log-sum-exp arithmetic;
* general path -- full hermitian Gram matrix with a Cholesky factor and a
  condition-number guard at 1e12.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from itertools import combinations_with_replacement

import numpy as np
from scipy.linalg import cholesky, solve_triangular
from scipy.special import logsumexp

from .domains import Domain, QuadratureGrid

__all__ = [
    "SectionBasis",
    "LogDensityField",
    "GramSystem",
    "GramConditionError",
    "monomial_basis",
    "laurent_basis",
    "assemble_gram",
    "kernel_diagonal",
    "weighted_disc_kernel_closed_form",
    "extremal_check",
    "field_to_csv",
]

CONDITION_GUARD = 1e12


class GramConditionError(RuntimeError):
    """Gram matrix not positive definite at working precision."""

    def __init__(self, message: str, condition_estimate: float):
        super().__init__(message)
        self.condition_estimate = condition_estimate


@dataclass(frozen=True)
class SectionBasis:
    """Finite monomial basis for sections of the twist-m canonical power.

    ``exponents`` is a tuple of integer multi-indices; one-variable Laurent
    bases (negative exponents, for multiply connected circular domains) are
    allowed and flagged by ``laurent``.
    """

    twist: int
    exponents: tuple[tuple[int, ...], ...]
    degree: int
    laurent: bool = False

    @property
    def n(self) -> int:
        return len(self.exponents[0])

    def __len__(self) -> int:
        return len(self.exponents)

    def evaluate_log_abs2(self, z: np.ndarray) -> np.ndarray:
        """log |z^alpha|^2 for every alpha; -inf where a monomial vanishes."""
        z = np.atleast_1d(z)
        with np.errstate(divide="ignore"):
            l2 = 2.0 * np.log(np.abs(z))
        exps = np.array(self.exponents)
        out = np.full(len(self.exponents), -np.inf)
        for i, a in enumerate(exps):
            t = 0.0
            ok = True
            for j, aj in enumerate(a):
                if aj == 0:
                    continue
                if np.isneginf(l2[j]) and aj > 0:
                    ok = False
                    break
                t += aj * l2[j]
            out[i] = t if ok else -np.inf
        return out

    def evaluate(self, z: np.ndarray) -> np.ndarray:
        """Monomial values z^alpha as a complex vector."""
        z = np.atleast_1d(z)
        return np.array([np.prod(z ** np.array(a)) for a in self.exponents])


def monomial_basis(n: int, twist: int, degree: int) -> SectionBasis:
    """All multi-indices of total degree <= degree in n variables."""
    if degree < 0:
        raise ValueError("degree must be >= 0")
    exps = []
    for total in range(degree + 1):
        for c in combinations_with_replacement(range(n), total):
            a = [0] * n
            for j in c:
                a[j] += 1
            exps.append(tuple(a))
    exps.sort()
    return SectionBasis(twist, tuple(exps), degree)


def laurent_basis(twist: int, degree: int) -> SectionBasis:
    """One-variable Laurent monomials z^k, -degree <= k <= degree."""
    if degree < 0:
        raise ValueError("degree must be >= 0")
    exps = tuple((k,) for k in range(-degree, degree + 1))
    return SectionBasis(twist, exps, degree, laurent=True)


@dataclass(frozen=True)
class LogDensityField:
    """Log of a twist-m canonical density against Lambda^{tensor m} on a node set.

    ``radial`` marks fields stored on the 1-d radial node set of a circular
    domain (nodes are then real radii embedded as complex numbers).
    """

    twist: int
    nodes: np.ndarray
    log_values: np.ndarray
    radial: bool = False

    @staticmethod
    def constant(twist: int, nodes: np.ndarray, value: float = 0.0, radial: bool = False):
        return LogDensityField(twist, nodes, np.full(len(nodes), float(value)), radial)


@dataclass(frozen=True)
class GramSystem:
    """Weighted Gram system G_{ab} = integral z^a zbar^b e^{-W} dLambda.

    Circular systems store only the diagonal in log form (``log_diag``).
    General systems store the hermitian matrix, its upper Cholesky factor and
    the log-weight scale factored out before accumulation.
    """

    basis: SectionBasis
    grid: QuadratureGrid
    circular: bool
    log_diag: np.ndarray | None = None
    matrix: np.ndarray | None = None
    chol_upper: np.ndarray | None = None
    log_scale: float = 0.0
    condition_estimate: float = 1.0


def _is_radial_weight(weight: LogDensityField, grid: QuadratureGrid) -> bool:
    return weight.radial and grid.radial_nodes is not None and len(weight.log_values) == len(grid.radial_nodes)


def assemble_gram(basis: SectionBasis, weight: LogDensityField, grid: QuadratureGrid) -> GramSystem:
    """Assemble the Gram system of ``basis`` against exp(-weight) * Lambda.

    ``weight`` must be the twist-(basis.twist - 1) log-density on the grid's
    node set (radial node set for the circular fast path).
    """
    if weight.twist != basis.twist - 1:
        raise ValueError(
            f"weight twist {weight.twist} incompatible with basis twist {basis.twist}"
        )
    domain = grid.domain
    if domain.n == 1 and domain.symmetry == "circular" and _is_radial_weight(weight, grid):
        return _assemble_gram_radial(basis, weight, grid)
    return _assemble_gram_general(basis, weight, grid)


def _assemble_gram_radial(basis: SectionBasis, weight: LogDensityField, grid: QuadratureGrid) -> GramSystem:
    r = grid.radial_nodes
    w = grid.radial_weights
    ks = np.array([a[0] for a in basis.exponents])
    # G_kk = 2 * 2pi * integral r^{2k+1} e^{-W} dr   (Lambda = 2 * Lebesgue)
    base = np.log(4.0 * np.pi * w * r) - weight.log_values
    log_diag = logsumexp(base[None, :] + 2.0 * ks[:, None] * np.log(r)[None, :], axis=1)
    with np.errstate(over="ignore"):
        cond = float(np.exp(log_diag.max() - log_diag.min()))
    return GramSystem(basis, grid, circular=True, log_diag=log_diag, condition_estimate=cond)


def _assemble_gram_general(basis: SectionBasis, weight: LogDensityField, grid: QuadratureGrid) -> GramSystem:
    if len(weight.log_values) != len(grid.nodes):
        raise ValueError("weight nodes must coincide with grid nodes")
    n = grid.domain.n
    # factor the largest log integrand scale out before accumulating
    log_meas = np.log(grid.weights) + n * math.log(2.0) - weight.log_values
    scale = float(np.max(log_meas))
    V = np.array([basis.evaluate(z) for z in grid.nodes])  # (N, K)
    G = (V.conj() * np.exp(log_meas - scale)[:, None]).T @ V
    G = 0.5 * (G + G.conj().T)
    cond = float(np.linalg.cond(G))
    if cond > CONDITION_GUARD:
        raise GramConditionError(
            f"Gram condition estimate {cond:.3e} exceeds guard {CONDITION_GUARD:.0e}; "
            "quadrature under-resolved or degree too high for working precision",
            cond,
        )
    try:
        U = cholesky(G, lower=False)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - guarded above
        raise GramConditionError(f"Gram not positive definite: {exc}", cond) from exc
    return GramSystem(
        basis, grid, circular=False, matrix=G, chol_upper=U,
        log_scale=scale, condition_estimate=cond,
    )


def kernel_diagonal(gram: GramSystem, eval_points: np.ndarray, check_interior: bool = True) -> LogDensityField:
    """log kappa(z) = log( b(z)* G^{-1} b(z) ) at the given points.

    For circular systems ``eval_points`` may be an array of radii (real
    floats), in which case the result is a radial field.
    """
    pts = np.asarray(eval_points)
    radial = gram.circular and not np.iscomplexobj(pts)
    if gram.circular:
        radii = np.abs(pts.ravel()) if not radial else pts.astype(float)
        ks = np.array([a[0] for a in gram.basis.exponents])
        logr = np.log(np.maximum(radii, 1e-300))  # clamp keeps the k=0 term at z=0
        terms = 2.0 * ks[:, None] * logr[None, :] - gram.log_diag[:, None]
        vals = logsumexp(terms, axis=0)
        nodes = pts.ravel().astype(complex)
    else:
        zs = np.atleast_2d(pts)
        vals = np.empty(len(zs))
        for i, z in enumerate(zs):
            b = gram.basis.evaluate(z)
            y = solve_triangular(gram.chol_upper, b, trans="C", lower=False)
            q = float(np.vdot(y, y).real)
            vals[i] = -np.inf if q == 0.0 else math.log(q) - gram.log_scale
        nodes = zs[:, 0] if zs.shape[1] == 1 else zs
    if check_interior and not gram.circular:
        for z in np.atleast_2d(pts):
            if gram.grid.domain.phi(np.atleast_1d(z))[0] >= 0:
                raise ValueError(f"evaluation point {z} is not interior")
    return LogDensityField(gram.basis.twist, np.asarray(nodes), vals, radial=radial)


def weighted_disc_kernel_closed_form(s: float, z: complex, scale: float = 1.0) -> float:
    """Reproducing kernel diagonal for the measure scale * (1-|z|^2)^s * dA on the unit disc.

    Classical orthonormalization of the monomials gives
    (1/scale) * ((s+1)/pi) * (1-|z|^2)^{-(s+2)}.
    """
    if s < 0:
        raise ValueError("s must be nonnegative")
    if scale <= 0:
        raise ValueError("scale must be positive")
    a = abs(z)
    if a >= 1:
        raise ValueError(f"|z| must be < 1, got {a}")
    return (s + 1.0) / (math.pi * scale) * (1.0 - a * a) ** (-(s + 2.0))


@dataclass(frozen=True)
class ExtremalReport:
    max_ratio: float
    optimal_ratio: float
    trials: int


def extremal_check(gram: GramSystem, point, trials: int = 1000, rng=None) -> ExtremalReport:
    """Monte-Carlo check of the extremal property sup |sigma(z)|^2 / ||sigma||^2 = kappa(z).

    Random coefficient vectors are normalized in the Gram norm; the ratio
    |sigma(z)|^2 / kappa(z) must stay <= 1, and the Gram-optimal section
    achieves ratio 1.
    """
    rng = np.random.default_rng(rng)
    z = np.atleast_1d(np.asarray(point, complex))
    if gram.circular:
        log_kappa = kernel_diagonal(gram, np.array([abs(z[0])])).log_values[0]
        b = gram.basis.evaluate(z)
        gdiag = np.exp(gram.log_diag - np.max(gram.log_diag))
        scale = np.exp(np.max(gram.log_diag))

        def ratio(c):
            norm2 = float(np.sum(np.abs(c) ** 2 * gdiag)) * scale
            if norm2 == 0.0:
                raise ValueError("zero section has no extremal ratio")
            val2 = abs(np.dot(c, b)) ** 2
            return val2 / norm2 / math.exp(log_kappa)

        copt = np.conj(b) / np.exp(gram.log_diag)
    else:
        log_kappa = kernel_diagonal(gram, z[None, :]).log_values[0]
        b = gram.basis.evaluate(z)
        G = gram.matrix
        scale = math.exp(gram.log_scale)

        def ratio(c):
            norm2 = float(np.real(np.vdot(c, G @ c))) * scale
            if norm2 == 0.0:
                raise ValueError("zero section has no extremal ratio")
            return abs(np.dot(c, b)) ** 2 / norm2 / math.exp(log_kappa)

        copt = np.linalg.solve(G, np.conj(b)) / scale
    k = len(gram.basis)
    best = 0.0
    for _ in range(trials):
        c = rng.standard_normal(k) + 1j * rng.standard_normal(k)
        best = max(best, ratio(c))
    return ExtremalReport(best, ratio(copt), trials)


def field_to_csv(field: LogDensityField, path, header_comment: str | None = None) -> None:
    with open(path, "w", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        writer = csv.writer(fh)
        nd = np.atleast_2d(field.nodes.astype(complex).reshape(len(field.log_values), -1))
        coords = [f"node_{ax}{i+1}" for i in range(nd.shape[1]) for ax in ("re", "im")]
        writer.writerow(coords + ["log_value"])
        for z, v in zip(nd, field.log_values):
            row = []
            for zi in z:
                row += [repr(float(zi.real)), repr(float(zi.imag))]
            writer.writerow(row + [repr(float(v))])
