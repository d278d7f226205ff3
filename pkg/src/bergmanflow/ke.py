"""Kahler-Einstein reference volume forms and the defining-function model metric.

Normalization: -Ric(omega) = omega with omega = (sqrt(-1)/2) sum g_{i jbar}
dz_i ^ dzbar_j, dV = omega^n / n!.  With this convention the Einstein
condition in density form reads det(2 dd^bar u) = e^u for u = log of the
Lebesgue density of dV, which is how every closed form below was derived and
how the residual check operates.

Closed forms (Lebesgue densities):

* disc radius R:      4 R^2 / (R^2 - |z|^2)^2          (curvature -1 Poincare)
* annulus (a, b):     (pi/L)^2 / (|z| sin(pi log(|z|/a)/L))^2, L = log(b/a)
                      (pullback of the hyperbolic strip through w = log z)
* ball in C^n:        (2(n+1))^n R^2 / (R^2 - |z|^2)^{n+1}

Fields store log densities against Lambda = 2^n * Lebesgue, consistent with
the kernel fields.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .domains import Domain, SublevelDomain
from .fd import complex_hessian

__all__ = [
    "VolumeFormField",
    "ModelMetricField",
    "ke_disc",
    "ke_annulus",
    "ke_ball",
    "model_metric_volume",
    "quasi_isometry_ratio",
    "exhaustion_limit",
    "yau_schwarz_check",
    "einstein_residual",
    "ke_reference_for",
]

LOG2 = math.log(2.0)


@dataclass(frozen=True)
class VolumeFormField:
    """Log density of a volume form against Lambda = 2^n Lebesgue on a node set."""

    nodes: np.ndarray
    log_density: np.ndarray
    provenance: str
    n: int = 1

    def lebesgue_density(self) -> np.ndarray:
        return np.exp(self.log_density + self.n * LOG2)


def _radii(nodes) -> np.ndarray:
    nodes = np.asarray(nodes)
    if nodes.ndim == 2:
        return np.sqrt(np.sum(np.abs(nodes) ** 2, axis=1))
    return np.abs(nodes)


def ke_disc(radius: float, nodes) -> VolumeFormField:
    """Einstein density of the disc: Lebesgue 4R^2/(R^2-|z|^2)^2, halved for Lambda."""
    r = _radii(nodes)
    if np.any(r >= radius):
        raise ValueError("node outside the disc")
    leb = 4.0 * radius**2 / (radius**2 - r**2) ** 2
    return VolumeFormField(np.asarray(nodes), np.log(leb) - LOG2, "disc_closed_form", 1)


def ke_annulus(r_in: float, r_out: float, nodes) -> VolumeFormField:
    """Hyperbolic (curvature -1) density of the annulus via strip uniformization."""
    r = _radii(nodes)
    if np.any((r <= r_in) | (r >= r_out)):
        raise ValueError("node outside the annulus")
    L = math.log(r_out / r_in)
    u = np.log(r / r_in)
    leb = (math.pi / L) ** 2 / (r * np.sin(math.pi * u / L)) ** 2
    return VolumeFormField(np.asarray(nodes), np.log(leb) - LOG2, "annulus_closed_form", 1)


def ke_ball(n: int, radius: float, nodes) -> VolumeFormField:
    """Einstein density of the ball: Lebesgue (2(n+1))^n R^2/(R^2-|z|^2)^{n+1}."""
    nodes = np.atleast_2d(np.asarray(nodes, complex))
    r = _radii(nodes)
    if np.any(r >= radius):
        raise ValueError("node outside the ball")
    leb = (2.0 * (n + 1)) ** n * radius**2 / (radius**2 - r**2) ** (n + 1)
    return VolumeFormField(nodes, np.log(leb) - n * LOG2, "ball_closed_form", n)


@dataclass(frozen=True)
class ModelMetricField:
    """Metric data of omega = sqrt(-1) dd^bar(-log(-phi)) at interior nodes.

    ``log_det_g`` is log det of the coefficient matrix H_{i jbar} =
    d^2(-log(-phi))/dz_i dzbar_j, evaluated through the determinant identity

        det H = (-1/phi)^{n+1} det(phi_{i jbar}) (-phi + |dphi|^2),

    where |dphi|^2 is the gradient norm in the inverse complex Hessian of phi
    (the convention that makes the identity exact; cross-checked against
    finite differences of -log(-phi)).  The Lambda-convention volume density
    of omega^n/n! equals det H.
    """

    nodes: np.ndarray
    log_det_g: np.ndarray
    components: np.ndarray  # (N, n, n) hermitian matrices H
    breakdown: np.ndarray   # nodes where -phi + |dphi|^2 <= 0
    n: int = 1

    def as_volume_form(self) -> VolumeFormField:
        return VolumeFormField(self.nodes, self.log_det_g, "model_metric", self.n)


def model_metric_volume(domain: Domain, nodes) -> ModelMetricField:
    nodes_arr = np.atleast_2d(np.asarray(nodes, complex))
    if nodes_arr.shape[1] != domain.n:
        nodes_arr = nodes_arr.reshape(-1, domain.n)
    N = len(nodes_arr)
    logdet = np.empty(N)
    comps = np.empty((N, domain.n, domain.n), complex)
    broken = np.zeros(N, bool)
    for i, z in enumerate(nodes_arr):
        v, g, h = domain.phi(z)
        if v >= 0:
            raise ValueError(f"node {z} not interior")
        grad_norm2 = float(np.real(np.conj(g) @ np.linalg.solve(h, g)))
        factor = -v + grad_norm2
        if factor <= 0:
            broken[i] = True
            logdet[i] = np.nan
        else:
            sign, ld = np.linalg.slogdet(h)
            logdet[i] = (domain.n + 1) * math.log(-1.0 / v) + ld + math.log(factor)
            if sign.real <= 0:
                broken[i] = True
        # H = phi_hess/(-phi) + grad gradbar / phi^2
        comps[i] = h / (-v) + np.outer(g, np.conj(g)) / v**2
    return ModelMetricField(nodes_arr, logdet, comps, broken, domain.n)


@dataclass(frozen=True)
class QuasiIsometryReport:
    min_ratio: float
    max_ratio: float


def quasi_isometry_ratio(model: ModelMetricField, reference: VolumeFormField) -> QuasiIsometryReport:
    """Extremes of (model volume density) / (reference density) over shared nodes."""
    if len(model.log_det_g) != len(reference.log_density):
        raise ValueError("model and reference fields live on different node sets")
    diff = np.exp(model.log_det_g - reference.log_density)
    return QuasiIsometryReport(float(np.min(diff)), float(np.max(diff)))


def ke_reference_for(domain: Domain, nodes) -> VolumeFormField:
    """Closed-form KE density for a model domain (disc/annulus/ball or sublevels)."""
    if isinstance(domain, SublevelDomain) and domain.n == 1 and domain.radial_support is not None:
        r_in, r_out = domain.radial_support
        if r_in == 0:
            return ke_disc(r_out, nodes)
        return ke_annulus(r_in, r_out, nodes)
    if domain.n == 1 and domain.radial_support is not None:
        r_in, r_out = domain.radial_support
        return ke_disc(r_out, nodes) if r_in == 0 else ke_annulus(r_in, r_out, nodes)
    if domain.name.startswith("ball("):
        radius = domain.radial_support[1] if domain.radial_support else math.sqrt(
            -domain.phi(np.zeros(domain.n, complex))[0]
        )
        return ke_ball(domain.n, radius, nodes)
    raise ValueError(f"no closed-form KE reference for domain {domain.name}")


@dataclass(frozen=True)
class ExhaustionResult:
    c_values: np.ndarray
    densities: np.ndarray      # Lambda-convention densities at the point
    limit_estimate: float
    cauchy_gap: float


def exhaustion_limit(
    family: Callable[[float], Domain],
    point,
    c_values: Sequence[float],
    ke_density: Callable[[Domain, np.ndarray], float] | None = None,
    monotone_tol: float = 1e-10,
) -> ExhaustionResult:
    """Densities of the sublevel KE forms at a point along an exhausting family.

    The sequence must be monotone decreasing (larger domain, smaller density);
    a violation beyond ``monotone_tol`` flags an implementation bug.
    """
    c_values = np.asarray(sorted(c_values), dtype=float)
    pt = np.atleast_1d(np.asarray(point, complex))
    dens = []
    for c in c_values:
        dom = family(c)
        if ke_density is not None:
            dens.append(float(ke_density(dom, pt)))
        else:
            dens.append(float(np.exp(ke_reference_for(dom, pt[None, :] if dom.n > 1 else pt).log_density[0])))
    dens = np.array(dens)
    bad = np.diff(dens) > monotone_tol
    if bad.any():
        i = int(np.nonzero(bad)[0][0])
        raise RuntimeError(
            f"exhaustion densities not monotone decreasing at c={c_values[i+1]:g}: "
            f"{dens[i]:.12g} -> {dens[i+1]:.12g}"
        )
    gap = abs(dens[-1] - dens[-2]) if len(dens) > 1 else float("nan")
    return ExhaustionResult(c_values, dens, float(dens[-1]), gap)


@dataclass(frozen=True)
class MonotonicityReport:
    ok: bool
    worst_violation: float
    worst_node: np.ndarray | None


def yau_schwarz_check(
    dV_small_domain: VolumeFormField,
    dV_large_domain: VolumeFormField,
    tol: float = 1e-10,
) -> MonotonicityReport:
    """Domain inclusion reverses the pointwise order of KE densities.

    Verifies density(larger) <= density(smaller) at the shared nodes.
    """
    if len(dV_small_domain.log_density) != len(dV_large_domain.log_density):
        raise ValueError("fields live on different node sets")
    small = np.exp(dV_small_domain.log_density)
    large = np.exp(dV_large_domain.log_density)
    viol = large - small
    worst = float(np.max(viol))
    if worst > tol:
        i = int(np.argmax(viol))
        return MonotonicityReport(False, worst, np.atleast_1d(dV_small_domain.nodes)[i])
    return MonotonicityReport(True, worst, None)


def einstein_residual(
    log_lebesgue_density: Callable[[np.ndarray], float],
    points: Sequence,
    h: float = 1e-3,
) -> float:
    """Max |det(2 dd^bar u) e^{-u} - 1| over points, u = log Lebesgue density.

    This is the discretized form of -Ric(omega) = omega for the metric
    g = 2 dd^bar u induced by the density itself.
    """
    worst = 0.0
    for z in points:
        z = np.atleast_1d(np.asarray(z, complex))
        H = complex_hessian(log_lebesgue_density, z, h)
        det = float(np.real(np.linalg.det(2.0 * H)))
        u = log_lebesgue_density(z)
        worst = max(worst, abs(det * math.exp(-u) - 1.0))
    return worst
