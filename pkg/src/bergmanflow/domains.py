"""Bounded pseudoconvex domains described by defining functions, plus quadrature.

A domain is the sublevel set {phi < 0} of a user-supplied defining function.
The evaluator returns the full second-order jet of phi (value, holomorphic
gradient d(phi)/dz_i, complex Hessian phi_{i jbar}) so that curvature-type
quantities can be formed without finite differences.

Measure conventions used throughout the package:

* ``dA``   -- Lebesgue measure on C^n = R^{2n}.
* ``Lambda`` -- the canonical-pairing measure (sqrt(-1))^{n^2} dz ^ dzbar,
  equal to 2^n * dA.  Densities of canonical sections are stored against
  Lambda^{tensor m}.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.special import roots_legendre

__all__ = [
    "Domain",
    "SublevelDomain",
    "QuadratureGrid",
    "make_disc",
    "make_annulus",
    "make_ball",
    "make_hartogs_fiber",
    "levi_check",
    "build_radial_grid",
    "build_tensor_grid",
    "sublevel",
    "domain_from_json",
    "grid_to_csv",
]

PhiJet = tuple[float, np.ndarray, np.ndarray]


@dataclass(frozen=True)
class Domain:
    """Bounded domain {phi < 0} in C^n (n = 1 or 2 supported).

    ``phi`` maps a complex n-vector to (value, gradient dphi/dz_i,
    complex Hessian phi_{i jbar}).  ``radial_support`` is (r_min, r_max)
    for circular n=1 domains and enables the fast radial code paths.
    """

    n: int
    phi: Callable[[np.ndarray], PhiJet]
    bounding_box: tuple[tuple[float, float], ...]
    symmetry: str  # "circular" | "reinhardt" | "none"
    name: str
    radial_support: tuple[float, float] | None = None

    def phi_value(self, z) -> float:
        return self.phi(np.atleast_1d(np.asarray(z, dtype=complex)))[0]

    def contains(self, z) -> bool:
        return self.phi_value(z) < 0.0

    def inradius_bound(self) -> float:
        """Radius scale of the domain (exact for circular domains)."""
        if self.radial_support is not None:
            return self.radial_support[1]
        widths = [hi - lo for lo, hi in self.bounding_box]
        return 0.5 * min(widths)


@dataclass(frozen=True)
class SublevelDomain(Domain):
    """Sublevel set {phi < c} of a parent domain, with defining function phi - c."""

    parent: Domain | None = None
    level: float = 0.0


@dataclass(frozen=True)
class QuadratureGrid:
    """Nodes and positive Lebesgue weights over the interior of a domain.

    For circular n=1 domains the defining one-dimensional rule is kept in
    ``radial_nodes``/``radial_weights`` with the normalization

        integral_a^b f(r) dr  ~  sum_k radial_weights[k] * f(radial_nodes[k])

    so that integral f(|z|) dA ~ 2 pi sum_k w_k r_k f(r_k).  The 2-d ``nodes``
    are an angular-ring exposure of the same rule.
    """

    nodes: np.ndarray          # (N, n) complex
    weights: np.ndarray        # (N,) Lebesgue weights
    scheme: str                # "radial_product" | "tensor_cartesian"
    panel_counts: tuple[int, ...]
    refinement_exponent: float
    domain: Domain
    radial_nodes: np.ndarray | None = None
    radial_weights: np.ndarray | None = None

    def total_weight(self) -> float:
        return float(np.sum(self.weights))


# ---------------------------------------------------------------------------
# model domains


def make_disc(radius: float) -> Domain:
    """Disc {|z| < radius} with phi(z) = |z|^2 - radius^2."""
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    r2 = radius * radius

    def phi(z: np.ndarray) -> PhiJet:
        return (
            float(abs(z[0]) ** 2 - r2),
            np.array([np.conj(z[0])]),
            np.array([[1.0 + 0j]]),
        )

    box = ((-radius, radius), (-radius, radius))
    return Domain(1, phi, box, "circular", f"disc({radius:g})", (0.0, radius))


def make_annulus(r_in: float, r_out: float) -> Domain:
    """Annulus {r_in < |z| < r_out}, product defining function, negative inside."""
    if not (0 < r_in < r_out):
        raise ValueError(f"need 0 < r_in < r_out, got ({r_in}, {r_out})")
    a2, b2 = r_in * r_in, r_out * r_out

    def phi(z: np.ndarray) -> PhiJet:
        t = abs(z[0]) ** 2
        # phi = (t - a2)(t - b2); negative exactly on a2 < t < b2
        val = (t - a2) * (t - b2)
        dt = np.conj(z[0])  # d t / dz
        grad = np.array([(2 * t - a2 - b2) * dt])
        hess = np.array([[(2 * t - a2 - b2) + 2 * t]])
        return float(val), grad, hess.astype(complex)

    box = ((-r_out, r_out), (-r_out, r_out))
    return Domain(1, phi, box, "circular", f"annulus({r_in:g},{r_out:g})", (r_in, r_out))


def make_ball(n: int, radius: float) -> Domain:
    """Ball {|z| < radius} in C^n with phi(z) = |z|^2 - radius^2."""
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    if n not in (1, 2):
        raise ValueError("only n = 1, 2 supported")
    r2 = radius * radius

    def phi(z: np.ndarray) -> PhiJet:
        return (
            float(np.sum(np.abs(z) ** 2) - r2),
            np.conj(z),
            np.eye(n, dtype=complex),
        )

    box = tuple(((-radius, radius),) * (2 * n))
    support = (0.0, radius) if n == 1 else None
    return Domain(n, phi, box, "circular", f"ball({n},{radius:g})", support)


def make_hartogs_fiber(s: complex, profile: Callable[[complex], float]) -> Domain:
    """Fiber of a Hartogs family at parameter s: the disc of radius profile(s)."""
    rho = profile(complex(s))
    if rho <= 0:
        raise ValueError(f"profile must be positive, got {rho} at s={s}")
    d = make_disc(float(rho))
    return replace(d, name=f"hartogs_fiber(s={complex(s):g})")


# ---------------------------------------------------------------------------
# hypothesis checks


@dataclass(frozen=True)
class LeviReport:
    min_levi_eigenvalue: float
    strictly_psh: bool
    worst_point: np.ndarray


def levi_check(domain: Domain, sample_count: int, rng=None) -> LeviReport:
    """Minimum eigenvalue of the complex Hessian of phi over sampled points.

    Samples interior points uniformly from the bounding box plus points pushed
    toward the boundary along rays from the origin-side anchor.
    """
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    rng = np.random.default_rng(rng)
    lo = np.array([b[0] for b in domain.bounding_box])
    hi = np.array([b[1] for b in domain.bounding_box])
    pts = []
    while len(pts) < sample_count:
        x = rng.uniform(lo, hi)
        z = x[: domain.n] + 1j * x[domain.n :]
        if domain.phi(z)[0] < 0:
            pts.append(z)
            # companion point near the boundary on the same ray
            t = brentq_boundary_scale(domain, z)
            if t is not None:
                pts.append(0.98 * t * z)
    best = np.inf
    worst = pts[0]
    for z in pts[:sample_count * 2]:
        hess = domain.phi(np.atleast_1d(z))[2]
        lam = float(np.linalg.eigvalsh(0.5 * (hess + hess.conj().T))[0])
        if lam < best:
            best, worst = lam, z
    return LeviReport(best, best > 0, np.atleast_1d(worst))


def brentq_boundary_scale(domain: Domain, z) -> float | None:
    """Scale t > 1 with phi(t z) = 0 along the ray through z, if bracketed."""
    z = np.atleast_1d(np.asarray(z, complex))
    if np.all(z == 0) or domain.phi(z)[0] >= 0:
        return None
    f = lambda t: domain.phi(t * z)[0]
    t_hi = 1.0
    for _ in range(60):
        t_hi *= 1.25
        if f(t_hi) >= 0:
            return brentq(f, t_hi / 1.25, t_hi)
    return None


# ---------------------------------------------------------------------------
# quadrature


def _graded_breaks(a: float, b: float, panels: int, p: float, both_ends: bool) -> np.ndarray:
    t = np.linspace(0.0, 1.0, panels + 1)
    if both_ends:
        half = (1.0 - (1.0 - 2.0 * np.abs(t - 0.5)) ** p) / 2.0
        s = np.where(t < 0.5, 0.5 - half, 0.5 + half)
    else:
        s = 1.0 - (1.0 - t) ** p
    return a + (b - a) * s


def _composite_gl(a: float, b: float, panels: int, p: float, both_ends: bool, q: int):
    xg, wg = roots_legendre(q)
    brk = _graded_breaks(a, b, panels, p, both_ends)
    half = 0.5 * np.diff(brk)
    mid = 0.5 * (brk[1:] + brk[:-1])
    r = (half[:, None] * xg[None, :] + mid[:, None]).ravel()
    w = np.repeat(half, q) * np.tile(wg, panels)
    return r, w


def build_radial_grid(
    domain: Domain,
    radial_panels: int = 60,
    refinement_exponent: float = 3.0,
    points_per_panel: int = 16,
    angular_count: int = 64,
) -> QuadratureGrid:
    """Graded composite Gauss-Legendre rule for a circular n=1 domain.

    Panels cluster geometrically toward each boundary circle via the map
    r = 1 - (1-t)^p.  The 2-d node exposure places ``angular_count``
    equispaced angles on each radius ring.
    """
    if domain.symmetry != "circular" or domain.n != 1 or domain.radial_support is None:
        raise ValueError("build_radial_grid requires a circular n=1 domain")
    if radial_panels < 4:
        raise ValueError("radial_panels must be >= 4")
    r_in, r_out = domain.radial_support
    r, w = _composite_gl(
        r_in, r_out, radial_panels, refinement_exponent, both_ends=r_in > 0,
        q=points_per_panel,
    )
    theta = 2 * np.pi * np.arange(angular_count) / angular_count
    nodes = (r[:, None] * np.exp(1j * theta)[None, :]).ravel()[:, None]
    # Lebesgue weight of each 2-d node: (2 pi / n_ang) * w_k * r_k
    wn = np.repeat(2 * np.pi * w * r / angular_count, angular_count)
    return QuadratureGrid(
        nodes=nodes,
        weights=wn,
        scheme="radial_product",
        panel_counts=(radial_panels, angular_count),
        refinement_exponent=refinement_exponent,
        domain=domain,
        radial_nodes=r,
        radial_weights=w,
    )


def build_tensor_grid(domain: Domain, panels_per_axis: int) -> QuadratureGrid:
    """Midpoint tensor rule over the bounding box, filtered to phi < 0."""
    axes = []
    for lo, hi in domain.bounding_box:
        if not (np.isfinite(lo) and np.isfinite(hi)):
            raise ValueError("bounding_box must be finite")
        h = (hi - lo) / panels_per_axis
        axes.append(lo + h * (np.arange(panels_per_axis) + 0.5))
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    z = pts[:, : domain.n] + 1j * pts[:, domain.n :]
    vals = np.array([domain.phi(zz)[0] for zz in z])
    keep = vals < 0
    if not np.any(keep):
        raise ValueError("tensor grid has no interior nodes (domain/box mismatch)")
    cell = np.prod([(hi - lo) / panels_per_axis for lo, hi in domain.bounding_box])
    return QuadratureGrid(
        nodes=z[keep],
        weights=np.full(int(keep.sum()), cell),
        scheme="tensor_cartesian",
        panel_counts=(panels_per_axis,) * (2 * domain.n),
        refinement_exponent=0.0,
        domain=domain,
    )


# ---------------------------------------------------------------------------
# sublevel sets


def sublevel(domain: Domain, c: float) -> SublevelDomain:
    """Sublevel domain {phi < c}, with defining function phi - c."""
    parent_phi = domain.phi

    def phi(z: np.ndarray) -> PhiJet:
        v, g, h = parent_phi(z)
        return v - c, g, h

    support = None
    if domain.radial_support is not None:
        support = _radial_support_of_sublevel(domain, c)
        if support is None:
            raise ValueError(f"sublevel set {{phi < {c}}} is empty")
    elif c <= _min_phi_estimate(domain):
        raise ValueError(f"sublevel set {{phi < {c}}} is empty")
    return SublevelDomain(
        n=domain.n,
        phi=phi,
        bounding_box=domain.bounding_box,
        symmetry=domain.symmetry,
        name=f"{domain.name}|phi<{c:g}",
        radial_support=support,
        parent=domain,
        level=c,
    )


def _radial_support_of_sublevel(domain: Domain, c: float):
    r_in, r_out = domain.radial_support
    f = lambda r: domain.phi(np.array([r + 0j]))[0] - c
    rs = np.linspace(r_in, r_out, 4097)
    vals = np.array([f(r) for r in rs])
    inside = vals < 0
    if not inside.any():
        return None
    i0, i1 = np.nonzero(inside)[0][[0, -1]]
    lo = r_in if i0 == 0 else brentq(f, rs[i0 - 1], rs[i0])
    hi = r_out if i1 == len(rs) - 1 else brentq(f, rs[i1], rs[i1 + 1])
    return (float(lo), float(hi))


def _min_phi_estimate(domain: Domain, samples: int = 2048) -> float:
    rng = np.random.default_rng(0)
    lo = np.array([b[0] for b in domain.bounding_box])
    hi = np.array([b[1] for b in domain.bounding_box])
    x = rng.uniform(lo, hi, size=(samples, len(lo)))
    z = x[:, : domain.n] + 1j * x[:, domain.n :]
    return min(domain.phi(zz)[0] for zz in z)


# ---------------------------------------------------------------------------
# serialization


def domain_from_json(text: str | dict) -> Domain:
    """Construct a model domain from {"kind": ..., parameters...}."""
    spec = json.loads(text) if isinstance(text, str) else dict(text)
    kind = spec.pop("kind", None)
    try:
        if kind == "disc":
            return make_disc(float(spec["radius"]))
        if kind == "annulus":
            return make_annulus(float(spec["r_in"]), float(spec["r_out"]))
        if kind == "ball":
            return make_ball(int(spec.get("n", 2)), float(spec["radius"]))
        if kind == "hartogs":
            from .family import named_profile

            prof = named_profile(spec["profile"])
            return make_hartogs_fiber(complex(spec.get("s", 0)), prof)
    except KeyError as exc:
        raise ValueError(f"missing domain parameter {exc} for kind {kind!r}") from exc
    raise ValueError(f"unknown domain kind {kind!r}")


def grid_to_csv(grid: QuadratureGrid, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        coords = [f"node_{ax}{i+1}" for i in range(grid.nodes.shape[1]) for ax in ("re", "im")]
        writer.writerow(coords + ["weight"])
        for z, w in zip(grid.nodes, grid.weights):
            row = []
            for zi in z:
                row += [repr(float(zi.real)), repr(float(zi.imag))]
            writer.writerow(row + [repr(float(w))])
