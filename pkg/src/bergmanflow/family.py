"""Fibered (Hartogs) domains over a parameter disc and plurisubharmonicity tests.

A Hartogs family has fiber {|z| < rho(s)} over the parameter s.  The total
space is pseudoconvex exactly when -log rho is subharmonic, which holds in
particular for rho = |f| with f holomorphic and nonvanishing.  Fiberwise
kernel iterates and Kahler-Einstein densities of such families have
plurisubharmonic logarithms in (z, s) jointly; the module checks this with
finite-difference complex Hessians and ships a non-pseudoconvex control
profile for which the check must fail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .domains import Domain, build_radial_grid, make_disc
from .engine import LogDensityField
from .fd import complex_hessian
from .flow import IterationState, evaluate_log_kappa, init_state, step

__all__ = [
    "FiberedDomain",
    "RelativeLogDensity",
    "PshReport",
    "hartogs_family",
    "named_profile",
    "fiber_kernels",
    "fiber_ke_log_density",
    "psh_test",
]


# Named radius profiles.  "exp_re" and "abs_affine" are |f| for holomorphic
# nonvanishing f (pseudoconvex total space); "bulge" grows like 1 + |s|^2/2,
# so -log rho is strictly superharmonic at 0 and the total space is NOT
# pseudoconvex -- it is the documented negative control.
_PROFILES: dict[str, tuple[Callable[[complex], float], str, bool]] = {
    "exp_re": (lambda s: math.exp(s.real), "rho = |exp(s)|, log rho harmonic", True),
    "abs_affine": (lambda s: abs(1 + s / 2), "rho = |1 + s/2|, log rho harmonic off the zero", True),
    "bulge": (lambda s: 1.0 + abs(s) ** 2 / 2, "rho = 1 + |s|^2/2, -log rho superharmonic: not pseudoconvex", False),
}


def named_profile(name: str) -> Callable[[complex], float]:
    try:
        return _PROFILES[name][0]
    except KeyError:
        raise ValueError(f"unknown profile {name!r}; known: {sorted(_PROFILES)}") from None


@dataclass(frozen=True)
class FiberedDomain:
    """Disc fibers of radius profile(s) over parameter nodes in a disc."""

    profile: Callable[[complex], float]
    parameter_nodes: tuple[complex, ...]
    certificate: str
    pseudoconvex: bool

    def fiber(self, s: complex) -> Domain:
        return make_disc(self.profile(complex(s)))


def hartogs_family(
    profile: str | Callable[[complex], float],
    parameter_nodes: Sequence[complex],
    certificate: str | None = None,
    pseudoconvex: bool | None = None,
) -> FiberedDomain:
    if isinstance(profile, str):
        fn, cert, pc = _PROFILES[profile]
    else:
        fn, cert, pc = profile, certificate or "user profile", bool(pseudoconvex)
    if certificate is not None:
        cert = certificate
    if pseudoconvex is not None:
        pc = pseudoconvex
    nodes = tuple(complex(s) for s in parameter_nodes)
    for s in nodes:
        if fn(s) <= 0:
            raise ValueError(f"profile not positive at s={s}")
    return FiberedDomain(fn, nodes, cert, pc)


@dataclass(frozen=True)
class RelativeLogDensity:
    """A fiberwise log density on (z, s) nodes, with an off-grid evaluator."""

    twist: int
    zs_nodes: np.ndarray          # (N, 2) complex: columns (z, s)
    log_values: np.ndarray
    evaluator: Callable[[complex, complex], float]


class _FiberCache:
    """Per-parameter iteration states, keyed by the exact parameter value."""

    def __init__(self, family: FiberedDomain, m: int,
                 degree_schedule=None, radial_panels=30, points_per_panel=10):
        self.family = family
        self.m = m
        self.degree_schedule = degree_schedule
        self.radial_panels = radial_panels
        self.points_per_panel = points_per_panel
        self._states: dict[complex, IterationState] = {}

    def state(self, s: complex) -> IterationState:
        s = complex(s)
        if s not in self._states:
            dom = self.family.fiber(s)
            grid = build_radial_grid(
                dom, radial_panels=self.radial_panels,
                points_per_panel=self.points_per_panel, angular_count=8,
            )
            st = init_state(dom, grid, self.degree_schedule)
            for _ in range(self.m - 1):
                st = step(st)
            self._states[s] = st
        return self._states[s]

    def log_kappa(self, z: complex, s: complex) -> float:
        st = self.state(s)
        rho = self.family.profile(complex(s))
        if abs(z) >= rho:
            raise ValueError(f"|z|={abs(z)} outside fiber of radius {rho}")
        return float(evaluate_log_kappa(st, np.array([abs(z)]))[0])


def fiber_kernels(
    family: FiberedDomain,
    m: int,
    zs_grid: Sequence[tuple[complex, complex]],
    degree_schedule=None,
) -> RelativeLogDensity:
    """Run the kernel iteration to step m on each fiber and sample log kappa_{m,s}."""
    cache = _FiberCache(family, m, degree_schedule)
    nodes = np.array([(complex(z), complex(s)) for z, s in zs_grid])
    vals = np.array([cache.log_kappa(z, s) for z, s in nodes])
    return RelativeLogDensity(m, nodes, vals, cache.log_kappa)


def fiber_ke_log_density(family: FiberedDomain) -> Callable[[complex, complex], float]:
    """log of the fiberwise KE density 4 rho^2/(rho^2-|z|^2)^2 (Lebesgue convention)."""

    def f(z: complex, s: complex) -> float:
        rho = family.profile(complex(s))
        if abs(z) >= rho:
            raise ValueError("point outside fiber")
        return math.log(4 * rho**2) - 2 * math.log(rho**2 - abs(z) ** 2)

    return f


@dataclass(frozen=True)
class PshReport:
    min_hessian_eigenvalue: float
    worst_point: np.ndarray
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.min_hessian_eigenvalue >= -self.tolerance


def psh_test(
    field: RelativeLogDensity | Callable[[complex, complex], float],
    zs_grid: Sequence[tuple[complex, complex]],
    h: float = 1e-3,
    tolerance: float = 1e-6,
    margin_check: Callable[[complex, complex], bool] | None = None,
) -> PshReport:
    """Finite-difference complex Hessian scan of a log field in (z, s).

    Every grid point must have interior margin >= 2h in each variable (the
    evaluator is probed on the FD stencil); pass when the global minimum
    eigenvalue is >= -tolerance.
    """
    fn = field.evaluator if isinstance(field, RelativeLogDensity) else field
    best, worst_pt = np.inf, None
    for z, s in zs_grid:
        if margin_check is not None and not margin_check(complex(z), complex(s)):
            raise ValueError(f"insufficient interior margin at ({z}, {s})")
        g = lambda v: fn(complex(v[0]), complex(v[1]))
        H = complex_hessian(g, np.array([z, s], complex), h, richardson=True)
        ev = float(np.linalg.eigvalsh(H)[0])
        if ev < best:
            best, worst_pt = ev, np.array([z, s], complex)
    return PshReport(best, worst_pt, tolerance)
