"""Leading boundary singularity of the kernel: K ~ |r|^{-(n+1)} (n!/pi^n + o(1)).

Samples the numerically computed first kernel of the unit disc along a path
approaching the boundary, fits log K against log|r| for the defining function
r = |z|^2 - 1, and recovers the universal coefficient 1/pi and exponent -2.
The bordered determinant J[r] that normalizes the defining function is
identically 1 for this r.
"""

import math

import numpy as np

import bergmanflow as bf
from bergmanflow.boundary import domain_r_jet
from bergmanflow.flow import evaluate_log_kappa


def main():
    disc = bf.make_disc(1.0)
    print("J[r] along a ray:", [
        round(bf.j_functional(domain_r_jet(disc), np.array([r + 0j])), 12)
        for r in (0.0, 0.5, 0.9, 0.99)
    ])

    grid = bf.build_radial_grid(disc)
    state = bf.init_state(disc, grid, lambda m: 120)

    radii = np.linspace(0.80, 0.95, 12)
    r_def = radii**2 - 1.0
    log_leb = bf.lambda_to_lebesgue_log(evaluate_log_kappa(state, radii), 1)
    fit = bf.fit_boundary_coefficient(log_leb, r_def, path=radii)

    print(f"fitted coefficient: {fit.fitted_coefficient:.12f}")
    print(f"1/pi              : {1 / math.pi:.12f}")
    print(f"fitted exponent   : {fit.fitted_exponent:.12f} (expect -2)")
    print(f"kernel monotone along the path: {fit.monotone}")
    print(f"max fit residual  : {np.max(np.abs(fit.residuals)):.3e}")


if __name__ == "__main__":
    main()
