"""Plurisubharmonic variation of fiberwise kernels over a Hartogs family.

For a pseudoconvex family of discs {|z| < rho(s)} the logs of the fiberwise
kernel iterates and of the fiberwise KE densities are plurisubharmonic in
(z, s) jointly.  The scan certifies this by finite-difference complex
Hessians, and a deliberately non-pseudoconvex radius profile shows the test
has the power to fail.
"""

import bergmanflow as bf


def main():
    zs = [(0.1 + 0.1j, 0.05 + 0.02j), (0.25j, -0.03 + 0.01j)]
    ss = [s for _, s in zs]

    fam = bf.hartogs_family("exp_re", ss)
    print(f"profile exp(Re s): {fam.certificate}")
    for m in (1, 2):
        fld = bf.fiber_kernels(fam, m, zs)
        rep = bf.psh_test(fld, zs)
        print(f"  log kappa_{m}: min Hessian eigenvalue {rep.min_hessian_eigenvalue:+.3e}"
              f"  -> {'psh' if rep.passed else 'NOT psh'}")
    rep = bf.psh_test(bf.fiber_ke_log_density(fam), zs)
    print(f"  log dV     : min Hessian eigenvalue {rep.min_hessian_eigenvalue:+.3e}"
          f"  -> {'psh' if rep.passed else 'NOT psh'}")

    ctrl = bf.hartogs_family("bulge", ss)
    print(f"\ncontrol profile: {ctrl.certificate}")
    rep = bf.psh_test(bf.fiber_ke_log_density(ctrl), zs)
    print(f"  log dV     : min Hessian eigenvalue {rep.min_hessian_eigenvalue:+.3e}"
          f"  -> {'psh' if rep.passed else 'NOT psh'} (expected to fail)")


if __name__ == "__main__":
    main()
