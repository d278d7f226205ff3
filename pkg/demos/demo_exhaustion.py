"""Kahler-Einstein densities along an exhausting family of discs.

Domain inclusion reverses the pointwise order of KE densities (a Yau-Schwarz
type comparison), so as the discs R_c grow toward the unit disc the densities
decrease monotonically to the limit density.  This is the mechanism that
extends the kernel-iteration picture from smooth exhausting pieces to a
general pseudoconvex domain.
"""

import math

import numpy as np

import bergmanflow as bf


def main():
    radii = [0.7, 0.9, 0.99, 0.999, 0.9999]
    res = bf.exhaustion_limit(bf.make_disc, 0.0 + 0j, radii)
    limit = math.exp(bf.ke_disc(1.0, np.array([0.0])).log_density[0])

    print("R_c       density at 0     gap to unit-disc value")
    for c, d in zip(res.c_values, res.densities):
        print(f"{c:<8}  {d:.8f}      {abs(d - limit):.3e}")
    print(f"limit     {limit:.8f}")

    # the pointwise comparison behind the monotonicity
    rs = np.linspace(0.0, 0.65, 10)
    rep = bf.yau_schwarz_check(bf.ke_disc(0.7, rs), bf.ke_disc(1.0, rs))
    print(f"\nnested pair disc(0.7) in disc(1): larger-domain density everywhere "
          f"smaller -> {rep.ok}")
    rep2 = bf.yau_schwarz_check(bf.ke_annulus(0.5, 1.0, np.linspace(0.55, 0.9, 10)),
                                bf.ke_disc(1.0, np.linspace(0.55, 0.9, 10)))
    print(f"nested pair annulus(0.5,1) in disc(1): {rep2.ok}")


if __name__ == "__main__":
    main()
