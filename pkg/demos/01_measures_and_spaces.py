"""Circle measures and the Gram matrices of the truncated spaces.

Builds a couple of measures, inspects their Fourier coefficients and
Poisson integrals, assembles the two-variable space, and cross-checks one
inner product against brute-force quadrature of the defining integrals.
"""

import numpy as np

import woldlab as wl

print("-- circle measures --")
atomic = wl.CircleMeasure.from_scalar_atoms([(0.5, 0.8), (2.0, 1.3)])
lebesgue = wl.CircleMeasure.lebesgue(1)
print("atomic measure:", atomic.to_json_dict()["atoms"])
for n in range(4):
    print(f"  mu_hat({n}) = {wl.fourier_coefficient(atomic, n)[0, 0]:.4f}")
print(f"  Poisson integral at z = 0.4: {wl.poisson_integral(atomic, 0.4)[0, 0]:.4f}")
print(f"  positivity: {wl.is_positive(atomic)}")

print("\n-- the bidisc space at caps (4, 3) --")
space = wl.build_space(atomic, lebesgue, 4, 3)
print(f"total dimension {space.dim_total}, gram condition "
      f"{np.linalg.cond(space.gram):.2f}")
ghost = wl.PolyVector.monomial(space.caps, 1, 2, 1)
print(f"  ||z1^2 z2||^2 = {wl.inner_product(space, ghost, ghost).real:.6f}")

print("\n-- closed form vs quadrature oracle --")
rng = np.random.default_rng(1)
flat = rng.standard_normal(space.dim_total) + 1j * rng.standard_normal(space.dim_total)
f = wl.PolyVector.from_flat(space.caps, 1, flat)
closed = wl.inner_product(space, f, f)
quad = wl.quadrature_inner_product(f, f, atomic, lebesgue, grid=256)
print(f"  closed form  : {closed.real:.10f}")
print(f"  quadrature   : {quad.real:.10f}")
print(f"  rel. deviation {abs(closed - quad) / (1 + abs(quad)):.2e}")
