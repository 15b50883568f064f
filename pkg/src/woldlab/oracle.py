"""Brute-force quadrature evaluation of the defining integrals.

Validates the closed-form Gram assembly against midpoint Riemann sums of
the actual disc and circle integrals.  The only numerical content is the
family of disc moment matrices

    A[a, b] = integral over the disc of z^a conj(z)^b P[mu](z) dA(z);

everything else is exact bookkeeping of polynomial coefficients.  The
torus integrals of trigonometric polynomials use enough angular nodes to
be alias-free, and the radial limit entering the derivative terms is
evaluated at radius 1, which is exact for polynomials (finite sums).
"""

from __future__ import annotations

import numpy as np

from .measures import CircleMeasure, poisson_kernel
from .space import PolyVector

#: angular nodes per radial node; the angular aliasing of the Poisson
#: kernel decays like exp(-factor/2), so 24 pushes it below the radial
#: midpoint error at every practical grid
ANGULAR_FACTOR = 24


def _scalar_disc_moments(angles, maxdeg, grid, angular_factor):
    """Midpoint Riemann moments for unit point kernels at the given angles
    plus a constant kernel; returns (per-atom moments, density moments)."""
    R = int(grid)
    M = int(angular_factor * grid)
    s = (np.arange(R) + 0.5) / R
    phi = 2 * np.pi * (np.arange(M) + 0.5) / M
    wgt = 2.0 * s / R                              # radial midpoint weights, dA normalized
    k_arr = np.arange(maxdeg + 1)
    harm = np.exp(1j * np.outer(phi, k_arr))       # e^{i k phi},  (M, maxdeg+1)
    kappa = np.zeros((len(angles), R, maxdeg + 1), dtype=complex)
    chunk = max(1, int(4e6 // M))
    cos_phi, sin_phi = np.cos(phi), np.sin(phi)
    for i0 in range(0, R, chunk):
        sl = slice(i0, min(i0 + chunk, R))
        sc = s[sl]
        one_minus = 1.0 - sc**2
        base = 1.0 + sc**2
        for j, theta in enumerate(angles):
            cos_rel = np.cos(theta) * cos_phi + np.sin(theta) * sin_phi
            K = one_minus[:, None] / (base[:, None] - 2.0 * sc[:, None] * cos_rel[None, :])
            kappa[j, sl] = (K @ harm) / M
    # S_j[a, b] = sum_r wgt_r s_r^{a+b} kappa_j[a-b](r); kappa[-k] = conj
    powers = s[None, :] ** (k_arr[:, None] + k_arr[None, :]).reshape(-1, 1)  # ((D+1)^2, R)
    powers = powers.reshape(maxdeg + 1, maxdeg + 1, R)
    atom_moments = np.zeros((len(angles), maxdeg + 1, maxdeg + 1), dtype=complex)
    for j in range(len(angles)):
        for a in range(maxdeg + 1):
            for b in range(maxdeg + 1):
                k = a - b
                kap = kappa[j, :, k] if k >= 0 else np.conj(kappa[j, :, -k])
                atom_moments[j, a, b] = np.sum(wgt * powers[a, b] * kap)
    dens_moments = np.zeros((maxdeg + 1, maxdeg + 1), dtype=complex)
    for a in range(maxdeg + 1):
        dens_moments[a, a] = np.sum(wgt * powers[a, a])
    return atom_moments, dens_moments


def disc_moments(mu: CircleMeasure, maxdeg: int, grid: int,
                 richardson: bool = True, angular_factor: int = ANGULAR_FACTOR) -> np.ndarray:
    """Moment matrices A[a, b] of z^a conj(z)^b against P[mu] over the disc.

    Midpoint rule on a uniform polar grid (``grid`` radii, angular_factor
    times as many angles).  With ``richardson`` the rule is evaluated at
    grid/2 and grid and extrapolated once, cancelling the second-order
    radial error.
    """
    if grid < 64:
        raise ValueError("grid must be at least 64")
    d = mu.dim
    angles = [a for a, _ in mu.atoms]

    def assemble(g):
        atom_m, dens_m = _scalar_disc_moments(angles, maxdeg, g, angular_factor)
        A = dens_m[:, :, None, None] * mu.density[None, None]
        for j, (_, W) in enumerate(mu.atoms):
            A = A + atom_m[j][:, :, None, None] * W[None, None]
        return A

    if not richardson:
        return assemble(grid)
    return (4.0 * assemble(grid) - assemble(grid // 2)) / 3.0


def _torus_profiles(coeffs: np.ndarray, axis_var: int, Mt: int) -> np.ndarray:
    """Evaluate sum_n c[m, n] e^{i n t} on Mt angular nodes (or the same
    with the roles of m and n swapped)."""
    c = coeffs if axis_var == 2 else np.swapaxes(coeffs, 0, 1)
    n_deg = c.shape[1]
    t = 2 * np.pi * np.arange(Mt) / Mt
    harm = np.exp(1j * np.outer(np.arange(n_deg), t))   # (n, t)
    return np.einsum("mnk,nt->mkt", c, harm)


def quadrature_inner_product(f: PolyVector, g: PolyVector, mu1: CircleMeasure,
                             mu2: CircleMeasure, grid: int = 512,
                             richardson: bool = True,
                             angular_factor: int = ANGULAR_FACTOR) -> complex:
    """The space inner product evaluated from the defining integrals.

    Hardy part by alias-free torus quadrature; derivative parts by disc
    moment quadrature against the Poisson integrals of the measures, with
    partial derivatives of the polynomials taken exactly on coefficients.
    Independent of the closed-form Gram assembly.
    """
    if f.caps != g.caps or f.dim != g.dim:
        raise ValueError("polynomials must share caps and dimension")
    N1, N2 = f.caps
    d = f.dim
    a = f.coeffs
    b = g.coeffs
    Mt = 2 * max(N1, N2) + 3

    # Hardy pairing over the torus at radius 1
    t = 2 * np.pi * np.arange(Mt) / Mt
    h1 = np.exp(1j * np.outer(np.arange(N1 + 1), t))
    h2 = np.exp(1j * np.outer(np.arange(N2 + 1), t))
    fvals = np.einsum("mnk,ms,nt->kst", a, h1, h2)
    gvals = np.einsum("mnk,ms,nt->kst", b, h1, h2)
    total = complex(np.sum(fvals * np.conj(gvals)) / Mt**2)

    A1 = disc_moments(mu1, N1 - 1, grid, richardson, angular_factor) if N1 >= 1 else None
    A2 = disc_moments(mu2, N2 - 1, grid, richardson, angular_factor) if N2 >= 1 else None

    # first-variable derivative term
    if N1 >= 1:
        c = a[1:] * np.arange(1, N1 + 1)[:, None, None]
        e = b[1:] * np.arange(1, N1 + 1)[:, None, None]
        C = _torus_profiles(c, 2, Mt)
        E = _torus_profiles(e, 2, Mt)
        total += np.einsum("mpij,mjt,pit->", A1, C, np.conj(E)) / Mt

    # second-variable derivative term
    if N2 >= 1:
        c = a[:, 1:] * np.arange(1, N2 + 1)[None, :, None]
        e = b[:, 1:] * np.arange(1, N2 + 1)[None, :, None]
        C = _torus_profiles(np.swapaxes(c, 0, 1), 2, Mt)   # profiles over variable 1
        E = _torus_profiles(np.swapaxes(e, 0, 1), 2, Mt)
        total += np.einsum("nqij,njt,qit->", A2, C, np.conj(E)) / Mt

    # mixed derivative term
    if N1 >= 1 and N2 >= 1:
        c2 = a[1:, 1:] * np.outer(np.arange(1, N1 + 1), np.arange(1, N2 + 1))[:, :, None]
        e2 = b[1:, 1:] * np.outer(np.arange(1, N1 + 1), np.arange(1, N2 + 1))[:, :, None]
        total += np.einsum("mpij,nqjk,mnk,pqi->", A1, A2, c2, np.conj(e2))
    return complex(total)


def quadrature_poisson(mu: CircleMeasure, z: complex, grid: int = 1024) -> np.ndarray:
    """Poisson integral by exact atom sums plus a Riemann sum of the density.

    The density integrand is smooth on the circle for interior z, so the
    uniform angular sum converges spectrally; atoms are evaluated exactly.
    """
    z = complex(z)
    if abs(z) >= 1:
        raise ValueError(f"quadrature_poisson requires |z| < 1, got |z| = {abs(z)}")
    out = np.zeros((mu.dim, mu.dim), dtype=complex)
    for theta, W in mu.atoms:
        out += poisson_kernel(z, theta) * W
    if np.any(mu.density):
        thetas = 2 * np.pi * (np.arange(grid) + 0.5) / grid
        mean = float(np.mean((1 - abs(z) ** 2) / np.abs(np.exp(1j * thetas) - z) ** 2))
        out += mean * mu.density
    return out
