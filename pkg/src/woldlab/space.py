"""Truncated Dirichlet-type spaces over the bidisc as explicit Gram matrices.

The space of coefficient-valued polynomials sum a_{m,n} z1^m z2^n with
0 <= m <= N1, 0 <= n <= N2 carries the inner product determined by two
circle measures.  Its Gram matrix over the monomial basis decomposes into
a Hardy block plus three derivative blocks built from Fourier
coefficients of the measures; this module assembles those blocks and
keeps them separately available for cross-checks.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg as sla

from .errors import AssumptionError
from .measures import (
    CircleMeasure,
    fourier_coefficient,
    require_positive,
    weights_commute,
)

# Per-entry sign conventions of the Gram blocks, fixed once by agreement
# with the quadrature oracle (tests/test_space.py pins them):
#   first-variable block pairs a_{m,n} against a_{p,n} with mu1_hat(p - m),
#   second-variable block pairs a_{m,n} against a_{m,q} with mu2_hat(q - n),
#   mixed block multiplies mu2_hat(q - n) @ mu1_hat(p - m).
FOURIER_ARG_VAR1 = "p - m"
FOURIER_ARG_VAR2 = "q - n"
MIXED_PRODUCT_ORDER = "mu2_hat @ mu1_hat"


@dataclass(frozen=True)
class PolyVector:
    """Coefficient array of a vector-valued polynomial in two variables.

    ``coeffs[m, n]`` is the coefficient of z1^m z2^n, a vector of length
    ``dim``.  One-variable polynomials use caps (N, 0).
    """

    caps: tuple
    dim: int
    coeffs: np.ndarray

    def __post_init__(self):
        N1, N2 = self.caps
        arr = np.asarray(self.coeffs, dtype=complex)
        if arr.shape != (N1 + 1, N2 + 1, self.dim):
            raise ValueError(
                f"coefficient shape {arr.shape} does not match caps {self.caps}, dim {self.dim}"
            )
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    @classmethod
    def zeros(cls, caps, dim) -> "PolyVector":
        N1, N2 = caps
        return cls(caps, dim, np.zeros((N1 + 1, N2 + 1, dim), dtype=complex))

    @classmethod
    def monomial(cls, caps, dim, m, n, k=0, value=1.0) -> "PolyVector":
        N1, N2 = caps
        arr = np.zeros((N1 + 1, N2 + 1, dim), dtype=complex)
        arr[m, n, k] = value
        return cls(caps, dim, arr)

    @classmethod
    def from_flat(cls, caps, dim, flat) -> "PolyVector":
        N1, N2 = caps
        return cls(caps, dim, np.asarray(flat, dtype=complex).reshape(N1 + 1, N2 + 1, dim))

    def flatten(self) -> np.ndarray:
        """Lexicographic (m, n, k) flattening, matching the Gram index."""
        return self.coeffs.reshape(-1)


class HilbertSpace:
    """A finite-dimensional space C^D with inner product y^H G x."""

    def __init__(self, gram: np.ndarray, label: str = ""):
        gram = np.asarray(gram, dtype=complex)
        if gram.ndim != 2 or gram.shape[0] != gram.shape[1]:
            raise ValueError("gram must be square")
        self.gram = gram
        self.label = label

    @property
    def dim_total(self) -> int:
        return self.gram.shape[0]

    @cached_property
    def chol(self) -> np.ndarray:
        """Lower Cholesky factor L with G = L L^H.  Fails on singular grams."""
        try:
            return sla.cholesky(self.gram, lower=True)
        except np.linalg.LinAlgError as exc:
            raise AssumptionError(f"gram matrix is not positive definite: {exc}") from exc

    def inner(self, x: np.ndarray, y: np.ndarray) -> complex:
        """<x, y> = y^H G x (linear in x, conjugate-linear in y)."""
        return complex(np.conj(y) @ (self.gram @ x))

    def norm(self, x: np.ndarray) -> float:
        return float(np.sqrt(max(self.inner(x, x).real, 0.0)))

    def whiten(self, X: np.ndarray) -> np.ndarray:
        """Coordinates in which the inner product is Euclidean: L^H X."""
        return self.chol.conj().T @ X

    def unwhiten(self, X: np.ndarray) -> np.ndarray:
        return sla.solve_triangular(self.chol.conj().T, X, lower=False)

    def identity_space(self) -> bool:
        return bool(
            self.gram.shape[0] == 0
            or np.array_equal(self.gram, np.eye(self.gram.shape[0], dtype=complex))
        )


class EuclideanSpace(HilbertSpace):
    """C^D with the standard inner product (identity gram)."""

    def __init__(self, dim: int, label: str = ""):
        super().__init__(np.eye(dim, dtype=complex), label)


class GradedPolySpace(HilbertSpace):
    """Truncated two-variable Dirichlet-type space with explicit Gram matrix.

    Basis vectors are monomials z1^m z2^n e_k ordered lexicographically by
    (m, n, k).  The Gram matrix is Hermitian, and positive definite for
    positive measures (the Hardy block dominates the identity).
    """

    def __init__(self, mu1: CircleMeasure, mu2: CircleMeasure, caps, components: dict):
        self.caps = (int(caps[0]), int(caps[1]))
        self.dim = mu1.dim
        self.mu1 = mu1
        self.mu2 = mu2
        self.components = components
        gram = sum(components.values())
        super().__init__(gram, label=f"D2(caps={self.caps}, d={self.dim})")

    # -- indexing ------------------------------------------------------

    def flat_index(self, m: int, n: int, k: int = 0) -> int:
        N1, N2 = self.caps
        return (m * (N2 + 1) + n) * self.dim + k

    def bidegrees(self):
        N1, N2 = self.caps
        for m in range(N1 + 1):
            for n in range(N2 + 1):
                yield m, n

    def core_indices(self, margin: int, var=None) -> np.ndarray:
        """Flat indices of bidegrees at least ``margin`` below the caps.

        ``var=1`` constrains only the first degree, ``var=2`` only the
        second, ``var=None`` both.  A variable with cap 0 is inactive and
        never constrained; the degree-0 slice is always kept.
        """
        N1, N2 = self.caps
        up1 = max(N1 - margin, 0) if (var in (None, 1) and N1 > 0) else N1
        up2 = max(N2 - margin, 0) if (var in (None, 2) and N2 > 0) else N2
        idx = [
            self.flat_index(m, n, k)
            for m in range(up1 + 1)
            for n in range(up2 + 1)
            for k in range(self.dim)
        ]
        return np.array(idx, dtype=int)

    # -- export ---------------------------------------------------------

    def metadata(self) -> dict:
        return {
            "caps": list(self.caps),
            "dim": self.dim,
            "total_dim": self.dim_total,
            "mu1_digest": self.mu1.digest(),
            "mu2_digest": self.mu2.digest(),
        }

    def export_gram_csv(self, path) -> None:
        """Row-major CSV with alternating re, im entries per matrix element."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            for row in self.gram:
                out = []
                for v in row:
                    out.extend([repr(float(v.real)), repr(float(v.imag))])
                writer.writerow(out)

    def export_metadata_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.metadata(), fh, indent=2)


def _fourier_block_table(mu: CircleMeasure, N: int) -> np.ndarray:
    """Table F[s + N] = mu_hat(s) for s in [-N, N], shape (2N+1, d, d)."""
    d = mu.dim
    tab = np.empty((2 * N + 1, d, d), dtype=complex)
    for s in range(N + 1):
        c = fourier_coefficient(mu, s)
        tab[s + N] = c
        tab[-s + N] = c.conj().T
    return tab


def gram_block(mu1: CircleMeasure, mu2: CircleMeasure, m: int, n: int, p: int, q: int) -> np.ndarray:
    """The d x d block pairing the coefficient of z1^m z2^n against z1^p z2^q.

    <f, g> = sum over (m, n), (p, q) of b_{p,q}^H B(m,n,p,q) a_{m,n} with

        B = delta_mp delta_nq I
            + delta_nq (m ^ p) mu1_hat(p - m)
            + delta_mp (n ^ q) mu2_hat(q - n)
            + (m ^ p)(n ^ q) mu2_hat(q - n) mu1_hat(p - m)

    where ^ is min.  Derivative terms vanish unless both paired degrees in
    the relevant variable are >= 1.
    """
    if min(m, n, p, q) < 0:
        raise ValueError("degrees must be non-negative")
    if mu1.dim != mu2.dim:
        raise ValueError("measures must share the coefficient dimension")
    d = mu1.dim
    B = np.zeros((d, d), dtype=complex)
    if m == p and n == q:
        B += np.eye(d)
    if n == q and min(m, p) > 0:
        B += min(m, p) * fourier_coefficient(mu1, p - m)
    if m == p and min(n, q) > 0:
        B += min(n, q) * fourier_coefficient(mu2, q - n)
    if min(m, p) > 0 and min(n, q) > 0:
        B += (
            min(m, p)
            * min(n, q)
            * (fourier_coefficient(mu2, q - n) @ fourier_coefficient(mu1, p - m))
        )
    return B


def build_space(mu1: CircleMeasure, mu2: CircleMeasure, N1: int, N2: int) -> GradedPolySpace:
    """Assemble the truncated space for the measure pair at caps (N1, N2).

    Requires positive measures of equal dimension; for d > 1 the weights
    of the two measures must commute pairwise, otherwise the mixed block
    would break Hermitian symmetry of the Gram matrix.
    """
    if mu1.dim != mu2.dim:
        raise AssumptionError("measures must share the coefficient dimension")
    require_positive(mu1, "first measure")
    require_positive(mu2, "second measure")
    if mu1.dim > 1 and not weights_commute(mu1, mu2):
        raise AssumptionError(
            "measure weights do not commute; the two-variable space is not defined here"
        )
    N1, N2 = int(N1), int(N2)
    d = mu1.dim
    D = (N1 + 1) * (N2 + 1) * d
    F1 = _fourier_block_table(mu1, N1)
    F2 = _fourier_block_table(mu2, N2)

    # six-axis layout (p, q, l, m, n, k); rows first, flattening matches
    # flat_index
    def blank():
        return np.zeros((N1 + 1, N2 + 1, d, N1 + 1, N2 + 1, d), dtype=complex)

    h2 = blank()
    d1 = blank()
    d2 = blank()
    d3 = blank()
    eye = np.eye(d)
    diag2 = np.arange(N2 + 1)

    # second-variable table: T2[q, n] = (n ^ q) mu2_hat(q - n)
    q_idx, n_idx = np.meshgrid(np.arange(N2 + 1), np.arange(N2 + 1), indexing="ij")
    T2 = np.minimum(q_idx, n_idx)[:, :, None, None] * F2[(q_idx - n_idx) + N2]

    for m in range(N1 + 1):
        h2[m, diag2, :, m, diag2, :] = eye
        if N2 > 0:
            # dims (q, n, l, k) -> (q, l, n, k)
            d2[m, :, :, m, :, :] = np.transpose(T2, (0, 2, 1, 3))
        for p in range(N1 + 1):
            c1 = min(m, p)
            if c1 == 0:
                continue
            B1 = c1 * F1[(p - m) + N1]
            d1[p, diag2, :, m, diag2, :] += B1
            if N2 > 0:
                mixed = np.einsum("qnlj,jk->qlnk", T2, B1)
                d3[p, :, :, m, :, :] += mixed

    components = {k: v.reshape(D, D) for k, v in
                  {"h2": h2, "d1": d1, "d2": d2, "d3": d3}.items()}
    space = GradedPolySpace(mu1, mu2, (N1, N2), components)
    herm = np.max(np.abs(space.gram - space.gram.conj().T))
    if herm > 1e-12 * max(1.0, np.max(np.abs(space.gram))):
        raise AssumptionError(f"assembled gram is not Hermitian (deviation {herm:.2e})")
    return space


def build_space_1v(mu: CircleMeasure, N: int) -> GradedPolySpace:
    """One-variable space as the degenerate caps (N, 0) bidisc space."""
    return build_space(mu, CircleMeasure.zero(mu.dim), N, 0)


def coordinate_shift_matrix(space: GradedPolySpace, var: int) -> np.ndarray:
    """Coefficient matrix of multiplication by z1 (var=1) or z2 (var=2).

    The top degree in the shifted variable falls outside the truncation
    and is dropped; everything below is the exact coefficient shift.
    """
    N1, N2 = space.caps
    d = space.dim
    D = space.dim_total
    T = np.zeros((D, D))
    for m in range(N1 + 1):
        for n in range(N2 + 1):
            if var == 1 and m < N1:
                src, dst = space.flat_index(m, n), space.flat_index(m + 1, n)
            elif var == 2 and n < N2:
                src, dst = space.flat_index(m, n), space.flat_index(m, n + 1)
            else:
                continue
            T[dst:dst + d, src:src + d] = np.eye(d)
    return T


def inner_product(space: GradedPolySpace, f: PolyVector, g: PolyVector) -> complex:
    """<f, g> in the space; <f, f> is real non-negative for positive measures."""
    if f.caps != space.caps or g.caps != space.caps or f.dim != space.dim or g.dim != space.dim:
        raise ValueError("polynomial shape does not match the space")
    return space.inner(f.flatten(), g.flatten())


def dirichlet_components(space: GradedPolySpace, f: PolyVector) -> dict:
    """The four pieces of ||f||^2: Hardy part and the three derivative terms."""
    v = f.flatten()
    return {
        name: float((np.conj(v) @ (mat @ v)).real)
        for name, mat in space.components.items()
    }
