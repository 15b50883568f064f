"""Gram-aware operator calculus on finite truncations.

Operators are plain matrices acting on coefficient vectors, but every
norm, adjoint, projection and rank decision is taken in the geometry of
the ambient Gram matrix.  Identity checks on graded truncations are
restricted to a *safe core* of bidegrees a few steps below the caps: the
truncation corrupts only the action near the top degrees, and all
structural statements hold exactly (to rounding) on the core.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg as sla

from .config import DEFAULTS, DEFAULT_CORE_MARGIN, Tolerances
from .errors import AssumptionError, ConvergenceError
from .space import EuclideanSpace, GradedPolySpace, HilbertSpace


# ---------------------------------------------------------------------------
# rank-revealing orthonormalization
# ---------------------------------------------------------------------------

def orthonormal_columns(space: HilbertSpace, X: np.ndarray, tols: Tolerances = DEFAULTS) -> np.ndarray:
    """Gram-orthonormal basis of the column span of X.

    Singular values below ``rank_rtol * sigma_max`` or below the absolute
    floor ``rank_floor`` are treated as zero.  The floor matters when X is
    entirely noise (e.g. the image of a nilpotent power applied to a unit
    basis): a purely relative cut would keep junk directions.
    """
    X = np.asarray(X, dtype=complex)
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[1] == 0:
        return np.zeros((space.dim_total, 0), dtype=complex)
    W = space.whiten(X)
    U, s = _robust_svd(W)
    if s.size == 0:
        return np.zeros((space.dim_total, 0), dtype=complex)
    thr = max(tols.rank_rtol * s[0], tols.rank_floor)
    k = int(np.sum(s > thr))
    return space.unwhiten(U[:, :k])


def _robust_svd(W: np.ndarray):
    """Left singular vectors and values; falls back to the slower QR-based
    LAPACK driver when divide-and-conquer fails to converge."""
    try:
        U, s, _ = np.linalg.svd(W, full_matrices=False)
    except np.linalg.LinAlgError:
        U, s, _ = sla.svd(W, full_matrices=False, lapack_driver="gesvd")
    return U, s


# ---------------------------------------------------------------------------
# subspaces
# ---------------------------------------------------------------------------

class Subspace:
    """A subspace of an ambient space, held as a Gram-orthonormal basis."""

    def __init__(self, ambient: HilbertSpace, basis: np.ndarray, tol: float = 1e-10):
        basis = np.asarray(basis, dtype=complex)
        if basis.ndim == 1:
            basis = basis[:, None]
        if basis.shape[0] != ambient.dim_total:
            raise ValueError("basis rows must match the ambient dimension")
        self.ambient = ambient
        self.basis = basis
        self.tol = tol
        if basis.shape[1]:
            gram_err = np.max(np.abs(basis.conj().T @ ambient.gram @ basis - np.eye(basis.shape[1])))
            if gram_err > tol * 100:
                raise ValueError(f"basis is not Gram-orthonormal (deviation {gram_err:.2e})")

    @classmethod
    def from_columns(cls, ambient: HilbertSpace, X: np.ndarray, tols: Tolerances = DEFAULTS) -> "Subspace":
        return cls(ambient, orthonormal_columns(ambient, X, tols))

    @classmethod
    def full(cls, ambient: HilbertSpace) -> "Subspace":
        if ambient.identity_space():
            return cls(ambient, np.eye(ambient.dim_total, dtype=complex))
        return cls.from_columns(ambient, np.eye(ambient.dim_total))

    @classmethod
    def trivial(cls, ambient: HilbertSpace) -> "Subspace":
        return cls(ambient, np.zeros((ambient.dim_total, 0), dtype=complex))

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def projector(self) -> np.ndarray:
        """Matrix of the Gram-orthogonal projection onto the subspace."""
        return self.basis @ self.basis.conj().T @ self.ambient.gram

    def coords(self, X: np.ndarray) -> np.ndarray:
        """Coordinates of (projections of) ambient vectors in this basis."""
        return self.basis.conj().T @ (self.ambient.gram @ X)

    def as_space(self) -> EuclideanSpace:
        """The subspace as a standalone space; the basis is orthonormal, so
        the restricted gram is the identity."""
        return EuclideanSpace(self.dim, label=f"sub({self.dim})")

    def distance(self, other: "Subspace") -> float:
        """Spectral-norm distance of the two Gram-orthogonal projectors."""
        L = self.ambient.chol
        diff = self.projector() - other.projector()
        # whitened operator L^H diff L^{-H}
        right = sla.solve_triangular(L, diff.conj().T, lower=True).conj().T
        return float(np.linalg.norm(L.conj().T @ right, 2))


def _whitened_projector(S: Subspace) -> np.ndarray:
    Bw = S.ambient.whiten(S.basis)
    return Bw @ Bw.conj().T


def subspace_intersect(A: Subspace, B: Subspace, tols: Tolerances = DEFAULTS) -> Subspace:
    """Intersection via the spectrum of P_A + P_B.

    Eigenvectors with eigenvalue above 2 - intersection_tol lie in both
    ranges; this is robust for near-degenerate geometries where a naive
    nullspace chain is not.
    """
    if A.ambient is not B.ambient and A.ambient.gram.shape != B.ambient.gram.shape:
        raise ValueError("subspaces live in different ambient spaces")
    amb = A.ambient
    if min(A.dim, B.dim) == 0:
        return Subspace.trivial(amb)
    Pw = _whitened_projector(A) + _whitened_projector(B)
    lam, V = np.linalg.eigh((Pw + Pw.conj().T) / 2)
    sel = lam > 2 - tols.intersection
    return Subspace(amb, amb.unwhiten(V[:, sel]))


def subspace_sum(A: Subspace, B: Subspace, tols: Tolerances = DEFAULTS) -> Subspace:
    if A.ambient.gram.shape != B.ambient.gram.shape:
        raise ValueError("subspaces live in different ambient spaces")
    return Subspace.from_columns(A.ambient, np.hstack([A.basis, B.basis]), tols)


def orthocomplement(S: Subspace, tols: Tolerances = DEFAULTS) -> Subspace:
    amb = S.ambient
    Pw = _whitened_projector(S)
    lam, V = np.linalg.eigh((Pw + Pw.conj().T) / 2)
    sel = lam < 0.5
    return Subspace(amb, amb.unwhiten(V[:, sel]))


def apply_to_subspace(T: "OperatorModel", S: Subspace, tols: Tolerances = DEFAULTS) -> Subspace:
    """Image T(S), rank-revealed in the codomain geometry."""
    return Subspace.from_columns(T.codom, T.matrix @ S.basis, tols)


# ---------------------------------------------------------------------------
# operators
# ---------------------------------------------------------------------------

class OperatorModel:
    """A linear map between coefficient spaces, with safe-core metadata.

    Parameters
    ----------
    dom, codom : HilbertSpace
        Domain and codomain (usually the same space).
    matrix : ndarray
        Coefficient matrix, shape (codom dim, dom dim).
    core_fn : callable, optional
        margin -> basis matrix of the domain subspace on which the
        operator reproduces its untruncated counterpart exactly.  Graded
        shifts install a coordinate-core here; direct sums, scrambles and
        restrictions propagate it.  ``None`` means the whole domain.
    safe_core_margin : int
        Default margin (top bidegrees excluded per applied factor).
    """

    def __init__(self, dom: HilbertSpace, codom: HilbertSpace, matrix: np.ndarray,
                 core_fn=None, safe_core_margin: int = DEFAULT_CORE_MARGIN, info: dict = None):
        matrix = np.asarray(matrix, dtype=complex)
        if matrix.shape != (codom.dim_total, dom.dim_total):
            raise ValueError(
                f"matrix shape {matrix.shape} does not map dom ({dom.dim_total}) "
                f"into codom ({codom.dim_total})"
            )
        self.dom = dom
        self.codom = codom
        self.matrix = matrix
        self.core_fn = core_fn
        self.safe_core_margin = safe_core_margin
        self.info = info or {}

    # -- basics ---------------------------------------------------------

    @property
    def is_square(self) -> bool:
        return self.dom.dim_total == self.codom.dim_total

    def __matmul__(self, other: "OperatorModel") -> "OperatorModel":
        if other.codom.dim_total != self.dom.dim_total:
            raise ValueError("inner dimensions do not match for composition")
        return OperatorModel(other.dom, self.codom, self.matrix @ other.matrix,
                             core_fn=other.core_fn,
                             safe_core_margin=max(self.safe_core_margin, other.safe_core_margin))

    def power(self, n: int) -> "OperatorModel":
        if not self.is_square:
            raise ValueError("powers need a square operator")
        return OperatorModel(self.dom, self.codom, np.linalg.matrix_power(self.matrix, n),
                             core_fn=self.core_fn, safe_core_margin=self.safe_core_margin)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.matrix @ x

    # -- safe core --------------------------------------------------------

    def core_basis(self, margin: int = None) -> np.ndarray:
        """Basis (not necessarily orthonormal) of the safe core at ``margin``."""
        margin = self.safe_core_margin if margin is None else margin
        if self.core_fn is not None:
            return self.core_fn(margin)
        if isinstance(self.dom, GradedPolySpace):
            idx = self.dom.core_indices(margin)
            return np.eye(self.dom.dim_total, dtype=complex)[:, idx]
        return np.eye(self.dom.dim_total, dtype=complex)

    def core_subspace(self, margin: int = None, tols: Tolerances = DEFAULTS) -> Subspace:
        return Subspace.from_columns(self.dom, self.core_basis(margin), tols)


def identity_operator(space: HilbertSpace) -> OperatorModel:
    return OperatorModel(space, space, np.eye(space.dim_total, dtype=complex))


def joint_core(T1: OperatorModel, T2: OperatorModel, margin: int = None,
               tols: Tolerances = DEFAULTS) -> Subspace:
    """Intersection of the two operators' safe cores (as a subspace)."""
    return subspace_intersect(T1.core_subspace(margin, tols), T2.core_subspace(margin, tols), tols)


def operator_norm(A: OperatorModel, domain: Subspace = None) -> float:
    """Gram operator norm, optionally with the domain restricted."""
    B = domain.basis if domain is not None else (
        A.dom.unwhiten(np.eye(A.dom.dim_total)) if not A.dom.identity_space()
        else np.eye(A.dom.dim_total, dtype=complex)
    )
    M = A.codom.whiten(A.matrix @ B)
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


def adjoint(A: OperatorModel) -> OperatorModel:
    """Gram adjoint A* = G_dom^{-1} A^H G_codom.

    Satisfies <Ax, y> = <x, A*y> for truncation vectors; on graded spaces
    it reproduces the untruncated adjoint only on the safe core.
    """
    Ldom = A.dom.chol
    rhs = A.matrix.conj().T @ A.codom.gram
    Y = sla.solve_triangular(Ldom, rhs, lower=True)
    mat = sla.solve_triangular(Ldom.conj().T, Y, lower=False)
    return OperatorModel(A.codom, A.dom, mat)


# ---------------------------------------------------------------------------
# 2-isometry checkers
# ---------------------------------------------------------------------------

def _core_compressed_form(T: OperatorModel, F: np.ndarray, margin: int,
                          tols: Tolerances) -> tuple:
    B = orthonormal_columns(T.dom, T.core_basis(margin), tols)
    return B.conj().T @ F @ B, B


def two_isometry_defect(T: OperatorModel, margin: int = None, tols: Tolerances = DEFAULTS) -> float:
    """Operator norm of T*^2 T^2 - 2 T*T + I compressed to the safe core.

    Both Grammians are evaluated as pairings <T^k x, T^k y>, so no
    truncated adjoint enters; for graded model shifts the value is zero to
    rounding because the min-degree weights telescope.
    """
    if not T.is_square:
        raise ValueError("two_isometry_defect needs a square operator")
    G = T.dom.gram
    T2 = T.matrix @ T.matrix
    F = (T2.conj().T @ G @ T2) - 2 * (T.matrix.conj().T @ G @ T.matrix) + G
    margin = T.safe_core_margin if margin is None else margin
    FB, _ = _core_compressed_form(T, F, margin, tols)
    if FB.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvalsh((FB + FB.conj().T) / 2))))


def doubly_commuting_residual(T1: OperatorModel, T2: OperatorModel,
                              margin: int = None, tols: Tolerances = DEFAULTS) -> tuple:
    """(||T1 T2 - T2 T1||, ||T1* T2 - T2 T1*||) on the joint safe core."""
    if T1.dom.dim_total != T2.dom.dim_total:
        raise ValueError("operators act on different spaces")
    margin = max(T1.safe_core_margin, T2.safe_core_margin) if margin is None else margin
    core = joint_core(T1, T2, margin, tols)
    C1 = OperatorModel(T1.dom, T1.dom, T1.matrix @ T2.matrix - T2.matrix @ T1.matrix)
    T1s = adjoint(T1).matrix
    C2 = OperatorModel(T1.dom, T1.dom, T1s @ T2.matrix - T2.matrix @ T1s)
    return operator_norm(C1, core), operator_norm(C2, core)


def left_inverse(T: OperatorModel, margin: int = 1, tols: Tolerances = DEFAULTS) -> OperatorModel:
    """Left inverse L = (T*T)^{-1} T* realized on the safe core.

    The truncated shift annihilates the top bidegree, so a plain
    pseudo-inverse would route preimages through that artificial kernel.
    Constraining preimages to the margin-1 core removes the ambiguity:
    L T = I holds on the core and L reproduces the untruncated left
    inverse there exactly.
    """
    if not T.is_square:
        raise ValueError("left_inverse needs a square operator")
    E = T.core_basis(margin)
    TEw = T.codom.whiten(T.matrix @ E)
    U, s, Vh = np.linalg.svd(TEw, full_matrices=False)
    if s.size == 0 or s[0] <= tols.rank_floor:
        raise AssumptionError("operator has (numerically) trivial range on its core")
    k = int(np.sum(s > max(tols.rank_rtol * s[0], tols.rank_floor)))
    cond = float(s[0] / s[k - 1])
    if cond > tols.condition_max:
        raise ConvergenceError(f"left inverse is ill conditioned (cond = {cond:.3e})")
    pinv = (Vh[:k].conj().T / s[:k]) @ U[:, :k].conj().T
    mat = E @ pinv @ T.codom.chol.conj().T
    return OperatorModel(T.codom, T.dom, mat, core_fn=T.core_fn,
                         safe_core_margin=T.safe_core_margin,
                         info={"condition": cond})


def range_complement_projection(T: OperatorModel, tols: Tolerances = DEFAULTS) -> tuple:
    """(P matrix, E): Gram projection onto ker T* = ran(T)-perp, with range.

    Built directly from an orthonormal basis of ran(T), so it does not
    depend on any safe-core choice; P = I - Q Q^H G is exactly Gram
    self-adjoint and idempotent.
    """
    Q = orthonormal_columns(T.codom, T.matrix, tols)
    Pm = np.eye(T.codom.dim_total, dtype=complex) - Q @ Q.conj().T @ T.codom.gram
    E = Subspace.from_columns(T.codom, Pm, tols)
    return Pm, E


def wandering_projection(T: OperatorModel, tols: Tolerances = DEFAULTS) -> tuple:
    """(P, E): Gram-orthogonal projection onto ker T* and its range.

    The projection laws P = P* = P^2 (Gram adjoint) are verified before
    returning.
    """
    Pm, E = range_complement_projection(T, tols)
    G = T.dom.gram
    idem = np.max(np.abs(Pm @ Pm - Pm)) if Pm.size else 0.0
    herm = np.max(np.abs(G @ Pm - Pm.conj().T @ G)) if Pm.size else 0.0
    scale = max(1.0, float(np.linalg.norm(G, 2)))
    if max(idem, herm / scale) > 1e-8:
        raise AssumptionError(
            f"wandering projection failed its laws (idem {idem:.2e}, herm {herm:.2e})"
        )
    P = OperatorModel(T.dom, T.dom, Pm, info={"idempotency": float(idem), "hermiticity": float(herm)})
    return P, E


def defect_operator(T: OperatorModel, margin: int = 1, tols: Tolerances = DEFAULTS) -> tuple:
    """(D, Dspace): PSD square root of T*T - I on the safe core.

    The quadratic form of T*T - I is evaluated exactly as
    <Tx, Ty> - <x, y> on the margin-1 core, then diagonalized there.
    Eigenvalues in [-psd_tol, 0) are clamped; anything more negative
    disqualifies T as a 2-isometry candidate.  D acts as zero on the core
    complement.
    """
    if not T.is_square:
        raise ValueError("defect_operator needs a square operator")
    G = T.dom.gram
    F = T.matrix.conj().T @ G @ T.matrix - G
    B = orthonormal_columns(T.dom, T.core_basis(margin), tols)
    FB = B.conj().T @ F @ B
    FB = (FB + FB.conj().T) / 2
    if FB.size == 0:
        lam = np.zeros(0)
        V = np.zeros((0, 0))
    else:
        lam, V = np.linalg.eigh(FB)
    lam_scale = max(1.0, float(lam.max(initial=0.0)))
    if lam.size and lam.min() < -tols.psd * lam_scale:
        raise AssumptionError(
            f"T*T - I has eigenvalue {lam.min():.3e} below -psd_tol; not a 2-isometry candidate"
        )
    lam = np.clip(lam, 0.0, None)
    # rank decision on the eigenvalues of T*T - I: the square root would
    # amplify eigensolver noise past the floor
    keep = lam > max(tols.rank_rtol * lam.max(initial=0.0), tols.rank_floor**2)
    lam = np.where(keep, lam, 0.0)
    roots = np.sqrt(lam)
    DB = (V * roots) @ V.conj().T
    Dmat = B @ DB @ B.conj().T @ G
    Dspace = Subspace(T.dom, B @ V[:, keep])
    D = OperatorModel(T.dom, T.dom, Dmat, info={"rank": int(keep.sum())})
    return D, Dspace


def restrict_operator(T: OperatorModel, S: Subspace, tols: Tolerances = DEFAULTS,
                      check_invariance: bool = True) -> OperatorModel:
    """Compression of T to an invariant subspace, in basis coordinates.

    The restricted space carries the identity gram (the basis is
    orthonormal).  The safe core of the restriction is the ambient core
    intersected with the subspace, rebased.
    """
    if S.ambient.dim_total != T.dom.dim_total:
        raise ValueError("subspace does not live in the operator domain")
    M = S.coords(T.matrix @ S.basis)
    leak = 0.0
    if check_invariance and S.dim:
        image = T.matrix @ S.basis
        residual = image - S.basis @ S.coords(image)
        leak = float(np.linalg.norm(T.dom.whiten(residual), 2))
    amb_core_fn = T.core_fn
    graded = isinstance(T.dom, GradedPolySpace)

    def restricted_core(margin, _T=T, _S=S, _tols=tols):
        amb_core = _T.core_subspace(margin, _tols)
        inter = subspace_intersect(amb_core, _S, _tols)
        return _S.coords(inter.basis)

    core_fn = restricted_core if (amb_core_fn is not None or graded) else None
    return OperatorModel(S.as_space(), S.as_space(), M, core_fn=core_fn,
                         safe_core_margin=T.safe_core_margin,
                         info={"invariance_leak": leak})


def unitarity_residual(T: OperatorModel, margin: int = 0, tols: Tolerances = DEFAULTS) -> float:
    """||T*T - I|| on the core: 0 for unitaries and isometries."""
    G = T.dom.gram
    F = T.matrix.conj().T @ G @ T.matrix - G
    FB, _ = _core_compressed_form(T, F, margin, tols)
    if FB.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvalsh((FB + FB.conj().T) / 2))))
