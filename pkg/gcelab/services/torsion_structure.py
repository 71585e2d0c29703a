"""Structure of a parallel characteristic torsion and the parallel modification of (g, J).

On a frame with ∇T = 0 and θ ≠ 0 the torsion splits as

    T = η∧ω₊ + Jη∧ω₋ + T₀,    ω₊ = dη,  ω₋ = d(Jη),

with η the unit covector along -2Jθ and T₀ living on H = {η, Jη}^⊥. The skew
endomorphisms A± of H dual to ω± commute with J and with each other, so H
splits into J-invariant eigenspaces H_i with A± = a±_i J there.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import cmp_to_key
from typing import Dict, List, Optional, Sequence

import numpy as np

from gcelab.core.lie_frame import (
    Connection,
    HermitianFrame,
    covariant_derivative,
    exterior_derivative,
    levi_civita,
    torsion_of,
)
from gcelab.core.multilinear import (
    DEFAULT_TOLERANCE,
    KForm,
    adapted_basis,
    endomorphism_action,
    form_norm,
    interior,
    j_one_form,
    pullback,
    wedge,
)
from gcelab.exceptions import (
    DecompositionFailureError,
    InvalidModificationError,
    NoLeeDirectionError,
    PreconditionViolationError,
)
from gcelab.services.characteristic import (
    LEE_THRESHOLD,
    CaseTag,
    characteristic_connection,
    characteristic_torsion,
    lee_form,
)

logger = logging.getLogger(__name__)

EIGEN_CLUSTER_TOLERANCE = 1e-7


@dataclass
class Eigenspace:
    """J-invariant block H_i of H on which A± = a±_i J.

    `basis` holds g-orthonormal columns b, Jb, ... in frame coordinates.
    """

    basis: np.ndarray
    a_plus: float
    a_minus: float
    residual: float = 0.0

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def projector(self, metric: np.ndarray) -> np.ndarray:
        return self.basis @ self.basis.T @ metric


@dataclass
class TorsionDecomposition:
    frame_name: str
    tolerance: float
    eta: KForm
    J_eta: KForm
    eta_scale: float
    eta_vector: np.ndarray
    omega_plus: KForm
    omega_minus: KForm
    T: KForm
    T0: KForm
    E_basis: np.ndarray
    H_basis: np.ndarray
    J_H: np.ndarray
    A_plus: np.ndarray
    A_minus: np.ndarray
    residuals: Dict[str, float] = field(default_factory=dict)
    eigenspaces: List[Eigenspace] = field(default_factory=list)

    def projector_E(self, metric: np.ndarray) -> np.ndarray:
        return self.E_basis @ self.E_basis.T @ metric

    def projector_H(self, metric: np.ndarray) -> np.ndarray:
        return self.H_basis @ self.H_basis.T @ metric


def _skew_endomorphism(two_form: KForm, metric_inverse: np.ndarray) -> np.ndarray:
    """A with g(AX, Y) = β(X, Y)."""
    return metric_inverse @ two_form.to_matrix().T


def decompose_torsion(
    frame: HermitianFrame,
    tolerance: float = DEFAULT_TOLERANCE,
    connection: Optional[Connection] = None,
    lee_threshold: float = LEE_THRESHOLD,
) -> TorsionDecomposition:
    """Split a parallel characteristic torsion along the Lee plane E = span{η, Jη}."""
    theta = lee_form(frame)
    if theta.norm() <= lee_threshold:
        raise NoLeeDirectionError(f"Lee form of '{frame.name}' vanishes; E is undefined")

    space = frame.space
    connection = connection or characteristic_connection(frame, tolerance)
    torsion = characteristic_torsion(frame, tolerance)
    parallel = float(np.max(np.abs(covariant_derivative(torsion, connection, frame))))
    if parallel > tolerance:
        raise PreconditionViolationError(
            f"characteristic torsion of '{frame.name}' is not parallel (residual {parallel:.3e})"
        )

    raw = j_one_form(theta, space) * -2.0
    scale = form_norm(raw, space)
    eta = raw / scale
    J_eta = j_one_form(eta, space)
    u = space.sharp(eta)
    Ju = space.J @ u

    basis = adapted_basis(space, seeds=[u])
    E_basis, H_basis = basis[:, :2], basis[:, 2:]
    P_H = H_basis @ H_basis.T @ space.metric

    omega_plus = exterior_derivative(eta, frame)
    omega_minus = exterior_derivative(J_eta, frame)
    T0 = pullback(torsion, P_H)

    J_H = H_basis.T @ space.metric @ space.J @ H_basis
    A_plus = H_basis.T @ omega_plus.to_matrix() @ H_basis
    A_minus = H_basis.T @ omega_minus.to_matrix() @ H_basis

    reconstruction = wedge(eta, omega_plus) + wedge(J_eta, omega_minus) + T0 - torsion
    types = max(
        float(np.max(np.abs(J_H @ A - A @ J_H))) if A.size else 0.0 for A in (A_plus, A_minus)
    )
    commutator = float(np.max(np.abs(A_plus @ A_minus - A_minus @ A_plus))) if A_plus.size else 0.0
    action = max(
        endomorphism_action(T0, _skew_endomorphism(w, space.metric_inverse)).max_abs()
        for w in (omega_plus, omega_minus)
    )
    nabla_eta = covariant_derivative(eta, connection, frame)
    levi_eta = covariant_derivative(eta, levi_civita(frame), frame)

    residuals = {
        "reconstruction": reconstruction.max_abs(),
        "omega_types": types,
        "horizontal_plus": interior(u, omega_plus).max_abs() + interior(Ju, omega_plus).max_abs(),
        "horizontal_minus": interior(u, omega_minus).max_abs() + interior(Ju, omega_minus).max_abs(),
        "commutator": commutator,
        "T0_action": action,
        "T_eta_jeta": interior(Ju, interior(u, torsion)).max_abs(),
        "T0": T0.max_abs(),
        "eta_parallel": float(np.max(np.abs(nabla_eta))),
        "killing": float(np.max(np.abs(levi_eta + levi_eta.T))),
        "eta_commute": float(np.max(np.abs(frame.bracket(u, Ju)))),
    }
    logger.debug(
        f"decomposed torsion of '{frame.name}': "
        + ", ".join(f"{k}={v:.2e}" for k, v in residuals.items())
    )
    return TorsionDecomposition(
        frame_name=frame.name,
        tolerance=tolerance,
        eta=eta,
        J_eta=J_eta,
        eta_scale=scale,
        eta_vector=u,
        omega_plus=omega_plus,
        omega_minus=omega_minus,
        T=torsion,
        T0=T0,
        E_basis=E_basis,
        H_basis=H_basis,
        J_H=J_H,
        A_plus=A_plus,
        A_minus=A_minus,
        residuals=residuals,
    )


def _cluster(values: np.ndarray, tolerance: float) -> List[List[int]]:
    """Group indices of ascending `values` whose consecutive gaps are within tolerance."""
    groups: List[List[int]] = []
    for index, value in enumerate(values):
        if groups and value - values[groups[-1][-1]] <= tolerance:
            groups[-1].append(index)
        else:
            groups.append([index])
    return groups


def _complex_adapted(columns: np.ndarray, J: np.ndarray) -> np.ndarray:
    """Orthonormal b, Jb, ... spanning the (J-invariant) column space, Euclidean metric."""
    basis: List[np.ndarray] = []
    for candidate in columns.T:
        if len(basis) == columns.shape[1]:
            break
        vec = candidate.copy()
        for _ in range(2):
            for b in basis:
                vec = vec - (b @ vec) * b
        length = float(np.linalg.norm(vec))
        if length < 1e-8:
            continue
        vec = vec / length
        partner = J @ vec
        for b in basis:
            partner = partner - (b @ partner) * b
        basis.append(vec)
        basis.append(partner / np.linalg.norm(partner))
    if len(basis) != columns.shape[1]:
        raise DecompositionFailureError("eigenspace is not J-invariant")
    return np.column_stack(basis)


def split_eigenspaces(
    decomposition: TorsionDecomposition,
    cluster_tolerance: float = EIGEN_CLUSTER_TOLERANCE,
) -> List[Eigenspace]:
    """Simultaneous eigenspaces of -J A₊ and -J A₋ on H, sorted by a⁺ then a⁻ descending."""
    D = decomposition
    if D.residuals["commutator"] > D.tolerance:
        raise DecompositionFailureError(
            f"A+ and A- do not commute on '{D.frame_name}' "
            f"(residual {D.residuals['commutator']:.3e})"
        )
    if D.H_basis.shape[1] == 0:
        D.eigenspaces = []
        return []

    J_H = D.J_H
    S_plus = -J_H @ D.A_plus
    S_minus = -J_H @ D.A_minus
    S_plus = 0.5 * (S_plus + S_plus.T)
    S_minus = 0.5 * (S_minus + S_minus.T)

    values, vectors = np.linalg.eigh(S_plus)
    blocks = []
    for group in _cluster(values, cluster_tolerance):
        V = vectors[:, group]
        inner_values, inner_vectors = np.linalg.eigh(V.T @ S_minus @ V)
        for inner in _cluster(inner_values, cluster_tolerance):
            blocks.append(V @ inner_vectors[:, inner])

    eigenspaces = []
    for block in blocks:
        G = _complex_adapted(block, J_H)
        a_plus = float(np.mean(np.diag(G.T @ S_plus @ G)))
        a_minus = float(np.mean(np.diag(G.T @ S_minus @ G)))
        residual = max(
            float(np.max(np.abs(D.A_plus @ G - a_plus * J_H @ G))),
            float(np.max(np.abs(D.A_minus @ G - a_minus * J_H @ G))),
        )
        eigenspaces.append(Eigenspace(D.H_basis @ G, a_plus, a_minus, residual))

    def order(left: Eigenspace, right: Eigenspace) -> int:
        if abs(left.a_plus - right.a_plus) > cluster_tolerance:
            return -1 if left.a_plus > right.a_plus else 1
        if abs(left.a_minus - right.a_minus) > cluster_tolerance:
            return -1 if left.a_minus > right.a_minus else 1
        return 0

    eigenspaces.sort(key=cmp_to_key(order))
    D.eigenspaces = eigenspaces
    logger.debug(
        f"eigenspaces of '{D.frame_name}': "
        + ", ".join(f"(dim={e.dim}, a+={e.a_plus:.6g}, a-={e.a_minus:.6g})" for e in eigenspaces)
    )
    return eigenspaces


def classify_local(
    decomposition: TorsionDecomposition,
    eigenspaces: Optional[Sequence[Eigenspace]] = None,
    tolerance: Optional[float] = None,
) -> str:
    """Local case from ω₋ and the sign pattern of the a⁺ eigenvalues."""
    tol = decomposition.tolerance if tolerance is None else tolerance
    if eigenspaces is None:
        eigenspaces = decomposition.eigenspaces or split_eigenspaces(decomposition)
    if decomposition.omega_minus.max_abs() > tol:
        return CaseTag.SASAKIAN_PRODUCT
    values = [e.a_plus for e in eigenspaces]
    positive = any(v > tol for v in values)
    negative = any(v < -tol for v in values)
    zero = any(abs(v) <= tol for v in values)
    if positive and negative:
        return CaseTag.PSEUDO_VAISMAN_MIXED
    if positive and zero:
        return CaseTag.SASAKI_LINE_KAHLER
    if values and positive and not zero:
        return CaseTag.VAISMAN
    return CaseTag.NOT_APPLICABLE


def mixed_signature_form(
    decomposition: TorsionDecomposition, frame: HermitianFrame
) -> KForm:
    """ω^s = ω|_E + Σ (a⁺_i / 2) ω|_{H_i}, so that dη = -2 ω^s|_H.

    Indefinite when the a⁺ change sign; returned as data only.
    """
    eigenspaces = decomposition.eigenspaces or split_eigenspaces(decomposition)
    metric = frame.metric
    result = pullback(frame.omega, decomposition.projector_E(metric))
    for e in eigenspaces:
        result = result + pullback(frame.omega, e.projector(metric)) * (e.a_plus / 2.0)
    return result


def lee_plane_residual(decomposition: TorsionDecomposition, covector: KForm) -> float:
    """Size of the part of a covector outside span{η, Jη}."""
    u = decomposition.eta_vector
    Ju = decomposition.E_basis[:, 1]
    inside = decomposition.eta * covector.evaluate(u) + decomposition.J_eta * covector.evaluate(Ju)
    return (covector - inside).max_abs()


# ---------------------------------------------------------------------------
# parallel modification
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ModificationReference:
    """Frame-coordinate bases that a modification is expressed in.

    e_basis holds the two columns spanning E, eigen_bases the H_i blocks.
    """

    e_basis: np.ndarray
    eigen_bases: Sequence[np.ndarray]

    def transported(self, scales: Sequence[float], R: np.ndarray) -> "ModificationReference":
        """Reference for the modified frame, orthonormal for the modified metric."""
        return ModificationReference(
            self.e_basis @ np.asarray(R, dtype=float),
            [B / math.sqrt(s) for B, s in zip(self.eigen_bases, scales)],
        )


def modification_reference(
    frame: HermitianFrame, tolerance: float = DEFAULT_TOLERANCE
) -> ModificationReference:
    decomposition = decompose_torsion(frame, tolerance=tolerance)
    eigenspaces = split_eigenspaces(decomposition)
    return ModificationReference(decomposition.E_basis, [e.basis for e in eigenspaces])


def parallel_modification(
    frame: HermitianFrame,
    scales: Sequence[float],
    R: np.ndarray,
    reference: Optional[ModificationReference] = None,
    tolerance: float = DEFAULT_TOLERANCE,
    name: str = "",
) -> HermitianFrame:
    """New (g', J') with g' = a_i g, J' = J on H_i and E rotated by R.

    The columns of e_basis @ R become a g'-orthonormal pair (ξ', J'ξ').
    """
    R = np.asarray(R, dtype=float)
    if R.shape != (2, 2):
        raise InvalidModificationError(f"R must be 2x2, got shape {R.shape}")
    determinant = float(np.linalg.det(R))
    if abs(determinant) <= 1e-12:
        raise InvalidModificationError(f"R is degenerate (det {determinant:.3e})")
    reference = reference or modification_reference(frame, tolerance)
    scales = [float(s) for s in scales]
    if len(scales) != len(reference.eigen_bases):
        raise InvalidModificationError(
            f"{len(scales)} scales given for {len(reference.eigen_bases)} eigenspaces"
        )
    if any(s <= 0 for s in scales):
        raise InvalidModificationError(f"scales must be positive, got {scales}")

    space = frame.space
    P = np.column_stack([reference.e_basis @ R] + list(reference.eigen_bases))
    if abs(np.linalg.det(P)) <= 1e-12:
        raise InvalidModificationError("reference bases do not span the frame")
    P_inv = np.linalg.inv(P)

    diagonal = [1.0, 1.0]
    J_P = np.zeros((frame.dim, frame.dim))
    J_P[1, 0], J_P[0, 1] = 1.0, -1.0
    offset = 2
    for B, s in zip(reference.eigen_bases, scales):
        k = B.shape[1]
        diagonal.extend([s] * k)
        J_P[offset : offset + k, offset : offset + k] = B.T @ space.metric @ space.J @ B
        offset += k

    g_prime = P_inv.T @ np.diag(diagonal) @ P_inv
    g_prime = 0.5 * (g_prime + g_prime.T)
    J_prime = P @ J_P @ P_inv
    logger.debug(
        f"parallel modification of '{frame.name}' with scales {scales} and det R = {determinant:.4g}"
    )
    return frame.with_structure(g_prime, J_prime, name=name or f"{frame.name}~mod")


def sasakian_split_matrix(eigenspaces: Sequence[Eigenspace]) -> np.ndarray:
    """R = ½ [[a⁺₁, a⁺₂], [a⁻₁, a⁻₂]] separating two eigenspaces into Sasakian factors."""
    if len(eigenspaces) != 2:
        raise DecompositionFailureError(
            f"splitting into Sasakian factors needs two eigenspaces, got {len(eigenspaces)}"
        )
    R = 0.5 * np.array(
        [
            [eigenspaces[0].a_plus, eigenspaces[1].a_plus],
            [eigenspaces[0].a_minus, eigenspaces[1].a_minus],
        ]
    )
    if abs(np.linalg.det(R)) <= 1e-12:
        raise DecompositionFailureError("eigenvalue vectors a+ and a- are linearly dependent")
    return R


# ---------------------------------------------------------------------------
# modification tensor
# ---------------------------------------------------------------------------


@dataclass
class ModificationTensor:
    """A[x, y, z] = g'(A_{e_x} e_y, e_z) and τ[x, y, z] = g'(T(e_x, e_y), e_z)."""

    A: np.ndarray
    tau: np.ndarray
    residuals: Dict[str, float] = field(default_factory=dict)


def _apply(J: np.ndarray, tensor: np.ndarray, slots: Sequence[int]) -> np.ndarray:
    """Feed J into the given vector slots of a covariant tensor."""
    for slot in slots:
        tensor = np.moveaxis(np.tensordot(tensor, J, axes=([slot], [0])), -1, slot)
    return tensor


def compute_modification_tensor(
    frame: HermitianFrame,
    g_prime: np.ndarray,
    J_prime: np.ndarray,
    tolerance: float = DEFAULT_TOLERANCE,
    connection: Optional[Connection] = None,
) -> ModificationTensor:
    """Difference A between the characteristic connection of a ∇-parallel (g', J') and ∇.

    2A(X,Y,Z) = -τ(X,Y,Z) + τ(J'X,J'Y,Z) + τ(Y,Z,X) + τ(J'Y,J'Z,X)
                - τ(Z,J'X,J'Y) - τ(J'Z,X,J'Y)
    """
    g_prime = np.asarray(g_prime, dtype=float)
    J_prime = np.asarray(J_prime, dtype=float)
    connection = connection or characteristic_connection(frame, tolerance)
    metric_parallel = float(np.max(np.abs(covariant_derivative(g_prime, connection, frame))))
    complex_parallel = float(
        np.max(np.abs(covariant_derivative(J_prime, connection, frame, upper=[True, False])))
    )
    if max(metric_parallel, complex_parallel) > tolerance:
        raise PreconditionViolationError(
            f"(g', J') is not parallel for the characteristic connection of '{frame.name}' "
            f"(metric {metric_parallel:.3e}, complex structure {complex_parallel:.3e})"
        )

    tau = np.einsum("xyk,kz->xyz", torsion_of(connection, frame), g_prime)
    both_first = _apply(J_prime, tau, (0, 1))
    term_xy = -tau + both_first
    term_yz = np.transpose(tau, (2, 0, 1)) + np.transpose(both_first, (2, 0, 1))
    term_zx = np.transpose(_apply(J_prime, tau, (1, 2)), (1, 2, 0)) + np.transpose(
        _apply(J_prime, tau, (0, 2)), (1, 2, 0)
    )
    A = 0.5 * (term_xy + term_yz - term_zx)

    residuals = {
        "skew": float(np.max(np.abs(A + np.transpose(A, (0, 2, 1))))),
        "complex": float(np.max(np.abs(_apply(J_prime, A, (1, 2)) - A))),
        "cyclic": float(
            np.max(
                np.abs(
                    np.transpose(A, (1, 0, 2))
                    + np.transpose(A, (1, 2, 0))
                    - tau
                    - np.transpose(tau, (0, 2, 1))
                )
            )
        ),
    }
    try:
        decomposition = decompose_torsion(frame, tolerance=tolerance, connection=connection)
        eigenspaces = split_eigenspaces(decomposition)
    except (NoLeeDirectionError, DecompositionFailureError) as e:
        logger.debug(f"skipping block checks of the modification tensor: {e}")
    else:
        H = decomposition.H_basis
        residuals["horizontal"] = float(
            np.max(np.abs(np.einsum("xa,yb,zc,xyz->abc", H, H, H, A))) if H.size else 0.0
        )
        g_prime_inverse = np.linalg.inv(g_prime)
        leak = 0.0
        for e in eigenspaces:
            outside = np.eye(frame.dim) - e.projector(frame.metric)
            moved = np.einsum("xa,yb,xyz,zk->kab", decomposition.E_basis, e.basis, A, g_prime_inverse)
            leak = max(leak, float(np.max(np.abs(np.tensordot(outside, moved, axes=1)))))
        residuals["preserves_eigenspaces"] = leak
    return ModificationTensor(A=A, tau=tau, residuals=residuals)


def modified_connection(
    connection: Connection, tensor: ModificationTensor, g_prime: np.ndarray
) -> Connection:
    """∇' = ∇ + A with A raised by g'."""
    raised = np.einsum("xyz,zk->xyk", tensor.A, np.linalg.inv(g_prime))
    return Connection(connection.gamma + raised, name="modified")
