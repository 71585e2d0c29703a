"""Left-invariant calculus on Lie algebra frames."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from gcelab.core.multilinear import (
    DEFAULT_TOLERANCE,
    HermitianVectorSpace,
    KForm,
    hodge_star,
    interior,
    multi_indices,
    random_hermitian_space,
    wedge,
)
from gcelab.exceptions import (
    DegreeUnderflowError,
    FrameMismatchError,
    InvariantViolationError,
    UnsupportedValenceError,
)

logger = logging.getLogger(__name__)

JACOBI_TOLERANCE = 1e-10
MAX_VALENCE = 4

Bracket = Tuple[int, int, int, float]


def structure_from_brackets(dim: int, brackets: Iterable[Sequence[float]]) -> np.ndarray:
    """Dense C[i, j, k] = c^k_ij from sparse 0-based (i, j, k, value) entries.

    Reverse pairs that are not listed are filled by antisymmetry.
    """
    structure = np.zeros((dim, dim, dim))
    listed = set()
    for entry in brackets:
        i, j, k = (int(x) for x in entry[:3])
        value = float(entry[3])
        if not all(0 <= x < dim for x in (i, j, k)):
            raise FrameMismatchError(f"bracket index ({i}, {j}, {k}) outside 0..{dim - 1}")
        if i == j and value != 0.0:
            raise InvariantViolationError(
                "bracket-antisymmetry", abs(value), f"[e{i + 1}, e{i + 1}] must vanish"
            )
        structure[i, j, k] += value
        listed.add((i, j, k))
    for i, j, k in listed:
        if (j, i, k) not in listed:
            structure[j, i, k] = -structure[i, j, k]
    return structure


@dataclass(frozen=True, eq=False)
class LieFrame:
    """Metric Lie algebra in a fixed basis e_1..e_n."""

    metric: np.ndarray
    structure: np.ndarray
    name: str = ""
    jacobi_tolerance: float = JACOBI_TOLERANCE

    def __post_init__(self):
        metric = np.array(self.metric, dtype=float)
        structure = np.array(self.structure, dtype=float)
        n = metric.shape[0]
        if metric.shape != (n, n) or structure.shape != (n, n, n):
            raise FrameMismatchError(
                f"metric {metric.shape} and structure {structure.shape} disagree"
            )
        skew = float(np.max(np.abs(structure + structure.transpose(1, 0, 2)))) if n else 0.0
        if skew > self.jacobi_tolerance:
            raise InvariantViolationError("bracket-antisymmetry", skew)
        residual = jacobi_residual(structure)
        if residual > self.jacobi_tolerance:
            raise InvariantViolationError("jacobi", residual)
        if np.max(np.abs(metric - metric.T)) > 1e-12 * max(1.0, float(np.max(np.abs(metric)))):
            raise InvariantViolationError("metric-symmetric")
        if float(np.min(np.linalg.eigvalsh(metric))) <= 0:
            raise InvariantViolationError("metric-positive-definite")
        metric.setflags(write=False)
        structure.setflags(write=False)
        object.__setattr__(self, "metric", metric)
        object.__setattr__(self, "structure", structure)

    @property
    def dim(self) -> int:
        return self.metric.shape[0]

    @cached_property
    def metric_inverse(self) -> np.ndarray:
        return np.linalg.inv(self.metric)

    @property
    def brackets(self) -> List[Bracket]:
        """Nonzero c^k_ij with i < j, 0-based."""
        out = []
        for i in range(self.dim):
            for j in range(i + 1, self.dim):
                for k in range(self.dim):
                    value = float(self.structure[i, j, k])
                    if value != 0.0:
                        out.append((i, j, k, value))
        return out

    def bracket(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return np.einsum("i,j,ijk->k", np.asarray(x, float), np.asarray(y, float), self.structure)

    def inner(self, u: np.ndarray, v: np.ndarray) -> float:
        return float(np.asarray(u) @ self.metric @ np.asarray(v))


@dataclass(frozen=True, eq=False)
class HermitianFrame(LieFrame):
    """Lie algebra frame with a hermitian structure (g, J); J columns are images Je_j."""

    J: Optional[np.ndarray] = None
    tolerance: float = DEFAULT_TOLERANCE

    def __post_init__(self):
        super().__post_init__()
        if self.J is None:
            raise FrameMismatchError("a hermitian frame needs a complex structure J")
        object.__setattr__(self, "space", HermitianVectorSpace(self.metric, self.J, self.tolerance))
        object.__setattr__(self, "J", self.space.J)

    @classmethod
    def build(
        cls,
        metric: np.ndarray,
        J: np.ndarray,
        brackets: Iterable[Sequence[float]] = (),
        name: str = "",
        tolerance: float = DEFAULT_TOLERANCE,
        jacobi_tolerance: float = JACOBI_TOLERANCE,
    ) -> "HermitianFrame":
        metric = np.asarray(metric, dtype=float)
        structure = structure_from_brackets(metric.shape[0], brackets)
        return cls(
            metric=metric,
            structure=structure,
            name=name,
            jacobi_tolerance=jacobi_tolerance,
            J=np.asarray(J, dtype=float),
            tolerance=tolerance,
        )

    @property
    def m(self) -> int:
        return self.dim // 2

    @property
    def omega(self) -> KForm:
        return self.space.omega

    def with_structure(self, metric: np.ndarray, J: np.ndarray, name: str = "") -> "HermitianFrame":
        """Same Lie algebra, new hermitian data."""
        return HermitianFrame(
            metric=metric,
            structure=self.structure,
            name=name or self.name,
            jacobi_tolerance=self.jacobi_tolerance,
            J=J,
            tolerance=self.tolerance,
        )


Frame = Union[LieFrame, HermitianFrame]


@dataclass(frozen=True, eq=False)
class Connection:
    """gamma[i, j, k] = Γ^k_ij, i.e. ∇_{e_i} e_j = Σ_k Γ^k_ij e_k."""

    gamma: np.ndarray
    name: str = ""

    @property
    def dim(self) -> int:
        return self.gamma.shape[0]

    def covariant(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return np.einsum("i,j,ijk->k", x, y, self.gamma)

    def difference(self, other: "Connection") -> np.ndarray:
        return self.gamma - other.gamma


def jacobi_residual(structure: np.ndarray) -> float:
    if structure.size == 0:
        return 0.0
    jac = (
        np.einsum("ijl,lkm->ijkm", structure, structure)
        + np.einsum("jkl,lim->ijkm", structure, structure)
        + np.einsum("kil,ljm->ijkm", structure, structure)
    )
    return float(np.max(np.abs(jac)))


def is_unimodular(frame: LieFrame, tolerance: float = 1e-12) -> bool:
    """tr ad_X = 0 for every X."""
    traces = np.einsum("ijj->i", frame.structure)
    return bool(np.max(np.abs(traces)) <= tolerance)


def exterior_derivative(a: KForm, frame: LieFrame) -> KForm:
    """Chevalley–Eilenberg differential of an invariant form.

    dα(X0, ..., Xk) = Σ_{i<j} (-1)^{i+j} α([Xi, Xj], X0, ..., X̂i, ..., X̂j, ..., Xk).
    On a top-degree form there is nothing to differentiate into and the zero
    form of the same degree is returned.
    """
    if a.dim != frame.dim:
        raise FrameMismatchError(f"form over dim {a.dim} on frame of dim {frame.dim}")
    k = a.degree
    if k >= frame.dim:
        return KForm.zero(a.dim, a.degree)
    if k == 0:
        return KForm.zero(a.dim, 1)
    tensor = a.to_tensor()
    C = frame.structure
    out = np.zeros(math.comb(frame.dim, k + 1))
    for pos, idx in enumerate(multi_indices(frame.dim, k + 1)):
        total = 0.0
        for i in range(k + 1):
            for j in range(i + 1, k + 1):
                rest = idx[:i] + idx[i + 1 : j] + idx[j + 1 :]
                column = tensor[(slice(None),) + rest]
                total += (-1) ** (i + j) * float(C[idx[i], idx[j]] @ column)
        out[pos] = total
    return KForm(frame.dim, k + 1, out)


def levi_civita(frame: LieFrame) -> Connection:
    """Koszul formula restricted to invariant fields."""
    lowered = np.einsum("ijk,kl->ijl", frame.structure, frame.metric)
    koszul = 0.5 * (
        lowered
        - np.transpose(lowered, (2, 0, 1))
        + np.transpose(lowered, (1, 2, 0))
    )
    gamma = np.einsum("ijl,lk->ijk", koszul, frame.metric_inverse)
    return Connection(gamma, name="levi-civita")


def torsion_of(connection: Connection, frame: LieFrame) -> np.ndarray:
    """T^k_ij of T(X, Y) = ∇_X Y - ∇_Y X - [X, Y]."""
    gamma = connection.gamma
    return gamma - gamma.transpose(1, 0, 2) - frame.structure


def metric_residual(connection: Connection, frame: LieFrame) -> float:
    """max |g(∇_X Y, Z) + g(Y, ∇_X Z)| over basis vectors."""
    lowered = np.einsum("ijs,sk->ijk", connection.gamma, frame.metric)
    return float(np.max(np.abs(lowered + lowered.transpose(0, 2, 1))))


def covariant_derivative(
    tensor: Union[np.ndarray, KForm],
    connection: Connection,
    frame: LieFrame,
    upper: Optional[Sequence[bool]] = None,
) -> np.ndarray:
    """(∇t)[a, i1, ..., ir] = (∇_{e_a} t)(e_i1, ..., e_ir) for invariant t.

    Slots flagged in `upper` are contravariant.
    """
    if isinstance(tensor, KForm):
        tensor = tensor.to_tensor()
    tensor = np.asarray(tensor, dtype=float)
    valence = tensor.ndim
    if valence > MAX_VALENCE:
        raise UnsupportedValenceError(f"valence {valence} exceeds {MAX_VALENCE}")
    if any(size != frame.dim for size in tensor.shape):
        raise FrameMismatchError(f"tensor of shape {tensor.shape} on frame of dim {frame.dim}")
    upper = list(upper) if upper is not None else [False] * valence
    if len(upper) != valence:
        raise UnsupportedValenceError("upper mask length must equal the valence")
    gamma = connection.gamma
    result = np.zeros((frame.dim,) + tensor.shape)
    for slot in range(valence):
        if upper[slot]:
            term = np.tensordot(gamma, tensor, axes=([1], [slot]))
            result = result + np.moveaxis(term, 1, slot + 1)
        else:
            term = np.tensordot(gamma, tensor, axes=([2], [slot]))
            result = result - np.moveaxis(term, 1, slot + 1)
    return result


def curvature(connection: Connection, frame: LieFrame) -> np.ndarray:
    """R[i, j, k, l] = g(R_{e_i, e_j} e_k, e_l) with R(X, Y) = [∇_X, ∇_Y] - ∇_[X,Y]."""
    gamma = connection.gamma
    vector = (
        np.einsum("jks,ist->ijkt", gamma, gamma)
        - np.einsum("iks,jst->ijkt", gamma, gamma)
        - np.einsum("ijl,lkt->ijkt", frame.structure, gamma)
    )
    return np.einsum("ijkt,tl->ijkl", vector, frame.metric)


def codifferential(a: KForm, frame: HermitianFrame) -> KForm:
    """δ = -*d*."""
    if a.degree < 1:
        raise DegreeUnderflowError("codifferential of a degree-0 form")
    star = hodge_star(a, frame.space)
    return -hodge_star(exterior_derivative(star, frame), frame.space)


def nabla_codifferential(a: KForm, connection: Connection, frame: LieFrame) -> KForm:
    """δ^∇ a = -Σ e_i ⌟ ∇_{e_i} a over an orthonormal basis (metric trace in general)."""
    if a.degree < 1:
        raise DegreeUnderflowError("∇-codifferential of a degree-0 form")
    derivative = covariant_derivative(a, connection, frame)
    traced = -np.einsum("ab,ba...->...", frame.metric_inverse, derivative)
    if a.degree == 1:
        return KForm.scalar(a.dim, float(traced))
    return KForm.from_tensor(traced)


def codifferential_defect(a: KForm, torsion: KForm, frame: HermitianFrame) -> KForm:
    """δ^∇ a - δ a for the connection ∇ = ∇^g + T/2 with skew torsion T.

    Equals -Σ_{i<j} (e_i ⌟ e_j ⌟ T) ∧ (e_i ⌟ e_j ⌟ a) in an orthonormal basis;
    zero on 1-forms.
    """
    if a.degree < 1:
        raise DegreeUnderflowError("codifferential defect of a degree-0 form")
    if a.degree == 1:
        return KForm.scalar(a.dim, 0.0)
    basis = frame.space.orthonormal_basis
    result = KForm.zero(a.dim, a.degree - 1)
    for i in range(frame.dim):
        for j in range(i + 1, frame.dim):
            ei, ej = basis[:, i], basis[:, j]
            t_part = interior(ei, interior(ej, torsion))
            a_part = interior(ei, interior(ej, a))
            result = result - wedge(t_part, a_part)
    return result


def random_hermitian_frame(
    structure: np.ndarray, rng: np.random.Generator, name: str = "random"
) -> HermitianFrame:
    """Random hermitian structure on a fixed Lie algebra (J need not be integrable)."""
    m = structure.shape[0] // 2
    space = random_hermitian_space(m, rng)
    return HermitianFrame(metric=space.metric, structure=structure, name=name, J=space.J)
