"""Exterior algebra over a hermitian vector space: forms, star operator and type decomposition."""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import ortho_group

from gcelab.exceptions import (
    DegreeUnderflowError,
    DegreeUnsupportedError,
    FrameMismatchError,
    InvariantViolationError,
)

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-9


# ---------------------------------------------------------------------------
# multi-index bookkeeping
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def multi_indices(dim: int, degree: int) -> Tuple[Tuple[int, ...], ...]:
    """Strictly increasing multi-indices in lexicographic order."""
    return tuple(itertools.combinations(range(dim), degree))


@lru_cache(maxsize=None)
def _index_lookup(dim: int, degree: int) -> Dict[Tuple[int, ...], int]:
    return {idx: pos for pos, idx in enumerate(multi_indices(dim, degree))}


def _merge_sign(left: Sequence[int], right: Sequence[int]) -> int:
    inversions = sum(1 for i in left for j in right if i > j)
    return -1 if inversions % 2 else 1


def _permutation_sign(perm: Sequence[int]) -> int:
    sign = 1
    seen = list(perm)
    for i in range(len(seen)):
        for j in range(i + 1, len(seen)):
            if seen[i] > seen[j]:
                sign = -sign
    return sign


@lru_cache(maxsize=None)
def _wedge_table(dim: int, p: int, q: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    lookup = _index_lookup(dim, p + q)
    rows_a, rows_b, rows_out, signs = [], [], [], []
    for ia, left in enumerate(multi_indices(dim, p)):
        used = set(left)
        for ib, right in enumerate(multi_indices(dim, q)):
            if used.intersection(right):
                continue
            merged = tuple(sorted(left + right))
            rows_a.append(ia)
            rows_b.append(ib)
            rows_out.append(lookup[merged])
            signs.append(_merge_sign(left, right))
    return (
        np.asarray(rows_a, dtype=int),
        np.asarray(rows_b, dtype=int),
        np.asarray(rows_out, dtype=int),
        np.asarray(signs, dtype=float),
    )


@lru_cache(maxsize=None)
def _interior_table(dim: int, degree: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Rows (out, slot vector index, source component, sign) for contraction in the first slot."""
    lookup = _index_lookup(dim, degree)
    outs, vecs, srcs, signs = [], [], [], []
    for io, rest in enumerate(multi_indices(dim, degree - 1)):
        for i in range(dim):
            if i in rest:
                continue
            full = tuple(sorted((i,) + rest))
            outs.append(io)
            vecs.append(i)
            srcs.append(lookup[full])
            signs.append(-1.0 if sum(1 for r in rest if r < i) % 2 else 1.0)
    return (
        np.asarray(outs, dtype=int),
        np.asarray(vecs, dtype=int),
        np.asarray(srcs, dtype=int),
        np.asarray(signs, dtype=float),
    )


@lru_cache(maxsize=None)
def _expansion_table(dim: int, degree: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Flat tensor positions, component index and sign of every permuted multi-index."""
    flats, comps, signs = [], [], []
    perms = [(perm, _permutation_sign(perm)) for perm in itertools.permutations(range(degree))]
    strides = [dim ** (degree - 1 - r) for r in range(degree)]
    for ic, idx in enumerate(multi_indices(dim, degree)):
        for perm, sign in perms:
            permuted = [idx[p] for p in perm]
            flats.append(sum(s * v for s, v in zip(strides, permuted)))
            comps.append(ic)
            signs.append(float(sign))
    return np.asarray(flats, dtype=int), np.asarray(comps, dtype=int), np.asarray(signs)


@lru_cache(maxsize=None)
def _merge_sign_matrix(dim: int, degree: int) -> np.ndarray:
    """S[I, K] = sign of e^I wedge e^K against the volume monomial (zero when not complementary)."""
    size_p = math.comb(dim, degree)
    size_q = math.comb(dim, dim - degree)
    table = np.zeros((size_p, size_q))
    lookup_q = _index_lookup(dim, dim - degree)
    full = set(range(dim))
    for ip, idx in enumerate(multi_indices(dim, degree)):
        complement = tuple(sorted(full.difference(idx)))
        table[ip, lookup_q[complement]] = _merge_sign(idx, complement)
    return table


def compound_matrix(matrix: np.ndarray, degree: int) -> np.ndarray:
    """k-th compound: C[J, I] = det(M[J, I]) over increasing multi-indices."""
    dim = matrix.shape[0]
    if degree == 0:
        return np.ones((1, 1))
    idx = np.asarray(multi_indices(dim, degree), dtype=int)
    sub = matrix[idx[:, None, :, None], idx[None, :, None, :]]
    return np.linalg.det(sub)


# ---------------------------------------------------------------------------
# forms
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class KForm:
    """Alternating form of a given degree stored on increasing multi-indices.

    Evaluation follows the determinant convention: (e^1 ^ e^2)(e_1, e_2) = 1.
    """

    dim: int
    degree: int
    components: np.ndarray

    def __post_init__(self):
        comps = np.array(self.components, dtype=float).reshape(-1)
        if not 0 <= self.degree <= self.dim:
            raise DegreeUnsupportedError(
                f"degree {self.degree} outside 0..{self.dim}"
            )
        expected = math.comb(self.dim, self.degree)
        if comps.size != expected:
            raise FrameMismatchError(
                f"{comps.size} components given for a degree-{self.degree} form on dim {self.dim} "
                f"(expected {expected})"
            )
        comps.setflags(write=False)
        object.__setattr__(self, "components", comps)

    # -- constructors -----------------------------------------------------

    @classmethod
    def zero(cls, dim: int, degree: int) -> "KForm":
        return cls(dim, degree, np.zeros(math.comb(dim, degree)))

    @classmethod
    def scalar(cls, dim: int, value: float) -> "KForm":
        return cls(dim, 0, np.array([value]))

    @classmethod
    def basis(cls, dim: int, indices: Sequence[int]) -> "KForm":
        """e^{i1} ^ ... ^ e^{ik} with 0-based, not necessarily sorted indices."""
        indices = tuple(indices)
        degree = len(indices)
        form = cls.zero(dim, degree)
        if len(set(indices)) < degree:
            return form
        order = sorted(range(degree), key=lambda r: indices[r])
        comps = np.zeros(math.comb(dim, degree))
        comps[_index_lookup(dim, degree)[tuple(sorted(indices))]] = _permutation_sign(order)
        return cls(dim, degree, comps)

    @classmethod
    def covector(cls, values: Iterable[float]) -> "KForm":
        values = np.asarray(list(values), dtype=float)
        return cls(values.size, 1, values)

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> "KForm":
        """2-form whose value on (e_i, e_j) is matrix[i, j] (skew part taken)."""
        matrix = np.asarray(matrix, dtype=float)
        dim = matrix.shape[0]
        skew = 0.5 * (matrix - matrix.T)
        comps = np.array([skew[i, j] for i, j in multi_indices(dim, 2)])
        return cls(dim, 2, comps)

    @classmethod
    def from_tensor(cls, tensor: np.ndarray) -> "KForm":
        """Antisymmetrize a covariant tensor and keep its increasing components."""
        tensor = np.asarray(tensor, dtype=float)
        degree = tensor.ndim
        if degree == 0:
            raise DegreeUnsupportedError("from_tensor needs at least one index")
        dim = tensor.shape[0]
        flats, comps, signs = _expansion_table(dim, degree)
        values = np.zeros(math.comb(dim, degree))
        np.add.at(values, comps, signs * tensor.reshape(-1)[flats])
        return cls(dim, degree, values / math.factorial(degree))

    # -- views --------------------------------------------------------------

    def to_tensor(self) -> np.ndarray:
        """Full alternating array of shape (dim,) * degree."""
        if self.degree == 0:
            return np.asarray(self.components[0])
        flats, comps, signs = _expansion_table(self.dim, self.degree)
        flat = np.zeros(self.dim**self.degree)
        flat[flats] = signs * self.components[comps]
        return flat.reshape((self.dim,) * self.degree)

    def to_matrix(self) -> np.ndarray:
        if self.degree != 2:
            raise DegreeUnsupportedError("only 2-forms have a matrix view")
        return self.to_tensor()

    @property
    def value(self) -> float:
        if self.degree != 0:
            raise DegreeUnsupportedError("only degree-0 forms carry a scalar value")
        return float(self.components[0])

    def evaluate(self, *vectors: np.ndarray) -> float:
        if len(vectors) != self.degree:
            raise DegreeUnsupportedError(
                f"{len(vectors)} arguments for a form of degree {self.degree}"
            )
        result = self.to_tensor()
        for vec in vectors:
            result = np.tensordot(np.asarray(vec, dtype=float), result, axes=([0], [0]))
        return float(result)

    def norm(self) -> float:
        """Euclidean norm of the component vector (the frame norm)."""
        return float(np.linalg.norm(self.components))

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.components))) if self.components.size else 0.0

    # -- arithmetic -----------------------------------------------------------

    def _check_compatible(self, other: "KForm") -> None:
        if not isinstance(other, KForm):
            raise TypeError(f"expected KForm, got {type(other).__name__}")
        if other.dim != self.dim:
            raise FrameMismatchError(f"forms over dim {self.dim} and {other.dim}")
        if other.degree != self.degree:
            raise DegreeUnsupportedError(
                f"cannot add forms of degree {self.degree} and {other.degree}"
            )

    def __add__(self, other: "KForm") -> "KForm":
        self._check_compatible(other)
        return KForm(self.dim, self.degree, self.components + other.components)

    def __sub__(self, other: "KForm") -> "KForm":
        self._check_compatible(other)
        return KForm(self.dim, self.degree, self.components - other.components)

    def __neg__(self) -> "KForm":
        return KForm(self.dim, self.degree, -self.components)

    def __mul__(self, scalar: float) -> "KForm":
        return KForm(self.dim, self.degree, float(scalar) * self.components)

    __rmul__ = __mul__

    def __truediv__(self, scalar: float) -> "KForm":
        return KForm(self.dim, self.degree, self.components / float(scalar))

    def __repr__(self) -> str:
        return f"KForm(dim={self.dim}, degree={self.degree}, norm={self.norm():.3e})"


def wedge(a: KForm, b: KForm) -> KForm:
    """Alternating product, graded commutative."""
    if a.dim != b.dim:
        raise FrameMismatchError(f"wedge of forms over dim {a.dim} and {b.dim}")
    degree = a.degree + b.degree
    if degree > a.dim:
        raise DegreeUnsupportedError(
            f"wedge degree {degree} exceeds dimension {a.dim}"
        )
    rows_a, rows_b, rows_out, signs = _wedge_table(a.dim, a.degree, b.degree)
    out = np.zeros(math.comb(a.dim, degree))
    np.add.at(out, rows_out, signs * a.components[rows_a] * b.components[rows_b])
    return KForm(a.dim, degree, out)


def wedge_all(*forms: KForm) -> KForm:
    result = forms[0]
    for form in forms[1:]:
        result = wedge(result, form)
    return result


def interior(vector: np.ndarray, a: KForm) -> KForm:
    """Contraction v ⌟ a in the first slot."""
    if a.degree < 1:
        raise DegreeUnderflowError("interior product of a degree-0 form")
    vector = np.asarray(vector, dtype=float)
    if vector.shape != (a.dim,):
        raise FrameMismatchError(f"vector of shape {vector.shape} on dim {a.dim}")
    outs, vecs, srcs, signs = _interior_table(a.dim, a.degree)
    out = np.zeros(math.comb(a.dim, a.degree - 1))
    np.add.at(out, outs, signs * vector[vecs] * a.components[srcs])
    return KForm(a.dim, a.degree - 1, out)


def pullback(a: KForm, matrix: np.ndarray) -> KForm:
    """(M* a)(X1, ..., Xk) = a(M X1, ..., M Xk)."""
    matrix = np.asarray(matrix, dtype=float)
    if matrix.shape != (a.dim, a.dim):
        raise FrameMismatchError(f"matrix of shape {matrix.shape} on dim {a.dim}")
    return KForm(a.dim, a.degree, compound_matrix(matrix, a.degree).T @ a.components)


def random_form(dim: int, degree: int, rng: np.random.Generator, scale: float = 1.0) -> KForm:
    return KForm(dim, degree, scale * rng.standard_normal(math.comb(dim, degree)))


# ---------------------------------------------------------------------------
# hermitian vector space
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class HermitianVectorSpace:
    """Real inner-product space of dimension 2m with a compatible complex structure."""

    metric: np.ndarray
    J: np.ndarray
    tolerance: float = DEFAULT_TOLERANCE
    _cache: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        metric = np.array(self.metric, dtype=float)
        J = np.array(self.J, dtype=float)
        n = metric.shape[0]
        if metric.shape != (n, n) or J.shape != (n, n):
            raise FrameMismatchError(
                f"metric {metric.shape} and J {J.shape} must be square of equal size"
            )
        if n == 0 or n % 2:
            raise FrameMismatchError(f"hermitian spaces need even positive dimension, got {n}")
        scale = max(1.0, float(np.max(np.abs(metric))))
        symmetry = float(np.max(np.abs(metric - metric.T)))
        if symmetry > self.tolerance * scale:
            raise InvariantViolationError("metric-symmetric", symmetry)
        smallest = float(np.min(np.linalg.eigvalsh(metric)))
        if smallest <= self.tolerance:
            raise InvariantViolationError("metric-positive-definite", smallest)
        square = float(np.max(np.abs(J @ J + np.eye(n))))
        if square > self.tolerance * max(1.0, float(np.max(np.abs(J))) ** 2):
            raise InvariantViolationError("complex-structure", square, "J^2 != -1")
        hermitian = float(np.max(np.abs(J.T @ metric @ J - metric)))
        if hermitian > self.tolerance * scale * max(1.0, float(np.max(np.abs(J))) ** 2):
            raise InvariantViolationError("hermitian", hermitian, "g(J., J.) != g")
        metric.setflags(write=False)
        J.setflags(write=False)
        object.__setattr__(self, "metric", metric)
        object.__setattr__(self, "J", J)

    @property
    def dim(self) -> int:
        return self.metric.shape[0]

    @property
    def m(self) -> int:
        return self.dim // 2

    @cached_property
    def metric_inverse(self) -> np.ndarray:
        return np.linalg.inv(self.metric)

    @cached_property
    def omega(self) -> KForm:
        """Kähler form ω = g(J·, ·)."""
        return KForm.from_matrix(self.J.T @ self.metric)

    @cached_property
    def trace_vectors(self) -> np.ndarray:
        """Rows w_a with Σ_a α(e_a, w_a, ...) the ω-contraction in any basis."""
        return self.metric_inverse @ self.J.T

    @cached_property
    def orthonormal_basis(self) -> np.ndarray:
        return adapted_basis(self)

    def compound(self, which: str, degree: int) -> np.ndarray:
        key = (which, degree)
        if key not in self._cache:
            matrix = {"metric": self.metric, "inverse": self.metric_inverse, "J": self.J}[which]
            self._cache[key] = compound_matrix(matrix, degree)
        return self._cache[key]

    def inner(self, u: np.ndarray, v: np.ndarray) -> float:
        return float(np.asarray(u) @ self.metric @ np.asarray(v))

    def flat(self, vector: np.ndarray) -> KForm:
        """Metric dual covector g(v, ·)."""
        return KForm.covector(self.metric @ np.asarray(vector, dtype=float))

    def sharp(self, covector: KForm) -> np.ndarray:
        if covector.degree != 1:
            raise DegreeUnsupportedError("sharp expects a 1-form")
        return self.metric_inverse @ covector.components

    def check_form(self, a: KForm) -> None:
        if a.dim != self.dim:
            raise FrameMismatchError(f"form over dim {a.dim} used on space of dim {self.dim}")


def adapted_basis(space: HermitianVectorSpace, seeds: Sequence[np.ndarray] = ()) -> np.ndarray:
    """Columns b1, Jb1, b2, Jb2, ... orthonormal for g, built by Gram–Schmidt respecting J.

    Seed vectors are used first (in order), then the coordinate vectors.
    """
    n = space.dim
    g = space.metric
    columns = []
    candidates = [np.asarray(s, dtype=float) for s in seeds] + list(np.eye(n))
    for candidate in candidates:
        if len(columns) == n:
            break
        vec = candidate.copy()
        for _ in range(2):
            for b in columns:
                vec = vec - (b @ g @ vec) * b
        length = math.sqrt(max(float(vec @ g @ vec), 0.0))
        if length < 1e-8 * max(1.0, math.sqrt(float(candidate @ g @ candidate))):
            continue
        vec = vec / length
        columns.append(vec)
        columns.append(space.J @ vec)
    if len(columns) != n:
        raise InvariantViolationError("adapted-basis", detail="Gram–Schmidt did not span the space")
    return np.column_stack(columns)


def random_hermitian_space(m: int, rng: np.random.Generator, spread: float = 0.5) -> HermitianVectorSpace:
    """Standard structure transported by a random change of basis U·diag(s)·V.

    Singular values lie in [e^-spread, e^spread], so cond(g) <= e^(4 spread).
    """
    n = 2 * m
    j0 = standard_complex_structure(m)
    U = ortho_group.rvs(n, random_state=rng)
    V = ortho_group.rvs(n, random_state=rng)
    scales = np.exp(rng.uniform(-spread, spread, n))
    basis = U @ np.diag(scales) @ V
    inverse = V.T @ np.diag(1.0 / scales) @ U.T
    return HermitianVectorSpace(inverse.T @ inverse, basis @ j0 @ inverse)


def standard_complex_structure(m: int) -> np.ndarray:
    """Je_{2i-1} = e_{2i} (columns are images)."""
    J = np.zeros((2 * m, 2 * m))
    for i in range(m):
        J[2 * i + 1, 2 * i] = 1.0
        J[2 * i, 2 * i + 1] = -1.0
    return J


def standard_space(m: int) -> HermitianVectorSpace:
    return HermitianVectorSpace(np.eye(2 * m), standard_complex_structure(m))


# ---------------------------------------------------------------------------
# operations on a hermitian space
# ---------------------------------------------------------------------------


def inner_product(a: KForm, b: KForm, space: HermitianVectorSpace) -> float:
    """Determinant extension of g to k-forms."""
    space.check_form(a)
    a._check_compatible(b)
    return float(a.components @ space.compound("inverse", a.degree) @ b.components)


def form_norm(a: KForm, space: HermitianVectorSpace) -> float:
    return math.sqrt(max(inner_product(a, a, space), 0.0))


def omega_power(space: HermitianVectorSpace, k: int) -> KForm:
    """ω^k / k!."""
    key = ("omega_power", k)
    if key not in space._cache:
        if k < 0 or k > space.m:
            raise DegreeUnsupportedError(f"omega power {k} outside 0..{space.m}")
        result = KForm.scalar(space.dim, 1.0)
        for j in range(1, k + 1):
            result = wedge(result, space.omega) / j
        space._cache[key] = result
    return space._cache[key]


def volume_form(space: HermitianVectorSpace) -> KForm:
    return omega_power(space, space.m)


def hodge_star(a: KForm, space: HermitianVectorSpace) -> KForm:
    """Star defined by ⟨*a, b⟩ v_g = a ∧ b with v_g = ω^m/m!."""
    space.check_form(a)
    n, p = space.dim, a.degree
    nu = volume_form(space).components[0]
    signs = _merge_sign_matrix(n, p)
    comps = space.compound("metric", n - p) @ (signs.T @ a.components) / nu
    return KForm(n, n - p, comps)


def j_group_action(a: KForm, space: HermitianVectorSpace) -> KForm:
    """𝔍a(X1, ..., Xk) = (-1)^k a(JX1, ..., JXk)."""
    space.check_form(a)
    sign = -1.0 if a.degree % 2 else 1.0
    comps = space.compound("J", a.degree).T @ a.components
    return KForm(a.dim, a.degree, sign * comps)


def endomorphism_action(a: KForm, endomorphism: np.ndarray) -> KForm:
    """Derivation A.a(X1, ..., Xk) = -Σ_r a(X1, ..., AX_r, ..., Xk)."""
    endomorphism = np.asarray(endomorphism, dtype=float)
    if endomorphism.shape != (a.dim, a.dim):
        raise FrameMismatchError(f"endomorphism of shape {endomorphism.shape} on dim {a.dim}")
    if a.degree == 0:
        return KForm.zero(a.dim, 0)
    tensor = a.to_tensor()
    acc = np.zeros_like(tensor)
    for slot in range(a.degree):
        moved = np.tensordot(tensor, endomorphism, axes=([slot], [0]))
        acc = acc + np.moveaxis(moved, -1, slot)
    return KForm.from_tensor(-acc)


def j_algebra_action(a: KForm, space: HermitianVectorSpace) -> KForm:
    """J.a(X1, ..., Xk) = -Σ_r a(X1, ..., JX_r, ..., Xk)."""
    space.check_form(a)
    return endomorphism_action(a, space.J)


def j_one_form(theta: KForm, space: HermitianVectorSpace) -> KForm:
    """Jθ := -θ∘J on 1-forms."""
    if theta.degree != 1:
        raise DegreeUnsupportedError("Jθ is defined on 1-forms")
    return KForm.covector(-(space.J.T @ theta.components))


def omega_trace(a: KForm, space: HermitianVectorSpace) -> KForm:
    """Contraction with ω: a ↦ Σ_a a(e_a, J e_a, ...), summed over all 2m basis vectors."""
    space.check_form(a)
    if a.degree < 2:
        raise DegreeUnderflowError("omega_trace needs degree >= 2")
    result = KForm.zero(a.dim, a.degree - 2)
    for e_a, w_a in zip(np.eye(space.dim), space.trace_vectors):
        result = result + interior(w_a, interior(e_a, a))
    return result


@dataclass(frozen=True)
class TypeComponents:
    """Type decomposition of a 2- or 3-form."""

    degree: int
    mixed: KForm  # (1,1) for degree 2, (2,1)+(1,2) for degree 3
    pure: KForm  # (2,0)+(0,2), respectively (3,0)+(0,3)
    trace: KForm  # trace part of `mixed` (multiple of ω or β ∧ ω)
    trace_free: KForm
    trace_coefficient: KForm  # scalar for degree 2, 1-form β for degree 3

    def parts(self) -> Tuple[KForm, KForm]:
        return self.mixed, self.pure


def type_project(a: KForm, space: HermitianVectorSpace) -> TypeComponents:
    space.check_form(a)
    m = space.m
    if a.degree == 2:
        twisted = j_group_action(a, space)
        mixed = (a + twisted) * 0.5
        pure = (a - twisted) * 0.5
        coefficient = omega_trace(mixed, space) / (2 * m)
        trace = space.omega * coefficient.value
        return TypeComponents(2, mixed, pure, trace, mixed - trace, coefficient)
    if a.degree == 3:
        pure = (a + j_group_action(j_algebra_action(a, space), space)) * 0.25
        mixed = a - pure
        if m >= 2:
            beta = omega_trace(mixed, space) / (2 * (m - 1))
            trace = wedge(beta, space.omega)
        else:
            beta = KForm.zero(a.dim, 1)
            trace = KForm.zero(a.dim, 3)
        return TypeComponents(3, mixed, pure, trace, mixed - trace, beta)
    raise DegreeUnsupportedError(f"type projection supports degrees 2 and 3, got {a.degree}")


def hodge_identity_residuals(
    space: HermitianVectorSpace, rng: np.random.Generator
) -> Dict[str, float]:
    """Residuals of the seven star identities on random forms of the relevant types.

    On trace-free (2,1)+(1,2) forms the identity carries a minus sign:
    *a = -𝔍a ∧ ω^{m-3}/(m-3)!.
    """
    n, m = space.dim, space.m
    residuals: Dict[str, float] = {}
    volume = volume_form(space)
    one = KForm.scalar(n, 1.0)
    residuals["volume"] = (hodge_star(one, space) - volume).max_abs()

    alpha = random_form(n, 1, rng)
    lhs = hodge_star(alpha, space)
    rhs = wedge(j_algebra_action(alpha, space), omega_power(space, m - 1))
    residuals["one_form"] = (lhs - rhs).max_abs()

    residuals["omega_powers"] = max(
        (hodge_star(omega_power(space, k), space) - omega_power(space, m - k)).max_abs()
        for k in range(m + 1)
    )

    two = type_project(random_form(n, 2, rng), space)
    if m >= 2:
        wedge_m2 = omega_power(space, m - 2)
        residuals["trace_free_11"] = (
            hodge_star(two.trace_free, space) + wedge(two.trace_free, wedge_m2)
        ).max_abs()
        residuals["pure_20"] = (
            hodge_star(two.pure, space) - wedge(two.pure, wedge_m2)
        ).max_abs()
        residuals["one_form_omega"] = (
            hodge_star(wedge(alpha, space.omega), space)
            - wedge(j_algebra_action(alpha, space), wedge_m2)
        ).max_abs()
    if m >= 3:
        three = type_project(random_form(n, 3, rng), space)
        residuals["trace_free_21"] = (
            hodge_star(three.trace_free, space)
            + wedge(j_group_action(three.trace_free, space), omega_power(space, m - 3))
        ).max_abs()
    logger.debug(f"star identity residuals (m={m}): {residuals}")
    return residuals
