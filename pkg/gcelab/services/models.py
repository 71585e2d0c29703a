"""Model frames: homogeneous Sasakian factors, their products and the Calabi–Eckmann family."""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Optional, Sequence

import numpy as np

from gcelab.core.lie_frame import (
    HermitianFrame,
    LieFrame,
    curvature,
    exterior_derivative,
    levi_civita,
    covariant_derivative,
    structure_from_brackets,
)
from gcelab.core.multilinear import DEFAULT_TOLERANCE, KForm, standard_complex_structure, wedge
from gcelab.exceptions import (
    FrameMismatchError,
    InvalidParameterError,
    InvalidSasakianError,
    UnknownModelError,
    UnsupportedDimensionError,
)

logger = logging.getLogger(__name__)

# curvature parameter κ of [e3, e1] = κ e2, [e1, e2] = κ e3
SASAKIAN_KINDS: Dict[str, Optional[float]] = {
    "sphere": 2.0,
    "nil": 0.0,
    "sl2": -2.0,
    "line": None,
}


@dataclass(frozen=True, eq=False)
class SasakianFrame(LieFrame):
    """Odd-dimensional metric Lie algebra with Reeb vector e_{reeb_index}.

    `phi` is the CR structure on H = ξ^⊥ (zero on ξ); when omitted it is
    read off as -∇^g ξ.
    """

    phi: Optional[np.ndarray] = None
    reeb_index: int = 0
    kind: str = ""

    def __post_init__(self):
        super().__post_init__()
        if self.dim % 2 == 0:
            raise FrameMismatchError(f"Sasakian frames are odd-dimensional, got {self.dim}")
        if not 0 <= self.reeb_index < self.dim:
            raise FrameMismatchError(f"Reeb index {self.reeb_index} outside 0..{self.dim - 1}")
        if self.phi is None:
            phi = -self.reeb_derivative
        else:
            phi = np.array(self.phi, dtype=float)
            if phi.shape != (self.dim, self.dim):
                raise FrameMismatchError(f"phi of shape {phi.shape} on frame of dim {self.dim}")
        phi.setflags(write=False)
        object.__setattr__(self, "phi", phi)

    @property
    def xi(self) -> np.ndarray:
        return np.eye(self.dim)[:, self.reeb_index]

    @cached_property
    def contact_form(self) -> KForm:
        return KForm.covector(self.metric @ self.xi)

    @cached_property
    def reeb_derivative(self) -> np.ndarray:
        """Matrix of X ↦ ∇^g_X ξ."""
        return levi_civita(self).gamma[:, self.reeb_index, :].T

    @cached_property
    def transverse_kahler_form(self) -> KForm:
        """ω₀(X, Y) = g(φX, Y)."""
        return KForm.from_matrix(self.phi.T @ self.metric)

    @cached_property
    def H_basis(self) -> np.ndarray:
        """g-orthonormal columns h, φh, ... spanning ξ^⊥."""
        g = self.metric
        columns = []
        for candidate in np.eye(self.dim):
            if len(columns) == self.dim - 1:
                break
            vec = candidate - (self.xi @ g @ candidate) * self.xi / (self.xi @ g @ self.xi)
            for b in columns:
                vec = vec - (b @ g @ vec) * b
            length = float(np.sqrt(max(vec @ g @ vec, 0.0)))
            if length < 1e-8:
                continue
            vec = vec / length
            partner = self.phi @ vec
            for b in columns:
                partner = partner - (b @ g @ partner) * b
            partner_length = float(np.sqrt(max(partner @ g @ partner, 0.0)))
            if partner_length < 1e-8:
                raise InvalidSasakianError("cr-structure", detail="phi degenerates on H")
            columns.extend([vec, partner / partner_length])
        return np.column_stack(columns) if columns else np.zeros((self.dim, 0))


@dataclass
class SasakianCheck:
    residuals: Dict[str, float] = field(default_factory=dict)
    contact_volume: float = 0.0
    tolerance: float = DEFAULT_TOLERANCE

    @property
    def passed(self) -> bool:
        return all(v <= self.tolerance for v in self.residuals.values()) and (
            self.contact_volume > self.tolerance
        )

    def failures(self) -> Dict[str, float]:
        failed = {k: v for k, v in self.residuals.items() if v > self.tolerance}
        if self.contact_volume <= self.tolerance:
            failed["contact"] = self.contact_volume
        return failed


def check_sasakian(frame: SasakianFrame, tolerance: float = DEFAULT_TOLERANCE) -> SasakianCheck:
    """Unit Killing ξ, ∇ξ|_H a complex structure, contact λ and dλ = -2ω₀."""
    g, xi = frame.metric, frame.xi
    lam = frame.contact_form
    levi = levi_civita(frame)
    nabla_lambda = covariant_derivative(lam, levi, frame)
    H = frame.H_basis
    S = H.T @ g @ frame.reeb_derivative @ H
    ad = frame.structure[frame.reeb_index].T
    d_lambda = exterior_derivative(lam, frame)
    normalization = (
        (d_lambda + frame.transverse_kahler_form * 2.0).max_abs() if frame.dim > 1 else 0.0
    )

    residuals = {
        "unit": abs(float(xi @ g @ xi) - 1.0),
        "killing": float(np.max(np.abs(nabla_lambda + nabla_lambda.T))),
        "sasakian": float(np.max(np.abs(S @ S + np.eye(S.shape[0])))) if S.size else 0.0,
        "normalization": normalization,
        "reeb_metric": float(np.max(np.abs(ad.T @ g + g @ ad))),
        "reeb_cr": float(np.max(np.abs(ad @ frame.phi - frame.phi @ ad))),
    }
    if frame.dim == 1:
        volume = abs(float(lam.components[0]))
    else:
        top = lam
        for _ in range((frame.dim - 1) // 2):
            top = wedge(top, d_lambda)
        volume = abs(float(top.components[0]))
    check = SasakianCheck(residuals=residuals, contact_volume=volume, tolerance=tolerance)
    logger.debug(f"Sasakian check of '{frame.name}': {residuals}, contact volume {volume:.3g}")
    return check


def ensure_sasakian(frame: SasakianFrame, tolerance: float = DEFAULT_TOLERANCE) -> SasakianFrame:
    check = check_sasakian(frame, tolerance)
    if not check.passed:
        name, residual = max(check.failures().items(), key=lambda item: item[1])
        raise InvalidSasakianError(name, residual, f"frame '{frame.name}'")
    return frame


def sasakian_model(kind: str, name: str = "") -> SasakianFrame:
    """Left-invariant Sasakian structure on SU(2), Nil³ or SL(2, R)~, or the Reeb line.

    [e2, e3] = 2e1, [e3, e1] = κe2, [e1, e2] = κe3 with ξ = e1 and φe2 = e3.
    """
    if kind not in SASAKIAN_KINDS:
        raise UnknownModelError(f"unknown Sasakian model '{kind}' (expected one of {list(SASAKIAN_KINDS)})")
    kappa = SASAKIAN_KINDS[kind]
    if kappa is None:
        return SasakianFrame(
            metric=np.eye(1), structure=np.zeros((1, 1, 1)), name=name or kind, kind=kind,
            phi=np.zeros((1, 1)),
        )
    structure = structure_from_brackets(3, [(1, 2, 0, 2.0), (2, 0, 1, kappa), (0, 1, 2, kappa)])
    phi = np.zeros((3, 3))
    phi[2, 1], phi[1, 2] = 1.0, -1.0
    frame = SasakianFrame(metric=np.eye(3), structure=structure, name=name or kind, kind=kind, phi=phi)
    return ensure_sasakian(frame)


def heisenberg_model(weights: Sequence[float] = (1.0,), name: str = "") -> SasakianFrame:
    """Heisenberg algebra ξ, x1, y1, ..., xp, yp with [x_i, y_i] = 2w_i ξ and |x_i|² = |y_i|² = w_i."""
    weights = [float(w) for w in weights]
    if not weights or any(w <= 0 for w in weights):
        raise InvalidParameterError(f"Heisenberg weights must be positive, got {weights}")
    dim = 1 + 2 * len(weights)
    brackets = [(1 + 2 * i, 2 + 2 * i, 0, 2.0 * w) for i, w in enumerate(weights)]
    metric = np.diag([1.0] + [w for w in weights for _ in range(2)])
    phi = np.zeros((dim, dim))
    for i in range(len(weights)):
        x, y = 1 + 2 * i, 2 + 2 * i
        phi[y, x], phi[x, y] = 1.0, -1.0
    frame = SasakianFrame(
        metric=metric,
        structure=structure_from_brackets(dim, brackets),
        name=name or f"heisenberg{dim}",
        kind="nil",
        phi=phi,
    )
    return ensure_sasakian(frame)


def base_curvature(frame: SasakianFrame) -> float:
    """Gauss curvature of the base surface, K_H + ¾ λ([h, φh])² for orthonormal h, φh."""
    if frame.dim != 3:
        raise UnsupportedDimensionError("base curvature is defined for 3-dimensional factors")
    R = curvature(levi_civita(frame), frame)
    h1, h2 = frame.H_basis.T
    sectional = float(np.einsum("i,j,k,l,ijkl->", h1, h2, h2, h1, R))
    vertical = frame.contact_form.evaluate(frame.bracket(h1, h2))
    return sectional + 0.75 * vertical**2


def _require_reeb_first(frame: SasakianFrame) -> None:
    if frame.reeb_index != 0:
        raise InvalidSasakianError(
            "reeb-first", detail=f"'{frame.name}' must have ξ = e1 to enter a product"
        )


def sasakian_product(
    first: SasakianFrame,
    second: SasakianFrame,
    name: str = "",
    tolerance: float = DEFAULT_TOLERANCE,
) -> HermitianFrame:
    """g = g1 + g2 with Jξ₁ = ξ₂ and J = φ_i on H_i; basis ξ₁, H₁, ξ₂, H₂."""
    for factor in (first, second):
        ensure_sasakian(factor, tolerance)
        _require_reeb_first(factor)
    n1, n2 = first.dim, second.dim
    dim = n1 + n2
    metric = np.zeros((dim, dim))
    metric[:n1, :n1] = first.metric
    metric[n1:, n1:] = second.metric
    structure = np.zeros((dim, dim, dim))
    structure[:n1, :n1, :n1] = first.structure
    structure[n1:, n1:, n1:] = second.structure
    J = np.zeros((dim, dim))
    J[:n1, :n1] = first.phi
    J[n1:, n1:] = second.phi
    J[n1, 0], J[0, n1] = 1.0, -1.0
    frame = HermitianFrame(
        metric=metric,
        structure=structure,
        name=name or f"{first.name}x{second.name}",
        J=J,
        tolerance=tolerance,
    )
    logger.debug(f"built Sasakian product '{frame.name}' of dimension {dim}")
    return frame


def calabi_eckmann(
    first: SasakianFrame,
    second: SasakianFrame,
    alpha: complex,
    name: str = "",
    tolerance: float = DEFAULT_TOLERANCE,
) -> HermitianFrame:
    """Product with J_α ξ₁ = Re(α) ξ₁ + Im(α) ξ₂ and g_α making ξ₁, J_α ξ₁ orthonormal.

    On E = span{ξ₁, ξ₂}: J_α = [[a, -(1 + a²)/b], [b, -a]] and
    g_α = [[1, -a/b], [-a/b, (1 + a²)/b²]] for α = a + ib.
    """
    alpha = complex(alpha)
    a, b = alpha.real, alpha.imag
    if b <= 0:
        raise InvalidParameterError(f"Im α must be positive, got α = {alpha}")
    product = sasakian_product(first, second, tolerance=tolerance)
    n1 = first.dim
    metric = np.array(product.metric)
    J = np.array(product.J)
    E = [0, n1]
    metric[np.ix_(E, E)] = [[1.0, -a / b], [-a / b, (1.0 + a * a) / (b * b)]]
    J[np.ix_(E, E)] = [[a, -(1.0 + a * a) / b], [b, -a]]
    return product.with_structure(
        metric, J, name=name or f"ce_{first.name}x{second.name}[{a:g}{b:+g}i]"
    )


def hopf_frame(kind: str = "sphere", name: str = "") -> HermitianFrame:
    """Sasakian factor times the Reeb line: a Vaisman frame."""
    default = "hopf" if kind == "sphere" else f"hopf_{kind}"
    return sasakian_product(sasakian_model(kind), sasakian_model("line"), name=name or default)


def kahler_extension(frame: HermitianFrame, complex_dim: int = 1, name: str = "") -> HermitianFrame:
    """Direct sum with a flat abelian C^k carrying its standard structure."""
    if complex_dim < 1:
        raise InvalidParameterError("the flat factor needs complex dimension >= 1")
    n, k = frame.dim, 2 * complex_dim
    dim = n + k
    metric = np.eye(dim)
    metric[:n, :n] = frame.metric
    J = np.zeros((dim, dim))
    J[:n, :n] = frame.J
    J[n:, n:] = standard_complex_structure(complex_dim)
    structure = np.zeros((dim, dim, dim))
    structure[:n, :n, :n] = frame.structure
    return HermitianFrame(
        metric=metric,
        structure=structure,
        name=name or f"{frame.name}xC{complex_dim}",
        J=J,
        tolerance=frame.tolerance,
    )


def line_kahler_frame(kind: str = "nil", name: str = "") -> HermitianFrame:
    """Sasakian x line x C: one eigenspace with a⁺ = 0."""
    return kahler_extension(hopf_frame(kind), 1, name=name or f"{kind}_line_kahler")


def flat_frame(m: int = 2, name: str = "flat") -> HermitianFrame:
    """Abelian C^m: Kähler with vanishing Lee form."""
    return HermitianFrame(
        metric=np.eye(2 * m),
        structure=np.zeros((2 * m,) * 3),
        name=name,
        J=standard_complex_structure(m),
    )
