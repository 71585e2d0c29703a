"""Hermitian invariants: Lee form, characteristic connection and torsion, and the metric predicates."""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from gcelab.core.lie_frame import (
    Connection,
    HermitianFrame,
    codifferential,
    covariant_derivative,
    curvature,
    exterior_derivative,
    levi_civita,
    metric_residual,
    torsion_of,
)
from gcelab.core.multilinear import (
    DEFAULT_TOLERANCE,
    KForm,
    interior,
    j_group_action,
    j_one_form,
    omega_trace,
    type_project,
    wedge,
)
from gcelab.exceptions import (
    GceLabError,
    NoCharacteristicConnectionError,
    UnsupportedDimensionError,
)

logger = logging.getLogger(__name__)

LEE_THRESHOLD = 1e-6


class CaseTag:
    """Local classification of a GCE structure"""

    VAISMAN = "vaisman"
    PSEUDO_VAISMAN_MIXED = "pseudo_vaisman_mixed"  # indefinite Vaisman after modification
    SASAKI_LINE_KAHLER = "sasaki_line_kahler"  # Sasakian x line x Kähler
    SASAKIAN_PRODUCT = "sasakian_product"
    NOT_APPLICABLE = "not_applicable"

    ALL = (VAISMAN, PSEUDO_VAISMAN_MIXED, SASAKI_LINE_KAHLER, SASAKIAN_PRODUCT, NOT_APPLICABLE)


@dataclass
class Flag:
    value: bool
    residual: float


@dataclass
class HermitianInvariants:
    """ω, θ, T, Ω₀, Ω and the LP constant of one frame."""

    omega: KForm
    d_omega: KForm
    theta: KForm
    J_theta: KForm
    T: KForm
    Omega0: KForm
    Omega4: KForm
    integrable: bool
    nijenhuis_residual: float
    c: Optional[float] = None

    @property
    def eta(self) -> KForm:
        """η := -2Jθ (not normalized)."""
        return self.J_theta * -2.0


@dataclass
class ClassificationReport:
    """Predicate flags with residuals, the LP constant and the local case tag."""

    frame_name: str
    tolerance: float
    flags: Dict[str, Flag]
    lee_norm: float
    lee_vanishes: bool
    c: Optional[float] = None
    c_signed: Optional[float] = None
    case_tag: str = CaseTag.NOT_APPLICABLE
    eigen_summary: List[Tuple[float, float]] = field(default_factory=list)
    residuals: Dict[str, float] = field(default_factory=dict)

    def flag(self, name: str) -> bool:
        return self.flags[name].value


def _require_complex_surface_or_higher(frame: HermitianFrame) -> None:
    if frame.m < 2:
        raise UnsupportedDimensionError(
            f"the Lee form needs complex dimension >= 2, got {frame.m}"
        )


def lee_form(frame: HermitianFrame) -> KForm:
    """Unique θ with dω = -2θ∧ω + Ω₀, Ω₀ trace-free: θ = -Tr(dω) / (4(m-1))."""
    _require_complex_surface_or_higher(frame)
    d_omega = exterior_derivative(frame.omega, frame)
    return omega_trace(d_omega, frame.space) * (-1.0 / (4 * (frame.m - 1)))


def lee_form_via_codifferential(frame: HermitianFrame) -> KForm:
    """θ = -1/(2(m-1)) J δω."""
    _require_complex_surface_or_higher(frame)
    delta = codifferential(frame.omega, frame)
    return j_one_form(delta, frame.space) * (-1.0 / (2 * (frame.m - 1)))


def nijenhuis(frame: HermitianFrame) -> np.ndarray:
    """N[i, j, :] = N(e_i, e_j) with 4N(X, Y) = [JX, JY] - J[JX, Y] - J[X, JY] - [X, Y]."""
    J, C = frame.J, frame.structure
    both = np.einsum("ai,bj,abk->ijk", J, J, C)
    left = np.einsum("kl,ai,ajl->ijk", J, J, C)
    right = np.einsum("kl,bj,ibl->ijk", J, J, C)
    return 0.25 * (both - left - right - C)


def is_integrable(frame: HermitianFrame, tolerance: float = DEFAULT_TOLERANCE) -> bool:
    return float(np.max(np.abs(nijenhuis(frame)))) <= tolerance


def characteristic_torsion(frame: HermitianFrame, tolerance: float = DEFAULT_TOLERANCE) -> KForm:
    """T = -𝔍dω (the inverse of dω = 𝔍T)."""
    if not is_integrable(frame, tolerance):
        logger.warning(
            f"frame '{frame.name}' has non-integrable J; T = -𝔍dω is not a characteristic torsion"
        )
    return -j_group_action(exterior_derivative(frame.omega, frame), frame.space)


def characteristic_connection(
    frame: HermitianFrame, tolerance: float = DEFAULT_TOLERANCE
) -> Connection:
    """∇ = ∇^g + T/2 with indices raised by g."""
    residual = float(np.max(np.abs(nijenhuis(frame))))
    if residual > tolerance:
        raise NoCharacteristicConnectionError(
            f"J is not integrable on '{frame.name}' (Nijenhuis residual {residual:.3e})"
        )
    torsion = characteristic_torsion(frame, tolerance).to_tensor()
    raised = np.einsum("ijl,lk->ijk", torsion, frame.metric_inverse)
    return Connection(levi_civita(frame).gamma + 0.5 * raised, name="characteristic")


def characteristic_residuals(frame: HermitianFrame, connection: Connection) -> Dict[str, float]:
    """Post-conditions ∇g = 0, ∇J = 0, torsion(∇) = T, ∇ω = 0."""
    torsion = characteristic_torsion(frame).to_tensor()
    lowered = np.einsum("ijs,sk->ijk", torsion_of(connection, frame), frame.metric)
    return {
        "metric": metric_residual(connection, frame),
        "complex_structure": float(
            np.max(np.abs(covariant_derivative(frame.J, connection, frame, upper=[True, False])))
        ),
        "torsion": float(np.max(np.abs(lowered - torsion))),
        "kahler_form": float(
            np.max(np.abs(covariant_derivative(frame.omega, connection, frame)))
        ),
    }


def bianchi_four_form(torsion: KForm, frame: HermitianFrame) -> KForm:
    """Ω = ½ Σ_i (e_i ⌟ T) ∧ (e_i ⌟ T) over an orthonormal basis."""
    if frame.dim < 4:
        raise UnsupportedDimensionError("the Bianchi 4-form needs dimension >= 4")
    result = KForm.zero(frame.dim, 4)
    for vector in frame.space.orthonormal_basis.T:
        part = interior(vector, torsion)
        result = result + wedge(part, part)
    return result * 0.5


def bianchi_cyclic_sum(connection: Connection, frame: HermitianFrame) -> np.ndarray:
    """𝔖R(X, Y, Z, V) = R(X,Y,Z,V) + R(Y,Z,X,V) + R(Z,X,Y,V)."""
    R = curvature(connection, frame)
    return R + np.transpose(R, (1, 2, 0, 3)) + np.transpose(R, (2, 0, 1, 3))


def torsion_parallel_residual(frame: HermitianFrame, connection: Optional[Connection] = None) -> float:
    connection = connection or characteristic_connection(frame)
    torsion = characteristic_torsion(frame)
    return float(np.max(np.abs(covariant_derivative(torsion, connection, frame))))


def hermitian_invariants(frame: HermitianFrame, tolerance: float = DEFAULT_TOLERANCE) -> HermitianInvariants:
    d_omega = exterior_derivative(frame.omega, frame)
    theta = lee_form(frame)
    omega0 = d_omega + wedge(theta, frame.omega) * 2.0
    torsion = -j_group_action(d_omega, frame.space)
    n_residual = float(np.max(np.abs(nijenhuis(frame))))
    c, _ = fit_lp_constant(d_omega, theta, frame) if theta.norm() > LEE_THRESHOLD else (None, 0.0)
    return HermitianInvariants(
        omega=frame.omega,
        d_omega=d_omega,
        theta=theta,
        T=torsion,
        Omega0=omega0,
        Omega4=bianchi_four_form(torsion, frame),
        integrable=n_residual <= tolerance,
        nijenhuis_residual=n_residual,
        J_theta=j_one_form(theta, frame.space),
        c=c,
    )


def lp_basis_form(theta: KForm, frame: HermitianFrame) -> KForm:
    """dθ∧Jθ - θ∧d(Jθ)."""
    j_theta = j_one_form(theta, frame.space)
    return wedge(exterior_derivative(theta, frame), j_theta) - wedge(
        theta, exterior_derivative(j_theta, frame)
    )


def fit_lp_constant(d_omega: KForm, theta: KForm, frame: HermitianFrame) -> Tuple[Optional[float], float]:
    """Least-squares c in dω = c(dθ∧Jθ - θ∧d(Jθ)) over all components; returns (c, residual)."""
    target = lp_basis_form(theta, frame)
    denominator = float(target.components @ target.components)
    if denominator < 1e-24:
        return None, d_omega.max_abs()
    c = float(d_omega.components @ target.components) / denominator
    return c, (d_omega - target * c).max_abs()


def lp_line_fit(frame: HermitianFrame, a: float, b: float) -> Tuple[Optional[float], float]:
    """LP fit for the potential aθ + bJθ; a valid LP pair gives c' = c/(a² + b²)."""
    theta = lee_form(frame)
    potential = theta * a + j_one_form(theta, frame.space) * b
    return fit_lp_constant(exterior_derivative(frame.omega, frame), potential, frame)


def lee_vector_fields_commute(frame: HermitianFrame) -> float:
    """Size of [θ♯, Jθ♯]; vanishes on GCE frames."""
    theta_vector = frame.space.sharp(lee_form(frame))
    return float(np.max(np.abs(frame.bracket(theta_vector, frame.J @ theta_vector))))


def classify_metric(
    frame: HermitianFrame,
    tolerance: float = DEFAULT_TOLERANCE,
    lee_threshold: float = LEE_THRESHOLD,
) -> ClassificationReport:
    """Evaluate the Kähler / l.c.K. / LP / Vaisman / GCE predicates on a frame."""
    inv = hermitian_invariants(frame, tolerance)
    residuals: Dict[str, float] = {}
    flags: Dict[str, Flag] = {}

    lee_norm = inv.theta.norm()
    lee_nonzero = lee_norm > lee_threshold
    flags["lee_nonzero"] = Flag(lee_nonzero, lee_norm)
    flags["integrable"] = Flag(inv.integrable, inv.nijenhuis_residual)

    d_omega_size = inv.d_omega.max_abs()
    flags["kahler"] = Flag(d_omega_size <= tolerance, d_omega_size)

    d_theta = exterior_derivative(inv.theta, frame)
    lck_residual = max(inv.Omega0.max_abs(), d_theta.max_abs())
    flags["lck"] = Flag(lck_residual <= tolerance, lck_residual)

    c_signed = None
    if not lee_nonzero:
        flags["lp"] = Flag(d_omega_size <= tolerance, d_omega_size)
    else:
        c_signed, lp_residual = fit_lp_constant(inv.d_omega, inv.theta, frame)
        type_residual = type_project(d_theta, frame.space).pure.max_abs()
        residuals["lp.fit"] = lp_residual
        residuals["lp.d_theta_type"] = type_residual
        holds = (
            c_signed is not None
            and c_signed > 0
            and lp_residual <= tolerance
            and type_residual <= tolerance
        )
        flags["lp"] = Flag(holds, max(lp_residual, type_residual))

    levi = levi_civita(frame)
    lee_parallel = float(np.max(np.abs(covariant_derivative(inv.theta, levi, frame))))
    residuals["lee.levi_civita_parallel"] = lee_parallel
    vaisman_residual = max(lck_residual, lee_parallel)
    flags["vaisman"] = Flag(
        flags["lck"].value and lee_nonzero and lee_parallel <= tolerance, vaisman_residual
    )

    connection = None
    if inv.integrable:
        connection = characteristic_connection(frame, tolerance)
        parallel = float(np.max(np.abs(covariant_derivative(inv.T, connection, frame))))
        flags["parallel_torsion"] = Flag(parallel <= tolerance, parallel)
    else:
        flags["parallel_torsion"] = Flag(False, inv.nijenhuis_residual)

    flags["gce"] = Flag(
        flags["lp"].value and flags["parallel_torsion"].value and lee_nonzero,
        max(flags["lp"].residual, flags["parallel_torsion"].residual),
    )

    residuals["lee.trace_free_remainder"] = omega_trace(inv.Omega0, frame.space).max_abs()
    residuals["torsion.roundtrip"] = (
        j_group_action(inv.T, frame.space) - inv.d_omega
    ).max_abs()

    report = ClassificationReport(
        frame_name=frame.name,
        tolerance=tolerance,
        flags=flags,
        lee_norm=lee_norm,
        lee_vanishes=not lee_nonzero,
        c=c_signed if flags["lp"].value else None,
        c_signed=c_signed,
        residuals=residuals,
    )

    if flags["parallel_torsion"].value and lee_nonzero:
        from gcelab.services.torsion_structure import (
            classify_local,
            decompose_torsion,
            split_eigenspaces,
        )

        try:
            decomposition = decompose_torsion(frame, tolerance=tolerance)
            eigenspaces = split_eigenspaces(decomposition)
            report.case_tag = classify_local(decomposition, eigenspaces)
            report.eigen_summary = [(e.a_plus, e.a_minus) for e in eigenspaces]
            residuals["structure.reconstruction"] = decomposition.residuals["reconstruction"]
        except GceLabError as e:
            logger.warning(f"no local case for '{frame.name}': {e}")

    logger.debug(
        f"classified '{frame.name}': "
        + ", ".join(f"{k}={v.value}" for k, v in flags.items())
        + f", case={report.case_tag}"
    )
    return report
