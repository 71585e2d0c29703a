"""Invariant suites over catalog models.

Each model gets an independent, seeded suite; suites fan out over a thread
pool and reports come back in request order.
"""

import logging
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from typing import Dict, List, Optional, Sequence

import numpy as np

from gcelab import __version__
from gcelab.api.schemas import (
    Catalog,
    CatalogEntry,
    CheckResult,
    ClassificationDocument,
    FlagDocument,
    VerificationReport,
    stable_float,
)
from gcelab.config import config
from gcelab.core.lie_frame import (
    HermitianFrame,
    codifferential,
    covariant_derivative,
    exterior_derivative,
    jacobi_residual,
    nabla_codifferential,
    codifferential_defect,
)
from gcelab.core.multilinear import (
    hodge_identity_residuals,
    random_form,
    random_hermitian_space,
)
from gcelab.exceptions import GceLabError, InvalidParameterError
from gcelab.services.characteristic import (
    CaseTag,
    ClassificationReport,
    bianchi_cyclic_sum,
    bianchi_four_form,
    characteristic_connection,
    characteristic_residuals,
    characteristic_torsion,
    classify_metric,
    fit_lp_constant,
    lee_form,
    lee_form_via_codifferential,
    lee_vector_fields_commute,
    nijenhuis,
    torsion_parallel_residual,
)
from gcelab.services.models import base_curvature, calabi_eckmann, check_sasakian, sasakian_model
from gcelab.services.torsion_structure import (
    classify_local,
    compute_modification_tensor,
    decompose_torsion,
    lee_plane_residual,
    modification_reference,
    modified_connection,
    parallel_modification,
    split_eigenspaces,
)
from gcelab.utils.catalog import document_to_frame, get_entry, load_catalog

logger = logging.getLogger(__name__)

BASE_CURVATURE = {"sphere": 4.0, "nil": 0.0, "sl2": -4.0}

STRUCTURE_ANCHORS = {
    "reconstruction": "T = η∧ω₊ + Jη∧ω₋ + T₀",
    "omega_types": "ω± of type (1,1) on H",
    "horizontal_plus": "ω₊ vanishes on E",
    "horizontal_minus": "ω₋ vanishes on E",
    "commutator": "[A₊, A₋] = 0",
    "T0_action": "A±.T₀ = 0",
    "T_eta_jeta": "T(η, Jη, ·) = 0",
    "T0": "T₀ = 0 on LP frames",
    "eta_parallel": "∇η = 0",
    "killing": "η dual to a Killing field",
    "eta_commute": "[η♯, Jη♯] = 0",
}


class CheckCollector:
    """Accumulates CheckResults; a check passes when its residual is within tolerance."""

    def __init__(self, tolerance: float):
        self.tolerance = tolerance
        self.checks: List[CheckResult] = []

    def add(
        self,
        check_id: str,
        anchor: str,
        residual: Optional[float],
        passed: Optional[bool] = None,
        detail: Optional[str] = None,
    ) -> bool:
        if passed is None:
            passed = residual is not None and float(residual) <= self.tolerance
        self.checks.append(
            CheckResult(
                id=check_id,
                anchor=anchor,
                residual=stable_float(residual),
                passed=bool(passed),
                detail=detail,
            )
        )
        if not passed:
            logger.warning(f"check '{check_id}' failed: residual={residual}, {detail or anchor}")
        return bool(passed)

    @contextmanager
    def guard(self, check_id: str, anchor: str):
        """Record a failing check instead of aborting the suite on library errors."""
        try:
            yield
        except GceLabError as e:
            self.add(check_id, anchor, None, passed=False, detail=f"{type(e).__name__}: {e}")


def classification_document(report: ClassificationReport) -> ClassificationDocument:
    return ClassificationDocument(
        model=report.frame_name,
        tool_version=__version__,
        tolerance=report.tolerance,
        flags={
            name: FlagDocument(value=flag.value, residual=stable_float(flag.residual))
            for name, flag in report.flags.items()
        },
        lee_norm=stable_float(report.lee_norm),
        lee_vanishes=report.lee_vanishes,
        c=stable_float(report.c),
        c_signed=stable_float(report.c_signed),
        case_tag=report.case_tag,
        eigen_summary=[[stable_float(a), stable_float(b)] for a, b in report.eigen_summary],
        residuals={k: stable_float(v) for k, v in report.residuals.items()},
    )


def _random_invertible(rng: np.random.Generator, minimum: float = 0.2) -> np.ndarray:
    while True:
        R = rng.normal(size=(2, 2))
        if abs(np.linalg.det(R)) >= minimum:
            return R


def _random_alpha(rng: np.random.Generator) -> complex:
    return complex(rng.uniform(-2.0, 2.0), rng.uniform(0.2, 2.0))


class VerificationService:
    def __init__(
        self,
        catalog: Optional[Catalog] = None,
        tolerance: Optional[float] = None,
        seed: Optional[int] = None,
        count: Optional[int] = None,
        modifications: Optional[int] = None,
        workers: Optional[int] = None,
    ):
        self.catalog = catalog or load_catalog()
        self.tolerance = tolerance if tolerance is not None else config.tolerance.default
        self.seed = seed if seed is not None else config.verification.seed
        self.count = count if count is not None else config.verification.fuzz_count
        self.modifications = (
            modifications if modifications is not None else config.verification.modifications_per_model
        )
        self.workers = workers or config.verification.workers
        logger.info(
            f"VerificationService ready: {len(self.catalog.models)} models, tol={self.tolerance:g}, "
            f"seed={self.seed}, count={self.count}, modifications={self.modifications}"
        )

    # -- frames -----------------------------------------------------------

    def frame_for(self, entry: CatalogEntry, alpha: Optional[complex] = None) -> HermitianFrame:
        if alpha is None:
            return document_to_frame(entry, self.tolerance)
        if entry.kind != "product" or len(entry.factors) != 2:
            raise InvalidParameterError(f"α applies to Sasakian product models, not '{entry.name}'")
        first, second = (sasakian_model(kind) for kind in entry.factors)
        return calabi_eckmann(
            first, second, alpha, name=f"{entry.name}[alpha={alpha.real:g}{alpha.imag:+g}i]",
            tolerance=self.tolerance,
        )

    def classify(self, frame: HermitianFrame) -> ClassificationDocument:
        report = classify_metric(
            frame, tolerance=self.tolerance, lee_threshold=config.tolerance.lee_threshold
        )
        return classification_document(report)

    def _rng(self, name: str) -> np.random.Generator:
        return np.random.default_rng([self.seed, zlib.crc32(name.encode())])

    # -- suites -----------------------------------------------------------

    def _frame_checks(self, frame: HermitianFrame, checks: CheckCollector, rng: np.random.Generator) -> bool:
        checks.add("frame.jacobi", "Jacobi identity", jacobi_residual(frame.structure))
        with checks.guard("hodge.identities", "star identities on hermitian spaces"):
            spaces = [frame.space] + [random_hermitian_space(frame.m, rng) for _ in range(self.count)]
            worst = max(max(hodge_identity_residuals(space, rng).values()) for space in spaces)
            checks.add("hodge.identities", "star identities on hermitian spaces", worst)
        integrable = checks.add(
            "integrable", "Nijenhuis tensor vanishes", float(np.max(np.abs(nijenhuis(frame))))
        )
        if not integrable:
            return False

        connection = characteristic_connection(frame, self.tolerance)
        torsion = characteristic_torsion(frame, self.tolerance)
        omega4 = bianchi_four_form(torsion, frame)
        checks.add(
            "characteristic.connection",
            "∇g = 0, ∇J = 0, torsion T = -𝔍dω",
            max(characteristic_residuals(frame, connection).values()),
        )
        checks.add("torsion.parallel", "∇T = 0", torsion_parallel_residual(frame, connection))
        checks.add("torsion.codifferential", "δT = 0", codifferential(torsion, frame).max_abs())
        checks.add(
            "torsion.nabla_codifferential",
            "δ^∇T = 0",
            nabla_codifferential(torsion, connection, frame).max_abs(),
        )
        checks.add("torsion.dT", "dT = 2Ω", (exterior_derivative(torsion, frame) - omega4 * 2.0).max_abs())
        checks.add(
            "torsion.bianchi",
            "cyclic sum of R equals Ω",
            float(np.max(np.abs(bianchi_cyclic_sum(connection, frame) - omega4.to_tensor()))),
        )
        worst = 0.0
        for degree in (2, 3):
            form = random_form(frame.dim, degree, rng)
            defect = nabla_codifferential(form, connection, frame) - codifferential(form, frame)
            worst = max(worst, (defect - codifferential_defect(form, torsion, frame)).max_abs())
        checks.add("codifferential.defect", "δ^∇ - δ against the torsion contraction", worst)
        with checks.guard("lee.codifferential", "θ = -J δω / (2(m-1))"):
            checks.add(
                "lee.codifferential",
                "θ = -J δω / (2(m-1))",
                (lee_form(frame) - lee_form_via_codifferential(frame)).max_abs(),
            )
        return True

    def _classification_checks(
        self, frame: HermitianFrame, entry: CatalogEntry, checks: CheckCollector, expected_case: str
    ) -> ClassificationReport:
        report = classify_metric(
            frame, tolerance=self.tolerance, lee_threshold=config.tolerance.lee_threshold
        )
        checks.add(
            "classification.case",
            "local case dispatch",
            None,
            passed=report.case_tag == expected_case,
            detail=f"expected {expected_case}, got {report.case_tag}",
        )
        expect_gce = expected_case != CaseTag.NOT_APPLICABLE
        checks.add(
            "classification.gce",
            "LP with θ ≠ 0 and ∇T = 0",
            report.flags["gce"].residual,
            passed=report.flag("gce") == expect_gce,
        )
        if "lp.fit" in report.residuals:
            checks.add("lp.fit", "dω = c(dθ∧Jθ - θ∧dJθ)", report.residuals["lp.fit"])
            checks.add(
                "lp.constant",
                "c > 0",
                None,
                passed=report.c_signed is not None and report.c_signed > 0,
                detail=f"c = {report.c_signed}",
            )
        if entry.kind in ("hopf", "flat"):
            checks.add(
                "vaisman.lee_parallel" if entry.kind == "hopf" else "kahler.closed",
                "∇^g θ = 0" if entry.kind == "hopf" else "dω = 0",
                report.residuals["lee.levi_civita_parallel"]
                if entry.kind == "hopf"
                else report.flags["kahler"].residual,
            )
        return report

    def _structure_checks(self, frame: HermitianFrame, checks: CheckCollector) -> None:
        with checks.guard("structure", "torsion decomposition"):
            decomposition = decompose_torsion(frame, tolerance=self.tolerance)
            for key, anchor in STRUCTURE_ANCHORS.items():
                checks.add(f"structure.{key}", anchor, decomposition.residuals[key])
            eigenspaces = split_eigenspaces(decomposition)
            checks.add(
                "structure.eigenspaces",
                "A± = a±J on each H_i",
                max((e.residual for e in eigenspaces), default=0.0),
            )
            checks.add("structure.lee_commute", "[θ♯, Jθ♯] = 0", lee_vector_fields_commute(frame))

    def _family_checks(self, entry: CatalogEntry, frame: HermitianFrame, checks: CheckCollector, rng) -> None:
        first, second = (sasakian_model(kind) for kind in entry.factors)
        with checks.guard("calabi_eckmann.identity", "α = i reproduces the product"):
            base = calabi_eckmann(first, second, 1j, tolerance=self.tolerance)
            checks.add(
                "calabi_eckmann.identity",
                "α = i reproduces the product",
                max(float(np.max(np.abs(base.metric - frame.metric))), float(np.max(np.abs(base.J - frame.J)))),
            )
        worst: Dict[str, float] = {"nijenhuis": 0.0, "parallel": 0.0, "lp": 0.0}
        smallest_c, cases = np.inf, set()
        with checks.guard("calabi_eckmann.family", "GCE for Im α > 0"):
            for _ in range(self.count):
                alpha = _random_alpha(rng)
                ce = calabi_eckmann(first, second, alpha, tolerance=self.tolerance)
                worst["nijenhuis"] = max(worst["nijenhuis"], float(np.max(np.abs(nijenhuis(ce)))))
                worst["parallel"] = max(worst["parallel"], torsion_parallel_residual(ce))
                c, residual = fit_lp_constant(exterior_derivative(ce.omega, ce), lee_form(ce), ce)
                worst["lp"] = max(worst["lp"], residual)
                smallest_c = min(smallest_c, c if c is not None else -np.inf)
                decomposition = decompose_torsion(ce, tolerance=self.tolerance)
                cases.add(classify_local(decomposition))
            checks.add("calabi_eckmann.nijenhuis", "J_α integrable", worst["nijenhuis"])
            checks.add("calabi_eckmann.parallel", "∇T = 0 for g_α", worst["parallel"])
            checks.add("calabi_eckmann.lp", "LP fit for g_α", worst["lp"])
            checks.add(
                "calabi_eckmann.constant", "c > 0", None, passed=bool(smallest_c > 0),
                detail=f"smallest c = {smallest_c:.6g}",
            )
            checks.add(
                "calabi_eckmann.case", "case sasakian_product", None,
                passed=cases <= {CaseTag.SASAKIAN_PRODUCT}, detail=f"cases {sorted(cases)}",
            )

    def _modification_checks(self, frame: HermitianFrame, checks: CheckCollector, rng) -> None:
        with checks.guard("modification", "parallel modification preserves GCE"):
            tol = self.tolerance
            connection = characteristic_connection(frame, tol)
            decomposition = decompose_torsion(frame, tolerance=tol, connection=connection)
            split_eigenspaces(decomposition)
            reference = modification_reference(frame, tol)
            worst = dict.fromkeys(
                ("nijenhuis", "parallel", "parallel_original", "lp", "lee_plane", "tensor", "relations"), 0.0
            )
            smallest_c = np.inf
            draws = []
            for _ in range(self.modifications):
                scales = rng.uniform(0.3, 3.0, size=len(reference.eigen_bases))
                R = _random_invertible(rng)
                draws.append((scales, R))
                modified = parallel_modification(frame, scales, R, reference=reference, tolerance=tol)
                torsion = characteristic_torsion(modified, tol)
                worst["nijenhuis"] = max(worst["nijenhuis"], float(np.max(np.abs(nijenhuis(modified)))))
                worst["parallel"] = max(worst["parallel"], torsion_parallel_residual(modified))
                worst["parallel_original"] = max(
                    worst["parallel_original"],
                    float(np.max(np.abs(covariant_derivative(torsion, connection, frame)))),
                )
                theta = lee_form(modified)
                c, residual = fit_lp_constant(exterior_derivative(modified.omega, modified), theta, modified)
                worst["lp"] = max(worst["lp"], residual)
                smallest_c = min(smallest_c, c if c is not None else -np.inf)
                worst["lee_plane"] = max(worst["lee_plane"], lee_plane_residual(decomposition, theta))
                tensor = compute_modification_tensor(
                    frame, modified.metric, modified.J, tolerance=tol, connection=connection
                )
                expected = characteristic_connection(modified, tol)
                predicted = modified_connection(connection, tensor, modified.metric)
                worst["tensor"] = max(worst["tensor"], float(np.max(np.abs(predicted.gamma - expected.gamma))))
                worst["relations"] = max(worst["relations"], max(tensor.residuals.values()))

            checks.add("modification.nijenhuis", "J' integrable", worst["nijenhuis"])
            checks.add("modification.parallel", "∇'T' = 0", worst["parallel"])
            checks.add("modification.parallel_original", "∇T' = 0", worst["parallel_original"])
            checks.add("modification.lp", "LP fit after modification", worst["lp"])
            checks.add(
                "modification.constant", "c' > 0", None, passed=bool(smallest_c > 0),
                detail=f"smallest c' = {smallest_c:.6g}",
            )
            checks.add("modification.lee_plane", "θ' ∈ span{η, Jη}", worst["lee_plane"])
            checks.add("modification.tensor", "∇' = ∇ + A", worst["tensor"])
            checks.add("modification.tensor_relations", "A skew, J'-invariant, cyclic law", worst["relations"])

            if len(draws) >= 2:
                (s1, R1), (s2, R2) = draws[0], draws[1]
                once = parallel_modification(frame, s1, R1, reference=reference, tolerance=tol)
                twice = parallel_modification(
                    once, s2, R2, reference=reference.transported(s1, R1), tolerance=tol
                )
                direct = parallel_modification(frame, s1 * s2, R1 @ R2, reference=reference, tolerance=tol)
                checks.add(
                    "modification.closure",
                    "composition of modifications",
                    max(
                        float(np.max(np.abs(twice.metric - direct.metric))),
                        float(np.max(np.abs(twice.J - direct.J))),
                    ),
                )

    def _factor_checks(self, entry: CatalogEntry, checks: CheckCollector) -> None:
        for kind in dict.fromkeys(entry.factors):
            with checks.guard(f"sasakian.{kind}", "Sasakian axioms"):
                factor = sasakian_model(kind)
                check = check_sasakian(factor, self.tolerance)
                checks.add(
                    f"sasakian.{kind}",
                    "unit Killing Reeb field, CR structure, contact, dλ = -2ω₀",
                    max(check.residuals.values()),
                    passed=check.passed,
                )
                if kind in BASE_CURVATURE:
                    checks.add(
                        f"sasakian.{kind}.base_curvature",
                        "O'Neill relation for the base",
                        abs(base_curvature(factor) - BASE_CURVATURE[kind]),
                    )

    def verify_entry(
        self, entry: CatalogEntry, alpha: Optional[complex] = None, timing: bool = False
    ) -> VerificationReport:
        start = time.perf_counter()
        checks = CheckCollector(self.tolerance)
        expected_case = entry.expected_case if alpha is None else CaseTag.SASAKIAN_PRODUCT
        try:
            frame = self.frame_for(entry, alpha)
        except GceLabError as e:
            logger.error(f"cannot build model '{entry.name}': {e}")
            return VerificationReport(
                model=entry.name, tool_version=__version__, tolerance=self.tolerance,
                seed=self.seed, error=f"{type(e).__name__}: {e}",
            )
        rng = self._rng(frame.name)
        logger.info(f"verifying '{frame.name}'")

        if self._frame_checks(frame, checks, rng):
            report = self._classification_checks(frame, entry, checks, expected_case)
            if report.flag("gce"):
                self._structure_checks(frame, checks)
            if entry.kind == "product" and len(entry.factors) == 2:
                if alpha is None:
                    self._family_checks(entry, frame, checks, rng)
                self._modification_checks(frame, checks, rng)
        if entry.factors:
            self._factor_checks(entry, checks)

        result = VerificationReport(
            model=frame.name,
            tool_version=__version__,
            tolerance=self.tolerance,
            seed=self.seed,
            checks=checks.checks,
            wall_time_seconds=round(time.perf_counter() - start, 3) if timing else None,
        )
        logger.info(
            f"finished '{frame.name}': {len(result.checks)} checks, "
            f"{len(result.failed_checks)} failed"
        )
        return result

    def verify(
        self, names: Sequence[str], alpha: Optional[complex] = None, timing: bool = False
    ) -> List[VerificationReport]:
        entries = [get_entry(self.catalog, name) for name in names]
        if len(entries) == 1:
            return [self.verify_entry(entries[0], alpha, timing)]
        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            return list(pool.map(lambda entry: self.verify_entry(entry, alpha, timing), entries))

    def verify_catalog(self, timing: bool = False) -> List[VerificationReport]:
        return self.verify([entry.name for entry in self.catalog.models], timing=timing)
