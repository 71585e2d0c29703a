"""Frames, exterior derivative, connections and codifferentials"""

from functools import partial

import numpy as np
import pytest
from numpy.testing import assert_allclose

from gcelab.core.lie_frame import (
    Connection,
    HermitianFrame,
    LieFrame,
    codifferential,
    codifferential_defect,
    covariant_derivative,
    curvature,
    exterior_derivative,
    is_unimodular,
    jacobi_residual,
    levi_civita,
    metric_residual,
    nabla_codifferential,
    random_hermitian_frame,
    structure_from_brackets,
    torsion_of,
)
from gcelab.core.multilinear import KForm, inner_product, interior, random_form, wedge
from gcelab.exceptions import (
    DegreeUnderflowError,
    FrameMismatchError,
    InvariantViolationError,
    UnsupportedValenceError,
)
from gcelab.services.characteristic import characteristic_connection, characteristic_torsion
from gcelab.services.models import calabi_eckmann, sasakian_model
from gcelab.utils.catalog import document_to_frame, load_catalog
from tests.frames import standard_J, su2_brackets

pytestmark = pytest.mark.unit


CALABI_ECKMANN = [
    ("sphere", "nil", complex(0.5, 1.2)),
    ("sl2", "sl2", complex(-1.5, 0.4)),
    ("sphere", "sphere", complex(0.7, 1.3)),
]


def _calabi_eckmann_frame(first: str, second: str, alpha: complex) -> HermitianFrame:
    return calabi_eckmann(sasakian_model(first), sasakian_model(second), alpha)


UNIMODULAR_FRAMES = [
    pytest.param(partial(document_to_frame, entry), id=entry.name) for entry in load_catalog().models
] + [
    pytest.param(partial(_calabi_eckmann_frame, *args), id=f"ce_{args[0]}x{args[1]}")
    for args in CALABI_ECKMANN
]


def _su2(kappa: float = 2.0) -> LieFrame:
    return LieFrame(metric=np.eye(3), structure=structure_from_brackets(3, su2_brackets(0, kappa)))


class TestStructure:
    def test_reverse_brackets_are_filled(self):
        C = structure_from_brackets(3, [(0, 1, 2, 1.5)])
        assert C[0, 1, 2] == 1.5
        assert C[1, 0, 2] == -1.5

    def test_self_bracket_is_rejected(self):
        with pytest.raises(InvariantViolationError):
            structure_from_brackets(3, [(1, 1, 0, 1.0)])

    def test_index_outside_range(self):
        with pytest.raises(FrameMismatchError):
            structure_from_brackets(3, [(0, 3, 1, 1.0)])

    def test_jacobi_violation_is_rejected(self):
        """[e1, e2] = e3 with [e1, e3] = e1 breaks the Jacobi identity."""
        C = structure_from_brackets(4, [(0, 1, 2, 1.0), (0, 2, 0, 1.0)])
        assert jacobi_residual(C) > 0.5
        with pytest.raises(InvariantViolationError) as err:
            HermitianFrame.build(np.eye(4), standard_J(4), [(0, 1, 2, 1.0), (0, 2, 0, 1.0)])
        assert err.value.invariant == "jacobi"
        assert err.value.exit_code == 3

    def test_metric_must_be_positive(self):
        with pytest.raises(InvariantViolationError):
            LieFrame(metric=-np.eye(3), structure=np.zeros((3, 3, 3)))

    def test_hermitian_frame_needs_J(self):
        with pytest.raises(FrameMismatchError):
            HermitianFrame(metric=np.eye(2), structure=np.zeros((2, 2, 2)))

    def test_unimodular(self):
        assert is_unimodular(_su2())
        solvable = LieFrame(metric=np.eye(2), structure=structure_from_brackets(2, [(0, 1, 1, 1.0)]))
        assert not is_unimodular(solvable)

    def test_bracket_of_vectors(self):
        e = np.eye(3)
        assert_allclose(_su2().bracket(e[1], e[2]), 2 * e[0])


class TestExteriorDerivative:
    def test_structure_equation(self):
        """de^1 = -2 e^{23} when [e2, e3] = 2e1."""
        frame = _su2(0.0)
        d = exterior_derivative(KForm.basis(3, [0]), frame)
        assert_allclose(d.components, (-2 * KForm.basis(3, [1, 2])).components)

    @pytest.mark.parametrize("kappa", [2.0, 0.0, -2.0])
    def test_d_squared_vanishes(self, kappa, rng):
        frame = _su2(kappa)
        for degree in (0, 1):
            a = random_form(3, degree, rng)
            assert exterior_derivative(exterior_derivative(a, frame), frame).max_abs() < 1e-12

    def test_d_squared_on_a_product(self, sphere_product, rng):
        for degree in range(1, 5):
            a = random_form(6, degree, rng)
            dd = exterior_derivative(exterior_derivative(a, sphere_product), sphere_product)
            assert dd.max_abs() < 1e-11

    def test_leibniz_rule(self, sphere_product, rng):
        a, b = random_form(6, 1, rng), random_form(6, 2, rng)
        lhs = exterior_derivative(wedge(a, b), sphere_product)
        rhs = wedge(exterior_derivative(a, sphere_product), b) - wedge(a, exterior_derivative(b, sphere_product))
        assert_allclose(lhs.components, rhs.components, atol=1e-11)

    def test_top_degree_and_scalars(self, sphere_product, rng):
        top = random_form(6, 6, rng)
        assert exterior_derivative(top, sphere_product).degree == 6
        assert exterior_derivative(top, sphere_product).max_abs() == 0.0
        assert exterior_derivative(KForm.scalar(6, 3.0), sphere_product).max_abs() == 0.0

    def test_dimension_mismatch(self, sphere_product):
        with pytest.raises(FrameMismatchError):
            exterior_derivative(KForm.zero(4, 1), sphere_product)


class TestConnections:
    def test_levi_civita_is_metric_and_torsion_free(self, rng):
        structure = structure_from_brackets(4, [(0, 1, 1, 1.0), (0, 2, 2, 1.0), (0, 3, 3, 1.0)])
        frame = random_hermitian_frame(structure, rng)
        levi = levi_civita(frame)
        assert metric_residual(levi, frame) < 1e-12
        assert np.max(np.abs(torsion_of(levi, frame))) < 1e-12
        assert np.max(np.abs(covariant_derivative(frame.metric, levi, frame))) < 1e-12

    def test_round_sphere_curvature(self):
        """su(2) with these constants is the unit 3-sphere: sectional curvature 1."""
        frame = _su2()
        R = curvature(levi_civita(frame), frame)
        for i in range(3):
            for j in range(3):
                if i != j:
                    assert R[i, j, j, i] == pytest.approx(1.0)

    def test_flat_connection(self):
        frame = LieFrame(metric=np.eye(3), structure=np.zeros((3, 3, 3)))
        assert np.max(np.abs(curvature(levi_civita(frame), frame))) == 0.0

    def test_covariant_derivative_valence(self, sphere_product):
        levi = levi_civita(sphere_product)
        with pytest.raises(UnsupportedValenceError):
            covariant_derivative(np.zeros((6,) * 5), levi, sphere_product)
        with pytest.raises(UnsupportedValenceError):
            covariant_derivative(np.zeros((6, 6)), levi, sphere_product, upper=[True])
        with pytest.raises(FrameMismatchError):
            covariant_derivative(np.zeros((4, 4)), levi, sphere_product)

    def test_covariant_derivative_of_vector(self, sphere_product):
        connection = Connection(np.random.default_rng(3).standard_normal((6, 6, 6)))
        X = np.arange(6.0)
        derivative = covariant_derivative(X, connection, sphere_product, upper=[True])
        for i in range(6):
            assert_allclose(derivative[i], connection.covariant(np.eye(6)[i], X))


class TestCodifferential:
    @pytest.mark.parametrize("build", UNIMODULAR_FRAMES)
    def test_adjoint_of_d_on_unimodular_frames(self, build, rng):
        """⟨dα, β⟩ = ⟨α, δβ⟩."""
        frame = build()
        assert is_unimodular(frame)
        for degree in range(0, frame.dim):
            a, b = random_form(frame.dim, degree, rng), random_form(frame.dim, degree + 1, rng)
            lhs = inner_product(exterior_derivative(a, frame), b, frame.space)
            rhs = inner_product(a, codifferential(b, frame), frame.space)
            assert lhs == pytest.approx(rhs, abs=1e-10)

    def test_codifferential_of_scalar(self, sphere_product):
        with pytest.raises(DegreeUnderflowError):
            codifferential(KForm.scalar(6, 1.0), sphere_product)

    def test_levi_civita_trace_agrees(self, sphere_product, rng):
        levi = levi_civita(sphere_product)
        for degree in (1, 2, 3):
            a = random_form(6, degree, rng)
            assert_allclose(
                nabla_codifferential(a, levi, sphere_product).components,
                codifferential(a, sphere_product).components,
                atol=1e-10,
            )

    def test_defect_for_the_characteristic_connection(self, sphere_product, rng):
        connection = characteristic_connection(sphere_product)
        torsion = characteristic_torsion(sphere_product)
        for degree in (1, 2, 3):
            a = random_form(6, degree, rng)
            defect = nabla_codifferential(a, connection, sphere_product) - codifferential(a, sphere_product)
            assert_allclose(
                defect.components,
                codifferential_defect(a, torsion, sphere_product).components,
                atol=1e-9,
            )

    @pytest.mark.parametrize("first, second, alpha", CALABI_ECKMANN)
    def test_defect_on_calabi_eckmann_frames(self, first, second, alpha, rng):
        """δ^∇a - δa = -Σ_{i<j} (e_i⌟e_j⌟T) ∧ (e_i⌟e_j⌟a) for the characteristic ∇."""
        frame = calabi_eckmann(sasakian_model(first), sasakian_model(second), alpha)
        connection = characteristic_connection(frame)
        torsion = characteristic_torsion(frame)
        basis = frame.space.orthonormal_basis
        for degree in (2, 3, 4):
            a = random_form(6, degree, rng)
            direct = nabla_codifferential(a, connection, frame) - codifferential(a, frame)
            expected = KForm.zero(6, degree - 1)
            for i in range(6):
                for j in range(i + 1, 6):
                    ei, ej = basis[:, i], basis[:, j]
                    t_part = interior(ei, interior(ej, torsion))
                    expected = expected - wedge(t_part, interior(ei, interior(ej, a)))
            assert_allclose(direct.components, expected.components, atol=1e-9)
            assert_allclose(direct.components, codifferential_defect(a, torsion, frame).components, atol=1e-9)

    @pytest.mark.parametrize("first, second, alpha", CALABI_ECKMANN)
    def test_torsion_is_coclosed_for_both_connections(self, first, second, alpha):
        frame = calabi_eckmann(sasakian_model(first), sasakian_model(second), alpha)
        torsion = characteristic_torsion(frame)
        assert codifferential(torsion, frame).max_abs() < 1e-10
        assert nabla_codifferential(torsion, characteristic_connection(frame), frame).max_abs() < 1e-10

    def test_defect_vanishes_on_one_forms(self, sphere_product, rng):
        torsion = characteristic_torsion(sphere_product)
        assert codifferential_defect(random_form(6, 1, rng), torsion, sphere_product).max_abs() == 0.0
