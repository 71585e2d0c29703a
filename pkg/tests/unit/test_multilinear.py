"""Exterior algebra on hermitian vector spaces"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from gcelab.core.multilinear import (
    HermitianVectorSpace,
    KForm,
    adapted_basis,
    endomorphism_action,
    form_norm,
    hodge_identity_residuals,
    hodge_star,
    inner_product,
    interior,
    j_algebra_action,
    j_group_action,
    j_one_form,
    omega_power,
    omega_trace,
    pullback,
    random_form,
    random_hermitian_space,
    standard_space,
    type_project,
    volume_form,
    wedge,
)
from gcelab.exceptions import (
    DegreeUnderflowError,
    DegreeUnsupportedError,
    FrameMismatchError,
    InvariantViolationError,
)

pytestmark = pytest.mark.unit

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def _forms(seed: int, dim: int, *degrees: int):
    rng = np.random.default_rng(seed)
    return [random_form(dim, degree, rng) for degree in degrees]


class TestKForm:
    def test_basis_form_evaluates_with_determinant_convention(self):
        """(e^1 ∧ e^2)(e_1, e_2) = 1 and reordered indices pick up the sign."""
        e = np.eye(4)
        form = KForm.basis(4, [0, 1])
        assert form.evaluate(e[0], e[1]) == pytest.approx(1.0)
        assert form.evaluate(e[1], e[0]) == pytest.approx(-1.0)
        assert_allclose(KForm.basis(4, [1, 0]).components, -form.components)

    def test_repeated_indices_give_zero(self):
        assert KForm.basis(4, [2, 2]).max_abs() == 0.0

    def test_component_count_is_checked(self):
        with pytest.raises(FrameMismatchError):
            KForm(4, 2, np.zeros(5))

    def test_degree_outside_range_is_rejected(self):
        with pytest.raises(DegreeUnsupportedError):
            KForm(3, 4, np.zeros(0))

    def test_tensor_round_trip(self, rng):
        form = random_form(5, 3, rng)
        assert_allclose(KForm.from_tensor(form.to_tensor()).components, form.components)

    def test_adding_different_degrees_fails(self):
        with pytest.raises(DegreeUnsupportedError):
            KForm.zero(4, 1) + KForm.zero(4, 2)

    def test_scalar_value_only_on_degree_zero(self):
        assert KForm.scalar(4, 2.5).value == 2.5
        with pytest.raises(DegreeUnsupportedError):
            KForm.zero(4, 1).value


class TestWedgeAndInterior:
    @settings(max_examples=25, deadline=None)
    @given(seed=seeds, p=st.integers(0, 3), q=st.integers(0, 3))
    def test_graded_commutativity(self, seed, p, q):
        """a∧b = (-1)^{pq} b∧a."""
        a, b = _forms(seed, 6, p, q)
        assert_allclose(wedge(a, b).components, (-1) ** (p * q) * wedge(b, a).components, atol=1e-12)

    @settings(max_examples=25, deadline=None)
    @given(seed=seeds, p=st.integers(1, 3), q=st.integers(0, 2))
    def test_interior_is_an_antiderivation(self, seed, p, q):
        a, b = _forms(seed, 6, p, q)
        v = np.random.default_rng(seed + 1).standard_normal(6)
        lhs = interior(v, wedge(a, b))
        rhs = wedge(interior(v, a), b)
        if q:
            rhs = rhs + wedge(a, interior(v, b)) * (-1) ** p
        assert_allclose(lhs.components, rhs.components, atol=1e-12)

    def test_interior_twice_vanishes(self, rng):
        a = random_form(5, 3, rng)
        v = rng.standard_normal(5)
        assert interior(v, interior(v, a)).max_abs() < 1e-12

    def test_interior_of_scalar_underflows(self):
        with pytest.raises(DegreeUnderflowError):
            interior(np.ones(4), KForm.scalar(4, 1.0))

    def test_wedge_beyond_dimension_is_rejected(self, rng):
        with pytest.raises(DegreeUnsupportedError):
            wedge(random_form(4, 3, rng), random_form(4, 2, rng))

    def test_wedge_of_mismatched_dimensions(self, rng):
        with pytest.raises(FrameMismatchError):
            wedge(random_form(4, 1, rng), random_form(6, 1, rng))


class TestPullback:
    def test_pullback_is_contravariant(self, rng):
        """(MN)* = N* M*."""
        a = random_form(5, 2, rng)
        M, N = rng.standard_normal((5, 5)), rng.standard_normal((5, 5))
        assert_allclose(
            pullback(pullback(a, M), N).components, pullback(a, M @ N).components, atol=1e-10
        )

    def test_pullback_commutes_with_wedge(self, rng):
        a, b = random_form(5, 1, rng), random_form(5, 2, rng)
        M = rng.standard_normal((5, 5))
        assert_allclose(
            pullback(wedge(a, b), M).components,
            wedge(pullback(a, M), pullback(b, M)).components,
            atol=1e-10,
        )

    def test_pullback_evaluates_on_images(self, rng):
        a = random_form(4, 2, rng)
        M = rng.standard_normal((4, 4))
        x, y = rng.standard_normal(4), rng.standard_normal(4)
        assert pullback(a, M).evaluate(x, y) == pytest.approx(a.evaluate(M @ x, M @ y))


class TestHermitianSpace:
    def test_rejects_odd_dimension(self):
        with pytest.raises(FrameMismatchError):
            HermitianVectorSpace(np.eye(3), np.zeros((3, 3)))

    def test_rejects_non_complex_structure(self):
        with pytest.raises(InvariantViolationError) as err:
            HermitianVectorSpace(np.eye(2), np.eye(2))
        assert err.value.invariant == "complex-structure"

    def test_rejects_non_hermitian_metric(self):
        J = np.array([[0.0, -1.0], [1.0, 0.0]])
        with pytest.raises(InvariantViolationError) as err:
            HermitianVectorSpace(np.diag([1.0, 2.0]), J)
        assert err.value.invariant == "hermitian"

    @pytest.mark.parametrize("m", [1, 2, 3, 4])
    def test_random_spaces_are_well_conditioned(self, m):
        rng = np.random.default_rng(100 + m)
        for _ in range(50):
            space = random_hermitian_space(m, rng)
            assert np.linalg.cond(space.metric) <= np.exp(2.0) * (1 + 1e-9)
            assert_allclose(space.J @ space.J, -np.eye(2 * m), atol=1e-12)
            assert_allclose(space.J.T @ space.metric @ space.J, space.metric, atol=1e-12)

    def test_adapted_basis_is_orthonormal_and_complex(self, rng):
        space = random_hermitian_space(3, rng)
        seed = rng.standard_normal(6)
        B = adapted_basis(space, seeds=[seed])
        assert_allclose(B.T @ space.metric @ B, np.eye(6), atol=1e-10)
        assert_allclose(B[:, 1::2], space.J @ B[:, 0::2], atol=1e-10)
        direction = B[:, 0] * np.sqrt(seed @ space.metric @ seed)
        assert_allclose(direction, seed, atol=1e-10)

    def test_kahler_form_is_type_one_one(self, rng):
        space = random_hermitian_space(2, rng)
        assert_allclose(j_group_action(space.omega, space).components, space.omega.components, atol=1e-12)
        assert j_algebra_action(space.omega, space).max_abs() < 1e-10

    def test_omega_norms(self, rng):
        space = random_hermitian_space(3, rng)
        assert inner_product(space.omega, space.omega, space) == pytest.approx(3.0)
        assert form_norm(volume_form(space), space) == pytest.approx(1.0)

    def test_omega_power_range(self):
        with pytest.raises(DegreeUnsupportedError):
            omega_power(standard_space(2), 3)

    def test_j_on_one_forms(self, rng):
        space = random_hermitian_space(2, rng)
        theta = random_form(4, 1, rng)
        assert_allclose(j_one_form(j_one_form(theta, space), space).components, -theta.components, atol=1e-12)
        assert_allclose(j_group_action(theta, space).components, j_one_form(theta, space).components)

    def test_identity_acts_by_minus_degree(self, rng):
        a = random_form(6, 3, rng)
        assert_allclose(endomorphism_action(a, np.eye(6)).components, -3 * a.components, atol=1e-12)

    def test_endomorphism_shape_is_checked(self, rng):
        with pytest.raises(FrameMismatchError):
            endomorphism_action(random_form(4, 2, rng), np.eye(3))


class TestHodgeStar:
    @pytest.mark.parametrize("m", [2, 3])
    def test_star_squared(self, m, rng):
        """** = (-1)^{p(n-p)} on every degree."""
        space = random_hermitian_space(m, rng)
        n = 2 * m
        for p in range(n + 1):
            a = random_form(n, p, rng)
            twice = hodge_star(hodge_star(a, space), space)
            assert_allclose(twice.components, (-1) ** (p * (n - p)) * a.components, atol=1e-9)

    def test_star_of_one_is_volume(self, rng):
        space = random_hermitian_space(2, rng)
        assert_allclose(hodge_star(KForm.scalar(4, 1.0), space).components, volume_form(space).components)

    def test_star_matches_inner_product(self, rng):
        """⟨*a, b⟩ vol = a ∧ b."""
        space = random_hermitian_space(2, rng)
        a, b = random_form(4, 1, rng), random_form(4, 3, rng)
        lhs = inner_product(hodge_star(a, space), b, space) * volume_form(space).components[0]
        assert lhs == pytest.approx(wedge(a, b).components[0])

    @pytest.mark.parametrize("m", [2, 3, 4])
    def test_identities_on_random_spaces(self, m):
        rng = np.random.default_rng(m)
        worst = 0.0
        for _ in range(100):
            space = random_hermitian_space(m, rng)
            worst = max(worst, max(hodge_identity_residuals(space, rng).values()))
        assert worst <= 1e-10

    def test_identity_names_by_dimension(self, rng):
        assert "trace_free_21" not in hodge_identity_residuals(standard_space(2), rng)
        assert "trace_free_21" in hodge_identity_residuals(standard_space(3), rng)


class TestTypeDecomposition:
    def test_two_form_split(self, rng):
        space = random_hermitian_space(3, rng)
        a = random_form(6, 2, rng)
        parts = type_project(a, space)
        assert_allclose((parts.mixed + parts.pure).components, a.components, atol=1e-12)
        assert_allclose(j_group_action(parts.pure, space).components, -parts.pure.components, atol=1e-10)
        assert omega_trace(parts.trace_free, space).max_abs() < 1e-10

    def test_omega_is_pure_trace(self):
        space = standard_space(3)
        parts = type_project(space.omega, space)
        assert parts.trace_coefficient.value == pytest.approx(1.0)
        assert parts.trace_free.max_abs() < 1e-12

    def test_three_form_split(self, rng):
        space = random_hermitian_space(3, rng)
        a = random_form(6, 3, rng)
        parts = type_project(a, space)
        assert_allclose((parts.mixed + parts.pure).components, a.components, atol=1e-12)
        assert omega_trace(parts.trace_free, space).max_abs() < 1e-9
        # the pure part is fixed by the algebraic J-action up to the factor -3
        assert_allclose(
            j_algebra_action(j_algebra_action(parts.pure, space), space).components,
            -9 * parts.pure.components,
            atol=1e-9,
        )

    def test_one_forms_have_no_type_split(self, rng):
        with pytest.raises(DegreeUnsupportedError):
            type_project(random_form(4, 1, rng), standard_space(2))
