"""Torsion splitting, eigenspaces and parallel modifications"""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from gcelab.core.lie_frame import exterior_derivative
from gcelab.core.multilinear import KForm, form_norm, j_one_form, pullback
from gcelab.exceptions import (
    DecompositionFailureError,
    InvalidModificationError,
    NoLeeDirectionError,
    PreconditionViolationError,
)
from gcelab.services.characteristic import (
    CaseTag,
    characteristic_connection,
    classify_metric,
    is_integrable,
    lee_form,
    torsion_parallel_residual,
)
from gcelab.services.torsion_structure import (
    classify_local,
    compute_modification_tensor,
    decompose_torsion,
    lee_plane_residual,
    mixed_signature_form,
    modification_reference,
    modified_connection,
    parallel_modification,
    sasakian_split_matrix,
    split_eigenspaces,
)

pytestmark = pytest.mark.unit

SHEAR = np.array([[1.3, 0.4], [-0.2, 0.9]])


def _summary(eigenspaces):
    return [(e.dim, round(e.a_plus, 9), round(e.a_minus, 9)) for e in eigenspaces]


class TestDecomposition:
    def test_hopf_split(self, hopf):
        """η = e^1 after normalizing -2Jθ = 2e^1; T = η ∧ dη with no T₀."""
        D = decompose_torsion(hopf)
        assert D.eta_scale == pytest.approx(2.0)
        assert_allclose(D.eta.components, [1.0, 0, 0, 0], atol=1e-12)
        assert_allclose(D.omega_plus.components, (KForm.basis(4, [1, 2]) * -2.0).components, atol=1e-12)
        assert D.omega_minus.max_abs() < 1e-12
        assert D.T0.max_abs() < 1e-12

    @pytest.mark.parametrize("fixture", ["hopf", "sphere_product", "vaisman_heisenberg", "mixed_heisenberg"])
    def test_eta_is_unit_and_scale_recovers_minus_two_J_theta(self, fixture, request):
        frame = request.getfixturevalue(fixture)
        D = decompose_torsion(frame)
        assert form_norm(D.eta, frame.space) == pytest.approx(1.0)
        raw = j_one_form(lee_form(frame), frame.space) * -2.0
        assert_allclose((D.eta * D.eta_scale).components, raw.components, atol=1e-12)

    @pytest.mark.parametrize(
        "fixture", ["hopf", "sphere_product", "nil_sl2_product", "line_kahler", "mixed_heisenberg"]
    )
    def test_residuals_vanish(self, fixture, request):
        D = decompose_torsion(request.getfixturevalue(fixture))
        for key, value in D.residuals.items():
            if key != "T0":
                assert value < 1e-9, key

    def test_flat_has_no_lee_direction(self, flat):
        with pytest.raises(NoLeeDirectionError):
            decompose_torsion(flat)

    def test_lee_form_lies_in_the_lee_plane(self, sphere_product):
        D = decompose_torsion(sphere_product)
        assert lee_plane_residual(D, lee_form(sphere_product)) < 1e-12

    def test_projectors_are_complementary(self, nil_sl2_product):
        D = decompose_torsion(nil_sl2_product)
        metric = nil_sl2_product.metric
        assert_allclose(D.projector_E(metric) + D.projector_H(metric), np.eye(6), atol=1e-10)


class TestEigenspaces:
    def test_hopf(self, hopf):
        assert _summary(split_eigenspaces(decompose_torsion(hopf))) == [(2, 2.0, 0.0)]

    def test_heisenberg_weights(self, vaisman_heisenberg, mixed_heisenberg):
        assert _summary(split_eigenspaces(decompose_torsion(vaisman_heisenberg))) == [
            (2, 2.0, 0.0),
            (2, 1.0, 0.0),
        ]
        assert _summary(split_eigenspaces(decompose_torsion(mixed_heisenberg))) == [
            (2, 2.0, 0.0),
            (2, -1.0, 0.0),
        ]

    def test_kahler_factor_gives_zero_eigenvalue(self, line_kahler):
        eigenspaces = split_eigenspaces(decompose_torsion(line_kahler))
        assert min(abs(e.a_plus) for e in eigenspaces) < 1e-9

    def test_blocks_are_orthonormal_and_complex(self, sphere_product):
        D = decompose_torsion(sphere_product)
        g, J = sphere_product.metric, sphere_product.J
        for e in split_eigenspaces(D):
            assert_allclose(e.basis.T @ g @ e.basis, np.eye(e.dim), atol=1e-10)
            assert_allclose(e.basis[:, 1::2], J @ e.basis[:, 0::2], atol=1e-10)
            assert e.residual < 1e-9

    @pytest.mark.parametrize(
        "fixture, expected",
        [
            ("hopf", CaseTag.VAISMAN),
            ("vaisman_heisenberg", CaseTag.VAISMAN),
            ("mixed_heisenberg", CaseTag.PSEUDO_VAISMAN_MIXED),
            ("line_kahler", CaseTag.SASAKI_LINE_KAHLER),
            ("sphere_product", CaseTag.SASAKIAN_PRODUCT),
        ],
    )
    def test_classify_local(self, fixture, expected, request):
        assert classify_local(decompose_torsion(request.getfixturevalue(fixture))) == expected


class TestMixedSignatureForm:
    def test_hopf_recovers_omega(self, hopf):
        D = decompose_torsion(hopf)
        assert_allclose(mixed_signature_form(D, hopf).components, hopf.omega.components, atol=1e-12)

    def test_d_eta_on_the_horizontal_part(self, mixed_heisenberg):
        D = decompose_torsion(mixed_heisenberg)
        form = mixed_signature_form(D, mixed_heisenberg)
        horizontal = pullback(form, D.projector_H(mixed_heisenberg.metric))
        assert_allclose(
            exterior_derivative(D.eta, mixed_heisenberg).components, (horizontal * -2.0).components, atol=1e-10
        )


class TestSasakianSplit:
    def test_product_split_is_invertible(self, sphere_product):
        eigenspaces = split_eigenspaces(decompose_torsion(sphere_product))
        R = sasakian_split_matrix(eigenspaces)
        assert_allclose(R[0], [0.5 * e.a_plus for e in eigenspaces])
        assert_allclose(R[1], [0.5 * e.a_minus for e in eigenspaces])

    def test_needs_two_eigenspaces(self, hopf):
        with pytest.raises(DecompositionFailureError):
            sasakian_split_matrix(split_eigenspaces(decompose_torsion(hopf)))

    def test_dependent_eigenvalues(self, vaisman_heisenberg):
        """ω₋ = 0 makes the rows dependent."""
        with pytest.raises(DecompositionFailureError):
            sasakian_split_matrix(split_eigenspaces(decompose_torsion(vaisman_heisenberg)))


class TestParallelModification:
    @pytest.mark.parametrize("fixture", ["vaisman_heisenberg", "mixed_heisenberg", "sphere_product"])
    def test_preserves_gce(self, fixture, request):
        frame = request.getfixturevalue(fixture)
        modified = parallel_modification(frame, [2.0, 0.5], SHEAR)
        assert is_integrable(modified)
        assert torsion_parallel_residual(modified) < 1e-9
        report = classify_metric(modified)
        assert report.flag("gce")
        assert report.c > 0

    def test_identity_changes_nothing(self, sphere_product):
        same = parallel_modification(sphere_product, [1.0, 1.0], np.eye(2))
        assert_allclose(same.metric, sphere_product.metric, atol=1e-10)
        assert_allclose(same.J, sphere_product.J, atol=1e-10)

    def test_closure_under_composition(self, vaisman_heisenberg):
        reference = modification_reference(vaisman_heisenberg)
        s1, R1 = [2.0, 0.5], SHEAR
        s2, R2 = [0.7, 1.9], np.array([[0.6, -0.8], [0.8, 0.6]])
        once = parallel_modification(vaisman_heisenberg, s1, R1, reference=reference)
        twice = parallel_modification(once, s2, R2, reference=reference.transported(s1, R1))
        direct = parallel_modification(
            vaisman_heisenberg, np.multiply(s1, s2), R1 @ R2, reference=reference
        )
        assert_allclose(twice.metric, direct.metric, atol=1e-10)
        assert_allclose(twice.J, direct.J, atol=1e-10)

    def test_degenerate_rotation(self, hopf):
        with pytest.raises(InvalidModificationError):
            parallel_modification(hopf, [1.0], np.array([[1.0, 2.0], [0.5, 1.0]]))

    def test_wrong_number_of_scales(self, hopf):
        with pytest.raises(InvalidModificationError):
            parallel_modification(hopf, [1.0, 2.0], np.eye(2))

    def test_scales_must_be_positive(self, vaisman_heisenberg):
        with pytest.raises(InvalidModificationError):
            parallel_modification(vaisman_heisenberg, [1.0, -0.5], np.eye(2))

    def test_rotation_shape(self, hopf):
        with pytest.raises(InvalidModificationError):
            parallel_modification(hopf, [1.0], np.eye(3))


class TestModificationTensor:
    def test_vanishes_without_modification(self, hopf):
        tensor = compute_modification_tensor(hopf, hopf.metric, hopf.J)
        assert np.max(np.abs(tensor.A)) < 1e-10

    @pytest.mark.parametrize("fixture", ["vaisman_heisenberg", "sphere_product"])
    def test_predicts_the_new_connection(self, fixture, request):
        frame = request.getfixturevalue(fixture)
        connection = characteristic_connection(frame)
        modified = parallel_modification(frame, [1.7, 0.6], SHEAR)
        tensor = compute_modification_tensor(frame, modified.metric, modified.J, connection=connection)
        predicted = modified_connection(connection, tensor, modified.metric)
        assert_allclose(predicted.gamma, characteristic_connection(modified).gamma, atol=1e-9)
        assert max(tensor.residuals.values()) < 1e-9

    def test_rejects_non_parallel_structures(self, vaisman_heisenberg):
        """∇_ξ rotates x1 into y1, so stretching x1 alone is not parallel."""
        stretched = np.diag([1.0, 2.0, 1.0, 1.0, 1.0, 1.0])
        with pytest.raises(PreconditionViolationError):
            compute_modification_tensor(vaisman_heisenberg, stretched, vaisman_heisenberg.J)
