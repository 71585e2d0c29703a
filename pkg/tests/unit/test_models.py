"""Sasakian factors, products and the Calabi–Eckmann family"""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from gcelab.core.lie_frame import exterior_derivative
from gcelab.exceptions import (
    FrameMismatchError,
    InvalidParameterError,
    InvalidSasakianError,
    UnknownModelError,
    UnsupportedDimensionError,
)
from gcelab.services.characteristic import CaseTag, classify_metric
from gcelab.services.models import (
    SasakianFrame,
    base_curvature,
    calabi_eckmann,
    check_sasakian,
    ensure_sasakian,
    heisenberg_model,
    hopf_frame,
    kahler_extension,
    line_kahler_frame,
    sasakian_model,
    sasakian_product,
)

pytestmark = pytest.mark.unit


class TestSasakianModels:
    @pytest.mark.parametrize("kind", ["sphere", "nil", "sl2", "line"])
    def test_axioms_hold(self, kind):
        check = check_sasakian(sasakian_model(kind))
        assert check.passed, check.failures()

    @pytest.mark.parametrize("kind, expected", [("sphere", 4.0), ("nil", 0.0), ("sl2", -4.0)])
    def test_base_curvature(self, kind, expected):
        assert base_curvature(sasakian_model(kind)) == pytest.approx(expected, abs=1e-10)

    def test_base_curvature_needs_three_dimensions(self):
        with pytest.raises(UnsupportedDimensionError):
            base_curvature(sasakian_model("line"))

    def test_unknown_kind(self):
        with pytest.raises(UnknownModelError):
            sasakian_model("torus")

    def test_cr_structure_read_off_from_reeb_field(self):
        """φ = -∇ξ when no CR structure is supplied."""
        sphere = sasakian_model("sphere")
        derived = SasakianFrame(metric=sphere.metric, structure=sphere.structure, kind="sphere")
        assert_allclose(derived.phi, sphere.phi, atol=1e-12)

    def test_contact_normalization(self):
        sphere = sasakian_model("sphere")
        d_lambda = exterior_derivative(sphere.contact_form, sphere)
        assert_allclose(d_lambda.components, (sphere.transverse_kahler_form * -2.0).components, atol=1e-12)

    def test_even_dimension_is_rejected(self):
        with pytest.raises(FrameMismatchError):
            SasakianFrame(metric=np.eye(2), structure=np.zeros((2, 2, 2)))

    def test_wrong_normalization_is_rejected(self):
        """Doubling the metric breaks |ξ| = 1."""
        sphere = sasakian_model("sphere")
        scaled = SasakianFrame(metric=2.0 * sphere.metric, structure=sphere.structure, phi=sphere.phi)
        with pytest.raises(InvalidSasakianError):
            ensure_sasakian(scaled)


class TestHeisenbergModel:
    def test_weighted_model_is_sasakian(self):
        frame = heisenberg_model((1.0, 0.5, 2.0))
        assert frame.dim == 7
        assert check_sasakian(frame).passed

    @pytest.mark.parametrize("weights", [(), (1.0, 0.0), (-1.0,)])
    def test_weights_must_be_positive(self, weights):
        with pytest.raises(InvalidParameterError):
            heisenberg_model(weights)


class TestProducts:
    def test_product_layout(self, sphere_product):
        J = sphere_product.J
        assert sphere_product.dim == 6
        assert_allclose(J[:, 0], np.eye(6)[:, 3])
        assert_allclose(J @ J, -np.eye(6), atol=1e-12)

    def test_reeb_must_come_first(self):
        sphere = sasakian_model("sphere")
        shuffled = SasakianFrame(
            metric=sphere.metric, structure=sphere.structure, phi=sphere.phi, reeb_index=1
        )
        with pytest.raises(InvalidSasakianError):
            sasakian_product(shuffled, sphere)

    def test_names(self):
        assert hopf_frame().name == "hopf"
        assert hopf_frame("sl2").name == "hopf_sl2"
        assert line_kahler_frame().name == "nil_line_kahler"

    def test_kahler_extension(self, hopf):
        extended = kahler_extension(hopf, 2)
        assert extended.dim == 8
        assert_allclose(extended.J[:4, :4], hopf.J)
        with pytest.raises(InvalidParameterError):
            kahler_extension(hopf, 0)


class TestCalabiEckmann:
    def test_alpha_i_is_the_product(self, sphere_product):
        sphere = sasakian_model("sphere")
        frame = calabi_eckmann(sphere, sphere, 1j)
        assert_allclose(frame.metric, sphere_product.metric, atol=1e-12)
        assert_allclose(frame.J, sphere_product.J, atol=1e-12)

    @pytest.mark.parametrize("alpha", [1.0, 0.5 - 0.3j, 2.0 + 0j])
    def test_upper_half_plane_only(self, alpha):
        with pytest.raises(InvalidParameterError):
            calabi_eckmann(sasakian_model("nil"), sasakian_model("sphere"), alpha)

    @pytest.mark.parametrize("alpha", [0.7 + 1.3j, -1.5 + 0.4j])
    @pytest.mark.parametrize("kinds", [("sphere", "sphere"), ("nil", "sl2")])
    def test_family_stays_gce(self, alpha, kinds):
        frame = calabi_eckmann(sasakian_model(kinds[0]), sasakian_model(kinds[1]), alpha)
        assert_allclose(frame.J @ frame.J, -np.eye(6), atol=1e-12)
        report = classify_metric(frame)
        assert report.flag("integrable")
        assert report.flag("gce")
        assert report.c > 0
        assert report.case_tag == CaseTag.SASAKIAN_PRODUCT
