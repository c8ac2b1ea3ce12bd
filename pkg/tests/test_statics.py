import numpy as np
import pytest

from casimir_mems import DomainError, SpringSphereModel, critical_separation
from casimir_mems.statics import (
    KIND_MAXIMUM,
    KIND_MINIMUM,
    critical_separation_bisect,
    find_equilibria,
    potential_gradient,
    sphere_energy,
    spring_energy,
    total_potential,
)

K = 0.019  # N/m
R = 100e-6
D_C = 1.0796715194526761e-07  # closed-form tangency separation for K, R


def bistable_model(d=150e-9):
    return SpringSphereModel(spring_k=K, sphere_R=R, separation_d=d)


class TestPotential:
    def test_spring_energy_zero_at_origin(self):
        assert spring_energy(bistable_model(), 0.0) == 0.0

    def test_sphere_energy_at_contactless_origin(self):
        # -pi^3 hbar c R / (720 d^2) at d = 40 nm
        model = SpringSphereModel(spring_k=K, sphere_R=R, separation_d=40e-9)
        assert sphere_energy(model, 0.0) == pytest.approx(
            -8.50930328221795e-17, rel=1e-12
        )

    def test_total_is_exact_sum_of_addends(self):
        model = bistable_model()
        for x in (0.0, 30e-9, 90e-9):
            assert total_potential(model, x) == spring_energy(model, x) + sphere_energy(
                model, x
            )

    def test_gradient_matches_finite_difference(self):
        model = bistable_model()
        for x in (10e-9, 60e-9, 110e-9):
            h = 1e-12
            fd = (total_potential(model, x + h) - total_potential(model, x - h)) / (
                2.0 * h
            )
            assert potential_gradient(model, x) == pytest.approx(fd, rel=1e-6)

    def test_displacement_domain_enforced(self):
        model = bistable_model()
        with pytest.raises(DomainError):
            total_potential(model, -1e-9)
        with pytest.raises(DomainError):
            total_potential(model, model.separation_d)


class TestEquilibria:
    def test_bistable_well_locations(self):
        # independent root bracketing of k*x = C/(d-x)^3 at d = 150 nm
        found = find_equilibria(bistable_model())
        assert found.bistable
        assert [eq.kind for eq in found.equilibria] == [KIND_MINIMUM, KIND_MAXIMUM]
        assert found.equilibria[0].x == pytest.approx(4.668901496758031e-09, rel=1e-9)
        assert found.equilibria[1].x == pytest.approx(9.716423773638637e-08, rel=1e-9)

    def test_barrier_height(self):
        found = find_equilibria(bistable_model())
        assert found.barrier_height == pytest.approx(4.715686447895467e-17, rel=1e-9)

    def test_no_equilibria_below_critical_separation(self):
        found = find_equilibria(SpringSphereModel(spring_k=K, sphere_R=R, separation_d=40e-9))
        assert found.equilibria == ()
        assert not found.bistable
        assert found.barrier_height is None

    def test_wide_gap_keeps_near_origin_minimum(self):
        model = SpringSphereModel(spring_k=K, sphere_R=R, separation_d=1e-6)
        found = find_equilibria(model)
        assert found.bistable
        minimum = found.equilibria[0]
        assert minimum.kind == KIND_MINIMUM
        # spring overwhelmingly dominates: x ~ C/(k d^3) is sub-picometer
        assert minimum.x == pytest.approx(
            model.casimir_C / (K * (1e-6) ** 3), rel=1e-3
        )

    def test_equilibria_are_gradient_roots(self):
        found = find_equilibria(bistable_model())
        model = bistable_model()
        scale = K * model.separation_d
        for eq in found.equilibria:
            assert abs(potential_gradient(model, eq.x)) < 1e-9 * scale

    def test_barrier_positive_whenever_bistable(self):
        for d in np.linspace(1.05 * D_C, 3.0 * D_C, 9):
            found = find_equilibria(SpringSphereModel(spring_k=K, sphere_R=R, separation_d=float(d)))
            assert found.bistable
            assert found.barrier_height > 0.0


class TestCriticalSeparation:
    def test_closed_form_value(self):
        assert critical_separation(K, R) == pytest.approx(D_C, rel=1e-12)

    def test_quarter_power_stiffness_scaling(self):
        assert critical_separation(K / 16.0, R) == pytest.approx(
            2.0 * critical_separation(K, R), rel=1e-12
        )

    def test_bisection_agrees_with_closed_form(self):
        assert abs(critical_separation_bisect(K, R) - critical_separation(K, R)) < 1e-10

    def test_bistability_flips_across_threshold(self):
        for factor, expected in ((0.98, False), (1.02, True)):
            found = find_equilibria(
                SpringSphereModel(spring_k=K, sphere_R=R, separation_d=factor * D_C)
            )
            assert found.bistable is expected

    def test_rejects_nonpositive_stiffness(self):
        with pytest.raises(DomainError):
            critical_separation(0.0, R)


class TestModelValidation:
    def test_rejects_nonpositive_separation(self):
        with pytest.raises(DomainError):
            SpringSphereModel(spring_k=K, sphere_R=R, separation_d=0.0)

    def test_rejects_gap_floor_wider_than_separation(self):
        with pytest.raises(DomainError):
            SpringSphereModel(
                spring_k=K, sphere_R=R, separation_d=5e-9, gap_floor=10e-9
            )
