"""Unit tests for planning and signal acquisition."""

from __future__ import annotations

import math

import numpy as np
import pytest

from xz24.core.errors import PlanError
from xz24.models.schemas import TWO_PI, SamplingMode, SamplingPlan
from xz24.services.hamiltonian import Hamiltonian, parse_hamiltonian
from xz24.services.oracle import analytic_signal, diagonalize, overlaps
from xz24.services.sampling import (
    acquire_signal,
    estimate_energy_bound,
    evaluation_count,
    make_plan,
)
from xz24.services.states import ReferenceSpec, prepare_reference


class TestMakePlan:
    def test_reference_scale_plan(self) -> None:
        plan = make_plan(0.0016, 2.1664)
        assert plan.t_max == pytest.approx(TWO_PI / 0.0016, rel=1e-9)
        assert plan.t_max == pytest.approx(3926.99, abs=0.01)
        assert plan.delta_max == pytest.approx(1.4502, abs=1e-4)
        assert plan.interval <= plan.delta_max
        assert plan.count % 2 == 1
        assert plan.delta <= 0.0016

    def test_grid_identity(self) -> None:
        plan = make_plan(0.1, 1.0)
        assert plan.delta_max == pytest.approx(math.pi)
        assert plan.interval <= math.pi
        assert plan.count % 2 == 1
        assert plan.delta * plan.interval * plan.count == pytest.approx(TWO_PI, abs=1e-12)

    def test_rejects_aliasing_interval(self) -> None:
        with pytest.raises(PlanError) as excinfo:
            make_plan(0.0016, 2.1664, requested_interval=2.0)
        assert "1.4502" in str(excinfo.value)

    def test_keeps_requested_interval_when_safe(self) -> None:
        plan = make_plan(0.01, 1.0, requested_interval=0.5)
        assert plan.interval <= 0.5
        assert plan.interval == pytest.approx(0.5, rel=1e-3)

    @pytest.mark.parametrize("target", [0.0005, 0.003, 0.0137, 0.2])
    def test_delta_never_exceeds_target(self, target: float) -> None:
        plan = make_plan(target, 1.7)
        assert plan.delta <= target
        assert plan.count >= 3

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"target_delta": 0.0, "energy_bound": 1.0},
            {"target_delta": -0.1, "energy_bound": 1.0},
            {"target_delta": 0.1, "energy_bound": 0.0},
            {"target_delta": 0.1, "energy_bound": float("inf")},
            {"target_delta": 0.1, "energy_bound": 1.0, "shots": 0},
            {"target_delta": 0.1, "energy_bound": 1.0, "requested_interval": -1.0},
        ],
    )
    def test_rejects_invalid_inputs(self, kwargs: dict) -> None:
        with pytest.raises(PlanError):
            make_plan(**kwargs)

    def test_evaluation_count(self) -> None:
        mirror = make_plan(0.05, 1.0)
        full = make_plan(0.05, 1.0, mode=SamplingMode.FULL)
        assert evaluation_count(mirror) == (mirror.count + 1) // 2
        assert evaluation_count(full) == full.count


class TestSamplingPlanModel:
    def test_even_count_rejected(self) -> None:
        with pytest.raises(ValueError):
            SamplingPlan(
                delta=TWO_PI / 20, interval=1.0, count=20, t_max=20.0, energy_bound=1.0
            )

    def test_nyquist_enforced(self) -> None:
        with pytest.raises(ValueError):
            SamplingPlan.from_grid(2.0, 11, energy_bound=2.0)

    def test_from_grid_defaults(self) -> None:
        plan = SamplingPlan.from_grid(0.5, 11)
        assert plan.mode is SamplingMode.FULL
        assert plan.energy_bound == pytest.approx(2 * math.pi)
        assert plan.delta == pytest.approx(TWO_PI / 5.5)

    def test_times(self) -> None:
        plan = SamplingPlan.from_grid(0.25, 5)
        np.testing.assert_allclose(plan.times(), [0.0, 0.25, 0.5, 0.75, 1.0])


class TestEnergyBound:
    def test_l1_default(self, fixture_hamiltonian: Hamiltonian) -> None:
        bound = estimate_energy_bound(fixture_hamiltonian)
        assert bound.value == pytest.approx(1.7)
        assert bound.source == "l1"
        assert not bound.heuristic

    def test_basis_expectation_heuristic(self) -> None:
        h = parse_hamiltonian("-1.5\n0.5 Z0\n0.25 X0 X1\n")
        bound = estimate_energy_bound(h, ReferenceSpec.basis("00"), heuristic=True)
        assert bound.value == pytest.approx(1.0)
        assert bound.heuristic

    def test_heuristic_needs_basis_reference(self, fixture_hamiltonian: Hamiltonian) -> None:
        spec = ReferenceSpec.weighted([("0", 1.0), ("1", 1.0)])
        with pytest.raises(PlanError):
            estimate_energy_bound(fixture_hamiltonian, spec, heuristic=True)

    def test_zero_expectation_falls_back(self) -> None:
        h = parse_hamiltonian("1.0 X0\n")
        bound = estimate_energy_bound(h, ReferenceSpec.basis("0"), heuristic=True)
        assert bound.source == "l1"
        assert bound.value == pytest.approx(1.0)


class TestAcquireSignal:
    def test_full_mode_matches_analytic_signal(self, fixture_hamiltonian: Hamiltonian) -> None:
        spec = ReferenceSpec.basis("0")
        plan = make_plan(0.2, 1.7, mode=SamplingMode.FULL)
        signal = acquire_signal(fixture_hamiltonian, spec, plan)
        table = overlaps(diagonalize(fixture_hamiltonian), prepare_reference(spec, 1))
        np.testing.assert_allclose(
            signal.values, analytic_signal(table, plan.times()), atol=1e-10
        )

    def test_mirror_fill_is_symmetric(self, fixture_hamiltonian: Hamiltonian) -> None:
        plan = make_plan(0.2, 1.7)
        values = acquire_signal(fixture_hamiltonian, ReferenceSpec.basis("0"), plan).values
        n = np.arange(1, plan.count)
        np.testing.assert_array_equal(values[n], values[plan.count - n])

    def test_mirror_equals_full_for_on_grid_energies(self) -> None:
        h = parse_hamiltonian("1.0 Z0\n")
        interval = TWO_PI * 3 / 21
        mirror = SamplingPlan.from_grid(interval, 21, mode=SamplingMode.MIRROR, energy_bound=1.0)
        full = SamplingPlan.from_grid(interval, 21, mode=SamplingMode.FULL, energy_bound=1.0)
        spec = ReferenceSpec.basis("0")
        np.testing.assert_allclose(
            acquire_signal(h, spec, mirror).values,
            acquire_signal(h, spec, full).values,
            atol=1e-12,
        )

    def test_worker_count_does_not_change_result(self, fixture_hamiltonian: Hamiltonian) -> None:
        spec = ReferenceSpec.basis("0")
        plan = make_plan(0.05, 1.7)
        serial = acquire_signal(fixture_hamiltonian, spec, plan, workers=1).values
        pooled = acquire_signal(fixture_hamiltonian, spec, plan, workers=4).values
        np.testing.assert_array_equal(serial, pooled)

    def test_shot_mode_is_seed_deterministic(self, fixture_hamiltonian: Hamiltonian) -> None:
        spec = ReferenceSpec.basis("0")
        plan = make_plan(0.2, 1.7, shots=200)
        first = acquire_signal(fixture_hamiltonian, spec, plan, seed=5, workers=1).values
        again = acquire_signal(fixture_hamiltonian, spec, plan, seed=5, workers=3).values
        other = acquire_signal(fixture_hamiltonian, spec, plan, seed=6).values
        np.testing.assert_array_equal(first, again)
        assert not np.array_equal(first, other)

    def test_workers_from_settings(
        self, fixture_hamiltonian: Hamiltonian, monkeypatch: pytest.MonkeyPatch
    ) -> None:
        monkeypatch.setenv("XZ24_WORKERS", "2")
        plan = make_plan(0.2, 1.7)
        signal = acquire_signal(fixture_hamiltonian, ReferenceSpec.basis("0"), plan)
        assert signal.values.shape == (plan.count,)

    def test_negative_seed_rejected(self, fixture_hamiltonian: Hamiltonian) -> None:
        plan = make_plan(0.2, 1.7, shots=10)
        with pytest.raises(ValueError):
            acquire_signal(fixture_hamiltonian, ReferenceSpec.basis("0"), plan, seed=-1)

    def test_shot_noise_within_five_sigma(self, fixture_hamiltonian: Hamiltonian) -> None:
        spec = ReferenceSpec.basis("0")
        shots = 400
        plan = make_plan(0.01, 1.7, shots=shots, mode=SamplingMode.FULL)
        noisy = acquire_signal(fixture_hamiltonian, spec, plan, seed=11).values
        table = overlaps(diagonalize(fixture_hamiltonian), prepare_reference(spec, 1))
        deviation = np.abs(noisy - analytic_signal(table, plan.times()))
        assert np.mean(deviation <= 5 / math.sqrt(shots)) >= 0.99
        assert deviation.max() > 0
