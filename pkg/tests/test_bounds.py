import math

import numpy as np
import pytest

from cutchoose.bounds import (
    IdealVDQC,
    epsilon_d_composable,
    epsilon_d_composable_grid,
    epsilon_d_standalone,
    epsilon_d_standalone_grid,
    epsilon_h,
    ideal_vs_real_distinguishability,
    run_tradeoff_check,
    theorem_bound,
)
from cutchoose.errors import ContractViolationError, OutOfDomainError
from cutchoose.families import PlusTraps, plus_acceptance, computational_acceptance, ComputationalTraps
from cutchoose.linalg import DensityOperator
from cutchoose.optimize import scan_unit_interval
from cutchoose.protocol import ProtocolSpec, RoundDistribution, PerRoundAcceptance
from cutchoose.sampling import random_density, random_pure_state
from cutchoose.states import (
    PovmElement,
    attack_operator,
    computational_basis_state,
    mix_with_abort,
    plus_state,
)
from cutchoose.strategies import (
    HONEST,
    PhaseAttack,
    ProtocolVariant,
    SecurityModel,
)


def attacked_output(alpha, p_accept, k=1):
    psi = plus_state(k)
    a = attack_operator(alpha, k)
    payload = DensityOperator(np.outer(a @ psi.amplitudes, (a @ psi.amplitudes).conj()))
    return mix_with_abort(payload, p_accept)


def plus_spec(n, k=1):
    return ProtocolSpec(
        omega=RoundDistribution.point_mass(n), k=k,
        traps=PlusTraps(), acceptance=plus_acceptance(),
    )


class TestEpsilonH:
    def test_perfect_run_both_models(self):
        target = plus_state(1).density()
        rho = mix_with_abort(target, 1.0)
        for model in SecurityModel:
            assert epsilon_h(rho, target, model) == pytest.approx(0.0, abs=1e-12)

    def test_partial_acceptance(self):
        target = plus_state(1).density()
        rho = mix_with_abort(target, 0.9)
        for model in SecurityModel:
            assert epsilon_h(rho, target, model) == pytest.approx(0.1, abs=1e-10)

    def test_orthogonal_payload(self):
        target = computational_basis_state(1).density()
        rho = mix_with_abort(computational_basis_state(1, index=1).density(), 1.0)
        for model in SecurityModel:
            assert epsilon_h(rho, target, model) == pytest.approx(1.0, abs=1e-10)

    def test_dim_mismatch(self):
        with pytest.raises(ContractViolationError):
            epsilon_h(mix_with_abort(plus_state(2).density(), 1.0),
                      plus_state(1).density(), SecurityModel.STAND_ALONE)


class TestEpsilonDStandAlone:
    def test_attacked_output_closed_form(self):
        for alpha in (0.3, 1.1, 2.7):
            for p in (0.2, 0.7, 1.0):
                rho = attacked_output(alpha, p)
                assert epsilon_d_standalone(rho, plus_state(1).density()) == pytest.approx(
                    p * math.sin(alpha / 2) ** 2, abs=1e-10
                )

    def test_zero_for_exact_mixture(self):
        target = plus_state(1).density()
        for p in (0.0, 0.3, 1.0):
            rho = mix_with_abort(target, p)
            assert epsilon_d_standalone(rho, target) == pytest.approx(0.0, abs=1e-12)

    def test_always_abort(self):
        rho = mix_with_abort(plus_state(1).density(), 0.0)
        assert epsilon_d_standalone(rho, computational_basis_state(1).density()) == 0.0

    def test_grid_agreement(self):
        rng = np.random.default_rng(13)
        for _ in range(8):
            k = int(rng.integers(1, 3))
            payload = random_density(2**k, rng)
            target = random_density(2**k, rng)
            rho = mix_with_abort(payload, float(rng.uniform(0, 1)))
            closed = epsilon_d_standalone(rho, target)
            grid = epsilon_d_standalone_grid(rho, target)
            assert abs(closed - grid) <= 1e-6


class TestEpsilonDComposable:
    def test_attacked_output_closed_form(self):
        for alpha in (0.4, 1.3, 3.0):
            for p in (0.25, 0.8, 1.0):
                rho = attacked_output(alpha, p)
                assert epsilon_d_composable(rho, plus_state(1).density()) == pytest.approx(
                    p * abs(math.sin(alpha / 2)), abs=1e-10
                )

    def test_zero_for_exact_mixture(self):
        target = plus_state(1).density()
        rho = mix_with_abort(target, 0.3)
        assert epsilon_d_composable(rho, target) == pytest.approx(0.0, abs=1e-10)

    def test_trivial_attack(self):
        for p in (0.1, 0.6, 1.0):
            rho = attacked_output(0.0, p)
            assert epsilon_d_composable(rho, plus_state(1).density()) == pytest.approx(
                0.0, abs=1e-12
            )

    def test_mixed_payload_falls_back_to_grid(self):
        rng = np.random.default_rng(19)
        payload = random_density(2, rng, rank=2)
        assert not payload.is_pure()
        target = plus_state(1).density()
        rho = mix_with_abort(payload, 0.65)
        got = epsilon_d_composable(rho, target)
        # block split of the trace distance, minimized at p = accept weight
        from cutchoose.linalg import trace_norm

        expected = 0.65 * 0.5 * trace_norm(payload.matrix - target.matrix)
        assert got == pytest.approx(expected, abs=1e-6)

    def test_grid_agreement_pure(self):
        rng = np.random.default_rng(23)
        for _ in range(8):
            payload = random_pure_state(2, rng).density()
            target = random_pure_state(2, rng).density()
            rho = mix_with_abort(payload, float(rng.uniform(0, 1)))
            assert abs(
                epsilon_d_composable(rho, target) - epsilon_d_composable_grid(rho, target)
            ) <= 1e-6


class TestMaxIdentity:
    def test_grid_max_matches_closed_form(self):
        rng = np.random.default_rng(29)
        for _ in range(200):
            a, b = rng.uniform(0, 1, size=2)
            _, best = scan_unit_interval(
                lambda p: (math.sqrt(p) * a + math.sqrt(1 - p) * b) ** 2,
                step=1e-4, minimize=False,
                vector_f=lambda ps: (np.sqrt(ps) * a + np.sqrt(1 - ps) * b) ** 2,
            )
            assert abs(best - (a * a + b * b)) <= 1e-6


class TestTheoremBound:
    def test_values(self):
        assert theorem_bound(SecurityModel.STAND_ALONE, ProtocolVariant.PER_ROUND, 10) == pytest.approx(1 / 70)
        assert theorem_bound(SecurityModel.COMPOSABLE, ProtocolVariant.PER_ROUND, 16) == pytest.approx(1 / 16)
        assert theorem_bound(SecurityModel.STAND_ALONE, ProtocolVariant.GENERAL_TESTS, 2) == pytest.approx(1 / 28)
        assert theorem_bound(SecurityModel.COMPOSABLE, ProtocolVariant.GENERAL_TESTS, 2) == pytest.approx(1 / 8)

    def test_domain(self):
        with pytest.raises(OutOfDomainError):
            theorem_bound(SecurityModel.STAND_ALONE, ProtocolVariant.PER_ROUND, 0.0)


class TestElementaryInequality:
    def test_bernoulli_power_floor(self):
        # (1 - x/n)^n >= 1 - x on a grid with |x| <= n
        for n in (1, 2, 5, 10, 50):
            for x in np.linspace(-n, n, 101):
                assert (1 - x / n) ** n >= 1 - x - 1e-12


class TestRunTradeoffCheck:
    def test_stand_alone_point_mass_ten(self):
        report = run_tradeoff_check(plus_spec(10), SecurityModel.STAND_ALONE)
        s2 = 4.0 / 90.0
        assert report.eps_h == pytest.approx(0.0, abs=1e-12)
        assert report.eps_d == pytest.approx((1 - s2) ** 10 * s2, abs=1e-9)
        assert report.bound == pytest.approx(1 / 70)
        assert report.satisfied
        assert all(s.holds for s in report.proof_steps)

    def test_blind_trap_family_still_satisfied(self):
        spec = ProtocolSpec(
            omega=RoundDistribution.point_mass(5), k=1,
            traps=ComputationalTraps(), acceptance=computational_acceptance(),
        )
        report = run_tradeoff_check(spec, SecurityModel.STAND_ALONE)
        assert report.p_d == pytest.approx(1.0, abs=1e-12)
        assert report.eps_d == pytest.approx(math.sin(report.alpha / 2) ** 2, abs=1e-10)
        assert report.satisfied

    def test_trivial_attack_flagged(self):
        report = run_tradeoff_check(plus_spec(3), SecurityModel.STAND_ALONE, alpha_override=0.0)
        assert report.trivial_attack
        assert not report.applicable
        assert report.eps_d == pytest.approx(0.0, abs=1e-12)
        final = [s for s in report.proof_steps if s.name == "theorem_bound"][0]
        assert final.holds is None
        assert not report.satisfied  # sum of errors is 0, below the bound

    def test_satisfied_matches_definition(self):
        for n in (1, 4, 20):
            for model in SecurityModel:
                report = run_tradeoff_check(plus_spec(n), model)
                assert report.satisfied == (
                    report.eps_h + report.eps_d >= report.bound - 1e-12
                )

    def test_end_to_end_sweeps(self):
        for n in (1, 2, 5, 10, 50, 200):
            sa = run_tradeoff_check(plus_spec(n), SecurityModel.STAND_ALONE)
            assert sa.eps_h + sa.eps_d >= 1.0 / (7.0 * n) - 1e-12
            co = run_tradeoff_check(plus_spec(n), SecurityModel.COMPOSABLE)
            assert co.eps_h + co.eps_d >= 1.0 / (4.0 * math.sqrt(n)) - 1e-12

    def test_security_error_decreases_with_more_tests(self):
        values = [
            run_tradeoff_check(plus_spec(n), SecurityModel.STAND_ALONE).eps_d
            for n in (1, 2, 5, 10, 50, 200)
        ]
        assert all(a >= b - 1e-15 for a, b in zip(values, values[1:]))


class TestIdealResource:
    def test_outputs(self):
        psi = plus_state(1).density()
        ideal = IdealVDQC(psi, np.eye(2))
        assert ideal.output(0).accept_weight == pytest.approx(1.0)
        assert ideal.output(1).accept_weight == pytest.approx(0.0)
        assert ideal.leakage.register_size == 1

    def test_rejects_bad_control_bit(self):
        with pytest.raises(ContractViolationError):
            IdealVDQC(plus_state(1).density(), np.eye(2), control_bit=2)

    def test_honest_perfect_traps(self):
        spec = plus_spec(2)
        psi = plus_state(1).density()
        honest_gap, dishonest_gap = ideal_vs_real_distinguishability(
            spec, HONEST, psi, np.eye(2)
        )
        assert honest_gap == pytest.approx(0.0, abs=1e-10)
        assert dishonest_gap == pytest.approx(0.0, abs=1e-10)

    def test_orthogonal_attack_gap(self):
        spec = plus_spec(2)
        psi = plus_state(1).density()
        attack = PhaseAttack(math.pi)
        _, dishonest_gap = ideal_vs_real_distinguishability(spec, attack, psi, np.eye(2))
        from cutchoose.protocol import overall_acceptance

        p_d = overall_acceptance(spec, attack)
        assert dishonest_gap == pytest.approx(p_d, abs=1e-10)
        # cross-check against an explicit scan over the ideal-side acceptance
        rho_d = attacked_output(math.pi, p_d)
        assert dishonest_gap == pytest.approx(
            epsilon_d_composable_grid(rho_d, psi), abs=1e-6
        )

    def test_lossy_traps_honest_gap(self):
        # acceptance element scaled to pass honest runs with probability 0.95
        scaled = PerRoundAcceptance(
            lambda k, n, i: PovmElement(0.95 * plus_state(k).projector())
        )
        spec = ProtocolSpec(
            omega=RoundDistribution.point_mass(1), k=1,
            traps=PlusTraps(), acceptance=scaled,
        )
        psi = plus_state(1).density()
        honest_gap, _ = ideal_vs_real_distinguishability(spec, HONEST, psi, np.eye(2))
        assert honest_gap == pytest.approx(0.05, abs=1e-10)

    def test_gaps_match_error_measures(self):
        spec = plus_spec(3)
        psi = plus_state(1).density()
        attack = PhaseAttack(0.8)
        honest_gap, dishonest_gap = ideal_vs_real_distinguishability(
            spec, attack, psi, np.eye(2)
        )
        from cutchoose.protocol import client_output_state

        rho_h = client_output_state(spec, HONEST, psi, np.eye(2))
        rho_d = client_output_state(spec, attack, psi, np.eye(2))
        assert abs(honest_gap - epsilon_h(rho_h, psi, SecurityModel.COMPOSABLE)) <= 1e-10
        assert abs(dishonest_gap - epsilon_d_composable(rho_d, psi)) <= 1e-10
