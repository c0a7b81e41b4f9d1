"""Security errors under both definitions and trade-off bound certification.

Two figures of merit are computed for protocol outputs on the
abort-extended space:

* correctness error: distance of the honest output from the ideal output
  (one minus fidelity, or half trace distance, by model);
* security error: residual distance of a dishonest output from the best
  mixture of ideal output and rejection.

For the security error both a closed form (block structure plus the
``max_p (sqrt(p) a + sqrt(1-p) b)^2 = a^2 + b^2`` identity) and an
independent grid search over the mixing weight are provided; tests require
agreement to 1e-6. Trade-off checks run the honest and attacked protocol,
evaluate every intermediate inequality of the bound derivation, and report
pass/fail per step. The composable conditions are checked against a minimal
executable model of the ideal functionality rather than any particular
composability framework.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolationError, OutOfDomainError
from .linalg import (
    DensityOperator,
    fidelity,
    psd_sqrt,
    fidelity_psd,
    trace_norm,
)
from .optimize import scan_unit_interval
from .protocol import ProtocolSpec, client_output_state, overall_acceptance
from .states import AbortExtendedState, embedded_target, mix_with_abort, plus_state
from .strategies import (
    HONEST,
    PhaseAttack,
    Placement,
    ProtocolVariant,
    SecurityModel,
    ServerStrategy,
    optimal_alpha,
)

GRID_STEP = 1e-4
_STEP_TOL = 1e-10
_BOUND_TOL = 1e-12


def _check_dims(rho: AbortExtendedState, target: DensityOperator):
    if rho.dim_payload != target.dim:
        raise ContractViolationError(
            f"payload dim {rho.dim_payload} does not match target dim {target.dim}"
        )


def epsilon_h(rho_h: AbortExtendedState, target: DensityOperator, model: SecurityModel) -> float:
    """Correctness error of an honest-run output against the ideal output."""
    _check_dims(rho_h, target)
    ideal = embedded_target(target)
    if model is SecurityModel.STAND_ALONE:
        return max(0.0, 1.0 - fidelity(rho_h.state, ideal.state))
    return 0.5 * trace_norm(rho_h.matrix - ideal.matrix)


def _sigma_p(target: DensityOperator, p: float) -> np.ndarray:
    d = target.dim
    m = np.zeros((d + 1, d + 1), dtype=np.complex128)
    m[:d, :d] = p * target.matrix
    m[d, d] = 1.0 - p
    return m


def epsilon_d_standalone(rho_d: AbortExtendedState, target: DensityOperator) -> float:
    """Security error 1 - max_p F(rho_d, p*target ⊕ (1-p)*reject), closed form.

    The two operators are block diagonal with matching blocks, so the
    fidelity splits over blocks and the maximum over p collapses to
    ``p_accept * (1 - F(payload, target))``.
    """
    _check_dims(rho_d, target)
    p_acc = rho_d.accept_weight
    payload = rho_d.payload()
    if payload is None:
        return 0.0  # choose p = 0: the all-reject mixture matches exactly
    return max(0.0, p_acc * (1.0 - fidelity(payload, target)))


def epsilon_d_standalone_grid(
    rho_d: AbortExtendedState, target: DensityOperator, step: float = GRID_STEP
) -> float:
    """Independent evaluation of the same quantity by scanning p."""
    _check_dims(rho_d, target)
    rho = rho_d.matrix

    def vector_fid(ps: np.ndarray) -> np.ndarray:
        s = psd_sqrt(rho)
        ideal = _sigma_p(target, 1.0)
        reject = _sigma_p(target, 0.0)
        m1 = s @ ideal @ s
        m0 = s @ reject @ s
        stack = ps[:, None, None] * m1[None] + (1.0 - ps)[:, None, None] * m0[None]
        stack = (stack + np.conj(np.transpose(stack, (0, 2, 1)))) / 2.0
        w = np.clip(np.linalg.eigvalsh(stack), 0.0, None)
        return np.sum(np.sqrt(w), axis=1) ** 2

    _, best = scan_unit_interval(
        lambda p: fidelity_psd(rho, _sigma_p(target, p)),
        step=step,
        minimize=False,
        vector_f=vector_fid,
    )
    return max(0.0, 1.0 - min(1.0, best))


def epsilon_d_composable(rho_d: AbortExtendedState, target: DensityOperator) -> float:
    """Security error min_p (1/2)||rho_d - (p*target ⊕ (1-p)*reject)||_1.

    For pure payload and target the minimum sits at p = accept weight and
    equals that weight times the payload/target trace distance; otherwise
    the grid search is used.
    """
    _check_dims(rho_d, target)
    p_acc = rho_d.accept_weight
    payload = rho_d.payload()
    if payload is None:
        return 0.0
    if payload.is_pure() and target.is_pure():
        return p_acc * 0.5 * trace_norm(payload.matrix - target.matrix)
    return epsilon_d_composable_grid(rho_d, target)


def epsilon_d_composable_grid(
    rho_d: AbortExtendedState, target: DensityOperator, step: float = GRID_STEP
) -> float:
    _check_dims(rho_d, target)
    rho = rho_d.matrix
    m1 = rho - _sigma_p(target, 1.0)
    m0 = rho - _sigma_p(target, 0.0)

    def vector_dist(ps: np.ndarray) -> np.ndarray:
        stack = ps[:, None, None] * m1[None] + (1.0 - ps)[:, None, None] * m0[None]
        w = np.linalg.eigvalsh(stack)  # differences of Hermitians are Hermitian
        return 0.5 * np.sum(np.abs(w), axis=1)

    _, best = scan_unit_interval(
        lambda p: 0.5 * trace_norm(rho - _sigma_p(target, p)),
        step=step,
        minimize=True,
        vector_f=vector_dist,
    )
    return max(0.0, best)


def theorem_bound(model: SecurityModel, variant: ProtocolVariant, n_expected: float) -> float:
    """Lower bound on (correctness + security error) for the given regime."""
    if n_expected <= 0:
        raise OutOfDomainError(f"expected test-round count must be positive, got {n_expected}")
    n = float(n_expected)
    if variant is ProtocolVariant.PER_ROUND:
        if model is SecurityModel.STAND_ALONE:
            return 1.0 / (7.0 * n)
        return 1.0 / (4.0 * math.sqrt(n))
    if model is SecurityModel.STAND_ALONE:
        return 1.0 / (7.0 * n * n)
    return 1.0 / (4.0 * n)


@dataclass(frozen=True)
class ProofStep:
    """One inequality of the bound derivation, stated as lhs >= rhs.

    ``holds`` is None when the step does not apply (trivial attack).
    """

    name: str
    lhs: float
    rhs: float
    holds: bool | None


@dataclass(frozen=True)
class TradeoffReport:
    model: SecurityModel
    variant: ProtocolVariant
    n_expected: float
    alpha: float
    p_h: float
    p_d: float
    eps_h: float
    eps_d: float
    bound: float
    satisfied: bool
    proof_steps: tuple[ProofStep, ...]
    trivial_attack: bool

    @property
    def applicable(self) -> bool:
        """False when the attack is the identity and the bound says nothing."""
        return not self.trivial_attack


def acceptance_gap_bound(variant: ProtocolVariant, alpha: float, n_expected: float) -> float:
    """Upper bound on |p_H - p_D| available to the derivation."""
    s = math.sin(alpha / 2.0)
    if variant is ProtocolVariant.PER_ROUND:
        return math.sqrt(max(0.0, 1.0 - (1.0 - s * s) ** n_expected))
    return n_expected * abs(s)


def build_tradeoff_report(
    model: SecurityModel,
    variant: ProtocolVariant,
    n_expected: float,
    alpha: float,
    p_h: float,
    p_d: float,
    eps_h: float,
    eps_d: float,
) -> TradeoffReport:
    """Assemble the per-step inequality checks and the final bound verdict."""
    s = math.sin(alpha / 2.0)
    disturbance = s * s if model is SecurityModel.STAND_ALONE else abs(s)
    gap = abs(p_h - p_d)
    gap_bound = acceptance_gap_bound(variant, alpha, n_expected)
    bound = theorem_bound(model, variant, n_expected)
    trivial = abs(s) < 1e-15
    total = eps_h + eps_d

    def step(name, lhs, rhs, applicable=True):
        return ProofStep(name, lhs, rhs, (lhs >= rhs - _STEP_TOL) if applicable else None)

    steps = (
        step("correctness_floor", eps_h, 1.0 - p_h),
        step("security_floor", eps_d, p_d * disturbance),
        step("sum_vs_disturbance", total, disturbance * (1.0 - gap)),
        step("acceptance_gap", gap_bound, gap),
        step("theorem_bound", total, bound, applicable=not trivial),
    )
    return TradeoffReport(
        model=model,
        variant=variant,
        n_expected=n_expected,
        alpha=alpha,
        p_h=p_h,
        p_d=p_d,
        eps_h=eps_h,
        eps_d=eps_d,
        bound=bound,
        satisfied=total >= bound - _BOUND_TOL,
        proof_steps=steps,
        trivial_attack=trivial,
    )


def run_tradeoff_check(
    spec: ProtocolSpec,
    model: SecurityModel,
    variant: ProtocolVariant = ProtocolVariant.PER_ROUND,
    alpha_override: float | None = None,
    placement: Placement = Placement.POST,
) -> TradeoffReport:
    """Full honest-vs-attacked evaluation on the uniform-superposition input.

    The attacked run uses the bound-optimal angle for ``(model, variant)``
    unless ``alpha_override`` is given. Target computation is the identity.
    """
    n_expected = spec.omega.mean
    if alpha_override is None:
        alpha = optimal_alpha(model, variant, n_expected)
    else:
        alpha = float(alpha_override) % (2.0 * math.pi)
    attack = PhaseAttack(alpha, placement)
    psi = plus_state(spec.k).density()
    identity = np.eye(2**spec.k, dtype=np.complex128)

    p_h = overall_acceptance(spec, HONEST)
    p_d = overall_acceptance(spec, attack)
    rho_h = client_output_state(spec, HONEST, psi, identity)
    rho_d = client_output_state(spec, attack, psi, identity)
    eps_h_val = epsilon_h(rho_h, psi, model)
    if model is SecurityModel.STAND_ALONE:
        eps_d_val = epsilon_d_standalone(rho_d, psi)
    else:
        eps_d_val = epsilon_d_composable(rho_d, psi)
    return build_tradeoff_report(
        model, variant, n_expected, alpha, p_h, p_d, eps_h_val, eps_d_val
    )


@dataclass(frozen=True)
class Leakage:
    """Information the ideal functionality may hand to a dishonest server."""

    register_size: int
    circuit_length_bound: int


@dataclass(frozen=True, eq=False)
class IdealVDQC:
    """Minimal executable model of the ideal verified-delegation resource.

    Applies the requested unitary when the control bit is 0 and rejects when
    it is 1. The honest-side filter forces the control bit to 0 and discards
    the leakage; the leakage is carried for completeness but plays no role
    in any bound.
    """

    input_state: DensityOperator
    unitary: np.ndarray
    control_bit: int = 0
    leakage: Leakage | None = None

    def __post_init__(self):
        if self.control_bit not in (0, 1):
            raise ContractViolationError(f"control bit must be 0 or 1, got {self.control_bit}")
        if self.leakage is None:
            k = int(round(math.log2(self.input_state.dim)))
            object.__setattr__(self, "leakage", Leakage(k, 1))

    def ideal_output(self) -> DensityOperator:
        u = np.asarray(self.unitary)
        return DensityOperator(u @ self.input_state.matrix @ u.conj().T)

    def output(self, control_bit: int | None = None) -> AbortExtendedState:
        c = self.control_bit if control_bit is None else control_bit
        if c not in (0, 1):
            raise ContractViolationError(f"control bit must be 0 or 1, got {c}")
        return mix_with_abort(self.ideal_output(), 1.0 if c == 0 else 0.0)

    def output_mixture(self, p: float) -> AbortExtendedState:
        """Best the ideal-side attacker can do: input c = 0 with probability p."""
        return mix_with_abort(self.ideal_output(), p)


def ideal_vs_real_distinguishability(
    spec: ProtocolSpec,
    strategy: ServerStrategy,
    input_state: DensityOperator,
    target_unitary,
) -> tuple[float, float]:
    """Trace-distance gaps between protocol outputs and the ideal resource.

    The honest gap compares the honest run against the filtered ideal
    (control bit 0); the dishonest gap minimizes over the ideal-side attack's
    acceptance probability. These match the two composable error measures.
    """
    ideal = IdealVDQC(input_state, np.asarray(target_unitary, dtype=np.complex128))
    rho_h = client_output_state(spec, HONEST, input_state, target_unitary)
    honest_gap = 0.5 * trace_norm(rho_h.matrix - ideal.output(0).matrix)
    rho_d = client_output_state(spec, strategy, input_state, target_unitary)
    dishonest_gap = epsilon_d_composable(rho_d, ideal.ideal_output())
    return honest_gap, dishonest_gap
