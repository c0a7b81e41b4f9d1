"""Executable model of the interleaved test/output delegation protocol.

The client samples a test-round count ``n``, hides one output round among
the ``n + 1`` delegated rounds, runs known trap computations in the test
rounds, and accepts iff the trap outputs pass a measurement. For the
supported server strategies (identical and independent across rounds) the
position of the output round does not affect any probability, so tests and
output are evaluated independently; the test suite checks this against a
literal sequential simulator on small instances.

Acceptance probabilities are computed exactly (double sum over the finite
support of the round distribution) and, as a stochastic cross-check, by a
seeded round-by-round Monte-Carlo sampler.
"""

from __future__ import annotations

import abc
import math
from dataclasses import dataclass
from typing import Callable, Mapping, NamedTuple, Sequence

import numpy as np

from .errors import (
    ContractViolationError,
    DimensionCapError,
    OutOfDomainError,
)
from .linalg import (
    DIM_CAP,
    DensityOperator,
    PureState,
    as_square_matrix,
    dagger,
    is_unitary,
)
from .states import AbortExtendedState, PovmElement, mix_with_abort
from .strategies import ServerStrategy, require_supported, transform_round

_PROB_SNAP = 1e-12


def _snap_probability(p: float, what: str) -> float:
    """Clamp rounding noise at the ends of [0, 1]; reject anything worse."""
    if -_PROB_SNAP <= p <= 1.0 + _PROB_SNAP:
        return min(1.0, max(0.0, p))
    raise ContractViolationError(f"{what} = {p!r} outside [0, 1]")


@dataclass(frozen=True)
class RoundDistribution:
    """Finite-support distribution of the test-round count.

    Infinite-tail distributions must be truncated and renormalized by the
    caller; summation here is exact over the support.
    """

    support: tuple[tuple[int, float], ...]

    def __post_init__(self):
        if not self.support:
            raise ContractViolationError("round distribution has empty support")
        ns = [n for n, _ in self.support]
        ps = [p for _, p in self.support]
        if any(not isinstance(n, int) or n < 0 for n in ns):
            raise ContractViolationError("round counts must be non-negative integers")
        if ns != sorted(ns) or len(set(ns)) != len(ns):
            raise ContractViolationError("support must be sorted by n with unique entries")
        if any(p < 0.0 for p in ps):
            raise ContractViolationError("probabilities must be non-negative")
        total = math.fsum(ps)
        if abs(total - 1.0) > 1e-12:
            raise ContractViolationError(
                f"probabilities sum to {total!r}, not 1 within 1e-12"
            )

    @classmethod
    def point_mass(cls, n: int) -> "RoundDistribution":
        return cls(((int(n), 1.0),))

    @classmethod
    def from_pairs(cls, pairs) -> "RoundDistribution":
        return cls(tuple(sorted((int(n), float(p)) for n, p in pairs)))

    @property
    def mean(self) -> float:
        """Expected number of test rounds."""
        return math.fsum(n * p for n, p in self.support)

    @property
    def max_n(self) -> int:
        return self.support[-1][0]

    def prob(self, n: int) -> float:
        for m, p in self.support:
            if m == n:
                return p
        return 0.0


class TrapGenerator(abc.ABC):
    """Produces the trap computation and input for a given round.

    Must be deterministic for fixed ``(k, n, i)``.
    """

    @abc.abstractmethod
    def trap(self, k: int, n: int, i: int) -> tuple[np.ndarray, PureState]:
        """Return (unitary on 2**k, input state of dim 2**k) for round i."""


@dataclass(frozen=True)
class PerRoundAcceptance:
    """One measurement element per test round; accept iff every round accepts."""

    element: Callable[[int, int, int], PovmElement]  # (k, n, i) -> effect on 2**k


@dataclass(frozen=True)
class GlobalAcceptance:
    """A single element on all test outputs jointly (dimension 2**(k*n))."""

    element: Callable[[int, int], PovmElement]  # (k, n) -> effect on 2**(k*n)


AcceptanceRule = PerRoundAcceptance | GlobalAcceptance


@dataclass(frozen=True)
class ProtocolSpec:
    """A full cut-and-choose instance.

    ``output_round`` is either ``"uniform"`` (each of the ``n + 1`` rounds is
    the output round with probability ``1/(n+1)``) or a mapping from ``n`` to
    an explicit distribution over ``{1, ..., n+1}``.
    """

    omega: RoundDistribution
    k: int
    traps: TrapGenerator
    acceptance: AcceptanceRule
    output_round: str | Mapping[int, Sequence[float]] = "uniform"

    def __post_init__(self):
        if self.k < 1:
            raise ContractViolationError(f"k must be positive, got {self.k}")
        if 2**self.k > DIM_CAP:
            raise DimensionCapError(f"2**{self.k} exceeds the dimension cap {DIM_CAP}")
        if isinstance(self.output_round, str) and self.output_round != "uniform":
            raise ContractViolationError(
                f"output_round must be 'uniform' or a per-n mapping, got {self.output_round!r}"
            )

    def output_round_probs(self, n: int) -> np.ndarray:
        """Distribution of the output-round position for a given n."""
        if isinstance(self.output_round, str):
            return np.full(n + 1, 1.0 / (n + 1))
        probs = np.asarray(self.output_round[n], dtype=float)
        if probs.shape != (n + 1,):
            raise ContractViolationError(
                f"output-round distribution for n={n} has length {probs.size}, expected {n + 1}"
            )
        if probs.min() < 0.0 or abs(float(probs.sum()) - 1.0) > 1e-12:
            raise ContractViolationError(
                f"output-round distribution for n={n} is not a probability vector"
            )
        return probs


@dataclass(frozen=True)
class RoundOutcomeTable:
    """Per-(n, output round) acceptance probabilities."""

    entries: tuple[tuple[int, int, float], ...]  # (n, ell, p)

    def __post_init__(self):
        for n, ell, p in self.entries:
            if not -1e-12 <= p <= 1.0 + 1e-12:
                raise ContractViolationError(f"p(n={n}, ell={ell}) = {p!r} outside [0, 1]")


def _round_factors(spec: ProtocolSpec, strategy: ServerStrategy, n: int) -> np.ndarray:
    """Per-round acceptance factors <e_i, (transformed T_i)(chi_i)> for i = 1..n+1.

    Traps are pure and the transformed rounds unitary, so each factor reduces
    to a quadratic form on the evolved state vector.
    """
    rule = spec.acceptance
    assert isinstance(rule, PerRoundAcceptance)
    k = spec.k
    vals = np.empty(n + 1)
    for i in range(1, n + 2):
        t, chi = spec.traps.trap(k, n, i)
        t = as_square_matrix(t)
        if not is_unitary(t):
            raise ContractViolationError(f"trap unitary for round {i} is not unitary")
        if chi.dim != 2**k:
            raise ContractViolationError(
                f"trap state for round {i} has dim {chi.dim}, expected {2**k}"
            )
        u = transform_round(strategy, t, k)
        out = u @ chi.amplitudes
        e = rule.element(k, n, i)
        if e.dim != 2**k:
            raise ContractViolationError(
                f"acceptance element for round {i} has dim {e.dim}, expected {2**k}"
            )
        vals[i - 1] = _snap_probability(
            float(np.vdot(out, e.matrix @ out).real), f"round factor (n={n}, i={i})"
        )
    return vals


def acceptance_probability(
    spec: ProtocolSpec, strategy: ServerStrategy, n: int, ell: int
) -> float:
    """Probability the client accepts for a fixed (n, output round)."""
    require_supported(strategy)
    if not 1 <= ell <= n + 1:
        raise OutOfDomainError(f"output round {ell} outside {{1, ..., {n + 1}}}")
    if n == 0:
        return 1.0  # no tests: the empty product accepts
    if isinstance(spec.acceptance, PerRoundAcceptance):
        factors = _round_factors(spec, strategy, n)
        return _snap_probability(
            float(np.prod(np.delete(factors, ell - 1))), f"p(n={n}, ell={ell})"
        )
    return _global_acceptance(spec, strategy, n, ell)


def _global_acceptance(spec, strategy, n: int, ell: int) -> float:
    k = spec.k
    dim = 2 ** (k * n)
    if dim > DIM_CAP:
        raise DimensionCapError(
            f"joint measurement needs dim 2**{k * n}, beyond the cap {DIM_CAP}"
        )
    mu = spec.acceptance.element(k, n)
    if mu.dim != dim:
        raise ContractViolationError(
            f"joint acceptance element has dim {mu.dim}, expected {dim}"
        )
    joint = np.ones(1, dtype=np.complex128)
    for i in range(1, n + 2):
        if i == ell:
            continue
        t, chi = spec.traps.trap(k, n, i)
        u = transform_round(strategy, as_square_matrix(t), k)
        joint = np.kron(joint, u @ chi.amplitudes)
    return _snap_probability(
        float(np.vdot(joint, mu.matrix @ joint).real), f"p(n={n}, ell={ell})"
    )


def _per_ell_products(factors: np.ndarray) -> np.ndarray:
    """prod_{i != ell} factors[i-1] for every ell, via prefix/suffix products."""
    m = factors.size
    pre = np.ones(m + 1)
    pre[1:] = np.cumprod(factors)
    suf = np.ones(m + 1)
    suf[:-1] = np.cumprod(factors[::-1])[::-1]
    # entry ell-1: product over i < ell times product over i > ell
    return pre[:m] * suf[1:]


def overall_acceptance(spec: ProtocolSpec, strategy: ServerStrategy) -> float:
    """Exact acceptance probability, averaged over n and the output round."""
    require_supported(strategy)
    total = 0.0
    for n, wn in spec.omega.support:
        if wn == 0.0:
            continue
        weights = spec.output_round_probs(n)
        if n == 0:
            total += wn
            continue
        if isinstance(spec.acceptance, PerRoundAcceptance):
            per_ell = _per_ell_products(_round_factors(spec, strategy, n))
        else:
            per_ell = np.array(
                [_global_acceptance(spec, strategy, n, ell) for ell in range(1, n + 2)]
            )
        total += wn * float(weights @ per_ell)
    return _snap_probability(total, "overall acceptance")


def round_outcome_table(spec: ProtocolSpec, strategy: ServerStrategy) -> RoundOutcomeTable:
    require_supported(strategy)
    rows = []
    for n, _ in spec.omega.support:
        if n == 0:
            rows.append((0, 1, 1.0))
            continue
        if isinstance(spec.acceptance, PerRoundAcceptance):
            per_ell = _per_ell_products(_round_factors(spec, strategy, n))
        else:
            per_ell = [_global_acceptance(spec, strategy, n, ell) for ell in range(1, n + 2)]
        for ell in range(1, n + 2):
            rows.append(
                (n, ell, _snap_probability(float(per_ell[ell - 1]), f"p(n={n}, ell={ell})"))
            )
    return RoundOutcomeTable(tuple(rows))


def client_output_state(
    spec: ProtocolSpec,
    strategy: ServerStrategy,
    input_state: DensityOperator,
    target_unitary,
) -> AbortExtendedState:
    """Mixture (accept prob) * transformed output + (reject prob) * rejection.

    Valid because the supported strategies act identically and independently
    on every round: the output-round payload does not depend on (n, ell).
    """
    require_supported(strategy)
    u = as_square_matrix(target_unitary)
    if input_state.dim != 2**spec.k or u.shape[0] != 2**spec.k:
        raise ContractViolationError(
            f"input/unitary dimension must be 2**{spec.k}, got "
            f"{input_state.dim} and {u.shape[0]}"
        )
    applied = transform_round(strategy, u, spec.k)
    payload = DensityOperator(applied @ input_state.matrix @ dagger(applied))
    return mix_with_abort(payload, overall_acceptance(spec, strategy))


class MonteCarloResult(NamedTuple):
    accept_rate: float
    abort_rate: float


def monte_carlo_run(
    spec: ProtocolSpec,
    strategy: ServerStrategy,
    input_state: DensityOperator,
    target_unitary,
    trials: int,
    seed: int,
) -> MonteCarloResult:
    """Sampled protocol runs: n ~ omega, output round ~ rule, then one
    Bernoulli draw per test round. Deterministic for a fixed seed."""
    require_supported(strategy)
    if trials < 1:
        raise OutOfDomainError(f"trials must be >= 1, got {trials}")
    if input_state.dim != 2**spec.k:
        raise ContractViolationError(
            f"input dimension must be 2**{spec.k}, got {input_state.dim}"
        )
    as_square_matrix(target_unitary)
    rng = np.random.default_rng(seed)
    ns = np.array([n for n, _ in spec.omega.support])
    probs = np.array([p for _, p in spec.omega.support])
    draws = rng.choice(ns.size, size=trials, p=probs)
    accepted = 0
    for j, n in enumerate(ns):
        m = int(np.count_nonzero(draws == j))
        if m == 0:
            continue
        ells = rng.choice(n + 1, size=m, p=spec.output_round_probs(n))
        if n == 0:
            accepted += m
            continue
        if isinstance(spec.acceptance, PerRoundAcceptance):
            factors = _round_factors(spec, strategy, n)
            uniforms = rng.random((m, n + 1))
            ok = uniforms < factors[None, :]
            ok[np.arange(m), ells] = True  # the output round is not a test
            accepted += int(np.count_nonzero(ok.all(axis=1)))
        else:
            per_ell = np.array(
                [_global_acceptance(spec, strategy, n, ell) for ell in range(1, n + 2)]
            )
            accepted += int(np.count_nonzero(rng.random(m) < per_ell[ells]))
    rate = accepted / trials
    return MonteCarloResult(rate, 1.0 - rate)


class JensenCheck(NamedTuple):
    lhs: float
    rhs: float
    holds: bool


def jensen_gap_check(omega: RoundDistribution, c: float) -> JensenCheck:
    """Concavity step: sum_n omega(n) sqrt(1 - c^{2n}) <= sqrt(1 - c^{2N}).

    ``N`` is the mean of ``omega``; equality holds for point masses.
    """
    if not 0.0 <= c <= 1.0:
        raise OutOfDomainError(f"c = {c!r} outside [0, 1]")
    lhs = math.fsum(
        p * math.sqrt(max(0.0, 1.0 - c ** (2 * n))) for n, p in omega.support
    )
    rhs = math.sqrt(max(0.0, 1.0 - c ** (2.0 * omega.mean)))
    return JensenCheck(lhs, rhs, lhs <= rhs + 1e-12)
