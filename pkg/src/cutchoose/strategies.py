"""Server strategies and the prescribed attack-angle choices.

The strategy set is closed (honest, or a single-qubit phase rotation placed
before or after each delegated unitary); a closed set keeps every supported
strategy independent and identically distributed across rounds, which the
protocol engine relies on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ContractViolationError, OutOfDomainError, UnsupportedStrategyError
from .linalg import as_square_matrix, is_unitary
from .states import attack_operator

_TWO_PI = 2.0 * math.pi


class Placement(Enum):
    PRE = "pre"
    POST = "post"


class SecurityModel(Enum):
    STAND_ALONE = "stand-alone"
    COMPOSABLE = "composable"


class ProtocolVariant(Enum):
    PER_ROUND = "per-round"
    GENERAL_TESTS = "general-tests"


@dataclass(frozen=True)
class Honest:
    """Server follows the protocol exactly."""


@dataclass(frozen=True)
class PhaseAttack:
    """Phase rotation diag(1, e^{i alpha}) on the last qubit of every round."""

    alpha: float
    placement: Placement = Placement.POST

    def __post_init__(self):
        object.__setattr__(self, "alpha", float(self.alpha) % _TWO_PI)


ServerStrategy = Honest | PhaseAttack

HONEST = Honest()


def require_supported(strategy) -> None:
    if not isinstance(strategy, (Honest, PhaseAttack)):
        raise UnsupportedStrategyError(
            f"unsupported server strategy {type(strategy).__name__}; "
            "supported: Honest, PhaseAttack"
        )


def transform_round(strategy: ServerStrategy, delegated_unitary, k: int) -> np.ndarray:
    """Unitary the server actually applies in place of the delegated one."""
    require_supported(strategy)
    u = as_square_matrix(delegated_unitary)
    if u.shape[0] != 2**k:
        raise ContractViolationError(
            f"delegated unitary has dim {u.shape[0]}, expected 2**{k}"
        )
    if not is_unitary(u):
        raise ContractViolationError("delegated operation is not unitary within 1e-10")
    if isinstance(strategy, Honest):
        return u
    a = attack_operator(strategy.alpha, k)
    if strategy.placement is Placement.POST:
        return a @ u
    return u @ a


# sin(alpha/2) prescribed for each (security model, protocol variant) pair,
# as a function of the expected test-round count.
_SINE_CHOICES = {
    (SecurityModel.STAND_ALONE, ProtocolVariant.PER_ROUND): lambda n: math.sqrt(4.0 / (9.0 * n)),
    (SecurityModel.COMPOSABLE, ProtocolVariant.PER_ROUND): lambda n: 1.0 / (2.0 * math.sqrt(n)),
    (SecurityModel.STAND_ALONE, ProtocolVariant.GENERAL_TESTS): lambda n: 2.0 / (3.0 * n),
    (SecurityModel.COMPOSABLE, ProtocolVariant.GENERAL_TESTS): lambda n: 1.0 / (2.0 * n),
}


def attack_sine(model: SecurityModel, variant: ProtocolVariant, n_expected: float) -> float:
    """sin(alpha/2) for the bound-optimal attack in the given regime."""
    if n_expected <= 0:
        raise OutOfDomainError(f"expected test-round count must be positive, got {n_expected}")
    s = _SINE_CHOICES[(model, variant)](float(n_expected))
    if s > 1.0:
        raise OutOfDomainError(
            f"N={n_expected} too small for the {model.value}/{variant.value} choice "
            f"(sin(alpha/2)={s:.6g} > 1)"
        )
    return s


def optimal_alpha(model: SecurityModel, variant: ProtocolVariant, n_expected: float) -> float:
    """Bound-optimal attack angle, 2*arcsin of the prescribed sine."""
    return 2.0 * math.asin(attack_sine(model, variant, n_expected))
