"""Named trap and acceptance families used by configs and tests.

Keeping these in a registry lets scenario configs stay declarative: a trap
family is referenced by name plus parameters, and acceptance families pair
with them. All families are deterministic; the seeded one derives its
per-round randomness from ``(seed, k, n, i)`` only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DimensionCapError
from .linalg import DIM_CAP, PureState
from .protocol import GlobalAcceptance, PerRoundAcceptance, TrapGenerator
from .sampling import random_pure_state, random_unitary
from .states import PovmElement, computational_basis_state, plus_state


@dataclass(frozen=True)
class PlusTraps(TrapGenerator):
    """Identity computation on the uniform-superposition input."""

    def trap(self, k, n, i):
        return np.eye(2**k, dtype=np.complex128), plus_state(k)


@dataclass(frozen=True)
class ComputationalTraps(TrapGenerator):
    """Identity computation on the all-zero input.

    Diagonal-phase attacks fix the all-zero state, so this family never
    detects them; it exists as the worst-case witness.
    """

    def trap(self, k, n, i):
        return np.eye(2**k, dtype=np.complex128), computational_basis_state(k)


@dataclass(frozen=True)
class RandomTraps(TrapGenerator):
    """Seeded Haar-random unitary and input per round."""

    seed: int = 0
    round_dependent: bool = True

    def trap(self, k, n, i):
        key = [self.seed, k, n, i] if self.round_dependent else [self.seed, k, n]
        rng = np.random.default_rng(key)
        return random_unitary(2**k, rng), random_pure_state(2**k, rng)


def _projector_effect(state: PureState) -> PovmElement:
    return PovmElement(state.projector())


def plus_acceptance() -> PerRoundAcceptance:
    """Accept a round iff its output projects onto the uniform superposition."""
    return PerRoundAcceptance(lambda k, n, i: _projector_effect(plus_state(k)))


def computational_acceptance() -> PerRoundAcceptance:
    return PerRoundAcceptance(
        lambda k, n, i: _projector_effect(computational_basis_state(k))
    )


def matched_acceptance(traps: TrapGenerator) -> PerRoundAcceptance:
    """Accept a round iff its output projects onto the honest trap output."""

    def element(k, n, i):
        t, chi = traps.trap(k, n, i)
        return _projector_effect(PureState(t @ chi.amplitudes))

    return PerRoundAcceptance(element)


def global_power_acceptance(per_round: PerRoundAcceptance) -> GlobalAcceptance:
    """Tensor a round-independent per-round element over all n test outputs.

    Only meaningful when the per-round element does not depend on the round
    index; the joint element is evaluated on the test outputs in order.
    """

    def element(k, n):
        single = per_round.element(k, n, 1).matrix
        dim = 2 ** (k * n)
        if dim > DIM_CAP:
            raise DimensionCapError(
                f"joint element needs dim 2**{k * n}, beyond the cap {DIM_CAP}"
            )
        joint = np.eye(1, dtype=np.complex128)
        for _ in range(n):
            joint = np.kron(joint, single)
        return PovmElement(joint)

    return GlobalAcceptance(element)


def build_trap_family(name: str, params: dict) -> TrapGenerator:
    if name == "plus":
        return PlusTraps()
    if name == "computational":
        return ComputationalTraps()
    if name == "random":
        return RandomTraps(seed=int(params.get("seed", 0)))
    raise ConfigError([f"unknown trap family {name!r}"])


def build_acceptance(name: str, mode: str, traps: TrapGenerator):
    if name == "plus":
        rule = plus_acceptance()
    elif name == "computational":
        rule = computational_acceptance()
    elif name == "matched":
        rule = matched_acceptance(traps)
    else:
        raise ConfigError([f"unknown acceptance family {name!r}"])
    if mode == "per-round":
        return rule
    if mode == "global":
        if name == "matched" and getattr(traps, "round_dependent", False):
            raise ConfigError(
                ["global acceptance requires a round-independent element; "
                 "'matched' with round-dependent traps is not"]
            )
        return global_power_acceptance(rule)
    raise ConfigError([f"unknown acceptance mode {mode!r}"])


TRAP_FAMILY_NAMES = ("plus", "computational", "random")
ACCEPTANCE_FAMILY_NAMES = ("plus", "computational", "matched")
