"""States, gates, measurement elements, and the abort-extended output space.

The rejection symbol is realized as an explicit extra Hilbert-space
dimension (``2**k + 1``, last basis direction) rather than a tagged union,
so fidelity and trace-distance formulas apply verbatim to protocol outputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolationError, OutOfDomainError
from .linalg import (
    DIM_CAP,
    DensityOperator,
    PureState,
    as_square_matrix,
    dagger,
    kron,
)
from .optimize import golden_section
from .sampling import random_pure_state


def phase_gate(alpha: float) -> np.ndarray:
    """diag(1, e^{i alpha}) on a single qubit."""
    return np.diag([1.0, np.exp(1j * alpha)]).astype(np.complex128)


def attack_operator(alpha: float, k: int) -> np.ndarray:
    """Identity on the first k-1 qubits, phase rotation on the last one."""
    if k < 1:
        raise OutOfDomainError(f"k must be positive, got {k}")
    dim = 2**k
    if dim > DIM_CAP:
        raise OutOfDomainError(f"2**{k} exceeds the dimension cap {DIM_CAP}")
    return kron(np.eye(dim // 2), phase_gate(alpha))


def plus_state(k: int) -> PureState:
    """Uniform-amplitude k-qubit state, every amplitude 2^{-k/2}."""
    if k < 1:
        raise OutOfDomainError(f"k must be positive, got {k}")
    dim = 2**k
    if dim > DIM_CAP:
        raise OutOfDomainError(f"2**{k} exceeds the dimension cap {DIM_CAP}")
    return PureState(np.full(dim, dim**-0.5, dtype=np.complex128))


def computational_basis_state(k: int, index: int = 0) -> PureState:
    dim = 2**k
    if not 0 <= index < dim:
        raise OutOfDomainError(f"basis index {index} out of range for dim {dim}")
    vec = np.zeros(dim, dtype=np.complex128)
    vec[index] = 1.0
    return PureState(vec)


def bell_pair() -> PureState:
    """(|00> + |11>) / sqrt(2)."""
    return PureState(np.array([1.0, 0.0, 0.0, 1.0], dtype=np.complex128) / math.sqrt(2.0))


@dataclass(frozen=True, eq=False)
class PovmElement:
    """Hermitian PSD matrix with all eigenvalues at most 1 (within 1e-10)."""

    matrix: np.ndarray

    def __post_init__(self):
        m = as_square_matrix(self.matrix)
        if np.max(np.abs(m - dagger(m))) > 1e-10:
            raise ContractViolationError("measurement element is not Hermitian within 1e-10")
        w = np.linalg.eigvalsh((m + dagger(m)) / 2.0)
        if float(w.min()) < -1e-10:
            raise ContractViolationError(
                f"measurement element has negative eigenvalue {w.min():.3e}"
            )
        if float(w.max()) > 1.0 + 1e-10:
            raise ContractViolationError(
                f"measurement element has eigenvalue {w.max():.12g} above 1"
            )
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class AbortExtendedState:
    """Block-diagonal mixture of a payload block and the rejection direction.

    The state lives on dimension ``dim_payload + 1``; the last basis vector
    is the rejection symbol, orthogonal to every payload output. Off-diagonal
    blocks coupling payload and rejection must vanish (within 1e-12): valid
    protocol outputs are classical mixtures of the two.
    """

    state: DensityOperator
    dim_payload: int

    def __post_init__(self):
        if self.state.dim != self.dim_payload + 1:
            raise ContractViolationError(
                f"state dim {self.state.dim} does not match payload dim {self.dim_payload} + 1"
            )
        m = self.state.matrix
        coupling = max(
            float(np.max(np.abs(m[:-1, -1]))), float(np.max(np.abs(m[-1, :-1])))
        )
        if coupling > 1e-12:
            raise ContractViolationError(
                f"payload/rejection coupling {coupling:.3e} exceeds 1e-12"
            )

    @property
    def matrix(self) -> np.ndarray:
        return self.state.matrix

    @property
    def accept_weight(self) -> float:
        """Probability mass on the payload block."""
        return float(np.trace(self.matrix[:-1, :-1]).real)

    def payload_block(self) -> np.ndarray:
        """Unnormalized payload block (trace equals the accept weight)."""
        return self.matrix[:-1, :-1]

    def payload(self) -> DensityOperator | None:
        """Normalized payload state, or None if the accept weight vanishes."""
        w = self.accept_weight
        if w <= 1e-12:
            return None
        return DensityOperator(self.payload_block() / w)


def mix_with_abort(payload: DensityOperator, p_accept: float) -> AbortExtendedState:
    """p * payload on the payload block, 1-p on the rejection direction."""
    if not 0.0 <= p_accept <= 1.0:
        raise OutOfDomainError(f"acceptance probability {p_accept!r} outside [0, 1]")
    d = payload.dim
    m = np.zeros((d + 1, d + 1), dtype=np.complex128)
    m[:d, :d] = p_accept * payload.matrix
    m[d, d] = 1.0 - p_accept
    return AbortExtendedState(DensityOperator(m), d)


def embedded_target(target: DensityOperator) -> AbortExtendedState:
    """Target state carried on the abort-extended space with zero abort weight."""
    return mix_with_abort(target, 1.0)


def segment_modulus_sq(lam, alpha: float):
    """|lam * 1 + (1-lam) * e^{i alpha}|^2 on the eigenvalue segment."""
    lam = np.asarray(lam, dtype=float)
    return lam**2 + (1.0 - lam) ** 2 + 2.0 * lam * (1.0 - lam) * math.cos(alpha)


def numerical_range_min_overlap(alpha: float, trials: int = 64, seed: int = 0) -> float:
    """Minimum of |<u| (1 ⊗ P(alpha)) |u>|^2 over pure states.

    Random pure states seed the search; the operator has the two-point
    spectrum {1, e^{i alpha}}, so every value equals the segment objective at
    lam = (weight on the 1-eigenspace), and the refinement is a convex 1-D
    descent in lam. The raw sampled minimum is kept as a cross-check upper
    bound.
    """
    if trials < 1:
        raise OutOfDomainError(f"trials must be >= 1, got {trials}")
    rng = np.random.default_rng(seed)
    op = kron(np.eye(2), phase_gate(alpha))
    best = np.inf
    best_lam = 0.5
    for _ in range(trials):
        u = random_pure_state(4, rng).amplitudes
        val = abs(np.vdot(u, op @ u)) ** 2
        if val < best:
            best = val
            # weight on the 1-eigenspace of 1 ⊗ P(alpha): even components
            best_lam = float(np.sum(np.abs(u[::2]) ** 2))
    lo, hi = max(0.0, best_lam - 0.5), min(1.0, best_lam + 0.5)
    _, refined = golden_section(lambda t: float(segment_modulus_sq(t, alpha)), lo, hi, tol=1e-9)
    return float(min(best, refined))
