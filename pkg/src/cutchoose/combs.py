"""General test networks: combs with memory, channel plugging, diamond distance.

A test network intertwines the n delegated test computations with n + 1
fixed operations (teeth) connected through memory registers. Here the
traversal state is always the full stack of ``width`` k-qubit registers:
each hole acts on one designated register (the rest form the memory), and a
tooth is an optional channel on the whole stack (wire permutations and named
Kraus sets cover the shipped families). Plugging n channels into the holes
yields a channel on the register stack; the client may additionally keep an
auxiliary space that the network never touches.

Channels are stored as Kraus-operator lists, which keeps memory proportional
to rank; the Choi matrix is available on demand. Everything is capped at a
total dimension of 256: the bounds being certified are dimension-independent,
so small witnesses suffice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, NamedTuple, Sequence

import numpy as np
import scipy.optimize

from .bounds import (
    build_tradeoff_report,
    epsilon_d_composable,
    epsilon_d_standalone,
    epsilon_h,
    TradeoffReport,
)
from .errors import (
    ContractViolationError,
    DimensionCapError,
    LayoutError,
)
from .linalg import DensityOperator, as_square_matrix, dagger, is_unitary
from .protocol import (
    GlobalAcceptance,
    PerRoundAcceptance,
    ProtocolSpec,
    RoundDistribution,
    RoundOutcomeTable,
)
from .sampling import random_density, random_povm_effect, random_unitary
from .states import PovmElement, bell_pair, mix_with_abort, plus_state
from .strategies import (
    HONEST,
    PhaseAttack,
    Placement,
    ProtocolVariant,
    SecurityModel,
    ServerStrategy,
    optimal_alpha,
    require_supported,
    transform_round,
)

COMB_DIM_CAP = 256
_PRUNE_TOL = 1e-14


class Channel:
    """Completely positive trace-preserving map given by Kraus operators."""

    __slots__ = ("kraus", "dim")

    def __init__(self, kraus, check: bool = True):
        ops = tuple(np.asarray(k, dtype=np.complex128) for k in kraus)
        if not ops:
            raise ContractViolationError("channel needs at least one Kraus operator")
        d = ops[0].shape[0] if ops[0].ndim == 2 else 0
        for op in ops:
            if op.ndim != 2 or op.shape != (d, d):
                raise ContractViolationError("Kraus operators must be square and same-shaped")
        kept = tuple(op for op in ops if np.linalg.norm(op) > _PRUNE_TOL) or ops[:1]
        self.kraus = kept
        self.dim = d
        if check and not self.is_trace_preserving():
            raise ContractViolationError("Kraus operators do not sum to the identity within 1e-9")

    @classmethod
    def from_unitary(cls, u) -> "Channel":
        m = as_square_matrix(u)
        if not is_unitary(m):
            raise ContractViolationError("matrix is not unitary within 1e-10")
        return cls((m,), check=False)

    @classmethod
    def identity(cls, dim: int) -> "Channel":
        return cls((np.eye(dim, dtype=np.complex128),), check=False)

    def is_trace_preserving(self, tol: float = 1e-9) -> bool:
        acc = sum(dagger(k) @ k for k in self.kraus)
        return bool(np.max(np.abs(acc - np.eye(self.dim))) <= tol)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        out = np.zeros((self.dim, self.dim), dtype=np.complex128)
        for k in self.kraus:
            out += k @ rho @ dagger(k)
        return out

    def compose(self, inner: "Channel") -> "Channel":
        """self after inner."""
        if inner.dim != self.dim:
            raise LayoutError(f"cannot compose channels of dims {inner.dim} and {self.dim}")
        return Channel(
            tuple(a @ b for a in self.kraus for b in inner.kraus), check=False
        )

    def tensor_identity(self, dim_right: int) -> "Channel":
        eye = np.eye(dim_right, dtype=np.complex128)
        return Channel(tuple(np.kron(k, eye) for k in self.kraus), check=False)

    def choi(self) -> np.ndarray:
        """Choi matrix sum_k vec(K_k) vec(K_k)† (column-stacking convention)."""
        out = np.zeros((self.dim**2, self.dim**2), dtype=np.complex128)
        for k in self.kraus:
            v = k.reshape(-1, order="F")
            out += np.outer(v, v.conj())
        return out


def register_permutation_unitary(perm: Sequence[int], width: int, k: int) -> np.ndarray:
    """Permutation of k-qubit registers: output slot j holds input register perm[j]."""
    perm = tuple(int(x) for x in perm)
    if sorted(perm) != list(range(width)):
        raise LayoutError(f"{perm} is not a permutation of 0..{width - 1}")
    d = 2**k
    dims = (d,) * width
    full = d**width
    mat = np.zeros((full, full), dtype=np.complex128)
    for x in range(full):
        digits = np.unravel_index(x, dims)
        y = np.ravel_multi_index(tuple(digits[p] for p in perm), dims)
        mat[y, x] = 1.0
    return mat


def _embed_single_qubit(kraus_ops, qubit: int, total_qubits: int):
    left = np.eye(2**qubit, dtype=np.complex128)
    right = np.eye(2 ** (total_qubits - qubit - 1), dtype=np.complex128)
    return tuple(np.kron(np.kron(left, k), right) for k in kraus_ops)


def dephasing_channel(strength: float, qubit: int = 0, total_qubits: int = 1) -> Channel:
    if not 0.0 <= strength <= 1.0:
        raise ContractViolationError(f"dephasing strength {strength!r} outside [0, 1]")
    z = np.diag([1.0, -1.0]).astype(np.complex128)
    ops = (math.sqrt(1.0 - strength) * np.eye(2), math.sqrt(strength) * z)
    return Channel(_embed_single_qubit(ops, qubit, total_qubits))


def depolarizing_channel(strength: float, qubit: int = 0, total_qubits: int = 1) -> Channel:
    if not 0.0 <= strength <= 1.0:
        raise ContractViolationError(f"depolarizing strength {strength!r} outside [0, 1]")
    x = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)
    y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=np.complex128)
    z = np.diag([1.0, -1.0]).astype(np.complex128)
    ops = (
        math.sqrt(1.0 - 0.75 * strength) * np.eye(2),
        math.sqrt(strength / 4.0) * x,
        math.sqrt(strength / 4.0) * y,
        math.sqrt(strength / 4.0) * z,
    )
    return Channel(_embed_single_qubit(ops, qubit, total_qubits))


@dataclass(frozen=True, eq=False)
class Comb:
    """n-hole network over ``width`` k-qubit registers plus an untouched
    auxiliary space of dimension ``y_dim``.

    ``hole_registers[i]`` is the (0-based) register fed into hole ``i + 1``;
    the remaining registers are the memory between teeth. ``teeth`` has one
    optional channel per gap (before hole 1, between holes, after the last),
    each acting on the full register stack; ``None`` means plain wires.
    """

    n_holes: int
    k: int
    width: int
    y_dim: int
    hole_registers: tuple[int, ...]
    teeth: tuple[Channel | None, ...]

    def __post_init__(self):
        if self.n_holes < 0 or self.k < 1 or self.width < 1 or self.y_dim < 1:
            raise LayoutError("comb dimensions must be positive (n_holes may be 0)")
        if len(self.hole_registers) != self.n_holes:
            raise LayoutError(
                f"{len(self.hole_registers)} hole registers for {self.n_holes} holes"
            )
        if any(not 0 <= r < self.width for r in self.hole_registers):
            raise LayoutError(f"hole registers {self.hole_registers} outside 0..{self.width - 1}")
        if len(self.teeth) != self.n_holes + 1:
            raise LayoutError(f"{len(self.teeth)} teeth for {self.n_holes} holes (need n + 1)")
        if self.register_dim * self.y_dim > COMB_DIM_CAP:
            raise DimensionCapError(
                f"total dimension {self.register_dim * self.y_dim} beyond the cap {COMB_DIM_CAP}"
            )
        for j, tooth in enumerate(self.teeth):
            if tooth is not None and tooth.dim != self.register_dim:
                raise LayoutError(
                    f"tooth {j} acts on dim {tooth.dim}, expected {self.register_dim}"
                )

    @property
    def register_dim(self) -> int:
        return (2**self.k) ** self.width

    @property
    def memory_dim(self) -> int:
        return (2**self.k) ** (self.width - 1)

    @property
    def hole_dim(self) -> int:
        return 2**self.k


def trivial_parallel_comb(n_holes: int, k: int = 1, y_dim: int = 1) -> Comb:
    """One register per hole, plain wires everywhere."""
    return Comb(
        n_holes=n_holes,
        k=k,
        width=max(n_holes, 1),
        y_dim=y_dim,
        hole_registers=tuple(range(n_holes)),
        teeth=(None,) * (n_holes + 1),
    )


def _embed_hole(channel: Channel, register: int, width: int, k: int) -> Channel:
    d = 2**k
    left = np.eye(d**register, dtype=np.complex128)
    right = np.eye(d ** (width - register - 1), dtype=np.complex128)
    return Channel(
        tuple(np.kron(np.kron(left, op), right) for op in channel.kraus), check=False
    )


def plug(comb: Comb, round_channels) -> Channel:
    """Compose teeth and plugged channels into one channel on the register stack."""
    channels = []
    for c in round_channels:
        channels.append(c if isinstance(c, Channel) else Channel.from_unitary(c))
    if len(channels) != comb.n_holes:
        raise LayoutError(f"{len(channels)} channels plugged into {comb.n_holes} holes")
    for i, c in enumerate(channels):
        if c.dim != comb.hole_dim:
            raise LayoutError(
                f"channel {i + 1} has dim {c.dim}, hole expects {comb.hole_dim}"
            )
    result = comb.teeth[0] or Channel.identity(comb.register_dim)
    for i, c in enumerate(channels):
        result = _embed_hole(c, comb.hole_registers[i], comb.width, comb.k).compose(result)
        tooth = comb.teeth[i + 1]
        if tooth is not None:
            result = tooth.compose(result)
    if not result.is_trace_preserving():
        raise ContractViolationError("plugged network is not trace preserving within 1e-9")
    return result


@dataclass(frozen=True, eq=False)
class GeneralTest:
    """Test state (possibly entangled with the kept auxiliary register), the
    delegated unitary sequence, and the joint acceptance element."""

    chi: DensityOperator
    unitaries: tuple[np.ndarray, ...]
    measurement: PovmElement


def general_test_acceptance(test: GeneralTest, comb: Comb, strategy: ServerStrategy) -> float:
    """Acceptance probability of the general test under a server strategy."""
    require_supported(strategy)
    if len(test.unitaries) != comb.n_holes:
        raise LayoutError(
            f"test supplies {len(test.unitaries)} unitaries for {comb.n_holes} holes"
        )
    full_dim = comb.register_dim * comb.y_dim
    if test.chi.dim != full_dim:
        raise LayoutError(f"test state has dim {test.chi.dim}, network expects {full_dim}")
    if test.measurement.dim != full_dim:
        raise LayoutError(
            f"measurement has dim {test.measurement.dim}, network expects {full_dim}"
        )
    played = [
        Channel.from_unitary(transform_round(strategy, u, comb.k)) for u in test.unitaries
    ]
    network = plug(comb, played)
    if comb.y_dim > 1:
        network = network.tensor_identity(comb.y_dim)
    out = network.apply(test.chi.matrix)
    p = float(np.trace(test.measurement.matrix @ out).real)
    if not -1e-12 <= p <= 1.0 + 1e-12:
        raise ContractViolationError(f"acceptance probability {p!r} outside [0, 1]")
    return min(1.0, max(0.0, p))


def overall_acceptance_general(
    omega: RoundDistribution,
    omega_n_for: Callable[[int], Sequence[float]] | None,
    test_for: Callable[[int], GeneralTest],
    comb_for: Callable[[int, int], Comb],
    strategy: ServerStrategy,
) -> float:
    """Weighted sum of general-test acceptance over n and the output round."""
    total = 0.0
    for n, wn in omega.support:
        if wn == 0.0:
            continue
        if n == 0:
            total += wn  # no tests, empty product accepts
            continue
        weights = (
            np.full(n + 1, 1.0 / (n + 1))
            if omega_n_for is None
            else np.asarray(omega_n_for(n), dtype=float)
        )
        if weights.shape != (n + 1,) or weights.min() < 0 or abs(weights.sum() - 1.0) > 1e-12:
            raise ContractViolationError(f"output-round distribution for n={n} invalid")
        test = test_for(n)
        for ell in range(1, n + 2):
            w = float(weights[ell - 1])
            if w == 0.0:
                continue
            total += wn * w * general_test_acceptance(test, comb_for(n, ell), strategy)
    return min(1.0, max(0.0, total))


@dataclass(frozen=True, eq=False)
class GeneralSetup:
    """Bundle of everything the general engine needs for one scenario."""

    omega: RoundDistribution
    k: int
    tests: Mapping[int, GeneralTest]
    combs: Mapping[tuple[int, int], Comb]
    omega_n: Mapping[int, tuple[float, ...]] | None = None

    def overall(self, strategy: ServerStrategy) -> float:
        omega_n_for = None if self.omega_n is None else lambda n: self.omega_n[n]
        return overall_acceptance_general(
            self.omega,
            omega_n_for,
            self.tests.__getitem__,
            lambda n, ell: self.combs[(n, ell)],
            strategy,
        )

    def outcome_table(self, strategy: ServerStrategy) -> RoundOutcomeTable:
        rows = []
        for n, _ in self.omega.support:
            for ell in range(1, n + 2):
                p = (
                    1.0
                    if n == 0
                    else general_test_acceptance(self.tests[n], self.combs[(n, ell)], strategy)
                )
                rows.append((n, ell, p))
        return RoundOutcomeTable(tuple(rows))


def _permute_qubit_axes(vec: np.ndarray, src_axes: Sequence[int]) -> np.ndarray:
    m = len(src_axes)
    return vec.reshape((2,) * m).transpose(src_axes).reshape(-1)


def bell_test_setup(n_tests: int) -> GeneralSetup:
    """Each test register is maximally entangled with a kept auxiliary qubit.

    Honest tests are identities checked by the projector onto the entangled
    state, which detects a single-qubit phase rotation at the generic rate.
    """
    if n_tests < 1:
        raise ContractViolationError(f"need at least one test round, got {n_tests}")
    # pair order (X1, Y1, X2, Y2, ...) -> register-major order (X..., Y...)
    interleaved = bell_pair().amplitudes
    vec = np.ones(1, dtype=np.complex128)
    for _ in range(n_tests):
        vec = np.kron(vec, interleaved)
    src = [2 * j for j in range(n_tests)] + [2 * j + 1 for j in range(n_tests)]
    vec = _permute_qubit_axes(vec, src)
    chi = DensityOperator(np.outer(vec, vec.conj()))
    measurement = PovmElement(np.outer(vec, vec.conj()))
    eye2 = np.eye(2, dtype=np.complex128)
    test = GeneralTest(chi, (eye2,) * n_tests, measurement)
    comb = Comb(
        n_holes=n_tests,
        k=1,
        width=n_tests,
        y_dim=2**n_tests,
        hole_registers=tuple(range(n_tests)),
        teeth=(None,) * (n_tests + 1),
    )
    return GeneralSetup(
        omega=RoundDistribution.point_mass(n_tests),
        k=1,
        tests={n_tests: test},
        combs={(n_tests, ell): comb for ell in range(1, n_tests + 2)},
    )


def spec_round_as_general(spec: ProtocolSpec, n: int, ell: int) -> tuple[GeneralTest, Comb]:
    """Express one (n, output round) of the per-round protocol as a general test."""
    if n < 1:
        raise ContractViolationError("general view needs at least one test round")
    k = spec.k
    chi_vec = np.ones(1, dtype=np.complex128)
    unitaries = []
    effects = []
    for i in range(1, n + 2):
        if i == ell:
            continue
        t, chi = spec.traps.trap(k, n, i)
        unitaries.append(as_square_matrix(t))
        chi_vec = np.kron(chi_vec, chi.amplitudes)
        if isinstance(spec.acceptance, PerRoundAcceptance):
            effects.append(spec.acceptance.element(k, n, i).matrix)
    if isinstance(spec.acceptance, GlobalAcceptance):
        mu = spec.acceptance.element(k, n)
    else:
        joint = np.eye(1, dtype=np.complex128)
        for e in effects:
            joint = np.kron(joint, e)
        mu = PovmElement(joint)
    chi_op = DensityOperator(np.outer(chi_vec, chi_vec.conj()))
    comb = trivial_parallel_comb(n, k=k, y_dim=1)
    return GeneralTest(chi_op, tuple(unitaries), mu), comb


def overall_acceptance_via_combs(spec: ProtocolSpec, strategy: ServerStrategy) -> float:
    """Per-round protocol evaluated through the general engine (consistency path)."""
    total = 0.0
    for n, wn in spec.omega.support:
        if wn == 0.0:
            continue
        if n == 0:
            total += wn
            continue
        weights = spec.output_round_probs(n)
        for ell in range(1, n + 2):
            test, comb = spec_round_as_general(spec, n, ell)
            total += wn * float(weights[ell - 1]) * general_test_acceptance(test, comb, strategy)
    return min(1.0, max(0.0, total))


def diamond_distance_unitaries(u, v) -> float:
    """Half diamond distance between two unitary channels.

    For unitaries the value is sqrt(1 - nu^2) where nu is the distance from
    the origin to the convex hull of the spectrum of u†v. The hull of points
    on the unit circle contains the origin iff no arc gap exceeds pi;
    otherwise the nearest hull point lies on the chord closing the largest
    gap, at distance cos(spread / 2) for spread = 2*pi - largest gap.
    """
    um, vm = as_square_matrix(u), as_square_matrix(v)
    if um.shape != vm.shape:
        raise ContractViolationError(f"dimension mismatch: {um.shape} vs {vm.shape}")
    for name, m in (("first", um), ("second", vm)):
        if not is_unitary(m):
            raise ContractViolationError(f"{name} argument is not unitary within 1e-10")
    eigs = np.linalg.eigvals(dagger(um) @ vm)
    angles = np.sort(np.angle(eigs))
    gaps = np.append(np.diff(angles), angles[0] + 2.0 * math.pi - angles[-1])
    largest = float(gaps.max())
    if largest <= math.pi:
        return 1.0
    nu = math.cos((2.0 * math.pi - largest) / 2.0)
    return math.sqrt(max(0.0, 1.0 - nu * nu))


def diamond_distance_pure_search(u, v, starts: int = 8, seed: int = 0) -> float:
    """Independent estimate: maximize the output trace distance over pure
    inputs extended by a same-sized reference system."""
    um, vm = as_square_matrix(u), as_square_matrix(v)
    d = um.shape[0]
    m = np.kron(dagger(um) @ vm, np.eye(d, dtype=np.complex128))
    dim = d * d

    def objective(x):
        z = x[:dim] + 1j * x[dim:]
        nrm = np.linalg.norm(z)
        z = z / nrm
        return abs(np.vdot(z, m @ z)) ** 2

    rng = np.random.default_rng(seed)
    best = np.inf
    for _ in range(starts):
        x0 = rng.standard_normal(2 * dim)
        res = scipy.optimize.minimize(objective, x0, method="L-BFGS-B")
        best = min(best, float(res.fun))
    return math.sqrt(max(0.0, 1.0 - best))


class GapCheck(NamedTuple):
    gap: float
    bound: float
    holds: bool


def linear_gap_check(
    setup: GeneralSetup, alpha: float, placement: Placement = Placement.POST
) -> GapCheck:
    """Check |p_H - p_D| <= N |sin(alpha/2)| on a concrete general setup."""
    p_h = setup.overall(HONEST)
    p_d = setup.overall(PhaseAttack(alpha, placement))
    gap = abs(p_h - p_d)
    bound = setup.omega.mean * abs(math.sin(alpha / 2.0))
    return GapCheck(gap, bound, gap <= bound + 1e-10)


def general_tradeoff_check(
    model: SecurityModel,
    setup: GeneralSetup,
    n_expected: float,
    alpha_override: float | None = None,
    placement: Placement = Placement.POST,
) -> TradeoffReport:
    """Trade-off certification for a general-test setup."""
    if abs(setup.omega.mean - n_expected) > 1e-9:
        raise ContractViolationError(
            f"setup mean {setup.omega.mean} does not match N={n_expected}"
        )
    if alpha_override is None:
        alpha = optimal_alpha(model, ProtocolVariant.GENERAL_TESTS, n_expected)
    else:
        alpha = float(alpha_override) % (2.0 * math.pi)
    attack = PhaseAttack(alpha, placement)
    p_h = setup.overall(HONEST)
    p_d = setup.overall(attack)
    psi = plus_state(setup.k).density()
    eye = np.eye(2**setup.k, dtype=np.complex128)
    applied = transform_round(attack, eye, setup.k)
    payload = DensityOperator(applied @ psi.matrix @ dagger(applied))
    rho_h = mix_with_abort(psi, p_h)
    rho_d = mix_with_abort(payload, p_d)
    eps_h_val = epsilon_h(rho_h, psi, model)
    if model is SecurityModel.STAND_ALONE:
        eps_d_val = epsilon_d_standalone(rho_d, psi)
    else:
        eps_d_val = epsilon_d_composable(rho_d, psi)
    return build_tradeoff_report(
        model,
        ProtocolVariant.GENERAL_TESTS,
        n_expected,
        alpha,
        p_h,
        p_d,
        eps_h_val,
        eps_d_val,
    )


class RandomCombDraw(NamedTuple):
    setup: GeneralSetup
    alpha: float
    placement: Placement


def random_comb_draw(seed: int, max_rounds: int = 3, k: int = 1) -> RandomCombDraw:
    """Seeded random general setup: round distribution, wiring, teeth (wire
    permutations, dephasing, depolarizing), entangled test states, random
    unitary sequences, and a random acceptance effect."""
    rng = np.random.default_rng(seed)
    size = int(rng.integers(1, max_rounds + 1))
    ns = sorted(int(x) for x in rng.choice(max_rounds + 1, size=size, replace=False))
    if all(n == 0 for n in ns):
        ns = sorted(set(ns) | {int(rng.integers(1, max_rounds + 1))})
    probs = rng.dirichlet(np.ones(len(ns)))
    omega = RoundDistribution.from_pairs(zip(ns, probs))
    omega_n: dict[int, tuple[float, ...]] = {}
    tests: dict[int, GeneralTest] = {}
    combs: dict[tuple[int, int], Comb] = {}
    d = 2**k

    def random_tooth(width: int) -> Channel | None:
        kind = int(rng.integers(0, 4))
        if kind == 0:
            return None
        if kind == 1:
            return Channel.from_unitary(
                register_permutation_unitary(rng.permutation(width), width, k)
            )
        qubit = int(rng.integers(0, width * k))
        strength = float(rng.uniform(0.0, 1.0))
        maker = dephasing_channel if kind == 2 else depolarizing_channel
        return maker(strength, qubit=qubit, total_qubits=width * k)

    for n in ns:
        if n == 0:
            continue
        omega_n[n] = tuple(rng.dirichlet(np.ones(n + 1)))
        width = int(rng.integers(1, min(n, 2) + 1))
        y_dim = int(2 ** rng.integers(0, 2))
        full_dim = d**width * y_dim
        chi = random_density(full_dim, rng)
        unitaries = tuple(random_unitary(d, rng) for _ in range(n))
        mu = PovmElement(random_povm_effect(full_dim, rng))
        tests[n] = GeneralTest(chi, unitaries, mu)
        hole_regs = tuple(int(x) for x in rng.integers(0, width, size=n))
        for ell in range(1, n + 2):
            combs[(n, ell)] = Comb(
                n_holes=n,
                k=k,
                width=width,
                y_dim=y_dim,
                hole_registers=hole_regs,
                teeth=tuple(random_tooth(width) for _ in range(n + 1)),
            )
    setup = GeneralSetup(omega=omega, k=k, tests=tests, combs=combs, omega_n=omega_n)
    alpha = float(rng.uniform(0.0, 2.0 * math.pi))
    placement = Placement.POST if rng.integers(0, 2) == 0 else Placement.PRE
    return RandomCombDraw(setup, alpha, placement)
