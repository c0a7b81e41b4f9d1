"""Scenario orchestration and machine-readable report emission.

``run_scenario`` is pure: it returns a bundle and writes nothing. Emission
is deterministic — identical configs (including seeds) produce byte-identical
CSV/JSON files. Wall time is tracked on the in-memory bundle only and never
serialized, precisely to keep that guarantee. Numbers are rendered with 12
significant digits.
"""

from __future__ import annotations

import csv
import io
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__
from .bounds import TradeoffReport, run_tradeoff_check
from .combs import GeneralSetup, bell_test_setup, general_tradeoff_check
from .config import ConfigError, ScenarioConfig
from .errors import OutOfDomainError
from .families import build_acceptance, build_trap_family
from .protocol import (
    MonteCarloResult,
    ProtocolSpec,
    RoundDistribution,
    RoundOutcomeTable,
    monte_carlo_run,
    round_outcome_table,
)
from .states import plus_state
from .strategies import (
    HONEST,
    PhaseAttack,
    Placement,
    ProtocolVariant,
)

PROOF_STEP_NAMES = (
    "correctness_floor",
    "security_floor",
    "sum_vs_disturbance",
    "acceptance_gap",
    "theorem_bound",
)

_BASE_COLUMNS = (
    "model", "variant", "N", "alpha", "p_H", "p_D",
    "eps_h", "eps_d", "bound", "satisfied",
)
_MC_COLUMNS = ("mc_p_H", "mc_p_D", "mc_trials", "mc_seed")


@dataclass(frozen=True)
class McComparison:
    trials: int
    seed: int
    honest: MonteCarloResult
    attacked: MonteCarloResult


@dataclass(frozen=True)
class RunRecord:
    sweep_index: int
    report: TradeoffReport
    honest_rounds: RoundOutcomeTable | None
    attacked_rounds: RoundOutcomeTable | None
    mc: McComparison | None


@dataclass(frozen=True)
class BundleMetadata:
    config_hash: str
    seed: int | None
    versions: dict
    wall_time_s: float  # in-memory only, never emitted


@dataclass(frozen=True)
class ReportBundle:
    config: ScenarioConfig
    runs: tuple[RunRecord, ...]
    metadata: BundleMetadata

    @property
    def all_satisfied(self) -> bool:
        """Bound verdict over applicable rows (trivial attacks don't count)."""
        return all(r.report.satisfied for r in self.runs if r.report.applicable)


def _sweep_omegas(config: ScenarioConfig) -> list[tuple[tuple[int, float], ...]]:
    if config.sweep is None:
        return [config.protocol.omega]
    if config.sweep.n_values is not None:
        return [((n, 1.0),) for n in config.sweep.n_values]
    return list(config.sweep.omegas)


def _build_spec(config: ScenarioConfig, omega_pairs) -> ProtocolSpec:
    traps = build_trap_family(config.protocol.trap_family, dict(config.protocol.trap_params))
    acceptance = build_acceptance(
        config.protocol.acceptance_family, config.protocol.acceptance_mode, traps
    )
    return ProtocolSpec(
        omega=RoundDistribution.from_pairs(omega_pairs),
        k=config.protocol.k,
        traps=traps,
        acceptance=acceptance,
    )


def _general_setup_for(config: ScenarioConfig, omega_pairs) -> GeneralSetup:
    if len(omega_pairs) != 1:
        raise ConfigError(
            ["protocol.omega: general-tests setups need a point-mass round distribution"]
        )
    n = omega_pairs[0][0]
    if config.variant.setup_family == "bell":
        if n < 1:
            raise ConfigError(["protocol.omega: bell setup needs at least one test round"])
        return bell_test_setup(n)
    return _custom_setup(config.variant.custom, n)


def _custom_setup(custom, n: int) -> GeneralSetup:
    from .combs import (
        Channel,
        Comb,
        GeneralTest,
        dephasing_channel,
        depolarizing_channel,
        plug,
        register_permutation_unitary,
    )
    from .linalg import DensityOperator
    from .sampling import random_unitary
    from .states import PovmElement, bell_pair, computational_basis_state

    k = 1
    width, y_dim = custom.width, 2**custom.y_qubits

    def build_tooth(descr):
        if descr is None:
            return None
        d = dict(descr)
        chan = None
        if "permute" in d:
            perm0 = tuple(p - 1 for p in d["permute"])
            chan = Channel.from_unitary(register_permutation_unitary(perm0, width, k))
        if "channel" in d:
            maker = dephasing_channel if d["channel"] == "dephasing" else depolarizing_channel
            noise = maker(float(d.get("strength", 0.5)),
                          qubit=int(d.get("register", 1)) - 1,
                          total_qubits=width * k)
            chan = noise if chan is None else noise.compose(chan)
        return chan

    comb = Comb(
        n_holes=n,
        k=k,
        width=width,
        y_dim=y_dim,
        hole_registers=tuple(h - 1 for h in custom.hole_registers),
        teeth=tuple(build_tooth(t) for t in custom.teeth),
    )
    full_dim = comb.register_dim * y_dim
    if custom.state == "plus":
        chi_vec = plus_state(width * k + custom.y_qubits).amplitudes
    elif custom.state == "zero":
        chi_vec = computational_basis_state(width * k + custom.y_qubits).amplitudes
    else:  # bell-pairs, validated y_qubits == width
        from .combs import _permute_qubit_axes

        vec = np.ones(1, dtype=np.complex128)
        for _ in range(width):
            vec = np.kron(vec, bell_pair().amplitudes)
        src = [2 * j for j in range(width)] + [2 * j + 1 for j in range(width)]
        chi_vec = _permute_qubit_axes(vec, src)
    chi = DensityOperator(np.outer(chi_vec, chi_vec.conj()))

    if custom.unitaries == "identity":
        unitaries = tuple(np.eye(2**k, dtype=np.complex128) for _ in range(n))
    else:
        rng = np.random.default_rng(custom.unitary_seed)
        unitaries = tuple(random_unitary(2**k, rng) for _ in range(n))

    if custom.measurement == "identity":
        mu = PovmElement(np.eye(full_dim, dtype=np.complex128))
    else:
        # accept on the honest output: the honest-evolved test state is a valid
        # effect (all eigenvalues <= 1), a projector when the network is unitary
        honest = plug(comb, [Channel.from_unitary(u) for u in unitaries])
        if y_dim > 1:
            honest = honest.tensor_identity(y_dim)
        mu = PovmElement(honest.apply(chi.matrix))

    test = GeneralTest(chi, unitaries, mu)
    return GeneralSetup(
        omega=RoundDistribution.point_mass(n),
        k=k,
        tests={n: test},
        combs={(n, ell): comb for ell in range(1, n + 2)},
    )


def _resolve_alpha_override(config: ScenarioConfig) -> float | None:
    """None means 'theorem-optimal for each (model, variant, N)'."""
    s = config.strategy
    if s.kind == "honest":
        return 0.0
    if s.alpha == "theorem-optimal":
        return None
    return float(s.alpha)


def _run_one(config, sweep_index, omega_pairs, model, mc_seed) -> RunRecord:
    placement = Placement(config.strategy.placement)
    alpha_override = _resolve_alpha_override(config)
    variant = ProtocolVariant(config.variant.kind)
    if variant is ProtocolVariant.PER_ROUND:
        spec = _build_spec(config, omega_pairs)
        report = run_tradeoff_check(
            spec, model, variant, alpha_override=alpha_override, placement=placement
        )
        attack = PhaseAttack(report.alpha, placement)
        honest_rounds = round_outcome_table(spec, HONEST)
        attacked_rounds = round_outcome_table(spec, attack)
        mc = None
        if config.monte_carlo is not None:
            seed = mc_seed + sweep_index
            psi = plus_state(spec.k).density()
            eye = np.eye(2**spec.k, dtype=np.complex128)
            mc = McComparison(
                trials=config.monte_carlo.trials,
                seed=seed,
                honest=monte_carlo_run(spec, HONEST, psi, eye, config.monte_carlo.trials, seed),
                attacked=monte_carlo_run(spec, attack, psi, eye, config.monte_carlo.trials, seed),
            )
        return RunRecord(sweep_index, report, honest_rounds, attacked_rounds, mc)
    setup = _general_setup_for(config, omega_pairs)
    n_expected = setup.omega.mean
    report = general_tradeoff_check(
        model, setup, n_expected, alpha_override=alpha_override, placement=placement
    )
    attack = PhaseAttack(report.alpha, placement)
    return RunRecord(
        sweep_index,
        report,
        setup.outcome_table(HONEST),
        setup.outcome_table(attack),
        None,
    )


def run_scenario(
    config: ScenarioConfig,
    seed_override: int | None = None,
    parallel: bool = False,
) -> ReportBundle:
    """Evaluate every (sweep entry, security model) pair of a scenario.

    Deterministic given the config and seed; sweep entries may run in
    parallel, and the output order follows the sweep index regardless of
    completion order.
    """
    t0 = time.perf_counter()
    mc_seed = seed_override
    if mc_seed is None:
        mc_seed = config.monte_carlo.seed if config.monte_carlo is not None else 0
    jobs = [
        (idx, omega, model)
        for idx, omega in enumerate(_sweep_omegas(config))
        for model in config.models
    ]

    def work(job):
        idx, omega, model = job
        return _run_one(config, idx, omega, model, mc_seed)

    if parallel and len(jobs) > 1:
        with ThreadPoolExecutor() as pool:
            runs = tuple(pool.map(work, jobs))
    else:
        runs = tuple(work(job) for job in jobs)
    meta = BundleMetadata(
        config_hash=config.config_hash(),
        seed=mc_seed if config.monte_carlo is not None else None,
        versions={"cutchoose": __version__, "numpy": np.__version__},
        wall_time_s=time.perf_counter() - t0,
    )
    return ReportBundle(config=config, runs=runs, metadata=meta)


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if x is None:
        return "na"
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def csv_columns(with_mc: bool) -> tuple[str, ...]:
    cols = list(_BASE_COLUMNS)
    for name in PROOF_STEP_NAMES:
        cols += [f"step_{name}_lhs", f"step_{name}_rhs", f"step_{name}_holds"]
    if with_mc:
        cols += list(_MC_COLUMNS)
    return tuple(cols)


def _csv_row(record: RunRecord, with_mc: bool) -> list[str]:
    r = record.report
    row = [
        r.model.value,
        r.variant.value,
        _fmt(float(r.n_expected)),
        _fmt(r.alpha),
        _fmt(r.p_h),
        _fmt(r.p_d),
        _fmt(r.eps_h),
        _fmt(r.eps_d),
        _fmt(r.bound),
        _fmt(r.satisfied),
    ]
    by_name = {s.name: s for s in r.proof_steps}
    for name in PROOF_STEP_NAMES:
        s = by_name[name]
        row += [_fmt(s.lhs), _fmt(s.rhs), _fmt(s.holds)]
    if with_mc:
        if record.mc is None:
            row += ["na", "na", "na", "na"]
        else:
            row += [
                _fmt(record.mc.honest.accept_rate),
                _fmt(record.mc.attacked.accept_rate),
                str(record.mc.trials),
                str(record.mc.seed),
            ]
    return row


def _json_run(record: RunRecord) -> dict:
    r = record.report
    doc = {
        "sweep_index": record.sweep_index,
        "model": r.model.value,
        "variant": r.variant.value,
        "N": float(r.n_expected),
        "alpha": r.alpha,
        "p_H": r.p_h,
        "p_D": r.p_d,
        "eps_h": r.eps_h,
        "eps_d": r.eps_d,
        "bound": r.bound,
        "satisfied": r.satisfied,
        "trivial_attack": r.trivial_attack,
        "proof_steps": [
            {"name": s.name, "lhs": s.lhs, "rhs": s.rhs, "holds": s.holds}
            for s in r.proof_steps
        ],
    }
    if record.honest_rounds is not None:
        doc["rounds"] = {
            "honest": [list(e) for e in record.honest_rounds.entries],
            "attacked": [list(e) for e in record.attacked_rounds.entries],
        }
    if record.mc is not None:
        doc["monte_carlo"] = {
            "trials": record.mc.trials,
            "seed": record.mc.seed,
            "p_H_empirical": record.mc.honest.accept_rate,
            "p_D_empirical": record.mc.attacked.accept_rate,
        }
    return doc


def emit_bytes(bundle: ReportBundle, fmt: str) -> bytes:
    """Serialize a bundle; identical bundles give identical bytes."""
    if fmt == "csv":
        with_mc = bundle.config.monte_carlo is not None
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(csv_columns(with_mc))
        for record in bundle.runs:
            writer.writerow(_csv_row(record, with_mc))
        return buf.getvalue().encode("utf-8")
    if fmt == "json":
        doc = {
            "config": bundle.config.canonical(),
            "metadata": {
                "config_hash": bundle.metadata.config_hash,
                "seed": bundle.metadata.seed,
                "versions": bundle.metadata.versions,
            },
            "runs": [_json_run(r) for r in bundle.runs],
        }
        return (json.dumps(doc, indent=2, sort_keys=True) + "\n").encode("utf-8")
    raise OutOfDomainError(f"unknown output format {fmt!r}")


def emit(bundle: ReportBundle, fmt: str, path) -> None:
    """Write the serialized bundle to ``path``."""
    data = emit_bytes(bundle, fmt)
    try:
        with open(path, "wb") as fh:
            fh.write(data)
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc
