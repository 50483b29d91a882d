"""Monte-Carlo experiment harnesses.

Four experiment kinds are provided:

* ``phase``        -- noiseless recovery success rates over an (delta, rho)
  grid, with the 0.5-crossing contour per delta column.
* ``ber_discrete`` -- slot-level BER versus SNR through the discrete model.
* ``ber_rf``       -- slot-level BER versus Eb/N0 through the RF chain,
  optionally with uniform quantization per receiver.
* ``complexity``   -- iteration counts, wall-clock and the arithmetic cost
  model over an (delta, rho) grid.

Reproducibility: every slot or trial draws from a generator seeded by the
master seed plus its (operator, grid point, trial) coordinates through
``numpy.random.SeedSequence`` spawn keys, so results are bit-identical for
any worker count and any execution order. Within a slot the draw order is
fixed (bits and support first; the discrete harness then draws noise before
any per-slot measurement matrix, the RF harness draws the matrix before its
passband noise).
"""

from __future__ import annotations

import functools
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__ as _pkg_version
from .baseband import add_awgn, count_bit_errors, encode, random_bit_block
from .gold import GoldDictionary, build_gold_dictionary
from .pursuit import ComplexityModel, PursuitProblem, subspace_pursuit
from .rfchain import ChainConfig, transmit_receive
from .results import FORMAT_VERSION, ResultTable
from .sampling import build_operator, build_prewhitener

EXPERIMENT_KINDS = ("phase", "ber_discrete", "ber_rf", "quantization", "complexity")


@dataclass(frozen=True)
class OperatorSpec:
    """One receiver configuration inside an experiment."""

    kind: str
    kappa: float = 1.0
    prewhiten: bool | None = None  # None: auto (rademacher only)
    quantizer_bits: int | None = None

    @property
    def wants_prewhitening(self) -> bool:
        if self.prewhiten is None:
            return self.kind == "rademacher"
        return self.prewhiten

    @property
    def is_random(self) -> bool:
        return self.kind in ("rademacher", "rd")

    @property
    def label(self) -> str:
        parts = [self.kind]
        if self.kappa != 1:
            parts.append(f"k{self.kappa:g}")
        if self.wants_prewhitening and self.kind == "rademacher":
            pass  # prewhitening is the default for rademacher; only deviations are labelled
        elif self.prewhiten is False and self.kind == "rademacher":
            parts.append("noprewhiten")
        if self.quantizer_bits is not None:
            parts.append(f"q{self.quantizer_bits}")
        return "_".join(parts)


@dataclass(frozen=True)
class ExperimentSpec:
    """Declarative description of one experiment run."""

    kind: str
    seed: int
    m: int = 10
    sparsity: int = 1
    operators: tuple[OperatorSpec, ...] = (OperatorSpec("identity"),)
    snr_db: tuple[float, ...] = ()
    ebn0_db: tuple[float, ...] = ()
    target_errors: int = 100
    max_slots: int = 1_000_000
    deltas: tuple[float, ...] = ()
    rhos: tuple[float, ...] = ()
    batch_trials: int = 20
    max_trials: int = 400
    surface_tol: float = 1e-5
    success_mse: float = 1e-6
    trials_per_point: int = 8
    sparsity_multiplier: int = 1
    spurious_policy: str = "ignore"
    chain: dict = field(default_factory=dict)
    workers: int = 0

    def __post_init__(self):
        object.__setattr__(self, "operators", tuple(self.operators))
        object.__setattr__(self, "snr_db", tuple(self.snr_db))
        object.__setattr__(self, "ebn0_db", tuple(self.ebn0_db))
        object.__setattr__(self, "deltas", tuple(self.deltas))
        object.__setattr__(self, "rhos", tuple(self.rhos))

    def validate(self) -> None:
        if self.kind not in EXPERIMENT_KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        if not isinstance(self.seed, int):
            raise ValueError("a master seed is mandatory")
        if not self.operators:
            raise ValueError("at least one operator is required")
        if self.kind in ("phase", "complexity"):
            if not self.deltas or not self.rhos:
                raise ValueError(f"{self.kind} experiments need delta and rho grids")
        elif self.kind == "ber_discrete":
            if not self.snr_db:
                raise ValueError("ber_discrete experiments need an SNR grid")
        else:  # ber_rf / quantization
            if not self.ebn0_db:
                raise ValueError(f"{self.kind} experiments need an Eb/N0 grid")
            if self.kind == "quantization" and all(
                o.quantizer_bits is None for o in self.operators
            ):
                raise ValueError("quantization experiments need quantizer bits")

    def to_meta(self) -> dict:
        spec_dict = asdict(self)
        spec_dict["operators"] = [asdict(o) for o in self.operators]
        return {
            "format_version": FORMAT_VERSION,
            "package_version": _pkg_version,
            "seed": self.seed,
            "spec": spec_dict,
        }

    def chain_config(self) -> ChainConfig:
        return ChainConfig(**self.chain)


@functools.lru_cache(maxsize=4)
def _cached_dictionary(m: int) -> tuple[GoldDictionary, np.ndarray]:
    d = build_gold_dictionary(m)
    return d, d.psi.astype(np.float64)


def _slot_rng(spec: ExperimentSpec, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(spec.seed, spawn_key=key))


def _build_slot_operator(spec_op: OperatorSpec, n: int, rng):
    return build_operator(spec_op.kind, n, spec_op.kappa, rng)


# ---------------------------------------------------------------------------
# BER harnesses (discrete and RF)


def _ber_point(args) -> dict:
    """One (operator, grid value) BER measurement; body shared by both harnesses."""
    spec, rf, op_idx, grid_idx = args
    dictionary, psi = _cached_dictionary(spec.m)
    n = dictionary.n
    op_spec = spec.operators[op_idx]
    level_db = (spec.ebn0_db if rf else spec.snr_db)[grid_idx]
    s = spec.sparsity
    bits_per_slot = 2 * s
    cfg = spec.chain_config() if rf else None

    static_op = None
    static_a = None
    if not op_spec.is_random:
        static_op = build_operator(op_spec.kind, n, op_spec.kappa)
        static_a = static_op.compose(psi)

    errors = slots = bits = 0
    iters_total = 0
    t0 = time.perf_counter()
    while errors < spec.target_errors and slots < spec.max_slots:
        rng = _slot_rng(spec, 1 if rf else 0, op_idx, grid_idx, slots)
        block = random_bit_block(n, s, rng)
        _, x = encode(block.bits, block.support, dictionary)

        if rf:
            if op_spec.is_random:
                op = _build_slot_operator(op_spec, n, rng)
                a = op.compose(psi)
            else:
                op, a = static_op, static_a
            y = transmit_receive(
                x,
                op,
                cfg,
                rng,
                ebn0_db=level_db,
                n_bits=bits_per_slot,
                quantizer_bits=op_spec.quantizer_bits,
            )
        else:
            obs = add_awgn(x, level_db, rng)
            if op_spec.is_random:
                op = _build_slot_operator(op_spec, n, rng)
                a = op.compose(psi)
            else:
                op, a = static_op, static_a
            y = op.apply(obs.y)
        if op_spec.wants_prewhitening:
            whitener = build_prewhitener(op)
            if whitener is not None:
                y = whitener.apply(y)
                a = whitener.apply_matrix(a)
        result = subspace_pursuit(PursuitProblem(a, y, s))
        errors += count_bit_errors(block, result.alpha_hat, spec.spurious_policy)
        iters_total += result.iterations
        slots += 1
        bits += bits_per_slot

    row = {
        "operator": op_spec.label,
        "kind": op_spec.kind,
        "kappa": op_spec.kappa,
        "quantizer_bits": op_spec.quantizer_bits,
        "m": spec.m,
        "sparsity": s,
        ("ebn0_db" if rf else "snr_db"): level_db,
        "slots": slots,
        "bits": bits,
        "errors": errors,
        "ber": errors / bits if bits else math.nan,
        "mean_iterations": iters_total / slots if slots else math.nan,
        "capped": errors < spec.target_errors,
        "seed": spec.seed,
        "wall_s": round(time.perf_counter() - t0, 3),
    }
    return row


def _run_ber(spec: ExperimentSpec, rf: bool) -> ResultTable:
    spec.validate()
    grid = spec.ebn0_db if rf else spec.snr_db
    tasks = [
        (spec, rf, op_idx, gi)
        for op_idx in range(len(spec.operators))
        for gi in range(len(grid))
    ]
    rows = _map_tasks(_ber_point, tasks, spec.workers)
    return ResultTable(meta=spec.to_meta(), rows=rows)


def run_ber_discrete(spec: ExperimentSpec) -> ResultTable:
    """BER versus SNR through the discrete slot model, per operator."""
    if spec.kind != "ber_discrete":
        raise ValueError(f"spec kind is {spec.kind!r}, expected 'ber_discrete'")
    return _run_ber(spec, rf=False)


def run_ber_rf(spec: ExperimentSpec) -> ResultTable:
    """BER versus Eb/N0 through the oversampled RF chain, per operator."""
    if spec.kind not in ("ber_rf", "quantization"):
        raise ValueError(f"spec kind is {spec.kind!r}, expected 'ber_rf'")
    return _run_ber(spec, rf=True)


# ---------------------------------------------------------------------------
# Phase transition harness


def _grid_dims(n: int, delta: float, rho: float) -> tuple[int, int]:
    m_rows = min(n, max(1, round(delta * n)))
    s = min(m_rows, max(1, round(rho * m_rows)))
    return m_rows, s


def _phase_trial(spec, op_spec, dictionary, psi, m_rows, s, static_a, static_op, key):
    rng = _slot_rng(spec, *key)
    block = random_bit_block(dictionary.n, s, rng)
    truth, x = encode(block.bits, block.support, dictionary)
    if op_spec.is_random:
        op = build_operator(op_spec.kind, dictionary.n, dictionary.n / m_rows, rng)
        a = op.compose(psi)
    else:
        op, a = static_op, static_a
    y = op.apply(x)
    if op_spec.wants_prewhitening:
        whitener = build_prewhitener(op)
        if whitener is not None:
            y = whitener.apply(y)
            a = whitener.apply_matrix(a)
    result = subspace_pursuit(PursuitProblem(a, y, s))
    err = result.alpha_hat - truth.alpha
    rel_mse = float(np.vdot(err, err).real / np.vdot(truth.alpha, truth.alpha).real)
    return rel_mse < spec.success_mse, result.iterations


def _phase_point(args) -> dict:
    """Adaptive success-rate estimate for one (operator, delta, rho) cell.

    Batches of trials are added until the running success-rate estimate
    moves by less than sqrt(surface_tol) between consecutive batches, or the
    trial cap is reached.
    """
    spec, op_idx, di, ri = args
    dictionary, psi = _cached_dictionary(spec.m)
    op_spec = spec.operators[op_idx]
    delta, rho = spec.deltas[di], spec.rhos[ri]
    m_rows, s = _grid_dims(dictionary.n, delta, rho)

    static_op = static_a = None
    if not op_spec.is_random:
        static_op = build_operator(op_spec.kind, dictionary.n, dictionary.n / m_rows)
        static_a = static_op.compose(psi)

    t0 = time.perf_counter()
    successes = trials = batches = 0
    iters_total = 0
    prev_rate = None
    converged = False
    while trials < spec.max_trials:
        batch = min(spec.batch_trials, spec.max_trials - trials)
        for t in range(trials, trials + batch):
            ok, iters = _phase_trial(
                spec, op_spec, dictionary, psi, m_rows, s,
                static_a, static_op, (2, op_idx, di, ri, t),
            )
            successes += int(ok)
            iters_total += iters
        trials += batch
        batches += 1
        rate = successes / trials
        if prev_rate is not None and (rate - prev_rate) ** 2 < spec.surface_tol:
            converged = True
            break
        prev_rate = rate

    return {
        "operator": op_spec.label,
        "kind": op_spec.kind,
        "m": spec.m,
        "delta": delta,
        "rho": rho,
        "m_rows": m_rows,
        "sparsity": s,
        "trials": trials,
        "successes": successes,
        "success_rate": successes / trials,
        "mean_iterations": iters_total / trials,
        "batches": batches,
        "converged": converged,
        "seed": spec.seed,
        "wall_s": round(time.perf_counter() - t0, 3),
    }


def contour_05(rows: list[dict]) -> list[dict]:
    """0.5-crossing rho per (operator, delta) column, linearly interpolated.

    Returns one record per column; ``rho_cross`` is None when the success
    rate never crosses 0.5 inside the grid.
    """
    columns: dict[tuple[str, float], list[tuple[float, float]]] = {}
    for row in rows:
        key = (row["operator"], row["delta"])
        columns.setdefault(key, []).append((row["rho"], row["success_rate"]))
    out = []
    for (operator, delta), points in sorted(columns.items()):
        points.sort()
        cross = None
        for (r0, p0), (r1, p1) in zip(points, points[1:]):
            if p0 >= 0.5 > p1:
                cross = r0 + (p0 - 0.5) * (r1 - r0) / (p0 - p1)
                break
        out.append({"operator": operator, "delta": delta, "rho_cross": cross})
    return out


def run_phase_transition(spec: ExperimentSpec) -> ResultTable:
    """Noiseless recovery success over the (delta, rho) grid, plus contours."""
    if spec.kind != "phase":
        raise ValueError(f"spec kind is {spec.kind!r}, expected 'phase'")
    spec.validate()
    tasks = [
        (spec, op_idx, di, ri)
        for op_idx in range(len(spec.operators))
        for di in range(len(spec.deltas))
        for ri in range(len(spec.rhos))
    ]
    rows = _map_tasks(_phase_point, tasks, spec.workers)
    meta = spec.to_meta()
    meta["contour_05"] = contour_05(rows)
    return ResultTable(meta=meta, rows=rows)


# ---------------------------------------------------------------------------
# Complexity harness


def _complexity_point(args) -> dict:
    spec, op_idx, di, ri = args
    dictionary, psi = _cached_dictionary(spec.m)
    op_spec = spec.operators[op_idx]
    delta, rho = spec.deltas[di], spec.rhos[ri]
    m_rows, s = _grid_dims(dictionary.n, delta, rho)
    fed = min(m_rows, spec.sparsity_multiplier * s)

    static_op = static_a = None
    if not op_spec.is_random:
        static_op = build_operator(op_spec.kind, dictionary.n, dictionary.n / m_rows)
        static_a = static_op.compose(psi)

    iters = []
    flops = []
    sp_wall = 0.0
    for t in range(spec.trials_per_point):
        rng = _slot_rng(spec, 3, op_idx, di, ri, t)
        block = random_bit_block(dictionary.n, s, rng)
        _, x = encode(block.bits, block.support, dictionary)
        if op_spec.is_random:
            op = build_operator(op_spec.kind, dictionary.n, dictionary.n / m_rows, rng)
            a = op.compose(psi)
        else:
            op, a = static_op, static_a
        y = op.apply(x)
        t0 = time.perf_counter()
        result = subspace_pursuit(PursuitProblem(a, y, fed))
        sp_wall += time.perf_counter() - t0
        iters.append(result.iterations)
        model = ComplexityModel(
            k=result.iterations, s=fed, m_rows=m_rows, n=dictionary.n
        )
        flops.append(model.closed_form())

    return {
        "operator": op_spec.label,
        "m": spec.m,
        "delta": delta,
        "rho": rho,
        "m_rows": m_rows,
        "sparsity": s,
        "fed_sparsity": fed,
        "trials": spec.trials_per_point,
        "mean_iterations": float(np.mean(iters)),
        "mean_flops": float(np.mean(flops)),
        "seed": spec.seed,
        "wall_s": round(sp_wall, 6),
    }


def fit_overhead_constant(rows: list[dict]) -> tuple[float, float]:
    """Least-squares fit of wall time against (flops, iterations).

    The model is t ~ b1 * flops + b2 * K; the overhead constant is c = b2/b1
    so that predicted cost flops + c*K is proportional to the fitted time.
    Returns (c, pearson) with pearson the correlation between the measured
    and predicted maps, each normalized to its maximum.
    """
    t = np.array([r["wall_s"] / r["trials"] for r in rows])
    f = np.array([r["mean_flops"] for r in rows])
    k = np.array([r["mean_iterations"] for r in rows])
    design = np.column_stack([f, k])
    coef, *_ = np.linalg.lstsq(design, t, rcond=None)
    b1, b2 = coef
    c = b2 / b1 if b1 != 0 else math.inf
    predicted = f + c * k
    meas_n = t / t.max()
    pred_n = predicted / predicted.max()
    pearson = float(np.corrcoef(meas_n, pred_n)[0, 1])
    return float(c), pearson


def run_complexity(spec: ExperimentSpec) -> ResultTable:
    """Iteration counts, wall time and model cost over the (delta, rho) grid."""
    if spec.kind != "complexity":
        raise ValueError(f"spec kind is {spec.kind!r}, expected 'complexity'")
    spec.validate()
    tasks = [
        (spec, op_idx, di, ri)
        for op_idx in range(len(spec.operators))
        for di in range(len(spec.deltas))
        for ri in range(len(spec.rhos))
    ]
    rows = _map_tasks(_complexity_point, tasks, spec.workers)
    meta = spec.to_meta()
    c, pearson = fit_overhead_constant(rows)
    meta["fitted_c"] = c
    meta["predicted_measured_correlation"] = pearson
    return ResultTable(meta=meta, rows=rows)


# ---------------------------------------------------------------------------


def _map_tasks(fn, tasks, workers: int):
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, tasks))
    return [fn(task) for task in tasks]


def run_experiment(spec: ExperimentSpec) -> ResultTable:
    """Dispatch to the harness matching the spec kind."""
    spec.validate()
    if spec.kind == "phase":
        return run_phase_transition(spec)
    if spec.kind == "ber_discrete":
        return run_ber_discrete(spec)
    if spec.kind in ("ber_rf", "quantization"):
        return run_ber_rf(spec)
    return run_complexity(spec)
