"""Monte Carlo sweep harness: config, per-trial pipeline, aggregation, CSV.

Every (n_p, snr, trial) cell derives its own RNG seed by hashing the
master seed with the cell's parameter *values* (SHA-256, first 8 bytes),
so any cell re-run in isolation reproduces the sweep's record exactly and
thread scheduling cannot change results. Divergent solver runs are
retained and flagged, never resampled.
"""

from __future__ import annotations

import concurrent.futures
import hashlib
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelModelConfig, assemble_channel, sample_rays
from .frontend import CfoParams, gen_training, simulate_rx, snr_to_radius
from .gamp import GampConfig, GampDivergenceError, gamp_solve, initial_prior
from .lifting import build_operator
from .metrics import TrialMetrics, cfo_squared_error, compute_trial_metrics, nmse_db
from .recovery import DegenerateEstimateError, estimate_joint

_TWO_PI = 2.0 * math.pi

CSV_HEADER = "snr_db,n_p,trial,seed,nmse_db,cfo_sq_err,rate_bits,gamp_iters,sigma1_ratio,runtime_ms,diverged"


class ConfigError(ValueError):
    """Invalid or unknown experiment configuration."""


@dataclass
class ExperimentConfig:
    n_tx: int = 16
    n_rx: int = 16
    n_p_list: list[int] = field(default_factory=lambda: [32, 64])
    snr_db_list: list[float] = field(default_factory=lambda: [-10.0, -5.0, 0.0, 5.0, 10.0, 15.0])
    n_trials: int = 100
    seed: int = 12345
    carrier_hz: float = 28e9
    symbol_period_s: float = 0.5e-6
    # CFO offset in Hz per pilot length; None selects the half-bin
    # worst-case nearest 100 kHz for each n_p
    delta_f_hz: dict[int, float] | None = None
    lam0: float = 0.1
    channel: ChannelModelConfig = field(default_factory=ChannelModelConfig)
    gamp: GampConfig = field(default_factory=GampConfig)
    output_path: str = "results.csv"

    def __post_init__(self):
        if self.n_trials < 1:
            raise ConfigError("n_trials must be >= 1")
        if not self.n_p_list:
            raise ConfigError("n_p_list must be nonempty")
        if not self.snr_db_list:
            raise ConfigError("snr_db_list must be nonempty")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must fit in 64 bits")
        for n_p, df in self.resolved_delta_f().items():
            bins = df * n_p * self.symbol_period_s
            if abs(bins - (math.floor(bins) + 0.5)) > 1e-9:
                raise ConfigError(
                    f"delta_f for n_p={n_p} is {bins:.6f} bins; expected integer + 0.5"
                )

    def resolved_delta_f(self) -> dict[int, float]:
        if self.delta_f_hz is not None:
            missing = [n_p for n_p in self.n_p_list if n_p not in self.delta_f_hz]
            if missing:
                raise ConfigError(f"delta_f_hz missing entries for n_p={missing}")
            return {n_p: self.delta_f_hz[n_p] for n_p in self.n_p_list}
        return {n_p: half_bin_offset_hz(n_p, self.symbol_period_s) for n_p in self.n_p_list}

    def omega_e(self, n_p: int) -> float:
        return _TWO_PI * self.resolved_delta_f()[n_p] * self.symbol_period_s


def half_bin_offset_hz(n_p: int, symbol_period_s: float, target_hz: float = 100e3) -> float:
    """Maximally off-grid CFO: the (k + 0.5)-bin offset nearest ``target_hz``."""
    bin_hz = 1.0 / (n_p * symbol_period_s)
    k = max(0, round(target_hz / bin_hz - 0.5))
    return (k + 0.5) * bin_hz


def paper_preset() -> ExperimentConfig:
    """16x16 ULAs, 2 clusters x 15 rays, 10 deg spread, 28 GHz, T = 0.5 us."""
    return ExperimentConfig(
        n_tx=16,
        n_rx=16,
        n_p_list=[32, 64],
        snr_db_list=[-10.0, -5.0, 0.0, 5.0, 10.0, 15.0],
        n_trials=100,
        carrier_hz=28e9,
        symbol_period_s=0.5e-6,
        delta_f_hz={32: 93.75e3, 64: 109.375e3},
        channel=ChannelModelConfig(
            n_tx=16, n_rx=16, n_clusters=2, rays_per_cluster=15,
            angle_spread_deg=10.0, antenna_spacing_ratio=0.5,
        ),
    )


def bits_per_trial(n_p: int, n_rx: int) -> int:
    """One-bit measurements consumed per trial (I and Q per antenna-sample)."""
    return 2 * n_p * n_rx


def trial_seed(master_seed: int, n_p: int, snr_db: float, trial: int) -> int:
    """Deterministic 64-bit per-cell seed from the cell's parameter values."""
    key = f"{master_seed}|np={n_p}|snr={float(snr_db)!r}|trial={trial}".encode()
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "big")


@dataclass
class TrialRecord:
    snr_db: float
    n_p: int
    trial: int
    seed: int
    nmse_db: float
    cfo_sq_err: float
    rate_bits: float
    gamp_iters: int
    sigma1_ratio: float
    runtime_ms: float
    diverged: bool

    def sort_key(self):
        return (self.n_p, self.snr_db, self.trial)


@dataclass
class CellSummary:
    n_p: int
    snr_db: float
    n_trials: int
    mean_nmse_linear: float
    mean_nmse_db: float
    cfo_mse: float
    mean_rate_bits: float
    n_diverged: int


def run_trial(cfg: ExperimentConfig, n_p: int, snr_db: float, trial: int,
              measure_runtime: bool = True) -> TrialRecord:
    """One full pipeline pass for a single Monte Carlo cell."""
    seed = trial_seed(cfg.seed, n_p, snr_db, trial)
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()

    omega_e = cfg.omega_e(n_p)
    h = assemble_channel(sample_rays(cfg.channel, rng), cfg.channel)
    radius = snr_to_radius(snr_db, cfg.n_tx)
    training = gen_training(cfg.n_tx, n_p, radius, rng)
    y_block = simulate_rx(h, training, CfoParams(omega_e), rng, quantize=True)
    y = y_block.ravel()  # vec of the transposed block

    op = build_operator(training, cfg.n_rx)
    prior0 = initial_prior(op, lam0=cfg.lam0)
    diverged = False
    try:
        x_hat, _, _, diag = gamp_solve(op, y, prior0, cfg.gamp)
    except GampDivergenceError as err:
        x_hat, diag, diverged = err.x_hat, err.diagnostics, True

    try:
        est = estimate_joint(x_hat, n_p, cfg.n_rx, cfg.n_tx)
        tm = compute_trial_metrics(h, est.h_hat, omega_e, est.omega_hat, snr_db)
        sigma1_ratio = est.sigma1_ratio
    except DegenerateEstimateError:
        # no usable estimate: unit NMSE, zero-rate record, flagged
        tm = TrialMetrics(1.0, 0.0, cfo_squared_error(omega_e, 0.0), 0.0, 0j)
        sigma1_ratio = 1.0
        diverged = True

    runtime = (time.perf_counter() - t0) * 1e3 if measure_runtime else 0.0
    return TrialRecord(
        snr_db=float(snr_db), n_p=n_p, trial=trial, seed=seed,
        nmse_db=tm.nmse_db, cfo_sq_err=tm.cfo_sq_err, rate_bits=tm.rate_bits,
        gamp_iters=diag.iterations, sigma1_ratio=sigma1_ratio,
        runtime_ms=runtime, diverged=diverged,
    )


def run_experiment(cfg: ExperimentConfig, threads: int = 1, measure_runtime: bool = True,
                   progress=None):
    """Run the sweep; returns ``(records, summaries)`` sorted deterministically."""
    cells = [
        (n_p, snr, trial)
        for n_p in cfg.n_p_list
        for snr in cfg.snr_db_list
        for trial in range(cfg.n_trials)
    ]
    if threads > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(
                lambda cell: run_trial(cfg, *cell, measure_runtime=measure_runtime), cells
            ))
    else:
        records = []
        for i, cell in enumerate(cells):
            records.append(run_trial(cfg, *cell, measure_runtime=measure_runtime))
            if progress is not None:
                progress(i + 1, len(cells))
    records.sort(key=TrialRecord.sort_key)
    return records, aggregate(records)


def aggregate(records: list[TrialRecord]) -> list[CellSummary]:
    cells: dict[tuple[int, float], list[TrialRecord]] = {}
    for rec in records:
        cells.setdefault((rec.n_p, rec.snr_db), []).append(rec)
    out = []
    for (n_p, snr), recs in sorted(cells.items()):
        nmse_lin = [10.0 ** (r.nmse_db / 20.0) for r in recs]
        mean_lin = float(np.mean(nmse_lin))
        out.append(CellSummary(
            n_p=n_p, snr_db=snr, n_trials=len(recs),
            mean_nmse_linear=mean_lin, mean_nmse_db=nmse_db(mean_lin),
            cfo_mse=float(np.mean([r.cfo_sq_err for r in recs])),
            mean_rate_bits=float(np.mean([r.rate_bits for r in recs])),
            n_diverged=sum(r.diverged for r in recs),
        ))
    return out


def _fmt(x: float) -> str:
    return f"{x:.8e}"


def emit_csv(records: list[TrialRecord], path) -> None:
    """Write trial records; real-valued fields carry 9 significant digits."""
    if not records:
        raise ValueError("no records to emit")
    lines = [CSV_HEADER]
    for r in records:
        lines.append(",".join([
            _fmt(r.snr_db), str(r.n_p), str(r.trial), str(r.seed),
            _fmt(r.nmse_db), _fmt(r.cfo_sq_err), _fmt(r.rate_bits),
            str(r.gamp_iters), _fmt(r.sigma1_ratio), _fmt(r.runtime_ms),
            str(int(r.diverged)),
        ]))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def format_summary(summaries: list[CellSummary]) -> str:
    header = f"{'n_p':>5} {'snr_db':>8} {'trials':>7} {'nmse_db':>10} {'cfo_mse':>12} {'rate':>8} {'div':>4}"
    rows = [header, "-" * len(header)]
    for s in summaries:
        rows.append(
            f"{s.n_p:>5d} {s.snr_db:>8.1f} {s.n_trials:>7d} {s.mean_nmse_db:>10.3f} "
            f"{s.cfo_mse:>12.4e} {s.mean_rate_bits:>8.3f} {s.n_diverged:>4d}"
        )
    return "\n".join(rows)


# ---------------------------------------------------------------------------
# config file format: flat "key = value" lines with dotted sections, strict
# ---------------------------------------------------------------------------

_INT_KEYS = {"n_tx", "n_rx", "n_trials", "seed",
             "channel.n_clusters", "channel.rays_per_cluster",
             "gamp.max_iters", "gamp.em_start_iter"}
_FLOAT_KEYS = {"carrier_hz", "symbol_period_s", "lam0",
               "channel.angle_spread_deg", "channel.antenna_spacing_ratio",
               "gamp.tol", "gamp.damping", "gamp.variance_floor"}
_BOOL_KEYS = {"gamp.em_enabled", "gamp.uniform_variance"}
_LIST_KEYS = {"n_p_list", "snr_db_list"}
_STR_KEYS = {"output_path"}
_KNOWN_KEYS = _INT_KEYS | _FLOAT_KEYS | _BOOL_KEYS | _LIST_KEYS | _STR_KEYS | {"delta_f_hz"}


def _parse_bool(key, val):
    low = val.lower()
    if low in ("true", "yes", "1"):
        return True
    if low in ("false", "no", "0"):
        return False
    raise ConfigError(f"{key}: cannot parse boolean from {val!r}")


def _parse_delta_f(val: str):
    if val.lower() == "auto":
        return None
    try:
        out = {}
        for pair in val.split(","):
            n_p, df = pair.split(":")
            out[int(n_p.strip())] = float(df.strip())
        return out
    except ValueError as err:
        raise ConfigError(f"delta_f_hz: expected 'auto' or 'NP:HZ,NP:HZ', got {val!r}") from err


def parse_config_text(text: str) -> ExperimentConfig:
    """Parse the strict flat config format; unknown keys are errors."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, _, val = stripped.partition("=")
        key, val = key.strip(), val.strip()
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        raw[key] = val
    return config_from_mapping(raw)


def config_from_mapping(raw: dict[str, str]) -> ExperimentConfig:
    unknown = set(raw) - _KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    top: dict = {}
    chan: dict = {}
    gamp: dict = {}
    for key, val in raw.items():
        section, _, name = key.rpartition(".")
        bucket = {"": top, "channel": chan, "gamp": gamp}[section]
        try:
            if key in _INT_KEYS:
                bucket[name] = int(val)
            elif key in _FLOAT_KEYS:
                bucket[name] = float(val)
            elif key in _BOOL_KEYS:
                bucket[name] = _parse_bool(key, val)
            elif key == "n_p_list":
                bucket[name] = [int(v) for v in val.split(",")]
            elif key == "snr_db_list":
                bucket[name] = [float(v) for v in val.split(",")]
            elif key == "delta_f_hz":
                bucket[name] = _parse_delta_f(val)
            else:
                bucket[name] = val
        except ValueError as err:
            raise ConfigError(f"{key}: cannot parse {val!r}") from err
    base = ExperimentConfig(**{k: v for k, v in top.items()})
    chan_cfg = ChannelModelConfig(
        n_tx=base.n_tx, n_rx=base.n_rx,
        **{**{"n_clusters": 2, "rays_per_cluster": 15,
              "angle_spread_deg": 10.0, "antenna_spacing_ratio": 0.5}, **chan},
    )
    gamp_cfg = GampConfig(**gamp)
    return ExperimentConfig(**{**top, "channel": chan_cfg, "gamp": gamp_cfg})


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        return parse_config_text(fh.read())
