"""Seeded Monte Carlo experiments on random network games with misaligned conjectures.

Every trial draws from its own Philox stream keyed by ``(master_seed, trial_id)``,
so records do not depend on execution order or on the number of worker threads.
"""

from __future__ import annotations

import csv
import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .game import BlockStructure, ConjectureProfile, InteractionMatrix
from .gap import UndefinedRelativeGap, gaps_direct, relative_gap

MODES = ("shock", "graph", "both")
MAX_SHOCK_REDRAWS = 10
MAX_ALPHA_RESAMPLES = 1000

TRIAL_HEADER = ("trial_id", "seed", "player", "delta_s", "delta_g", "gap_direct", "relative_gap", "valid")
SUMMARY_HEADER = (
    "delta_s", "delta_g", "count", "dropped", "q05", "q25", "q50", "q75", "q95", "mean", "share_negative",
)


@dataclass(frozen=True)
class McConfig:
    n: int = 5
    block_sizes: tuple[int, ...] | None = None
    mode: str = "shock"
    delta_s: float = 0.0
    delta_g: float = 0.0
    target_sv: float = 0.75
    trials: int = 1000
    master_seed: int = 0
    fixed_network: bool = False

    def __post_init__(self):
        if self.block_sizes is None:
            object.__setattr__(self, "block_sizes", (1,) * int(self.n))
        else:
            object.__setattr__(self, "block_sizes", tuple(int(b) for b in self.block_sizes))
            object.__setattr__(self, "n", len(self.block_sizes))
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.delta_s < 0 or self.delta_g < 0:
            raise ValueError("misalignment levels must be non-negative")
        if self.delta_g >= 2:
            raise ValueError("delta_g must be < 2 to keep scaling factors positive")
        if not 0 < self.target_sv < 1:
            raise ValueError("target_sv must lie in (0, 1)")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not 0 <= int(self.master_seed) < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        if self.mode in ("shock", "both") and self.delta_s > 0 and self.n < 2:
            raise ValueError("shock misalignment needs at least two players")

    @property
    def structure(self) -> BlockStructure:
        return BlockStructure(self.block_sizes)

    @classmethod
    def from_dict(cls, d: dict) -> "McConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["block_sizes"] = list(self.block_sizes)
        return d


@dataclass(frozen=True)
class TrialRecord:
    trial_id: int
    seed: int
    delta_s: float
    delta_g: float
    gap_direct: tuple[float, ...]
    relative_gap: tuple[float, ...]
    valid: tuple[bool, ...]
    resamples: int = 0
    error: str | None = None


# ---------------------------------------------------------------- generators


def _stream_seed(master_seed: int, *key: int) -> int:
    ss = np.random.SeedSequence(int(master_seed), spawn_key=tuple(key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def trial_seed(master_seed: int, trial_id: int) -> int:
    return _stream_seed(master_seed, 0, trial_id)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def gen_random_network(rng: np.random.Generator, structure: BlockStructure, target_sv: float = 0.75) -> InteractionMatrix:
    """Uniform[0, 1] entries, zero diagonal blocks, rescaled to spectral norm ``target_sv``."""
    if not 0 < target_sv < 1:
        raise ValueError("target_sv must lie in (0, 1)")
    m = structure.m
    data = rng.uniform(0.0, 1.0, size=(m, m))
    for i in range(structure.n):
        s = structure.slice(i)
        data[s, s] = 0.0
    smax = np.linalg.norm(data, 2)
    if smax > 0:
        data *= target_sv / smax
    return InteractionMatrix(structure, data)


def _max_pairwise(rows: np.ndarray) -> float:
    if len(rows) < 2:
        return 0.0
    return max(float(np.linalg.norm(a - b)) for a, b in itertools.combinations(rows, 2))


def gen_shock_profile(rng: np.random.Generator, structure: BlockStructure, delta_s: float) -> list[np.ndarray]:
    """Per-player shocks with largest pairwise 2-norm distance ``delta_s``, shifted by 1.

    Deviations from the profile mean are rescaled; the mean itself is kept.
    """
    n, m = structure.n, structure.m
    if delta_s < 0:
        raise ValueError("delta_s must be non-negative")
    if delta_s > 0 and n < 2:
        raise ValueError("shock misalignment needs at least two players")
    for _ in range(MAX_SHOCK_REDRAWS):
        draws = rng.uniform(0.0, 1.0, size=(n, m))
        mean = draws.mean(axis=0)
        spread = _max_pairwise(draws)
        if spread > 0 or delta_s == 0:
            break
    else:
        raise RuntimeError(f"degenerate shock draws after {MAX_SHOCK_REDRAWS} attempts")
    if delta_s == 0:
        return [mean + 1.0 for _ in range(n)]
    scaled = mean + (draws - mean) * (delta_s / spread)
    return [row + 1.0 for row in scaled]


def gen_alpha_profile(rng: np.random.Generator, n: int, delta_g: float) -> list[float]:
    if not 0 <= delta_g < 2:
        raise ValueError("delta_g must lie in [0, 2)")
    return [float(a) for a in rng.uniform(1.0 - delta_g / 2, 1.0 + delta_g / 2, size=n)]


def _draw_alphas(rng, P: InteractionMatrix, delta_g: float) -> tuple[list[float], int]:
    for tries in range(MAX_ALPHA_RESAMPLES):
        alphas = gen_alpha_profile(rng, P.structure.n, delta_g)
        if all(a * P.lambda_max_sym < 1.0 - 1e-10 for a in alphas):
            return alphas, tries
    raise RuntimeError(f"no monotone scaling profile after {MAX_ALPHA_RESAMPLES} draws")


def fixed_network(config: McConfig) -> InteractionMatrix:
    return gen_random_network(make_rng(_stream_seed(config.master_seed, 1)), config.structure, config.target_sv)


# -------------------------------------------------------------------- trials


def run_trial(config: McConfig, trial_id: int, network: InteractionMatrix | None = None) -> TrialRecord:
    seed = trial_seed(config.master_seed, trial_id)
    rng = make_rng(seed)
    st = config.structure
    n = st.n
    resamples = 0
    try:
        P = network if network is not None else gen_random_network(rng, st, config.target_sv)
        if config.mode == "shock":
            profile = ConjectureProfile.shared(P, gen_shock_profile(rng, st, config.delta_s))
        elif config.mode == "graph":
            eps = 1.0 + rng.uniform(0.0, 1.0, size=st.m)
            alphas, resamples = _draw_alphas(rng, P, config.delta_g)
            profile = ConjectureProfile.scaled(P, alphas, eps)
        else:
            shocks = gen_shock_profile(rng, st, config.delta_s)
            alphas, resamples = _draw_alphas(rng, P, config.delta_g)
            profile = ConjectureProfile.scaled(P, alphas, shocks)
        reports = gaps_direct(profile)
    except Exception as exc:  # recorded per trial, never aborts a batch
        nan = (float("nan"),) * n
        return TrialRecord(
            trial_id, seed, config.delta_s, config.delta_g, nan, nan, (False,) * n, resamples, repr(exc)
        )
    rel, valid = [], []
    for r in reports:
        try:
            rel.append(relative_gap(r))
            valid.append(True)
        except UndefinedRelativeGap:
            rel.append(float("nan"))
            valid.append(False)
    return TrialRecord(
        trial_id,
        seed,
        config.delta_s,
        config.delta_g,
        tuple(r.gap_direct for r in reports),
        tuple(rel),
        tuple(valid),
        resamples,
    )


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("GAPLAB_THREADS", "1")))
    except ValueError:
        return 1


def run_trials(config: McConfig, threads: int | None = None) -> list[TrialRecord]:
    """All trials of one configuration, ordered by ``trial_id``."""
    threads = threads or default_threads()
    network = fixed_network(config) if config.fixed_network else None
    ids = range(config.trials)
    if threads == 1:
        return [run_trial(config, t, network) for t in ids]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(lambda t: run_trial(config, t, network), ids, chunksize=64))


def run_sweep(
    config: McConfig, levels: Sequence[float], param: str = "delta_s", threads: int | None = None
) -> list[TrialRecord]:
    """Repeat ``config`` at each misalignment level; trial streams are shared across levels."""
    if param not in ("delta_s", "delta_g"):
        raise ValueError("param must be delta_s or delta_g")
    out: list[TrialRecord] = []
    for level in levels:
        out.extend(run_trials(replace(config, **{param: float(level)}), threads))
    return out


# -------------------------------------------------------------------- output


def _fmt(x: float) -> str:
    return repr(float(x))


def write_records_csv(records: Iterable[TrialRecord], fp) -> None:
    w = csv.writer(fp, lineterminator="\r\n")
    w.writerow(TRIAL_HEADER)
    for rec in records:
        for p, (g, r, v) in enumerate(zip(rec.gap_direct, rec.relative_gap, rec.valid)):
            w.writerow([rec.trial_id, rec.seed, p, _fmt(rec.delta_s), _fmt(rec.delta_g), _fmt(g), _fmt(r), int(v)])


@dataclass(frozen=True)
class SummaryRow:
    delta_s: float
    delta_g: float
    count: int
    dropped: int
    quantiles: tuple[float, float, float, float, float]
    mean: float
    share_negative: float

    @property
    def iqr(self) -> float:
        return self.quantiles[3] - self.quantiles[1]

    @property
    def median(self) -> float:
        return self.quantiles[2]


@dataclass
class SummaryTable:
    rows: list[SummaryRow] = field(default_factory=list)

    def write_csv(self, fp) -> None:
        w = csv.writer(fp, lineterminator="\r\n")
        w.writerow(SUMMARY_HEADER)
        for r in self.rows:
            w.writerow(
                [_fmt(r.delta_s), _fmt(r.delta_g), r.count, r.dropped, *map(_fmt, r.quantiles), _fmt(r.mean),
                 _fmt(r.share_negative)]
            )


def summarize(records: Sequence[TrialRecord]) -> SummaryTable:
    """Relative-gap quantiles (5/25/50/75/95), mean and share of negative gaps per level."""
    if not records:
        raise ValueError("no records to summarize")
    groups: dict[tuple[float, float], list[TrialRecord]] = {}
    for rec in records:
        groups.setdefault((rec.delta_s, rec.delta_g), []).append(rec)
    table = SummaryTable()
    for (ds, dg), recs in groups.items():
        vals = np.array([r for rec in recs for r, v in zip(rec.relative_gap, rec.valid) if v])
        dropped = sum(not v for rec in recs for v in rec.valid)
        if vals.size:
            q = tuple(float(x) for x in np.quantile(vals, [0.05, 0.25, 0.5, 0.75, 0.95]))
            mean, neg = float(vals.mean()), float(np.mean(vals < 0))
        else:
            q, mean, neg = (float("nan"),) * 5, float("nan"), float("nan")
        table.rows.append(SummaryRow(ds, dg, int(vals.size), dropped, q, mean, neg))
    return table
