"""
Monte-Carlo measurement of frame error rate, efficiency and decoding throughput,
efficiency sweeps over block sizes, and acceptance checks on their results.

Throughput is in Mb/s of raw key: 10^6 block bits per second of decoding time,
channel sampling and construction excluded. Headline rows use one worker; rows
with workers > 1 time the whole parallel phase instead and are labelled so.
"""
from __future__ import annotations

import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import pandas as pd

from .channel import LLR_SATURATION, ChannelModel, block_rng, parse_channel
from .code_table import code_checksum
from .construction import (ConstructionMethod, ConstructionResult, PolarCode, Quantization, construct, efficiency,
                           fer_upper_bound)
from .errors import EmptyReportError
from .polar_core import Representation
from .reconcile import Outcome, Reconciler, alice_disclose

logger = logging.getLogger(__name__)

# (largest n, trials) pairs, first match wins.
TRIAL_POLICY: tuple[tuple[int, int], ...] = ((20, 500), (24, 100), (27, 30))


@dataclass(frozen=True)
class BenchRow:
    channel: str
    n: int
    beta: float
    beta_alt: float | None
    fer_bound: float | None
    fer_measured: float | None
    trials: int
    decode_throughput: float | None
    wall_time: float
    seed: int
    representation: str
    workers: int
    code_checksum: str


COLUMNS: tuple[str, ...] = tuple(column.name for column in fields(BenchRow))
TIMING_COLUMNS: tuple[str, ...] = ('decode_throughput', 'wall_time')


@dataclass(frozen=True)
class BenchReport:
    rows: tuple[BenchRow, ...] = ()

    def __len__(self) -> int:
        return len(self.rows)

    def __add__(self, other: BenchReport) -> BenchReport:
        return BenchReport(self.rows + other.rows)

    def find(self, channel: str, n: int) -> BenchRow | None:
        return next((row for row in self.rows if row.channel == channel and row.n == n), None)

    def to_frame(self, timings: bool = True) -> pd.DataFrame:
        frame = pd.DataFrame([asdict(row) for row in self.rows], columns=list(COLUMNS))
        if not timings:
            frame = frame.drop(columns=list(TIMING_COLUMNS))
        return frame


def default_trials(n: int, policy: Sequence[tuple[int, int]] = TRIAL_POLICY) -> int:
    for largest_n, trials in policy:
        if n <= largest_n:
            return trials
    return policy[-1][1]


def _run_trial_range(reconciler: Reconciler, channel: ChannelModel, seed: int, indices: Iterable[int]
                     ) -> tuple[int, int, float]:
    """Returns discarded count, undetected mismatches and summed decode time."""
    code = reconciler.code
    discarded = undetected = 0
    decode_seconds = 0.0
    for trial in indices:
        rng = block_rng(seed, trial)
        x = rng.integers(0, 2, code.block_size, dtype=np.uint8)
        observations = channel.transmit(x, rng)
        result = reconciler.reconcile(observations, alice_disclose(code, x, trial))
        decode_seconds += result.decode_seconds
        if result.outcome is Outcome.DISCARDED:
            discarded += 1
        elif not np.array_equal(result.x_hat, x):
            undetected += 1
    return discarded, undetected, decode_seconds


def _warm_up(reconciler: Reconciler) -> None:
    code = reconciler.code
    reconciler.decoder.decode(np.full(code.block_size, LLR_SATURATION),
                              np.zeros(code.frozen_count, dtype=np.uint8))


def run_trials(code: PolarCode, channel: ChannelModel, trials: int, seed: int,
               representation: Representation = Representation.FIXED_POINT, workers: int = 1,
               result: ConstructionResult | None = None) -> BenchRow:
    """
    Monte-Carlo reconciliation of `trials` random blocks; trial t uses the RNG stream (seed, t).
    :param code: polar code
    :param channel: channel the blocks go through, same family as the code
    :param trials: number of blocks, >= 1
    :param seed: run seed
    :param representation: decoder arithmetic
    :param workers: threads, each with its own decoder
    :param result: construction result, fills the fer_bound column when given
    :return: one report row
    """
    if trials < 1:
        raise ValueError(f'At least one trial is needed, {trials} was provided')
    if workers < 1:
        raise ValueError(f'At least one worker is needed, {workers} was provided')
    rating = efficiency(code, channel)
    start = time.perf_counter()
    if workers == 1:
        reconciler = Reconciler(code, channel, representation)
        _warm_up(reconciler)
        discarded, undetected, timed = _run_trial_range(reconciler, channel, seed, range(trials))
    else:
        reconcilers = [Reconciler(code, channel, representation) for _ in range(workers)]
        for reconciler in reconcilers:
            _warm_up(reconciler)
        parallel_start = time.perf_counter()
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(
                lambda worker: _run_trial_range(reconcilers[worker], channel, seed, range(worker, trials, workers)),
                range(workers),
            ))
        timed = time.perf_counter() - parallel_start
        discarded = sum(outcome[0] for outcome in outcomes)
        undetected = sum(outcome[1] for outcome in outcomes)
    if undetected:
        logger.warning('%d verified blocks differ from the raw key (hash collision)', undetected)
    row = BenchRow(
        channel=str(channel),
        n=code.n,
        beta=rating.beta,
        beta_alt=rating.beta_alt,
        fer_bound=None if result is None else fer_upper_bound(code, result),
        fer_measured=discarded / trials,
        trials=trials,
        decode_throughput=trials * code.block_size / max(timed, 1e-9) / 1e6,
        wall_time=time.perf_counter() - start,
        seed=seed,
        representation=str(representation),
        workers=workers,
        code_checksum=f'{code_checksum(code):016x}',
    )
    logger.info('%s n=%d: FER %.4f over %d trials, %.2f Mb/s (%s, %d worker(s))', row.channel, row.n,
                row.fer_measured, trials, row.decode_throughput, representation, workers)
    return row


def sweep_point(channel: ChannelModel, n: int, target_fer: float, quantization: Quantization = Quantization(),
                method: ConstructionMethod = ConstructionMethod.DENSITY_EVOLUTION, trials: int = 0, seed: int = 0,
                representation: Representation = Representation.FIXED_POINT, workers: int = 1) -> BenchRow:
    """Constructs one code and rates it; trials = 0 skips the Monte-Carlo part."""
    start = time.perf_counter()
    code, result = construct(channel, n, target_fer, quantization, method)
    if trials:
        row = run_trials(code, channel, trials, seed, representation, workers, result)
        return replace(row, wall_time=time.perf_counter() - start)
    rating = efficiency(code, channel)
    return BenchRow(channel=str(channel), n=n, beta=rating.beta, beta_alt=rating.beta_alt,
                    fer_bound=fer_upper_bound(code, result), fer_measured=None, trials=0, decode_throughput=None,
                    wall_time=time.perf_counter() - start, seed=seed, representation=str(representation),
                    workers=workers, code_checksum=f'{code_checksum(code):016x}')


def sweep_efficiency(channels: Sequence[ChannelModel], ns: Sequence[int], target_fer: float,
                     quantization: Quantization = Quantization(),
                     method: ConstructionMethod = ConstructionMethod.DENSITY_EVOLUTION, trials: int = 0,
                     seed: int = 0, representation: Representation = Representation.FIXED_POINT) -> BenchReport:
    """Efficiency of one code per (channel, n); ns must be strictly ascending."""
    if list(ns) != sorted(set(ns)):
        raise ValueError(f'Block-size exponents must be strictly ascending, {list(ns)} was provided')
    rows = []
    for channel in channels:
        for n in ns:
            row = sweep_point(channel, n, target_fer, quantization, method, trials, seed, representation)
            logger.info('%s n=%d: beta %.4f', row.channel, n, row.beta)
            rows.append(row)
    return BenchReport(tuple(rows))


def emit_csv(report: BenchReport, path: Path, timings: bool = True) -> None:
    """
    Writes the report as CSV, columns in BenchRow order. Without timings the file
    only depends on the run configuration, so replays are byte-identical.
    """
    if not report.rows:
        raise EmptyReportError('Cannot write an empty bench report')
    report.to_frame(timings).to_csv(path, index=False, lineterminator='\n')


@dataclass(frozen=True)
class Expectation:
    """Acceptance interval(s) for one (channel, n) point; trials > 0 asks for Monte Carlo."""
    channel: str
    n: int
    beta: tuple[float, float] | None = None
    fer: tuple[float, float] | None = None
    trials: int = 0


@dataclass(frozen=True)
class ThroughputCheck:
    """Decoder throughput at n_low may exceed the one at n_high by at most max_ratio."""
    channel: str
    n_low: int
    n_high: int
    max_ratio: float


@dataclass(frozen=True)
class SweepPlan:
    """
    Grid of (channel, ascending n list) groups and the checks of the run.
    allowed_misses interval checks may fail; monotone requires beta strictly
    increasing in n for every channel; throughput bounds the slowdown between two
    block sizes that both ran Monte Carlo trials.
    """
    name: str
    grid: tuple[tuple[str, tuple[int, ...]], ...]
    target_fer: float = 0.1
    expectations: tuple[Expectation, ...] = ()
    allowed_misses: int = 0
    monotone: bool = False
    throughput: ThroughputCheck | None = None

    def expectation(self, channel: str, n: int) -> Expectation | None:
        return next((item for item in self.expectations if item.channel == channel and item.n == n), None)


@dataclass(frozen=True)
class AcceptanceReport:
    plan: str
    checked: int
    misses: tuple[str, ...]
    failures: tuple[str, ...]

    @property
    def passed(self) -> bool:
        return not self.failures


def _interval(value: float | None, bounds: tuple[float, float]) -> bool:
    return value is not None and bounds[0] <= value <= bounds[1]


def evaluate(plan: SweepPlan, report: BenchReport) -> AcceptanceReport:
    misses: list[str] = []
    failures: list[str] = []
    for item in plan.expectations:
        row = report.find(item.channel, item.n)
        if row is None:
            failures.append(f'{item.channel} n={item.n}: no result')
            continue
        if item.beta is not None and not _interval(row.beta, item.beta):
            misses.append(f'{item.channel} n={item.n}: beta {row.beta:.4f} outside [{item.beta[0]}, {item.beta[1]}]')
        if item.fer is not None and not _interval(row.fer_measured, item.fer):
            misses.append(f'{item.channel} n={item.n}: FER {row.fer_measured} outside [{item.fer[0]}, {item.fer[1]}]')
    if len(misses) > plan.allowed_misses:
        failures.extend(misses)
    if plan.monotone:
        for channel, _ in plan.grid:
            betas = [(row.n, row.beta) for row in report.rows if row.channel == channel]
            betas.sort()
            for (n_low, low), (n_high, high) in zip(betas, betas[1:]):
                if not high > low:
                    failures.append(f'{channel}: beta does not grow from n={n_low} ({low:.4f}) to n={n_high} ({high:.4f})')
    if plan.throughput is not None:
        failures.extend(_check_throughput(plan.throughput, report))
    outcome = AcceptanceReport(plan=plan.name, checked=len(plan.expectations), misses=tuple(misses),
                               failures=tuple(failures))
    for failure in outcome.failures:
        logger.warning('Acceptance %s: %s', plan.name, failure)
    return outcome


def _check_throughput(check: ThroughputCheck, report: BenchReport) -> list[str]:
    low = report.find(check.channel, check.n_low)
    high = report.find(check.channel, check.n_high)
    if low is None or high is None or low.decode_throughput is None or high.decode_throughput is None:
        return [f'{check.channel}: no throughput measured at n={check.n_low} and n={check.n_high}']
    ratio = low.decode_throughput / high.decode_throughput
    if ratio > check.max_ratio:
        return [f'{check.channel}: throughput drops {ratio:.2f}x from n={check.n_low} to n={check.n_high} '
                f'(at most {check.max_ratio}x)']
    return []


def run_plan(plan: SweepPlan, quantization: Quantization = Quantization(), seed: int = 0,
             representation: Representation = Representation.FIXED_POINT, workers: int = 1
             ) -> tuple[BenchReport, AcceptanceReport]:
    """Runs every grid point (with the Monte-Carlo trials its expectation asks for) and checks the plan."""
    rows = []
    for channel_spec, ns in plan.grid:
        channel = parse_channel(channel_spec)
        if list(ns) != sorted(set(ns)):
            raise ValueError(f'{plan.name}: block-size exponents of {channel_spec} are not strictly ascending')
        for n in ns:
            item = plan.expectation(channel_spec, n)
            trials = item.trials if item is not None else 0
            rows.append(sweep_point(channel, n, plan.target_fer, quantization, trials=trials, seed=seed,
                                    representation=representation, workers=workers))
    report = BenchReport(tuple(rows))
    return report, evaluate(plan, report)


def _bsc(p: float) -> str:
    return str(parse_channel(f'bsc:{p}'))


def _bsc_sweep() -> SweepPlan:
    channels = [_bsc(round(0.01 * k, 2)) for k in range(1, 12)]
    return SweepPlan(
        name='bsc-sweep',
        grid=tuple((channel, (16, 18, 20, 22, 24)) for channel in channels),
        expectations=tuple(Expectation(channel, 24, beta=(0.95, 1.0)) for channel in channels),
        allowed_misses=1,
        monotone=True,
    )


def _biawgn_sweep() -> SweepPlan:
    return SweepPlan(
        name='biawgn-sweep',
        grid=tuple((f'biawgn:{snr}', (17, 19, 21, 23, 25, 27)) for snr in (1.097, 0.161, 0.075, 0.029)),
        monotone=True,
    )


def _biawgn_ci() -> SweepPlan:
    return SweepPlan(name='biawgn-ci', grid=(('biawgn:0.161', (17, 19, 21)),), monotone=True)


def _headline() -> SweepPlan:
    # The 2^27 BIAWGN row (snr 0.161, beta 0.928) is left to one-shot runs.
    return SweepPlan(
        name='headline',
        grid=(('bsc:0.02', (16, 20, 24)), ('biawgn:1.097', (24,))),
        expectations=(
            Expectation('bsc:0.02', 16, beta=(0.925, 0.945), fer=(0.05, 0.14), trials=500),
            Expectation('bsc:0.02', 20, beta=(0.953, 0.973), fer=(0.05, 0.19), trials=200),
            Expectation('bsc:0.02', 24, beta=(0.970, 0.990), trials=100),
            Expectation('biawgn:1.097', 24, beta=(0.937, 0.967)),
        ),
        throughput=ThroughputCheck('bsc:0.02', 16, 24, 1.6),
    )


PRESETS = {plan.name: plan for plan in (_bsc_sweep(), _biawgn_sweep(), _biawgn_ci(), _headline())}


def load_manifest(path: Path) -> SweepPlan:
    """
    Reads an acceptance manifest:
        {"name": str, "target_fer": float, "allowed_misses": int, "monotone": bool,
         "grid": [{"channel": "bsc:0.02", "n": [16, 20]}, ...],
         "expectations": [{"channel": ..., "n": ..., "beta": [lo, hi], "fer": [lo, hi], "trials": int}, ...],
         "throughput": {"channel": ..., "n_low": int, "n_high": int, "max_ratio": float}}
    Only "grid" is required.
    Raises a ValueError if the file is not a valid manifest.
    """
    path = Path(path)
    try:
        document = json.loads(path.read_text())
        grid = tuple((str(parse_channel(group['channel'])), tuple(int(n) for n in group['n']))
                     for group in document['grid'])
        expectations = tuple(
            Expectation(
                channel=str(parse_channel(item['channel'])),
                n=int(item['n']),
                beta=_bounds(item.get('beta')),
                fer=_bounds(item.get('fer')),
                trials=int(item.get('trials', 0)),
            )
            for item in document.get('expectations', ())
        )
        throughput = document.get('throughput')
        if throughput is not None:
            throughput = ThroughputCheck(channel=str(parse_channel(throughput['channel'])),
                                         n_low=int(throughput['n_low']), n_high=int(throughput['n_high']),
                                         max_ratio=float(throughput['max_ratio']))
        return SweepPlan(name=str(document.get('name', path.stem)), grid=grid,
                         target_fer=float(document.get('target_fer', 0.1)), expectations=expectations,
                         allowed_misses=int(document.get('allowed_misses', 0)),
                         monotone=bool(document.get('monotone', False)),
                         throughput=throughput)
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise ValueError(f'{path} is not a valid acceptance manifest: {exc}') from exc


def _bounds(value: Sequence[float] | None) -> tuple[float, float] | None:
    if value is None:
        return None
    low, high = (float(bound) for bound in value)
    if not (math.isfinite(low) and math.isfinite(high) and low <= high):
        raise ValueError(f'Invalid interval {list(value)}')
    return low, high
