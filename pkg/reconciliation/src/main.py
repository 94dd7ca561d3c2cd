"""
Main script. These functions are called by the management commands to build
code tables, run benches and sweeps, and run both ends of the reconciliation demo.
"""
from __future__ import annotations

import asyncio
import logging
from pathlib import Path

import numpy as np

from .scripts import bench, code_table, construction, transport
from .scripts.channel import ChannelModel
from .scripts.construction import ConstructionMethod, ConstructionResult, PolarCode, Quantization
from .scripts.polar_core import Representation

logger = logging.getLogger(__name__)

CODE_TABLE_SUFFIX: str = '.pqct'


def code_table_name(channel: ChannelModel, n: int, target_fer: float, method: ConstructionMethod) -> str:
    """File name of a code table, e.g. 'bsc_0.02_n16_fer0.1_de.pqct'."""
    return f'{channel.kind}_{channel.parameter:g}_n{n}_fer{target_fer:g}_{method}{CODE_TABLE_SUFFIX}'


def build_code(channel: ChannelModel, n: int, target_fer: float, quantization: Quantization,
               method: ConstructionMethod, output: Path, pe_output: Path | None = None
               ) -> tuple[PolarCode, ConstructionResult, int]:
    """Constructs a code, writes its table (and optionally the per-bit error probabilities)."""
    code, result = construction.construct(channel, n, target_fer, quantization, method)
    checksum = code_table.write_code_table(code, output)
    logger.info('Code table written to %s (checksum %016x)', output, checksum)
    if pe_output is not None:
        Path(pe_output).parent.mkdir(parents=True, exist_ok=True)
        np.save(pe_output, result.pe)
    return code, result, checksum


def run_bench(code: PolarCode, channel: ChannelModel, trials: int, seed: int, representation: Representation,
              workers: int = 1, result: ConstructionResult | None = None) -> bench.BenchReport:
    """Headline single-worker row, plus a multi-worker aggregate row when workers > 1."""
    rows = [bench.run_trials(code, channel, trials, seed, representation, 1, result)]
    if workers > 1:
        rows.append(bench.run_trials(code, channel, trials, seed, representation, workers, result))
    return bench.BenchReport(tuple(rows))


def serve(code: PolarCode, keys: transport.KeySource, blocks: int, address: tuple[str, int],
          window: int = transport.DEFAULT_WINDOW) -> transport.TransportReport:
    server = transport.AliceServer(code, keys, blocks, window)
    return asyncio.run(server.serve(*address))


def connect(code: PolarCode, channel: ChannelModel, observations: transport.ObservationSource,
            address: tuple[str, int], representation: Representation) -> transport.TransportReport:
    client = transport.BobClient(code, channel, observations, representation)
    return asyncio.run(client.run(*address))


def run_sweep(channels: list[ChannelModel], ns: list[int], target_fer: float, quantization: Quantization,
              trials: int, seed: int, representation: Representation) -> bench.BenchReport:
    return bench.sweep_efficiency(channels, ns, target_fer, quantization, trials=trials, seed=seed,
                                  representation=representation)


def run_acceptance(plan: bench.SweepPlan, quantization: Quantization, seed: int, representation: Representation
                   ) -> tuple[bench.BenchReport, bench.AcceptanceReport]:
    logger.info('Running sweep plan %s', plan.name)
    return bench.run_plan(plan, quantization, seed, representation)
