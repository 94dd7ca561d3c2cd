from pathlib import Path

from django.core.management.base import CommandError

from ._base import (USAGE_ERROR, CommandName, ReconciliationCommand, RunConfig, add_representation_argument,
                    channel_argument, defaults, exponent_argument, fer_argument, positive_int_argument)
from ...src import main
from ...src.scripts import bench
from ...src.scripts.code_table import read_code_table
from ...src.scripts.construction import ConstructionMethod, Quantization
from ...src.scripts.polar_core import Representation


class Command(ReconciliationCommand):
    help = 'Measures FER, efficiency and decoding throughput of a polar code by Monte Carlo.'
    command_name = CommandName.BENCH

    def add_arguments(self, parser):
        parser.add_argument('--code-table', type=Path, default=None,
                            help='Code table to bench; without it a code is constructed from --channel and --n')
        parser.add_argument('--channel', type=channel_argument, default=None,
                            help="Channel, 'bsc:<p>' or 'biawgn:<snr>' (default: the code's channel)")
        parser.add_argument('--n', type=exponent_argument, default=None, help='log2 of the block size')
        parser.add_argument('--target-fer', type=fer_argument, default=defaults()['TARGET_FER'])
        parser.add_argument('--trials', type=positive_int_argument, default=None,
                            help='Monte-Carlo blocks (default: the trial-count policy for n)')
        parser.add_argument('--seed', type=int, default=defaults()['DEFAULT_SEED'])
        parser.add_argument('--workers', type=positive_int_argument, default=1,
                            help='Adds a multi-worker aggregate row when > 1')
        add_representation_argument(parser)
        parser.add_argument('--output', type=Path, default=None, help='CSV report path')
        parser.add_argument('--no-timings', action='store_true',
                            help='Leave the timing columns out of the CSV so that replays are byte-identical')

    def run(self, **options) -> None:
        representation = Representation(options['representation'])
        seed = options['seed']
        result = None
        if options['code_table'] is not None:
            code = read_code_table(options['code_table'])
            channel = options['channel'] or code.metadata.channel
        elif options['channel'] is not None and options['n'] is not None:
            channel = options['channel']
            quantization = Quantization(bins=defaults()['DE_BINS'], llr_max=defaults()['DE_LLR_MAX'])
            method = ConstructionMethod.DENSITY_EVOLUTION
            path = Path(defaults()['CODE_TABLE_DIR']) / main.code_table_name(
                channel, options['n'], options['target_fer'], method)
            code, result, _ = main.build_code(channel, options['n'], options['target_fer'], quantization, method, path)
        else:
            raise CommandError('Either --code-table or both --channel and --n are required', returncode=USAGE_ERROR)
        trials = options['trials'] or bench.default_trials(code.n, defaults()['TRIALS'])
        output = options['output'] or Path(defaults()['OUTPUT_DIR']) / f'bench_{channel.kind}_{channel.parameter:g}_n{code.n}.csv'
        self.echo(RunConfig(command=self.command_name, channel=str(channel), n=code.n,
                            target_fer=code.metadata.target_fer, seed=seed, paths=(('output', str(output)),),
                            representation=str(representation),
                            extra=(('trials', str(trials)), ('workers', str(options['workers'])))))

        report = main.run_bench(code, channel, trials, seed, representation, options['workers'], result)
        output.parent.mkdir(parents=True, exist_ok=True)
        bench.emit_csv(report, output, timings=not options['no_timings'])
        for row in report.rows:
            line = (f'{row.channel} n={row.n} workers={row.workers}: beta {row.beta:.4f}, '
                    f'FER {row.fer_measured:.4f} ({row.trials} trials)')
            if not options['no_timings']:
                line += f', {row.decode_throughput:.2f} Mb/s'
            self.stdout.write(line)
        self.stdout.write(f'report: {output}')
