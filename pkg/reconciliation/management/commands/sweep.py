from pathlib import Path

from django.core.management.base import CommandError

from ._base import (ACCEPTANCE_FAILURE, USAGE_ERROR, CommandName, ReconciliationCommand, RunConfig,
                    add_representation_argument, channel_argument, defaults, exponent_argument, fer_argument,
                    positive_int_argument)
from ...src import main
from ...src.scripts import bench
from ...src.scripts.construction import Quantization
from ...src.scripts.polar_core import Representation


class Command(ReconciliationCommand):
    help = ('Sweeps code efficiency over channels and block sizes; presets and manifests carry acceptance '
            'thresholds, and a failed threshold exits with status 3.')
    command_name = CommandName.SWEEP

    def add_arguments(self, parser):
        source = parser.add_mutually_exclusive_group(required=True)
        source.add_argument('--preset', choices=sorted(bench.PRESETS), help='Built-in sweep with its checks')
        source.add_argument('--manifest', type=Path, help='JSON acceptance manifest')
        source.add_argument('--channels', type=channel_argument, nargs='+',
                            help="Channels of a plain sweep, 'bsc:<p>' or 'biawgn:<snr>'")
        parser.add_argument('--ns', type=exponent_argument, nargs='+', default=None,
                            help='Ascending log2 block sizes of a plain sweep')
        parser.add_argument('--target-fer', type=fer_argument, default=defaults()['TARGET_FER'])
        parser.add_argument('--trials', type=int, default=0,
                            help='Monte-Carlo blocks per point of a plain sweep, 0 for construction only')
        parser.add_argument('--seed', type=int, default=defaults()['DEFAULT_SEED'])
        parser.add_argument('--bins', type=positive_int_argument, default=defaults()['DE_BINS'])
        parser.add_argument('--llr-max', type=float, default=defaults()['DE_LLR_MAX'])
        add_representation_argument(parser)
        parser.add_argument('--output', type=Path, default=None, help='CSV report path')
        parser.add_argument('--no-timings', action='store_true',
                            help='Leave the timing columns out of the CSV so that replays are byte-identical')

    def run(self, **options) -> None:
        quantization = Quantization(bins=options['bins'], llr_max=options['llr_max'])
        representation = Representation(options['representation'])
        seed = options['seed']
        plan = None
        if options['preset'] is not None:
            plan = bench.PRESETS[options['preset']]
        elif options['manifest'] is not None:
            plan = bench.load_manifest(options['manifest'])
        elif options['ns'] is None:
            raise CommandError('--channels needs --ns', returncode=USAGE_ERROR)
        if options['trials'] < 0:
            raise CommandError('--trials must be >= 0', returncode=USAGE_ERROR)
        name = plan.name if plan is not None else 'sweep'
        output = options['output'] or Path(defaults()['OUTPUT_DIR']) / f'{name}.csv'
        extra = [('plan', name), ('bins', str(quantization.bins)), ('llr_max', f'{quantization.llr_max:g}')]
        if plan is None:
            extra += [('channels', ','.join(str(channel) for channel in options['channels'])),
                      ('ns', ','.join(str(n) for n in options['ns'])), ('trials', str(options['trials']))]
        target_fer = plan.target_fer if plan is not None else options['target_fer']
        self.echo(RunConfig(command=self.command_name, target_fer=target_fer, seed=seed,
                            paths=(('output', str(output)),), representation=str(representation), extra=tuple(extra)))

        acceptance = None
        if plan is None:
            report = main.run_sweep(options['channels'], options['ns'], target_fer, quantization,
                                    options['trials'], seed, representation)
        else:
            report, acceptance = main.run_acceptance(plan, quantization, seed, representation)
        output.parent.mkdir(parents=True, exist_ok=True)
        bench.emit_csv(report, output, timings=not options['no_timings'])
        for row in report.rows:
            line = f'{row.channel} n={row.n}: beta {row.beta:.4f}'
            if row.fer_measured is not None:
                line += f', FER {row.fer_measured:.4f} ({row.trials} trials)'
            self.stdout.write(line)
        self.stdout.write(f'report: {output}')
        if acceptance is None:
            return
        for miss in acceptance.misses:
            self.stdout.write(f'miss: {miss}')
        if not acceptance.passed:
            raise CommandError(f'{len(acceptance.failures)} acceptance check(s) of {acceptance.plan} failed',
                               returncode=ACCEPTANCE_FAILURE)
        self.stdout.write(f'acceptance {acceptance.plan}: passed')
