from pathlib import Path

from ._base import (CommandName, ReconciliationCommand, RunConfig, channel_argument, defaults, exponent_argument,
                    fer_argument, positive_int_argument)
from ...src import main
from ...src.scripts.construction import ConstructionMethod, Quantization, efficiency, fer_upper_bound


class Command(ReconciliationCommand):
    help = 'Constructs a polar code for a channel and writes its code table.'
    command_name = CommandName.CONSTRUCT

    def add_arguments(self, parser):
        parser.add_argument('--channel', type=channel_argument, required=True,
                            help="Channel, 'bsc:<p>' or 'biawgn:<snr>'")
        parser.add_argument('--n', type=exponent_argument, required=True, help='log2 of the block size')
        parser.add_argument('--target-fer', type=fer_argument, default=defaults()['TARGET_FER'],
                            help='Union bound on the frame error rate (default: %(default)s)')
        parser.add_argument('--method', choices=[str(item) for item in ConstructionMethod],
                            default=str(ConstructionMethod.DENSITY_EVOLUTION),
                            help="'de' density evolution, 'ga' Gaussian approximation (BIAWGN only)")
        parser.add_argument('--bins', type=positive_int_argument, default=defaults()['DE_BINS'],
                            help='Density-evolution bins over [-llr_max, llr_max] (default: %(default)s)')
        parser.add_argument('--llr-max', type=float, default=defaults()['DE_LLR_MAX'],
                            help='Density-evolution LLR range (default: %(default)s)')
        parser.add_argument('--output', type=Path, default=None,
                            help='Code-table file (default: a name derived from the configuration in CODE_TABLE_DIR)')
        parser.add_argument('--pe-output', type=Path, default=None,
                            help='Also save the per-bit error probabilities as a .npy file')

    def run(self, **options) -> None:
        channel, n, target_fer = options['channel'], options['n'], options['target_fer']
        method = ConstructionMethod(options['method'])
        quantization = Quantization(bins=options['bins'], llr_max=options['llr_max'])
        output = options['output'] or Path(defaults()['CODE_TABLE_DIR']) / main.code_table_name(
            channel, n, target_fer, method)
        paths = [('output', str(output))]
        if options['pe_output'] is not None:
            paths.append(('pe_output', str(options['pe_output'])))
        self.echo(RunConfig(command=self.command_name, channel=str(channel), n=n, target_fer=target_fer,
                            paths=tuple(paths),
                            extra=(('method', str(method)), ('bins', str(quantization.bins)),
                                   ('llr_max', f'{quantization.llr_max:g}'))))

        code, result, checksum = main.build_code(channel, n, target_fer, quantization, method, output,
                                                 options['pe_output'])
        rating = efficiency(code, channel)
        self.stdout.write(f'beta: {rating.beta:.6f}')
        if rating.beta_alt is not None:
            self.stdout.write(f'beta_alt: {rating.beta_alt:.6f}')
        self.stdout.write(f'rate: {code.rate:.6f}')
        self.stdout.write(f'frozen: {code.frozen_count}')
        self.stdout.write(f'fer_upper_bound: {fer_upper_bound(code, result):.6g}')
        self.stdout.write(f'checksum: {checksum:016x}')
        self.stdout.write(f'code_table: {output}')
