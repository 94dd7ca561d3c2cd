from ._base import CommandName, ReconciliationCommand, RunConfig, channel_argument, unit_argument
from ...src.scripts.channel import BiAwgn, gaussian_mutual_information
from ...src.scripts.key_rate import KeyRateParams, key_rate


class Command(ReconciliationCommand):
    help = 'Secret key rates K_th, K_real, K_sys and K = alpha (1 - FER) (beta I - S) in bits per symbol.'
    command_name = CommandName.KEYRATE

    def add_arguments(self, parser):
        parser.add_argument('--alpha', type=unit_argument, default=1.0,
                            help='Throughput ratio D_ECCout / D_ECCin (default: %(default)s)')
        parser.add_argument('--beta', type=unit_argument, required=True, help='Reconciliation efficiency')
        information = parser.add_mutually_exclusive_group(required=True)
        information.add_argument('--mutual-info', type=float, help='I(x:y) in bits per symbol')
        information.add_argument('--snr', type=float, help='Gaussian-modulation SNR, I = 0.5 log2(1 + snr)')
        information.add_argument('--channel', type=channel_argument,
                                 help="Channel whose reference rate is I, 'bsc:<p>' or 'biawgn:<snr>'")
        parser.add_argument('--holevo', type=float, default=0.0, help='S(x:E) in bits per symbol (default: 0)')
        parser.add_argument('--fer', type=unit_argument, default=0.0, help='Frame error rate (default: 0)')

    def run(self, **options) -> None:
        if options['mutual_info'] is not None:
            source, mutual_info = f'mutual_info={options["mutual_info"]:g}', options['mutual_info']
        elif options['snr'] is not None:
            source, mutual_info = f'snr={options["snr"]:g}', gaussian_mutual_information(options['snr'])
        else:
            channel = options['channel']
            source = f'channel={channel}'
            if isinstance(channel, BiAwgn):
                mutual_info = gaussian_mutual_information(channel.snr)
            else:
                mutual_info = channel.capacity()
        params = KeyRateParams(beta=options['beta'], mutual_info=mutual_info, holevo=options['holevo'],
                               alpha=options['alpha'], fer=options['fer'])
        self.echo(RunConfig(command=self.command_name,
                            extra=(('alpha', f'{params.alpha:g}'), ('beta', f'{params.beta:g}'),
                                   tuple(source.split('=', 1)), ('holevo', f'{params.holevo:g}'),
                                   ('fer', f'{params.fer:g}'))))

        rate = key_rate(params)
        self.stdout.write(f'I: {mutual_info:.8f}')
        self.stdout.write(f'K_th: {rate.theoretical:.8f}')
        self.stdout.write(f'K_real: {rate.real:.8f}')
        self.stdout.write(f'K_sys: {rate.system:.8f}')
        self.stdout.write(f'K: {rate.final:.8f}')
        if rate.no_secret_key:
            self.stdout.write('no secret key')
