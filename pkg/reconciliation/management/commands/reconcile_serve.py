from pathlib import Path

from ._base import (CommandName, ReconciliationCommand, RunConfig, address_argument, channel_argument, defaults,
                    positive_int_argument)
from ...src import main
from ...src.scripts.code_table import read_code_table
from ...src.scripts.transport import DEFAULT_WINDOW, RawKeyFile, SimulatedLink


class Command(ReconciliationCommand):
    help = ("Alice's side of the reconciliation demo: serves one Bob connection and discloses the frozen "
            'values of every raw key block.')
    command_name = CommandName.RECONCILE_SERVE

    def add_arguments(self, parser):
        parser.add_argument('--code-table', type=Path, required=True)
        parser.add_argument('--listen', type=address_argument, default=defaults()['LISTEN_ADDRESS'],
                            help='host:port (default: %(default)s)')
        parser.add_argument('--blocks', type=positive_int_argument, default=10)
        parser.add_argument('--window', type=positive_int_argument, default=DEFAULT_WINDOW,
                            help='Blocks in flight before waiting for verdicts (default: %(default)s)')
        parser.add_argument('--raw-key', type=Path, default=None,
                            help='Replay mode: packed raw key blocks; without it the quantum channel is simulated')
        parser.add_argument('--channel', type=channel_argument, default=None,
                            help="Simulated channel, 'bsc:<p>' or 'biawgn:<snr>' (default: the code's channel)")
        parser.add_argument('--seed', type=int, default=defaults()['DEFAULT_SEED'])
        parser.add_argument('--observations', type=Path, default=None,
                            help="Demo mode: where Bob's simulated observations are written")

    def run(self, **options) -> None:
        code = read_code_table(options['code_table'])
        host, port = options['listen']
        paths = [('code_table', str(options['code_table']))]
        if options['raw_key'] is not None:
            keys = RawKeyFile(options['raw_key'], code.block_size)
            channel = None
            paths.append(('raw_key', str(options['raw_key'])))
        else:
            channel = options['channel'] or code.metadata.channel
            observations = options['observations'] or Path(defaults()['OUTPUT_DIR']) / 'observations.bin'
            paths.append(('observations', str(observations)))
            keys = SimulatedLink(channel, code.block_size, options['seed'])
            keys.export(options['blocks'], observations)
        self.echo(RunConfig(command=self.command_name, channel=None if channel is None else str(channel), n=code.n,
                            target_fer=code.metadata.target_fer,
                            seed=None if channel is None else options['seed'], paths=tuple(paths),
                            address=f'{host}:{port}',
                            extra=(('blocks', str(options['blocks'])), ('window', str(options['window'])))))

        report = main.serve(code, keys, options['blocks'], (host, port), options['window'])
        for session in report.sessions:
            self.stdout.write(f'block {session.block_id}: {session.outcome}, leakage {session.leakage_bits} bits')
        self.stdout.write(f'verified: {report.verified}')
        self.stdout.write(f'discarded: {report.discarded}')
        self.stdout.write(f'wire_bits: {report.wire_bits}')
        self.stdout.write(f'wire_bytes: {report.wire_bytes}')
