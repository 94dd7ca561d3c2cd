from pathlib import Path

from ._base import (CommandName, ReconciliationCommand, RunConfig, add_representation_argument, address_argument,
                    channel_argument, defaults)
from ...src import main
from ...src.scripts.code_table import read_code_table
from ...src.scripts.polar_core import Representation
from ...src.scripts.transport import ObservationFile


class Command(ReconciliationCommand):
    help = "Bob's side of the reconciliation demo: decodes every disclosed block and returns its verdict."
    command_name = CommandName.RECONCILE_CONNECT

    def add_arguments(self, parser):
        parser.add_argument('--code-table', type=Path, required=True)
        parser.add_argument('--connect', type=address_argument, default=defaults()['LISTEN_ADDRESS'],
                            help='host:port of Alice (default: %(default)s)')
        parser.add_argument('--observations', type=Path, required=True,
                            help='Observation file: packed bits (BSC) or little-endian f64 (BIAWGN) per block')
        parser.add_argument('--channel', type=channel_argument, default=None,
                            help="Channel of the observations (default: the code's channel)")
        add_representation_argument(parser)

    def run(self, **options) -> None:
        code = read_code_table(options['code_table'])
        channel = options['channel'] or code.metadata.channel
        representation = Representation(options['representation'])
        host, port = options['connect']
        self.echo(RunConfig(command=self.command_name, channel=str(channel), n=code.n,
                            target_fer=code.metadata.target_fer,
                            paths=(('code_table', str(options['code_table'])),
                                   ('observations', str(options['observations']))),
                            address=f'{host}:{port}', representation=str(representation)))

        observations = ObservationFile(options['observations'], channel, code.block_size)
        report = main.connect(code, channel, observations, (host, port), representation)
        for session in report.sessions:
            self.stdout.write(f'block {session.block_id}: {session.outcome}, leakage {session.leakage_bits} bits')
        self.stdout.write(f'verified: {report.verified}')
        self.stdout.write(f'discarded: {report.discarded}')
        self.stdout.write(f'wire_bits: {report.wire_bits}')
        self.stdout.write(f'wire_bytes: {report.wire_bytes}')
