"""
Shared plumbing of the reconciliation commands: argument types, the echoed run
configuration and the mapping of failures to exit codes.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, fields
from enum import Enum

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError
from django.utils import timezone

from ...src.scripts.channel import parse_channel
from ...src.scripts.construction import MAX_N
from ...src.scripts.errors import ChannelParameterError, ReconciliationError
from ...src.scripts.polar_core import Representation
from ...src.scripts.transport import parse_address

USAGE_ERROR: int = 1
RUNTIME_ERROR: int = 2
ACCEPTANCE_FAILURE: int = 3


class CommandName(Enum):
    CONSTRUCT = 'construct'
    BENCH = 'bench'
    SWEEP = 'sweep'
    RECONCILE_SERVE = 'reconcile-serve'
    RECONCILE_CONNECT = 'reconcile-connect'
    KEYRATE = 'keyrate'

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class RunConfig:
    """Everything a run depends on; echoed as one 'config:' line by every command."""
    command: CommandName
    channel: str | None = None
    n: int | None = None
    target_fer: float | None = None
    seed: int | None = None
    paths: tuple[tuple[str, str], ...] = ()
    address: str | None = None
    representation: str | None = None
    extra: tuple[tuple[str, str], ...] = ()

    def echo(self) -> str:
        parts = []
        for item in fields(self):
            value = getattr(self, item.name)
            if value is None or value == ():
                continue
            if isinstance(value, tuple):
                parts.extend(f'{key}={entry}' for key, entry in value)
            else:
                parts.append(f'{item.name}={value}')
        return 'config: ' + ' '.join(parts)


def defaults() -> dict:
    return settings.POLAR_QKD


def _argument_type(parser):
    """Turns a ValueError of `parser` into an argparse message carrying the original text."""
    def convert(value: str):
        try:
            return parser(value)
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from exc
    convert.__name__ = parser.__name__
    return convert


channel_argument = _argument_type(parse_channel)
address_argument = _argument_type(parse_address)


@_argument_type
def exponent_argument(value: str) -> int:
    n = int(value)
    if not 1 <= n <= MAX_N:
        raise ValueError(f'n must lie in [1, {MAX_N}], {value} was provided')
    return n


@_argument_type
def fer_argument(value: str) -> float:
    fer = float(value)
    if not 0.0 < fer < 1.0:
        raise ValueError(f'Target FER must lie in (0, 1), {value} was provided')
    return fer


@_argument_type
def unit_argument(value: str) -> float:
    number = float(value)
    if not 0.0 <= number <= 1.0:
        raise ValueError(f'Value must lie in [0, 1], {value} was provided')
    return number


@_argument_type
def positive_int_argument(value: str) -> int:
    number = int(value)
    if number < 1:
        raise ValueError(f'Value must be a positive integer, {value} was provided')
    return number


def add_representation_argument(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--representation', choices=[str(item) for item in Representation],
                        default=defaults()['REPRESENTATION'], help='Decoder arithmetic (default: %(default)s)')


def _usage_error(parser: argparse.ArgumentParser, message: str) -> None:
    if getattr(parser, 'called_from_command_line', False):
        parser.print_usage(sys.stderr)
        parser.exit(USAGE_ERROR, f'{parser.prog}: error: {message}\n')
    raise CommandError(f'Error: {message}', returncode=USAGE_ERROR)


class ReconciliationCommand(BaseCommand):
    """
    Base class of the commands. Subclasses implement run(); handle() prints the
    timestamped header and maps library failures to exit codes: 1 for malformed
    arguments, 2 for runtime failures. Acceptance failures raise their own
    CommandError with code 3.
    """
    command_name: CommandName
    requires_system_checks: list[str] = []

    def create_parser(self, prog_name: str, subcommand: str, **kwargs):
        parser = super().create_parser(prog_name, subcommand, **kwargs)
        parser.error = lambda message: _usage_error(parser, message)
        return parser

    def handle(self, *args, **options) -> None:
        self.stdout.write(f'run started {timezone.now().isoformat(timespec="seconds")}')
        try:
            self.run(**options)
        except CommandError:
            raise
        except (ChannelParameterError, argparse.ArgumentTypeError) as exc:
            raise CommandError(str(exc), returncode=USAGE_ERROR) from exc
        except (ReconciliationError, OSError, EOFError) as exc:
            raise CommandError(str(exc), returncode=RUNTIME_ERROR) from exc
        except ValueError as exc:
            raise CommandError(str(exc), returncode=USAGE_ERROR) from exc

    def run(self, **options) -> None:
        raise NotImplementedError

    def echo(self, config: RunConfig) -> None:
        self.stdout.write(config.echo())
