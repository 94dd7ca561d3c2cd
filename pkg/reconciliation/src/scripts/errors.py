"""
Exceptions raised by the reconciliation library.
"""


class ReconciliationError(Exception):
    """Base class of every error raised by this package."""


class ChannelParameterError(ReconciliationError, ValueError):
    """Raised when a channel parameter lies outside its admissible range."""

    def __init__(self, parameter: str, value: float, constraint: str) -> None:
        super().__init__(f'Invalid channel parameter {parameter}={value!r}: expected {constraint}')


class QuantizationError(ReconciliationError):
    """Raised when the density-evolution grid cannot represent the base channel."""

    def __init__(self, channel: str, bins: int, llr_max: float) -> None:
        super().__init__(
            f'Grid of {bins} bins over [-{llr_max}, {llr_max}] is too coarse for {channel}: '
            f'all probability mass falls into a single bin'
        )


class CodeMismatchError(ReconciliationError, ValueError):
    """Raised when a code, a construction result, a channel or a vector disagree."""


class CodeTableError(ReconciliationError):
    """Raised when a code-table file cannot be read back."""

    def __init__(self, path: str, reason: str) -> None:
        super().__init__(f'Code table "{path}" rejected: {reason}')


class SessionStateError(ReconciliationError):
    """Raised on an illegal reconciliation-session state transition."""

    def __init__(self, block_id: int, current: str, requested: str) -> None:
        super().__init__(f'Session {block_id} is {current}, cannot move to {requested}')


class WireProtocolError(ReconciliationError):
    """Raised when a frame on the classical channel is malformed."""


class HandshakeError(ReconciliationError):
    """Raised when both parties do not share the same code table."""

    def __init__(self, local_checksum: int, remote_checksum: int) -> None:
        super().__init__(
            f'Code-table checksum mismatch (local {local_checksum:016x}, remote {remote_checksum:016x})'
        )


class EmptyReportError(ReconciliationError, ValueError):
    """Raised when an empty bench report is written out."""
