"""
Exception types for ticketforge.

Every runtime failure raised by the library derives from TicketForgeError and
carries the process exit code the CLI reports for it.
"""

from typing import Optional


class TicketForgeError(Exception):
    """Base class for all ticketforge failures."""

    exit_code: int = 1


class ShapeError(TicketForgeError, ValueError):
    """Array or architecture dimensions do not compose."""


class ActivationError(TicketForgeError, ValueError):
    """Unknown activation tag or an activation violating its linearization bound."""


class RadiusError(TicketForgeError, ValueError):
    """Input lies outside the validity radius a(eps'') of an activation."""


class DomainError(TicketForgeError, ValueError):
    """Argument outside the domain where a numeric inverse or scaling is defined."""


class ProblemSizeError(TicketForgeError, ValueError):
    """Subset-sum instance too large for the requested solver."""


class UnattainableError(TicketForgeError):
    """A requested success rate could not be reached below the pool-size cap."""


class BudgetUnderflowError(TicketForgeError):
    """A per-layer or per-block tolerance fell below the representable floor."""

    exit_code = 3


class InsufficientWidthError(TicketForgeError):
    """The source layer cannot host the pools a construction needs."""

    exit_code = 2


class BlockFailureError(TicketForgeError):
    """A subset-sum block stayed unsolved after all retries."""

    exit_code = 2

    def __init__(self, layer: int, copy: int, input_neuron: Optional[int], residual: float,
                 tolerance: float, attempts: int, neuron: Optional[int] = None):
        self.layer = layer
        self.neuron = neuron
        self.copy = copy
        self.input_neuron = input_neuron
        self.residual = residual
        self.tolerance = tolerance
        self.attempts = attempts
        target = "bias" if input_neuron is None else f"input {input_neuron}"
        where = f"layer {layer}" if neuron is None else f"layer {layer}, neuron {neuron}"
        super().__init__(
            f"block failed at {where}, output copy {copy}, {target}: "
            f"residual {residual:.3e} > tolerance {tolerance:.3e} after {attempts} attempts"
        )


class ManifestError(TicketForgeError):
    """A construction manifest is internally inconsistent or unreadable."""


class FormatError(TicketForgeError, ValueError):
    """Malformed or unsupported model/ticket file."""

    exit_code = 4
