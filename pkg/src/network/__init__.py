"""
Networks, activations and tickets.
"""

from .activation import (
    UNCONSTRAINED,
    ActivationSpec,
    identity_residual,
    invert_g,
    is_registered,
    register_activation,
    spec_for,
)
from .network import Domain, Layer, Network, build_network, forward, forward_layers, nonzero_count
from .ticket import Ticket, TicketStats, forward_ticket, ticket_stats

__all__ = [
    "UNCONSTRAINED",
    "ActivationSpec",
    "Domain",
    "Layer",
    "Network",
    "Ticket",
    "TicketStats",
    "build_network",
    "forward",
    "forward_layers",
    "forward_ticket",
    "identity_residual",
    "invert_g",
    "is_registered",
    "nonzero_count",
    "register_activation",
    "spec_for",
    "ticket_stats",
]
