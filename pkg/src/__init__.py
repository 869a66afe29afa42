"""
ticketforge - Core package
Strong lottery tickets by subset-sum pruning of random networks
"""

__version__ = "0.1.0"
__author__ = "ticketforge developers"
