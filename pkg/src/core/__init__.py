"""
Core interfaces, configuration, error types and random streams for ticketforge
"""
