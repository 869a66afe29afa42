"""
Test suite for ticketforge
"""
