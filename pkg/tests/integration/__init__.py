"""Integration tests that run the protocol stack end to end."""
