"""Graph secret, zero-knowledge access control, life-cycle protocol and radio simulator."""
