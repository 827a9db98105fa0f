"""Process-level plumbing: logging and signals."""
