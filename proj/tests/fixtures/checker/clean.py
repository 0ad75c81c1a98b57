"""Self-contained module."""


def double(value):
    """Twice the value."""
    return value * 2
