"""One undefined name."""


def total(items):
    """Sum with an offset."""
    return sum(items) + offset
