"""Bolt protocol connection helpers."""

PROTOCOL_VERSION = (5, 0)


class AsyncBolt:
    """Base class for Bolt connections."""

    protocol_version = None

    def __init__(self, address, timeout=30):
        self.address = address
        self.timeout = timeout

    @classmethod
    def get_handler(cls, version):
        """Return Bolt protocol handlers"""
        raise NotImplementedError


def open_connection(address, timeout=30):
    """Open a connection to the given address."""
    return AsyncBolt(address, timeout)
