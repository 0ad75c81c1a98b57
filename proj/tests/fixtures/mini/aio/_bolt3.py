"""Bolt protocol version 3."""

DEFAULT_PORT = 7687


class AsyncBolt3:
    PROTOCOL_VERSION = (3, 0)

    def hello(self, user_agent):
        """Send a HELLO message."""
        return {"user_agent": user_agent}

    class Response:
        def on_success(self, metadata):
            return metadata


class Helper:
    def encode(self, value):
        return str(value)
