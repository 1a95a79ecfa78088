import socket

import pytest


@pytest.fixture
def free_udp_port():
    """An ephemeral localhost UDP port that was free at fixture time."""

    def _get() -> int:
        s = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        s.bind(("127.0.0.1", 0))
        port = s.getsockname()[1]
        s.close()
        return port

    return _get
