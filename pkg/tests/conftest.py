import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

FIXTURES = Path(__file__).parent / "fixtures"

# minimal single-file torrent; its info span is everything between the
# leading "d4:info" and the final "e"
MINIMAL_TORRENT = (
    b"d4:infod6:lengthi5e4:name1:a12:piece lengthi16384e6:pieces20:" + b"\x00" * 20 + b"ee"
)
# sha1sum over the hand-extracted info span
MINIMAL_INFOHASH = "777b0e126050a4ad440176d56f45a3fdad52a06c"


@pytest.fixture
def minimal_torrent() -> bytes:
    return MINIMAL_TORRENT


@pytest.fixture(scope="session")
def reference_torrents() -> dict:
    """Fixture torrents made with libtorrent, with the infohash it reported."""
    meta = json.loads((FIXTURES / "infohashes.json").read_text())
    return {name: ((FIXTURES / name).read_bytes(), info) for name, info in meta.items()}


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    if acceptance is None or not acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in acceptance.RESULTS:
        terminalreporter.write_line(line)
