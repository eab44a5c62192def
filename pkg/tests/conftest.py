import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from regimescan.config import SimConfig  # noqa: E402
from regimescan.network import Topology, quantize_delays  # noqa: E402

ACCEPTANCE_LINES: list[str] = []


def make_topology(pre, post, weight, delay, n_exc, n_inh=0, dt=0.1, plastic=None):
    pre = np.asarray(pre, dtype=np.int32)
    post = np.asarray(post, dtype=np.int32)
    if plastic is None:
        plastic = (pre < n_exc) & (post < n_exc)
    return Topology(
        n_exc=n_exc, n_inh=n_inh, p_connect=float("nan"), dt=dt, pre=pre, post=post,
        weight=np.asarray(weight, dtype=float),
        delay=quantize_delays(np.asarray(delay, dtype=float), dt),
        plastic=np.asarray(plastic, dtype=bool),
    )


@pytest.fixture
def short_config():
    """Default network, 2 s runs: still long enough for Welch on 1.5 s."""
    return SimConfig().with_overrides({"duration": 2000.0, "burn_in": 500.0})


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
