import numpy as np
import pytest

from pareidolia.stimuli import NoiseImage, NoiseSpec


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def as_image(pixels):
    pixels = np.asarray(pixels, dtype=float)
    return NoiseImage(pixels.shape[0], pixels, NoiseSpec(pixels.shape[0], 1.0, 0))


def pytest_terminal_summary(terminalreporter, config):
    from .test_acceptance import ACCEPT_KEY

    lines = config.stash.get(ACCEPT_KEY, None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
