import numpy as np
import pytest
from hypothesis import assume
from hypothesis import strategies as st

from radiocal.model import GgcmParams
from radiocal.synth import CHROMATIC_PAIRS, EDGE_RAMP, apply_crf, gen_gradient_patch, irradiance_pairs

GAMMA = GgcmParams.gamma(0.4)


def chromatic_line(truth=GAMMA, pair=0, size=21, ramp=EDGE_RAMP):
    """One noiseless scan line of a chromatic soft edge rendered through ``truth``."""
    a, b = irradiance_pairs([CHROMATIC_PAIRS[pair]], truth)[0]
    return apply_crf(gen_gradient_patch(a, b, size, ramp), truth)[0]


@pytest.fixture
def gamma_line():
    return chromatic_line()


@st.composite
def valid_params(draw, max_order=3):
    order = draw(st.integers(1, max_order))
    first = draw(st.floats(0.05, 5.0))
    rest = draw(st.lists(st.floats(-5.0, 5.0), min_size=order - 1, max_size=order - 1))
    params = GgcmParams((first, *rest))
    assume(params.is_valid())
    return params


def random_valid_params(rng, count, max_order=3):
    out = []
    while len(out) < count:
        order = int(rng.integers(1, max_order + 1))
        coeffs = np.r_[rng.uniform(0.05, 5.0), rng.uniform(-5.0, 5.0, order - 1)]
        p = GgcmParams(tuple(coeffs))
        if p.is_valid():
            out.append(p)
    return out


# one line per acceptance criterion, printed after the run
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])
