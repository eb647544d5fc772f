"""Shared strategies and generators for the test suite.

Random samples are produced from a numpy generator seeded by hypothesis, so
shrinking works on (seed, H) while the data itself stays in the well-scaled
regime the estimators are specified for (log-uniform weights in [0.1, 10],
standard normal y).
"""

import numpy as np
from hypothesis import strategies as st

from repvar import StratifiedSample

EPSILONS = (0.3, 0.5, 0.7, 1.0)


def sample_from_seed(seed: int, n_strata: int) -> StratifiedSample:
    rng = np.random.default_rng(seed)
    w = 10.0 ** rng.uniform(-1.0, 1.0, size=(n_strata, 2))
    y = rng.normal(0.0, 1.0, size=(n_strata, 2))
    return StratifiedSample.from_arrays(w, y)


@st.composite
def samples(draw, min_strata=1, max_strata=16):
    h = draw(st.integers(min_strata, max_strata))
    seed = draw(st.integers(0, 2**32 - 1))
    return sample_from_seed(seed, h)


@st.composite
def nonzero_contrasts(draw, max_len=12):
    """Contrast vectors with at least one entry of usable magnitude.

    Magnitudes are kept in [1e-3, 1e6] so fourth powers neither underflow
    nor overflow; zeros are still allowed in the other positions.
    """
    values = draw(
        st.lists(
            st.floats(min_value=-1e6, max_value=1e6, allow_nan=False),
            min_size=1,
            max_size=max_len,
        )
    )
    anchor = draw(st.floats(min_value=1e-3, max_value=1e6))
    sign = draw(st.sampled_from((-1.0, 1.0)))
    index = draw(st.integers(0, len(values) - 1))
    values[index] = sign * anchor
    return np.array(values)


epsilons = st.sampled_from(EPSILONS)
