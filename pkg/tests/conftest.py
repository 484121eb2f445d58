import math

import numpy as np
import pytest

from pll_lockin.model import LoopParams, StabilityCase, sample_loop_params

# Reference loop used throughout: triangular characteristic, focus case.
REFERENCE = LoopParams(tau1=0.0633, tau2=0.0225, k_vco=250.0, k=2.0 / math.pi)

CASES = (StabilityCase.NODE, StabilityCase.DEGENERATE_NODE, StabilityCase.FOCUS)


@pytest.fixture
def reference_params() -> LoopParams:
    return REFERENCE


def random_params_batch(seed: int, n: int) -> list[LoopParams]:
    """n parameter sets cycling through the three stability cases."""
    rng = np.random.default_rng(seed)
    return [sample_loop_params(rng, CASES[i % 3]) for i in range(n)]
