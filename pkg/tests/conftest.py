import numpy as np
import pytest

from symdecode import ActiveSpace, ObservationMatrix, SimConfig, generate_trajectory


@pytest.fixture
def space200() -> ActiveSpace:
    return ActiveSpace(0.0, 200.0)


@pytest.fixture
def small_walk(space200):
    cfg = SimConfig(seed=3, K=400, M=4, space=space200, step_std=5.0)
    return generate_trajectory(cfg)


def random_obs(rng: np.random.Generator, K: int, M: int) -> ObservationMatrix:
    return ObservationMatrix(rng.normal(0.0, 2.0, (K, M)))
