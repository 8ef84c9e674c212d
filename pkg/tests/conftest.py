"""Shared fixtures: reference stay models, small configs, and one
module-scoped paper-parameterized simulation reused by the acceptance tests."""

from __future__ import annotations

import dataclasses

import numpy as np
import pytest

from careflow.config import data_path, load_config
from careflow.survival import (
    DEFAULT_DISPOSITIONS,
    DispositionId,
    LognormalDispositionParams,
    LosDataset,
    LosObservation,
    model_from_params,
)

COMMUNITY, HOSPITAL = DEFAULT_DISPOSITIONS

# published point estimates used across tests: community eta 3.41 sigma 0.94,
# hospital eta 4.52 sigma 1.58
REFERENCE_PARAMS = {
    COMMUNITY: LognormalDispositionParams(eta=3.41, sigma=0.94),
    HOSPITAL: LognormalDispositionParams(eta=4.52, sigma=1.58),
}


@pytest.fixture(scope="session")
def reference_model():
    return model_from_params(REFERENCE_PARAMS)


def random_model(rng: np.random.Generator, n_dispositions: int = 2):
    """A random competing-risks model with moderate parameters."""
    params = {}
    for k in range(n_dispositions):
        mu = DispositionId(index=k + 1, label=f"exit{k + 1}")
        params[mu] = LognormalDispositionParams(
            eta=float(rng.uniform(1.5, 5.0)), sigma=float(rng.uniform(0.4, 1.8))
        )
    return model_from_params(params)


def random_dataset(rng: np.random.Generator, n: int = 60) -> LosDataset:
    """Lognormal stays split between the two default dispositions with a
    sprinkling of right-censored rows; used by derivative checks."""
    observations = []
    for _ in range(n):
        u = rng.uniform()
        t = float(np.exp(rng.normal(3.2, 1.0)))
        if u < 0.15:
            observations.append(LosObservation(t_days=t, disposition=None, censored=True))
        elif u < 0.65:
            observations.append(LosObservation(t_days=t, disposition=COMMUNITY, censored=False))
        else:
            observations.append(LosObservation(t_days=t, disposition=HOSPITAL, censored=False))
    return LosDataset(observations=observations, dispositions=list(DEFAULT_DISPOSITIONS))


@pytest.fixture(scope="session")
def example_config():
    return load_config(data_path("config_example.json"))


@pytest.fixture(scope="session")
def small_config(example_config):
    """Fast variant of the example config for engine/store/API tests."""
    return dataclasses.replace(
        example_config, horizon_days=120, replications=3, warmup_days=30
    )


@pytest.fixture(scope="session")
def reference_run(example_config):
    """Full-size run at the example config, shared by the costlier criteria."""
    from careflow.engine import run

    return run(example_config)
