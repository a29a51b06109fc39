import numpy as np
import pytest

from spnforest import LearnConfig, learn_extra_spn, sample_mu
from spnforest.data import default_data_dir, load_bundle


def synthetic_data(rng, n_rows, n_vars, n_clusters=3):
    """Cluster-structured binary data so learning has signal to find."""
    protos = rng.random((n_clusters, n_vars))
    assign = rng.integers(n_clusters, size=n_rows)
    return (rng.random((n_rows, n_vars)) < protos[assign]).astype(np.uint8)


def random_spn(seed, n_vars=None, n_rows=None, beta=0.5, gamma=2.0):
    """Seeded randomized SPN learned from synthetic data."""
    rng = np.random.default_rng(seed)
    if n_vars is None:
        n_vars = int(rng.integers(4, 11))
    if n_rows is None:
        n_rows = int(rng.integers(60, 240))
    data = synthetic_data(rng, n_rows, n_vars)
    mu = sample_mu(n_rows, gamma, rng)
    cfg = LearnConfig(mu=mu, beta=beta, gamma=gamma)
    return learn_extra_spn(data, config=cfg, rng=rng), data


@pytest.fixture(scope="session")
def nltcs():
    try:
        return load_bundle(default_data_dir(), "nltcs")
    except (FileNotFoundError, ValueError):
        pytest.skip(
            "NLTCS dataset not available; place nltcs.{ts,valid,test}.data "
            "under $SPNFOREST_DATA_DIR or ./data"
        )
