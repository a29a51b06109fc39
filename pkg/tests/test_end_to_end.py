"""Synthetic end-to-end runs: directional checks that do not need NLTCS.

These mirror the benchmark comparisons on generated data so the pipeline
direction (residual links help training fit, repair pairwise MI) is
exercised even when the benchmark files are absent.
"""

import numpy as np

from spnforest import (
    EmConfig,
    EnsembleConfig,
    LearnConfig,
    build_resspn,
    build_rspf,
    em_fit,
    empirical_pairwise_mi,
    learn_extra_spn,
    log_likelihood,
    mi_gap,
    model_pairwise_mi,
    sample_mu,
    validate,
)

from conftest import synthetic_data

SEEDS = [0, 1, 2, 3, 4]


def _run_seed(seed):
    rng = np.random.default_rng(seed)
    data = synthetic_data(rng, 400, 8)
    comps = []
    for _ in range(5):
        mu = sample_mu(data.shape[0], 3.0, rng)
        cfg = LearnConfig(mu=mu, beta=0.5)
        comps.append(learn_extra_spn(data, config=cfg, rng=rng))
    em = EmConfig(max_iters=30)
    rspf = build_rspf(comps)
    em_fit(rspf, data, em)
    resspn, records, snapshot = build_resspn(
        comps, data=data, config=EnsembleConfig(k=0.2, seed=seed)
    )
    em_fit(resspn, data, em)
    return data, rspf, resspn, records, snapshot


def test_resspn_improves_train_fit_on_majority_of_seeds():
    wins = 0
    for seed in SEEDS:
        data, rspf, resspn, records, _ = _run_seed(seed)
        assert records, f"seed {seed}: no residual links formed"
        assert validate(resspn, require_full_scope=True).ok
        rspf_ll = log_likelihood(rspf, data).mean()
        res_ll = log_likelihood(resspn, data).mean()
        wins += res_ll >= rspf_ll
    assert wins >= 3, f"ResSPN train LL >= RSPF in only {wins}/{len(SEEDS)} seeds"


def test_em_repairs_mi_gap_on_every_seed():
    for seed in SEEDS:
        data, _, resspn, _, snapshot = _run_seed(seed)
        emp = empirical_pairwise_mi(data)
        trained = mi_gap(model_pairwise_mi(resspn), emp)
        raw = mi_gap(model_pairwise_mi(snapshot), emp)
        assert trained < raw, f"seed {seed}: gap {trained} vs snapshot {raw}"
