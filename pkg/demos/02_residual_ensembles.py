"""
From a random forest of SPNs to residual links
==============================================

Learn a handful of cheap random components, combine them two ways --
a flat uniform mixture (RSPF) and a residual SPN whose copy component
gets extra sum-node children pointing into the others -- then train both
with EM and compare training fit.
"""

import numpy as np

from spnforest import (
    EmConfig,
    EnsembleConfig,
    LearnConfig,
    build_resspn,
    build_rspf,
    em_fit,
    learn_extra_spn,
    log_likelihood,
    sample_mu,
    structure_stats,
    validate,
)

rng = np.random.default_rng(3)
prototypes = rng.integers(0, 2, size=(3, 8))
labels = rng.integers(0, 3, size=400)
flips = rng.random((400, 8)) < 0.1
data = np.where(flips, 1 - prototypes[labels], prototypes[labels]).astype(np.uint8)

# Five random components; each draws its own minimum slice size mu.
components = []
for _ in range(5):
    mu = sample_mu(data.shape[0], 3.0, rng)
    cfg = LearnConfig(mu=mu, beta=0.5)
    components.append(learn_extra_spn(data, config=cfg, rng=rng))

# RSPF: one sum node with uniform weights over the components.
rspf = build_rspf(components)

# ResSPN: copy one component, walk its sum nodes breadth-first, and give
# each one extra children drawn from the other components (pruned to the
# matching scope). k bounds how many links each donor may contribute.
resspn, records, _ = build_resspn(
    components, data=data, config=EnsembleConfig(k=0.2, seed=3)
)
print("residual links added:", len(records))
for rec in records[:5]:
    print(f"  component {rec.component}: sum {rec.source} -> node {rec.target} "
          f"(scope size {rec.scope_size}, weight {rec.weight:.4f})")
print("still valid:", validate(resspn, require_full_scope=True).ok)
print("rspf  :", structure_stats(rspf))
print("resspn:", structure_stats(resspn))

# Train both with EM (same budget) and compare mean train log-likelihood.
em = EmConfig(max_iters=30)
_, rspf_trace = em_fit(rspf, data, em)
_, res_trace = em_fit(resspn, data, em)
print("rspf   train LL:", log_likelihood(rspf, data).mean())
print("resspn train LL:", log_likelihood(resspn, data).mean())
print("em stopped:", rspf_trace.stop_reason, "/", res_trace.stop_reason)
