"""Build a channel from a few paths and look at its per-domain structure.

A channel over 4 subcarriers and 8 receive antennas is the Kronecker product
of one steering vector per domain, summed over paths.  Reshaping it recovers
the frequency x antenna grid.
"""

import numpy as np

from chanstat import ChannelConfig, PathParams, steering_vector, synthesize_channel

cfg = ChannelConfig(m_sc=4, m_r=8, delta_f=30e3)
paths = [
    PathParams(p=0.7, beta=0.3, tau=1.2e-6, theta_r=0.2),
    PathParams(p=0.3, beta=2.0, tau=3.5e-6, theta_r=-0.6),
]
h = synthesize_channel(cfg, paths)
print(f"dims (subcarrier, symbol, rx, tx) = {cfg.dims}, M = {cfg.size}")
# every entry has mean power sum(p), so ||h||^2 is close to M * sum(p) on average
print(f"||h||^2 = {np.vdot(h, h).real:.3f}, M * sum(p) = {cfg.size * sum(q.p for q in paths):.1f}")

# a single path factorizes exactly: the reshaped grid has rank one
single = synthesize_channel(cfg, paths[:1]).reshape(cfg.m_sc, cfg.m_r)
print("rank of single-path grid:", np.linalg.matrix_rank(single))
print("rank of two-path grid:   ", np.linalg.matrix_rank(h.reshape(cfg.m_sc, cfg.m_r)))

a_r = steering_vector("rx", 0.2, cfg.m_r)
print("rx phase steps of path 1:", np.round(np.angle(a_r[1:] / a_r[:-1]), 4))
