"""
Power method versus dense eigendecomposition
============================================

The power solver costs about k * (iters + 1) * (w + 1) sparse mat-vecs,
linear in the number of graph edges; the dense solver is cubic in N.
"""

# %%
import numpy as np

from evdenoise import NoiseSpec, PipelineConfig, add_noise, denoise
from evdenoise.synthetic import moving_shape_stream

print(f"{'N':>6} {'power s':>8} {'evd s':>8} {'ratio':>6}")
for n_clean in (1000, 2000, 2680, 3500):
    s = add_noise(moving_shape_stream(n_clean, seed=5),
                  NoiseSpec(0.06, 0.06, max(1, round(0.06 * n_clean) // 10), seed=3))
    p = denoise(s, PipelineConfig(solver="power")).ct_seconds
    e = denoise(s, PipelineConfig(solver="evd", dense_cap=10_000)).ct_seconds
    print(f"{len(s):>6} {p:8.2f} {e:8.2f} {e / p:6.2f}")
