#!/usr/bin/env python3
"""Verify the handwritten backward pass against central finite differences.

Every parameter tensor of a small double-precision model is probed at random
coordinates; the analytic gradient must match (f(w+h) - f(w-h)) / 2h.

Run: python demos/04_gradient_check.py
"""

import numpy as np

from cipher_icl import model as M

config = M.ModelConfig(layers=2, heads=2, embed_dim=32, context_length=16)
rng = np.random.default_rng(0)
params = M.init_params(config, rng, dtype=np.float64)

tokens = rng.integers(0, 26, size=(2, 16))
targets = rng.integers(0, 26, size=(2, 16))
mask = np.zeros((2, 16), dtype=bool)
mask[:, 0::2] = True

loss, grads = M.backward(params, config, tokens, targets, mask)
print(f"model: {config.param_count():,} parameters, loss at init {loss:.4f}")

h = 1e-5
worst = (0.0, "")
for name, p in params.items():
    flat = p.reshape(-1)
    for index in rng.choice(flat.size, size=min(6, flat.size), replace=False):
        orig = flat[index]
        flat[index] = orig + h
        lp = M.masked_loss(M.forward(params, config, tokens), targets, mask)
        flat[index] = orig - h
        lm = M.masked_loss(M.forward(params, config, tokens), targets, mask)
        flat[index] = orig
        fd = (lp - lm) / (2 * h)
        an = float(grads[name].reshape(-1)[index])
        rel = abs(fd - an) / max(abs(fd), abs(an), 1e-6)  # floor absorbs FD noise on zero grads
        if rel > worst[0]:
            worst = (rel, f"{name}[{index}]")

print(f"worst relative error over all tensors: {worst[0]:.2e} at {worst[1]}")
print("(anything below 1e-4 means the analytic gradients are exact up to")
print(" finite-difference truncation noise)")
