"""
Choosing the penalty scale by sample splitting
==============================================

A Lipschitz function is a monotone function minus a linear term. The slope of
that term is chosen on a held-out split. Values at or above the Lipschitz
constant all work; values below it do not.
"""

import numpy as np

from shapedecomp import AlphaGrid, ScenarioSpec, generate, select_alpha
from shapedecomp.bench import estimate_mse

# The triangle wave has Lipschitz constant 3
spec = ScenarioSpec("S1", n=2000, seed=1)
data = generate(spec)

model = select_alpha(data, AlphaGrid.default(refine=True), seed=1)
print("selected alpha: %.3f (refined: %s)" % (model.alpha, model.refined))
for alpha, sse in model.table[:17]:
    print("  alpha %8.3f  validation SSE %.4f" % (alpha, sse))

print("MSE against the truth: %.2e" % estimate_mse(model.predict, spec.truth, seed=0))

# Smooth truths use the convex shape with a quadratic term instead
spec = ScenarioSpec("S3", n=2000, seed=1)
model = select_alpha(generate(spec), shape=spec.shape, seed=1)
print("S3 selected alpha %.2f, MSE %.2e" % (model.alpha, estimate_mse(model.predict, spec.truth, seed=0)))
