"""
Monotone and convex least squares fits
======================================

Fit isotonic and convex least squares estimators to noisy data and look at
what they return: a step function and a piecewise linear function.
"""

import numpy as np

from shapedecomp import convex_regression, isotonic_regression

rng = np.random.default_rng(0)
x = rng.uniform(size=200)

# A non-decreasing truth with a jump
y = np.where(x < 0.5, x, 1 + x) + rng.normal(0, 0.2, x.size)
iso = isotonic_regression(x, y)
print("isotonic fit: %d knots, %d distinct levels" % (len(iso.knots), len(np.unique(iso.values))))
print("values at 0.25, 0.75:", iso(np.array([0.25, 0.75])))

# A convex truth
y = 4 * (x - 0.4) ** 2 + rng.normal(0, 0.1, x.size)
cvx = convex_regression(x, y)
print("convex fit: %d knots, slopes range %.2f .. %.2f" % (len(cvx.knots), cvx.slopes()[0], cvx.slopes()[-1]))

# Both fits are projections: refitting the fitted values changes nothing
print("isotonic idempotent:", np.array_equal(isotonic_regression(iso.knots, iso.values, iso.weights).values, iso.values))
