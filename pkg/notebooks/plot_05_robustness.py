"""
Robustness to the penalty scale and to the split
================================================

Fix alpha and watch the MSE: below the Lipschitz constant the decomposition is
wrong and the error is large. Then keep one dataset and redraw the split many
times.
"""

import numpy as np

from shapedecomp.bench import alpha_sweep, cv_split_robustness, m_sweep

for row in alpha_sweep("S1", [1000], [0.1, 1, 3, 6, 12, 24], reps=5):
    print("alpha %5.1f  mean MSE %.2e" % (row["alpha"], row["mean_mse"]))

rows = cv_split_robustness("S1", 500, n_splits=50, data_seed=0)
logs = np.log10([r["mse"] for r in rows])
print("log10 MSE over 50 splits: median %.2f, IQR %.2f" % (np.median(logs), np.subtract(*np.percentile(logs, [75, 25]))))

# more steps in the truth, more error
for row in m_sweep("S2", [1, 3, 5], n=2000, reps=5):
    print("m %d  mean MSE %.2e" % (row["m"], row["mean_mse"]))
