"""
Empirical convergence rates
===========================

Repeat simulate / select / score across sample sizes and regress log mean MSE
on log n. A reduced number of replications keeps this quick; the acceptance
suite uses 50.
"""

from shapedecomp.bench import convergence_study, fit_slope

for scenario in ("S1", "S2", "S3", "S4"):
    report = convergence_study(scenario, reps=10, base_seed=0)
    slope = fit_slope(report, n_min=2000)[(scenario, "lse+parametric")]
    means = ", ".join("%d: %.2e" % kv for kv in report.mean_mse().items())
    print("%s slope %.3f  (%s)" % (scenario, slope, means))
