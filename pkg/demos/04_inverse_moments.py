"""The six inverse-Wishart moments that drive the exact optimum.

For a fixed market the moments of J^-1 and J^-2 along e and c converge to
deterministic limits as N grows; the prediction only needs the bracket
averages of the market and alpha.  Plugging the predicted moments into the
exact formulas reproduces the replica curves to rounding error.
"""

import numpy as np

from riskcost import DEFAULT_PARETO, ensemble_stats, generate_ensemble
from riskcost.exact import lagrange_epsilon, quenched_moments
from riskcost.replica import cost_statistics, predicted_inverse_moments, replica_epsilon
from riskcost.scenario import build_wishart, generate_returns

ALPHA = 3
names = ("e'J^-1 e", "e'J^-1 c", "c'J^-1 c", "e'J^-2 e", "e'J^-2 c", "c'J^-2 c")

for n in (100, 400, 1000):
    ens = generate_ensemble(DEFAULT_PARETO, DEFAULT_PARETO, n, seed=n)
    stats = ensemble_stats(ens)
    pred = np.array(predicted_inverse_moments(stats, ALPHA).as_tuple())
    samples = np.array([
        quenched_moments(build_wishart(generate_returns(ens, ALPHA * n, seed=(n, s))), ens.cost).as_tuple()
        for s in range(10)
    ])
    dev = samples.mean(axis=0) / pred - 1
    print(f"N = {n:>4}: relative deviation of the 10-sample mean")
    for name, d in zip(names, dev):
        print(f"    {name:<10} {d:+.4f}")

    mom = predicted_inverse_moments(stats, ALPHA)
    cs = cost_statistics(stats)
    err = max(abs(lagrange_epsilon(mom, eta) / replica_epsilon(stats, cs, ALPHA, eta) - 1) for eta in (0, 10, 50))
    print(f"    chaining the predicted moments: max rel err {err:.1e}")
