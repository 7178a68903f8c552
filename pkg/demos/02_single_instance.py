"""One market, one return sample, both solvers.

The closed form uses two Cholesky solves; the descent walks ``w`` downhill
and the budget multiplier ``k`` uphill until the step is below ``delta``.
Descent error scales like ``delta`` over the smallest step the slowest mode
takes, so tightening ``delta`` tenfold tightens the answer about tenfold.
"""

import time

import numpy as np

from riskcost import DEFAULT_PARETO, generate_ensemble
from riskcost.descent import DescentConfig, Instance, run_descent
from riskcost.exact import optimal_portfolio_closed_form
from riskcost.scenario import build_wishart, generate_returns

N, ALPHA, ETA = 100, 3, 5.0
ens = generate_ensemble(DEFAULT_PARETO, DEFAULT_PARETO, N, seed=2024)
J = build_wishart(generate_returns(ens, ALPHA * N, seed=2024))

t0 = time.perf_counter()
cf = optimal_portfolio_closed_form(J, ens.cost, ETA)
print(f"closed form: eps = {cf.epsilon:.10f}  q_w = {cf.qw:.6f}  k = {cf.k:.6f}  "
      f"({1e3 * (time.perf_counter() - t0):.1f} ms)")

for delta in (1e-5, 1e-6, 1e-7, 1e-8):
    t0 = time.perf_counter()
    ds = run_descent(Instance(J, ens.cost, ETA), DescentConfig(delta=delta))
    gap_w = np.abs(ds.w - cf.w).max()
    print(f"descent delta={delta:.0e}: {ds.iterations:>7d} iterations, "
          f"|eps gap| = {abs(ds.epsilon - cf.epsilon):.2e}, max |w gap| = {gap_w:.2e}, "
          f"budget gap = {ds.budget_gap:+.1e}  ({time.perf_counter() - t0:.2f} s)")

# short positions are allowed; cheap, low-variance assets get the weight
order = np.argsort(cf.w)
print("\nlargest short:", ", ".join(f"c={ens.cost[i]:.2f} v={ens.variance[i]:.2f} w={cf.w[i]:+.2f}" for i in order[:3]))
print("largest long: ", ", ".join(f"c={ens.cost[i]:.2f} v={ens.variance[i]:.2f} w={cf.w[i]:+.2f}" for i in order[-3:]))
