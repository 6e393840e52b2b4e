"""Energy mismatch between the pair trial state and the condensate limit.

Builds the product trial state psi((x+y)/2) alpha0((x-y)/h) at several
scale ratios h, evaluates its full energy (quadratic terms by quadrature,
quartic traces by importance-sampled Monte Carlo), and fits the rate at
which E_trial/h approaches the macroscopic minimum.  The fitted exponent
should land between linear and quadratic in h.

Run:  python3 demos/scale_separation.py     (a few minutes, MC-dominated)
"""

import bcsgp as bg
from bcsgp.asymptotics import h_sweep
from bcsgp.gp import minimize_gp_unconstrained

sol = bg.solve_two_body()
trap = bg.HarmonicTrap(1.0)
grid = bg.build_radial_grid(12.0, 2400, "uniform")
res = minimize_gp_unconstrained(trap, 2.0, sol.g_bcs, grid)
print("macroscopic minimum:", res.energy)

sweep = h_sweep(sol, res, [0.4, 0.32, 0.25, 0.2, 0.16], samples=600_000, seed=0)

print()
print("  h      E_trial/h - E_gp     stderr     lambda     s1")
for h, r, s, lam, s1 in zip(sweep.h_values, sweep.residuals,
                            sweep.residual_stderrs, sweep.lambdas,
                            sweep.s1_values):
    print(f"{h:5.2f}   {r:+.6e}   {s:.1e}   {lam:6.3f}   {s1:.4f}")

if sweep.fit is not None:
    print()
    print(f"power-law fit: exponent = {sweep.fit.exponent:.3f}, "
          f"R^2 = {sweep.fit.r_squared:.5f}")
