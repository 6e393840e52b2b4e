"""Critical chemical potential at finite scale ratio.

For each scale h the pairing phase sets in at some offset D_c(h), located
here by bisection on the sign of the trial-state energy (negative beyond
Monte Carlo noise counts as superfluid).  As h shrinks, D_c approaches the
trap ground energy E_W = 1.5, so the gap |D_c - E_W| should decrease.

Run:  python3 demos/critical_coupling.py     (several minutes)
"""

import bcsgp as bg
from bcsgp.asymptotics import estimate_mu_c

sol = bg.solve_two_body()
trap = bg.HarmonicTrap(1.0)
grid = bg.build_radial_grid(12.0, 2400, "uniform")

print("  h      D_c        |D_c - E_W|   bracket width   uncertainty   mu_c")
for k, h in enumerate((0.4, 0.3, 0.2)):
    pt = estimate_mu_c(sol, trap, grid, h, bracket=(1.505, 1.7),
                       samples=400_000, seed=100 * k, tol=1e-3)
    width = pt.bracket[1] - pt.bracket[0]
    print(f"{h:5.2f}   {pt.d_c:.5f}   {abs(pt.d_c - pt.e_w):.5f}       "
          f"{width:.2e}       {pt.uncertainty:.1e}      {pt.mu_c:+.6f}")
