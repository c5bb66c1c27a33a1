"""Reachable sums under a prefix corridor, and frequency steering.

Points z_0 < ... < z_n sit at gaps d_1..d_n.  Each z_k may move by less
than eps, and each new gap must land in a menu R_k of tileables.  The set
of possible totals is computed exactly by dynamic programming over the
(finite) lattice of running deviations, and cross-checked here against
brute force.  On top of that, the boost greedy picks menu entries side by
side until the alpha-frequency of the total lands where you ask.
"""

from fractions import Fraction as F

from flowtile import (ShiftProblem, alpha_frequency, brute_force_reachable,
                      default_params, enumerate_reachable, enumerate_tileable,
                      frequency_boost, quad)

P = default_params()

print("== two gaps of 3, menu {3, 2+sqrt2}, eps = 1/2 ==")
from flowtile import TileVector
menu = [TileVector(3, 0), TileVector(2, 1)]
prob = ShiftProblem(P, quad(F(1, 2)), [quad(3), quad(3)], [menu, menu])
reach = enumerate_reachable(prob)
for el in reach.elements:
    print(f"  total {str(el.value):>14}  counts ({el.counts.p},{el.counts.q})  "
          f"via {[tuple(y) for y in el.witness]}")
print("  (2+sqrt2 twice is unreachable: the total strays by 2*sqrt2-2 >= eps)")
print(f"  brute force agrees: "
      f"{brute_force_reachable(prob).counts() == reach.counts()}")

print("\n== frequency boost ==")
d = quad(12)
rich = [v for v in enumerate_tileable(P, d - 1, d + 1)
        if abs(v.value(P) - d) < quad(1)]
prob = ShiftProblem(P, quad(1), [d] * 8, [rich] * 8)
for gamma in (F(2, 5), F(1, 2), F(3, 5)):
    el = frequency_boost(prob, gamma, F(1, 12), F(1, 4), enforce_bound=False)
    f = alpha_frequency(el.counts)
    print(f"  target {gamma}: reached frequency {f} ({float(f):.4f}), "
          f"total {el.value.approx()}")
