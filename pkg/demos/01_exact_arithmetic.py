"""Exact arithmetic on Q(sqrt(2)): ordering, gcds, and the remainder ladder.

Everything in this package runs on numbers of the form r + s*sqrt(D) with
rational r, s.  Comparisons never touch floating point: the sign of such a
number is decided by integer case analysis and squaring.
"""

from fractions import Fraction as F

from flowtile import gcd_ladder, quad, real_gcd, sqrtD

one = quad(1)
root2 = sqrtD()

print("== ordering is exact ==")
print(f"1 < sqrt(2)?           {one < root2}")
print(f"5*sqrt(2) vs 7:        {'>' if quad(0, 5) > quad(7) else '<='}  "
      f"(because 50 > 49 after squaring)")
x = quad(F(3, 2), F(-1, 2))
print(f"canonical text form:   {x}   ({x.approx()})")

print("\n== real gcd ==")
print(f"gcd(3/2, 1/2)       = {real_gcd(quad(F(3, 2)), quad(F(1, 2)))}")
print(f"gcd(3*sqrt2, 2*sqrt2) = {real_gcd(quad(0, 3), quad(0, 2))}")
print(f"gcd(1, sqrt2)       = {real_gcd(one, root2)}   (rationally independent)")

print("\n== the remainder ladder ==")
print("start from a = -1, b = sqrt(2); each row folds one into the other")
rows, coeffs = gcd_ladder(quad(-1), root2, delta=quad(F(1, 1000)))
for i, (a, b, l, lp) in enumerate(rows, 1):
    print(f"  step {i}: a = {str(a):>22}  b = {str(b):>22}  (l={l}, l'={lp})")
p, q, pp, qq = coeffs
print(f"final coefficients: a_K = {p}*(-1) + {q}*sqrt2, "
      f"b_K = {pp}*(-1) + {qq}*sqrt2")
print("independent inputs shrink forever; rationally dependent ones stop at")
print(f"their gcd exactly: ladder(-3, 2) ends at "
      f"{gcd_ladder(quad(-3), quad(2))[0][-1][0]}")
