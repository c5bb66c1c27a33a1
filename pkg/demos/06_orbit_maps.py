"""Matching two tiled sections by a piecewise-translation orbit map.

Two sections with the same alpha-frequency pair off: the k-th alpha gap of
one maps to the k-th alpha gap of the other, and beta gaps follow by
conjugating through each section's own alpha-to-beta matching.  Every
piece is a pure translation of length alpha or beta, so the map preserves
length piece by piece; whatever the finite matching leaves over is
reported as residue rather than swept away.
"""

from fractions import Fraction as F

from flowtile import (GeneratorSpec, build_loe, build_schedule,
                      default_params, full_pipeline, generate,
                      match_equidense, verify_loe)

P = default_params()
sched = build_schedule(P, depth=2)

print("== equidense matching by successor steps ==")
evens = list(range(0, 40, 2))
odds = list(range(1, 40, 2))
st = match_equidense(evens, odds)
print(f"  evens vs odds on 40 indices: all matched at displacement 1: "
      f"{all(st.pairing[a] == a + 1 for a in evens)}")
print(f"  residue: {len(st.residue_a)} + {len(st.residue_b)}")

print("\n== residue decays as windows grow ==")
def rotation_set(n, num, den, offset=0):
    return [i for i in range(n) if (offset + (i + 1) * num) % (2 * den) < den]

for n in (100, 1000, 10000):
    a = rotation_set(n, 377, 610)
    b = rotation_set(n, 233, 377, offset=89)
    st = match_equidense(a, b)
    frac = F(len(st.residue_a) + len(st.residue_b), len(a) + len(b))
    print(f"  n = {n:>5}: residue fraction {frac} ({float(frac):.5f})")

print("\n== a translation map between two tiled sections ==")
w = generate(GeneratorSpec("uniform", count=200, seed=5, k0=sched.K[0]))
t1 = full_pipeline(w, sched, seed=5)
# a second section with the same letters in reverse: same frequency exactly
from flowtile import TiledSection, quad
letters = t1.letters[::-1]
pos = [quad(0)]
for ch in letters:
    pos.append(pos[-1] + (P.alpha if ch == "a" else P.beta))
t2 = TiledSection(P, pos, letters, [1] * len(pos), list(range(len(pos))))

m = build_loe(t1, t2)
rep = verify_loe(m, P)
print(f"  pieces: {rep.piece_count}; verified: {rep.ok}")
src, dst = m.total_length()
print(f"  mapped length source = target: {src == dst} ({src.approx()})")
print(f"  beta residue: {len(m.residue_src)} source / {len(m.residue_dst)} "
      f"target points await a longer window")
