"""Chain classes, nested two-class blocks, and block insertion.

The K-chain relation joins window points connected by gaps of size at most
K.  The nested block construction produces point sets whose classes split
exactly two ways at every threshold, and insert_blocks plants such blocks
inside a sparse window so the same nesting holds globally while every gap
lands near the midpoint of two consecutive thresholds.
"""

import random

from flowtile import (OrbitWindow, chain_classes, insert_blocks,
                      is_sparse_window, marker_subsection, quad,
                      two_class_block)

ks = [quad(2), quad(4), quad(8), quad(16)]
pts, length = two_class_block(ks)
print(f"== nested block for thresholds {[str(k) for k in ks]} ==")
print(f"  positions: {[str(p) for p in pts]}")
print(f"  length b = {length}")
print(f"  gap ruler: "
      f"{[str(b - a) for a, b in zip(pts, pts[1:])]}")
w = OrbitWindow(pts)
for i in range(len(ks) - 1):
    up = chain_classes(w, ks[i + 1]).classes
    splits = [len(chain_classes(OrbitWindow([pts[j] for j in c]), ks[i]).classes)
              for c in up]
    print(f"  classes at K={ks[i + 1]}: {len(up)}, each splitting into "
          f"{set(splits)} classes at K={ks[i]}")

print("\n== inserting blocks into a sparse window ==")
rng = random.Random(3)
pos = [quad(0)]
for _ in range(12):
    pos.append(pos[-1] + quad(rng.choice([10, 100, 1000])))
sparse = OrbitWindow(pos)
print(f"  input: {len(sparse)} points, sparse: "
      f"{is_sparse_window(sparse, quad(500))}")
out = insert_blocks(sparse, ks, quad(1))
print(f"  output: {len(out)} points; every gap within 1 of a threshold "
      f"midpoint, original points kept")

print("\n== marker thinning ==")
w = OrbitWindow([quad(i) for i in range(23)])
marks = marker_subsection(w, 3)
print(f"  d = 3 on 23 points -> markers at {marks.indices}")
print(f"  index gaps: "
      f"{[b - a for a, b in zip(marks.indices, marks.indices[1:])]}"
      f"  (all 3 or 4)")
