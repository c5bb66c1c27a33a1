"""Finite orbit windows: gap structure, chain classes, and block surgery.

An :class:`OrbitWindow` models one orbit segment of a cross section as a
strictly increasing list of exact positions.  On top of it live the
K-chain equivalence (maximal runs of gaps at most K), marker thinning with
two-valued index gaps, sections with gaps confined to [k, K], and the
nested two-class blocks that, once inserted into a sparse window, give
every chain class at one threshold at least two subclasses at the next
threshold down.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

from .quadratic import QuadReal, parse_quadreal, quad


class SparsityError(ValueError):
    """A window cannot host the requested insertion; carries the gap index."""

    def __init__(self, msg, gap_index=None, gap=None):
        super().__init__(msg)
        self.gap_index = gap_index
        self.gap = gap


@dataclass(frozen=True)
class Periodic:
    circumference: QuadReal


class OrbitWindow:
    """Strictly increasing positions with an open or periodic boundary."""

    __slots__ = ("positions", "boundary")

    def __init__(self, positions: Sequence[QuadReal], boundary="open"):
        positions = tuple(positions)
        if not positions:
            raise ValueError("window needs at least one point")
        for a, b in zip(positions, positions[1:]):
            if not a < b:
                raise ValueError("positions must be strictly increasing")
        if isinstance(boundary, Periodic):
            span = positions[-1] - positions[0]
            if not span < boundary.circumference:
                raise ValueError("circumference must exceed the window span")
        elif boundary != "open":
            raise ValueError("boundary must be 'open' or Periodic(...)")
        self.positions = positions
        self.boundary = boundary

    @property
    def periodic(self) -> bool:
        return isinstance(self.boundary, Periodic)

    def __len__(self):
        return len(self.positions)

    def gaps(self) -> list[QuadReal]:
        """Consecutive differences; periodic windows append the wrap gap."""
        out = [b - a for a, b in zip(self.positions, self.positions[1:])]
        if self.periodic:
            out.append(self.boundary.circumference -
                       (self.positions[-1] - self.positions[0]))
        return out

    def span(self) -> QuadReal:
        return self.positions[-1] - self.positions[0]

    def to_json(self) -> dict:
        d = {"boundary": "periodic" if self.periodic else "open",
             "positions": [str(p) for p in self.positions]}
        if self.periodic:
            d["circumference"] = str(self.boundary.circumference)
        return d

    @classmethod
    def from_json(cls, data: dict) -> "OrbitWindow":
        boundary = data.get("boundary", "open")
        if boundary == "periodic":
            boundary = Periodic(parse_quadreal(data["circumference"]))
        return cls([parse_quadreal(p) for p in data["positions"]], boundary)


class ChainClasses(NamedTuple):
    """Partition of point indices into maximal runs joined by gaps <= k."""

    threshold: QuadReal
    classes: tuple[tuple[int, ...], ...]
    wrapped: bool  # periodic window whose first and last runs joined


def chain_classes(w: OrbitWindow, k: QuadReal) -> ChainClasses:
    if k.sign() <= 0:
        raise ValueError("threshold must be positive")
    gaps = w.gaps()
    runs: list[list[int]] = [[0]]
    inner = gaps[:-1] if w.periodic else gaps
    for i, g in enumerate(inner):
        if k < g:
            runs.append([i + 1])
        else:
            runs[-1].append(i + 1)
    wrapped = False
    if w.periodic and len(runs) > 1 and not k < gaps[-1]:
        runs[-1].extend(runs[0])
        runs = runs[1:]
        wrapped = True
    elif w.periodic and len(runs) == 1 and not k < gaps[-1]:
        wrapped = True
    return ChainClasses(k, tuple(tuple(r) for r in runs), wrapped)


class MarkerResult(NamedTuple):
    indices: tuple[int, ...]
    truncated: bool


def marker_subsection(w: OrbitWindow, d: int) -> MarkerResult:
    """Thin the window to markers whose index gaps are exactly d or d+1.

    Anchored at the leftmost index.  A final stretch too short to split as
    m*d + n*(d+1) is left unmarked and flagged as truncated.
    """
    if d < 1:
        raise ValueError("d must be at least 1")
    total = len(w) - 1
    if total == 0:
        return MarkerResult((0,), False)

    def split(base: int, length: int) -> list[int]:
        # length = (q - r)*d + r*(d+1) with q = length//d, r = length%d
        q, r = divmod(length, d)
        out = []
        pos = base
        for _ in range(q - r):
            pos += d
            out.append(pos)
        for _ in range(r):
            pos += d + 1
            out.append(pos)
        return out

    def splittable(length: int) -> bool:
        q, r = divmod(length, d)
        return q >= r

    dd = d * d
    segs = total // dd
    tail = total - segs * dd
    marks = [0]
    base = 0
    for s in range(segs):
        length = dd
        if s == segs - 1 and tail and splittable(dd + tail):
            length = dd + tail
            tail = 0
        marks.extend(split(base, length))
        base = marks[-1]
    truncated = False
    if tail:
        if splittable(tail):
            marks.extend(split(base, tail))
        else:
            truncated = True
    return MarkerResult(tuple(marks), truncated)


def bounded_gap_section(a: QuadReal, b: QuadReal, k_lo: QuadReal,
                        k_hi: QuadReal) -> OrbitWindow:
    """Points a = z_0 < ... < z_m = b with all gaps inside [k_lo, k_hi]."""
    if not (k_lo.sign() > 0 and k_lo < k_hi):
        raise ValueError("need 0 < k_lo < k_hi")
    span = b - a
    if span.sign() <= 0:
        raise ValueError("empty span")
    m = (span / k_hi).ceil()
    m = max(m, 1)
    if (span / m) < k_lo:
        raise SparsityError(f"span {span} too short for gaps in [{k_lo}, {k_hi}]")
    step = span / m
    pts = [a + step * i for i in range(m)] + [b]
    return OrbitWindow(pts)


def two_class_block(k_list: Sequence[QuadReal]) -> tuple[list[QuadReal], QuadReal]:
    """The nested block for an increasing threshold list, plus its length.

    One point for a single threshold; each further threshold doubles the
    block, the copy offset by the current length plus the midpoint of the
    two newest thresholds.  Every chain class at threshold k_{n+1} inside
    the block splits into exactly two classes at k_n.
    """
    if not k_list:
        raise ValueError("need at least one threshold")
    for x, y in zip(k_list, k_list[1:]):
        if not x < y:
            raise ValueError("thresholds must be strictly increasing")
    zero = quad(0, 0, k_list[0].d)
    pts = [zero]
    length = zero
    for prev, nxt in zip(k_list, k_list[1:]):
        shift = length + (prev + nxt) / 2
        pts = pts + [p + shift for p in pts]
        length = length + shift
    return pts, length


def ruler_levels(top: int) -> list[int]:
    """Gap levels of the full nested block with top level ``top``:
    e.g. top=2 -> [0, 1, 0, 2, 0, 1, 0]."""
    if top < 0:
        return []
    seq = [0]
    for lev in range(1, top + 1):
        seq = seq + [lev] + seq
    return seq


def is_sparse_window(w: OrbitWindow, n_threshold: QuadReal) -> bool:
    """Finite surrogate of bi-infinitely unbounded gaps: a gap at least
    n_threshold occurs in both halves of the gap sequence."""
    gaps = w.gaps()
    if not gaps:
        return False
    mid = len(gaps) // 2
    left, right = gaps[:mid], gaps[mid:]
    if not left:
        left = right
    big = lambda gs: any(not g < n_threshold for g in gs)
    return big(left) and big(right)


# -- block insertion ----------------------------------------------------------


def level_midpoints(k_list: Sequence[QuadReal]) -> list[QuadReal]:
    return [(a + b) / 2 for a, b in zip(k_list, k_list[1:])]


def _fill_plan(gap: QuadReal, eps: QuadReal, mids: list[QuadReal],
               block_lens: list[QuadReal], hosting: list[QuadReal]):
    """Choose a gap-level sequence summing to ``gap`` within per-gap slack.

    The fill is one full nested block of the highest level the gap can
    host, padded by repeated level-0 blocks; every realized gap level sits
    within eps of its midpoint.  Returns (levels, per_gap_adjust) or None.
    """
    avg0 = mids[0]
    t_max = len(mids) - 1
    for t in range(t_max, -1, -1):
        if t > 0 and not hosting[t] < gap:
            continue
        seq0 = ruler_levels(t)
        base = sum((mids[lev] for lev in seq0), quad(0, 0, gap.d))
        # pad with s extra level-0 ruler blocks: each adds one avg0 gap
        rem = gap - base
        s_mid = (rem / avg0).floor()
        for s in (s_mid, s_mid + 1, s_mid - 1, s_mid + 2):
            if s < 0:
                continue
            count = len(seq0) + s
            slack = gap - base - avg0 * s
            if abs(slack) < eps * count:  # per-gap adjustment stays under eps
                return seq0 + [0] * s, slack / count
    return None


def insert_blocks(w: OrbitWindow, k_list: Sequence[QuadReal],
                  eps: QuadReal) -> OrbitWindow:
    """Enrich a sparse window so its chain classes nest two-by-two.

    Output guarantees, all verified before returning: every gap exceeds the
    lowest threshold, every gap lies within eps of the midpoint of two
    consecutive thresholds, and every interior chain class at one realized
    threshold contains at least two classes at the previous one.  Original
    points are preserved; a gap that cannot host any conforming fill raises
    :class:`SparsityError` naming it.
    """
    k_list = list(k_list)
    if len(k_list) < 2:
        raise ValueError("need at least two thresholds")
    for a, b in zip(k_list, k_list[1:]):
        if b < a + eps * 2:
            raise ValueError("thresholds must be at least 2*eps apart")
    if eps.sign() <= 0:
        raise ValueError("eps must be positive")
    mids = level_midpoints(k_list)
    block_lens = [two_class_block(k_list[:t + 1])[1] for t in range(len(k_list))]
    # hosting threshold per level (verified afterwards, not trusted)
    hosting = [block_lens[t] * 2 + k_list[min(t + 1, len(k_list) - 1)] * 2 + 2
               for t in range(len(k_list))]

    gaps = w.gaps() if not w.periodic else w.gaps()[:-1]
    if _already_conforming(gaps, mids, eps):
        return w

    new_pts: list[QuadReal] = [w.positions[0]]
    for gi, gap in enumerate(gaps):
        plan = _fill_plan(gap, eps, mids, block_lens, hosting)
        if plan is None:
            raise SparsityError(
                f"gap {gi} of size {gap} admits no conforming fill",
                gap_index=gi, gap=gap)
        levels, adjust = plan
        pos = new_pts[-1]
        for lev in levels:
            pos = pos + mids[lev] + adjust
            new_pts.append(pos)
        # exactness: the final point must land on the original
        if new_pts[-1] != w.positions[gi + 1]:
            raise AssertionError("fill arithmetic did not close the gap exactly")
    out = OrbitWindow(new_pts, w.boundary)
    _verify_inserted(out, k_list, mids, eps)
    return out


def _already_conforming(gaps, mids, eps) -> bool:
    levels = []
    for g in gaps:
        lev = _gap_level(g, mids, eps)
        if lev is None:
            return False
        levels.append(lev)
    return _nested_runs_ok(levels)


def _gap_level(g, mids, eps) -> Optional[int]:
    for lev, m in enumerate(mids):
        if abs(g - m) < eps:
            return lev
    return None


def _nested_runs_ok(levels: list[int]) -> bool:
    """Interior maximal runs of levels <= n must contain an n, and no two
    adjacent gaps may both exceed level 0 (no singleton interior classes)."""
    if not levels:
        return True
    for a, b in zip(levels, levels[1:]):
        if a >= 1 and b >= 1:
            return False
    top = max(levels)
    for n in range(top):
        i = 0
        runs = []
        cur = None
        for j, lev in enumerate(levels):
            if lev <= n:
                if cur is None:
                    cur = [j, j]
                cur[1] = j
            else:
                if cur is not None:
                    runs.append((cur, True))
                cur = None
        if cur is not None:
            runs.append((cur, False))  # touches right boundary
        for idx, ((lo, hi), closed_right) in enumerate(runs):
            interior = (lo > 0) and (closed_right or idx < len(runs) - 1)
            if not interior:
                continue  # boundary classes exempt in open windows
            if not any(levels[j] == n for j in range(lo, hi + 1)):
                return False
    return True


def _verify_inserted(out: OrbitWindow, k_list, mids, eps):
    gaps = out.gaps() if not out.periodic else out.gaps()[:-1]
    levels = []
    for gi, g in enumerate(gaps):
        if not k_list[0] < g:
            raise SparsityError(f"output gap {gi} not above the base threshold",
                                gap_index=gi, gap=g)
        lev = _gap_level(g, mids, eps)
        if lev is None:
            raise SparsityError(f"output gap {gi} near no threshold midpoint",
                                gap_index=gi, gap=g)
        levels.append(lev)
    if not _nested_runs_ok(levels):
        raise SparsityError("nested class structure failed verification")
