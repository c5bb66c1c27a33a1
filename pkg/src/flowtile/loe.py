"""Equidense matching and piecewise-translation orbit maps.

Given two fully tiled sections whose alpha-points occur with the same
uniform frequency, a base order-preserving bijection between the
alpha-point sets extends to a measure-preserving correspondence: each
alpha gap maps to an alpha gap and each beta gap to a beta gap by a pure
translation, so lengths match piece by piece.  The matching machinery
(`match_equidense`) pairs two index sets inside one window by successor
steps, smallest displacement first; whatever stays unmatched at finite
scale is reported as residue, never hidden.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Optional, Sequence

from .quadratic import QuadReal, parse_quadreal
from .pipeline import TiledSection


class MatchState(NamedTuple):
    """Stages of the displacement-k matching and its leftover residue."""

    stages: list[tuple[list[int], list[int]]]   # (A_k, B_k) per k
    pairing: dict[int, int]                     # matched a -> b = a + k
    residue_a: list[int]
    residue_b: list[int]

    def displacement_of(self, a: int) -> int:
        return self.pairing[a] - a


def match_equidense(a_set: Sequence[int], b_set: Sequence[int],
                    max_k: int | None = None) -> MatchState:
    """Pair elements of two index sets by forward successor steps.

    Stage k matches every still-unmatched a in the first set whose k-step
    successor a + k is a still-unmatched member of the second set; a point
    enters stage k only if no smaller displacement worked.  Unmatched
    points on either side are returned as residue.
    """
    a_sorted = sorted(set(a_set))
    b_sorted = sorted(set(b_set))
    if max_k is None:
        hi = max(a_sorted + b_sorted, default=0)
        max_k = hi + 1
    b_free = set(b_sorted)
    a_free = list(a_sorted)
    stages: list[tuple[list[int], list[int]]] = []
    pairing: dict[int, int] = {}
    for k in range(max_k + 1):
        ak = [a for a in a_free if a + k in b_free]
        if ak:
            bk = [a + k for a in ak]
            for a, b in zip(ak, bk):
                pairing[a] = b
                b_free.discard(b)
            a_free = [a for a in a_free if a not in pairing]
            stages.append((ak, bk))
        else:
            stages.append(([], []))
        if not a_free or not b_free:
            break
    return MatchState(stages, pairing, a_free, sorted(b_free))


class Piece(NamedTuple):
    src_lo: QuadReal
    dst_lo: QuadReal
    length: QuadReal
    kind: str  # 'a' or 'b'


@dataclass
class PiecewiseTranslationMap:
    """Paired equal-length intervals, each mapped by a single translation."""

    pieces: list[Piece]
    residue_src: list[int] = field(default_factory=list)
    residue_dst: list[int] = field(default_factory=list)

    def total_length(self) -> tuple[QuadReal, QuadReal]:
        if not self.pieces:
            raise ValueError("empty map has no length")
        src = self.pieces[0].length * 0
        dst = src
        for p in self.pieces:
            src = src + p.length
            dst = dst + p.length
        return src, dst

    def to_json(self) -> dict:
        return {"pieces": [{"src": str(p.src_lo), "dst": str(p.dst_lo),
                            "length": str(p.length), "kind": p.kind}
                           for p in self.pieces],
                "residue_src": self.residue_src,
                "residue_dst": self.residue_dst}

    @classmethod
    def from_json(cls, data: dict) -> "PiecewiseTranslationMap":
        pieces = [Piece(parse_quadreal(p["src"]), parse_quadreal(p["dst"]),
                        parse_quadreal(p["length"]), p["kind"])
                  for p in data["pieces"]]
        return cls(pieces, list(data.get("residue_src", [])),
                   list(data.get("residue_dst", [])))


class FrequencyMismatch(ValueError):
    def __init__(self, f1: Fraction, f2: Fraction):
        super().__init__(f"alpha frequencies differ: {f1} vs {f2}")
        self.f1 = f1
        self.f2 = f2


def _kind_indices(t: TiledSection) -> tuple[list[int], list[int]]:
    a = [i for i, ch in enumerate(t.letters) if ch == "a"]
    b = [i for i, ch in enumerate(t.letters) if ch == "b"]
    return a, b


def build_loe(t1: TiledSection, t2: TiledSection,
              psi: dict[int, int] | None = None) -> PiecewiseTranslationMap:
    """Assemble the piecewise-translation map between two tiled sections.

    psi is an order-preserving bijection between the alpha-point index
    sets (default: k-th to k-th, which requires equal alpha counts); it is
    extended to matched beta-points by conjugating through each section's
    own alpha-to-beta matching.  Beta-points missed by either matching are
    reported as residue.
    """
    if not (t1.is_fully_regular() and t2.is_fully_regular()):
        raise ValueError("both sections must be fully regular")
    a1, b1 = _kind_indices(t1)
    a2, b2 = _kind_indices(t2)
    f1 = Fraction(len(a1), len(t1.letters))
    f2 = Fraction(len(a2), len(t2.letters))
    if f1 != f2 or len(a1) != len(a2):
        raise FrequencyMismatch(f1, f2)
    if psi is None:
        psi = dict(zip(a1, a2))
    else:
        keys = sorted(psi)
        vals = [psi[k] for k in keys]
        if keys != a1 or sorted(vals) != vals or set(vals) - set(a2):
            raise ValueError("psi must map the alpha set order-preservingly")
    theta1 = match_equidense(a1, b1)
    theta2 = match_equidense(a2, b2)
    pieces: list[Piece] = []
    alpha = t1.params.alpha
    beta = t1.params.beta
    for a in a1:
        pieces.append(Piece(t1.positions[a], t2.positions[psi[a]], alpha, "a"))
    # beta points extend the base map: psi(theta1(x)) = theta2(psi(x))
    matched2 = theta2.pairing
    mapped_src_b: set[int] = set()
    mapped_dst_b: set[int] = set()
    for a in a1:
        if a not in theta1.pairing or psi[a] not in matched2:
            continue
        b_src = theta1.pairing[a]
        b_dst = matched2[psi[a]]
        pieces.append(Piece(t1.positions[b_src], t2.positions[b_dst], beta, "b"))
        mapped_src_b.add(b_src)
        mapped_dst_b.add(b_dst)
    res_src = [b for b in b1 if b not in mapped_src_b]
    res_dst = [b for b in b2 if b not in mapped_dst_b]
    pieces.sort(key=lambda p: _PosKey(p.src_lo))
    return PiecewiseTranslationMap(pieces, res_src, res_dst)


class _PosKey:
    __slots__ = ("v",)

    def __init__(self, v):
        self.v = v

    def __lt__(self, other):
        return self.v < other.v


class LoeReport(NamedTuple):
    ok: bool
    failures: list[str]
    piece_count: int
    mapped_length: Optional[QuadReal]


def verify_loe(m: PiecewiseTranslationMap, params=None) -> LoeReport:
    """Check a translation map piece by piece.

    Sources must be pairwise disjoint, likewise targets; every piece's
    declared kind must match its length when params are supplied; lengths
    are shared exactly by construction, so the check is on overlaps and
    kinds.  An empty map passes vacuously.
    """
    failures: list[str] = []
    if not m.pieces:
        return LoeReport(True, [], 0, None)
    for label, key in (("source", lambda p: p.src_lo), ("target", lambda p: p.dst_lo)):
        ordered = sorted(m.pieces, key=lambda p: _PosKey(key(p)))
        for x, y in zip(ordered, ordered[1:]):
            if key(y) < key(x) + x.length:
                failures.append(f"{label} pieces overlap at {key(y)}")
    total = m.pieces[0].length * 0
    for i, p in enumerate(m.pieces):
        if p.kind not in ("a", "b"):
            failures.append(f"piece {i}: unknown kind {p.kind!r}")
        if params is not None:
            want = params.alpha if p.kind == "a" else params.beta
            if p.length != want:
                failures.append(f"piece {i}: kind {p.kind} but length {p.length}")
        total = total + p.length
    return LoeReport(not failures, failures, len(m.pieces), total)
