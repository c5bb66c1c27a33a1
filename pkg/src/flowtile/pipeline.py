"""Tiling pipelines: turn an orbit window into a two-valued gap section.

Two cooperating constructions, driven by one :class:`Schedule`:

* block growth (:func:`build_rank_blocks`): pick well-spaced pairs of
  adjacent blocks, nudge the right member so the pair gap becomes
  tileable, tile it, and repeat at the next rank with composite shifts
  whose witnesses decompose through every lower rank;
* gap finishing (:func:`sparse_tile`): within each chain class, walk the
  untiled gaps left to right, steering each onto a nearby tileable value
  while the running deviation stays inside the stage corridor, then tile
  with evenly mixed words.

:func:`full_pipeline` composes them: grow blocks, classify what remains,
finish every class, and attach partition witnesses certifying the uniform
alpha-frequency of the result.  All checks are exact.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Optional, Sequence

from .quadratic import QuadReal, parse_quadreal, qmax, qmin, quad
from .tiles import (DensityWitness, FreqBand, Params, TileVector,
                    alpha_frequency, balanced_word, density_witness,
                    enumerate_tileable, eps_dense)
from .windows import OrbitWindow, chain_classes

FULLY_REGULAR = "fully_regular"
HALF_TILED = "half_tiled"
FINITE_CLASSES = "finite_classes"


class TilingError(RuntimeError):
    pass


class WitnessError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# schedule


@dataclass
class Schedule:
    """Stage constants for the pipelines.

    eps[n] bounds every shift applied at stage n; eta[j] is the frequency
    tolerance certified at witness level j; K[n] are the chain thresholds;
    near[n] is the tile budget that can flip a stage-n block's frequency
    across rho; the last L sequence bounds witness piece values per level.
    """

    params: Params
    depth: int
    eps: list[QuadReal]          # 1-indexed; eps[0] is zero padding
    eta: list[Fraction]          # eta[0] = 1
    nu: list[Fraction]
    nu_p: list[Fraction]
    K: list[QuadReal]            # K[0] .. K[depth]
    near: list[int]              # near[0] = 1
    L_stages: list[list[QuadReal]]
    pair_spacing: list[int]
    witnesses: list[tuple[int, FreqBand, DensityWitness]] = field(default_factory=list)
    density_log: list[str] = field(default_factory=list)

    @property
    def L(self) -> list[QuadReal]:
        return self.L_stages[-1]

    def rank_bound(self, rank: int) -> QuadReal:
        """Largest shift a rank-`rank` point may receive at any later stage."""
        return self.eps[min(rank + 1, len(self.eps) - 1)]

    def shift_budget(self) -> QuadReal:
        total = quad(0, 0, self.params.d)
        for e in self.eps[1:]:
            total = total + e
        return total

    def validate(self):
        p = self.params
        budget = qmin(p.alpha, quad(1, 0, p.d)) / 3
        if budget < self.shift_budget():
            raise ValueError("stage shift budgets exceed min(alpha,1)/3")
        if self.eta[0] != 1:
            raise ValueError("eta_0 must be 1")
        if self.eta[1] > min(p.rho, 1 - p.rho):
            raise ValueError("eta_1 must be at most min(rho, 1-rho)")
        for a, b in zip(self.eta, self.eta[1:]):
            if not b < a:
                raise ValueError("eta must decrease strictly")
        for n in range(len(self.nu)):
            if not (self.eta[n + 1] < self.nu_p[n] < self.nu[n] < self.eta[n]):
                raise ValueError("nu bands must nest strictly between etas")
        for a, b in zip(self.K, self.K[1:]):
            if b < a + 4:
                raise ValueError("chain thresholds must step by at least 4")
        for n, (prev, cur) in enumerate(zip(self.L_stages, self.L_stages[1:]),
                                        start=1):
            if prev[:n] != cur[:n]:
                raise ValueError("L sequences must agree on the settled prefix")
        for seq in self.L_stages:
            for a, b in zip(seq, seq[1:]):
                if not a < b:
                    raise ValueError("each L sequence must increase strictly")

    def to_json(self) -> dict:
        return {
            "alpha": str(self.params.alpha), "beta": str(self.params.beta),
            "rho": str(self.params.rho), "depth": self.depth,
            "eps": [str(e) for e in self.eps[1:]],
            "eta": [str(e) for e in self.eta],
            "K": [str(k) for k in self.K],
            "near": self.near,
            "L": [str(v) for v in self.L],
            "pair_spacing": self.pair_spacing,
        }


def build_schedule(params: Params, eta_seq: Sequence[Fraction] | None = None,
                   depth: int = 4, k0: QuadReal | None = None,
                   k_seq: Sequence[QuadReal] | None = None,
                   pair_spacing: int = 3,
                   verify_windows: int = 10) -> Schedule:
    """Derive stage constants, discharging every density assumption.

    Chain thresholds are not trusted from closed-form bounds: K_0 and each
    K_{n+1} grow until the tileable candidates are verified dense enough
    for the stage corridor on the gap ranges the stage will actually see.
    Each stage band also gets an asymptotic density witness family,
    checked on ``verify_windows`` disjoint windows above its threshold.
    """
    one = quad(1, 0, params.d)
    if eta_seq is None:
        scale = min(params.rho, 1 - params.rho)
        eta = [Fraction(1)] + [scale / 2 ** n for n in range(depth + 1)]
    else:
        eta = [Fraction(e) for e in eta_seq]
        if len(eta) < depth + 2:
            raise ValueError("eta sequence shorter than depth + 2")
    base = qmin(params.alpha, one) / 3
    eps = [quad(0, 0, params.d)] + [base / (2 ** n) for n in range(1, depth + 2)]
    nu = [eta[n + 1] + Fraction(2, 3) * (eta[n] - eta[n + 1]) for n in range(depth + 1)]
    nu_p = [eta[n + 1] + Fraction(1, 3) * (eta[n] - eta[n + 1]) for n in range(depth + 1)]

    log: list[str] = []

    def corridor_ok(lo: QuadReal, hi: QuadReal, width: QuadReal) -> bool:
        vals = [v.value(params) for v in enumerate_tileable(params, lo, hi)]
        return eps_dense(vals, lo, hi, width).ok

    floor_k0 = qmax(one * 4, params.beta * 4)
    if k_seq is not None:
        K = list(k_seq)
        if len(K) != depth + 1:
            raise ValueError("k_seq must have depth + 1 thresholds")
        if K[0] < floor_k0:
            raise ValueError("K_0 below 4*max(1, beta)")
        for n in range(1, depth + 1):
            mid = (K[n - 1] + K[n]) / 2
            if not corridor_ok(mid - 3, mid + 3, eps[n] * 2):
                raise ValueError(f"supplied K_{n} fails the stage-{n} corridor "
                                 f"density check")
            log.append(f"K{n}={K[n]}: corridor {eps[n] * 2} verified (supplied)")
    else:
        K = [k0 if k0 is not None else quad(floor_k0.ceil(), 0, params.d)]
        while not corridor_ok(K[0] - 2, K[0] + 8, eps[1] * 2):
            K[0] = K[0] + 1
        if K[0] < floor_k0:
            raise ValueError("K_0 fell below 4*max(1, beta)")
        log.append(f"K0={K[0]}: tileables {eps[1] * 2}-dense on [K0-2, K0+8]")
        for n in range(1, depth + 1):
            cand = K[n - 1] + 4
            while True:
                mid = (K[n - 1] + cand) / 2
                if corridor_ok(mid - 3, mid + 3, eps[n] * 2):
                    break
                cand = cand + 2
            K.append(cand)
            log.append(f"K{n}={cand}: corridor {eps[n] * 2} verified near the "
                       f"midpoint")

    near = [1] + [((K[n] + 1) / params.alpha).floor() for n in range(1, depth + 1)]

    # witness piece budget: predicted compensated run length per eta level
    letters_max = ((K[depth] + 3) / params.alpha).floor() + 1
    dev_range = 4 * params.rho.denominator * letters_max

    def run_len(etaj: Fraction) -> int:
        return int(Fraction(dev_range) / (etaj * params.rho.denominator)) + 1

    L0: list[QuadReal] = [params.beta]
    for j in range(1, depth + 1):
        n_val = params.beta * run_len(eta[j])
        L0.append(qmax(L0[-1] + 1, n_val * 2 + 4))
    L_stages = [list(L0) for _ in range(depth + 1)]

    sched = Schedule(params, depth, eps, eta, nu, nu_p, K, near, L_stages,
                     [pair_spacing] * (depth + 2), [], log)

    for n in range(1, depth + 1):
        for band in (FreqBand(params.rho + nu_p[n], params.rho + nu[n]),
                     FreqBand(params.rho - nu[n], params.rho - nu_p[n])):
            stage_eps = eps[min(n + 1, depth + 1)]
            wit = density_witness(params, stage_eps, band)
            width = params.beta * 20
            for w in range(verify_windows):
                lo = wit.threshold + width * (2 * w)
                hi = lo + width
                vals = [v for v, _ in wit.values_in(lo, hi)]
                rep = eps_dense(vals, lo, hi, stage_eps)
                if not rep.ok:
                    raise ValueError(f"density witness failed at stage {n}, "
                                     f"band {band}, window {w}: {rep.witness}")
            sched.witnesses.append((n, band, wit))
    sched.validate()
    return sched


# ---------------------------------------------------------------------------
# tiled sections


class PartitionWitness(NamedTuple):
    """Cut positions certifying one frequency level of a regular section."""

    level: int
    max_value: QuadReal
    eta: Fraction
    cuts: tuple[int, ...]  # gap indices; pieces are [cuts[i], cuts[i+1])

    def replay(self, section: "TiledSection") -> bool:
        params = section.params
        n = len(section.letters)
        if not self.cuts or self.cuts[0] != 0 or self.cuts[-1] != n:
            return False
        rho = params.rho
        for a, b in zip(self.cuts, self.cuts[1:]):
            if not a < b:
                return False
            seg = section.letters[a:b]
            if any(ch is None for ch in seg):
                return False
            p = seg.count("a")
            q = len(seg) - p
            if self.max_value < params.value(p, q):
                return False
            if abs(Fraction(p, p + q) - rho) > self.eta:
                return False
        return True


class ShiftEvent(NamedTuple):
    phase: str
    stage: int
    bound: QuadReal
    shift: QuadReal


class TiledSection:
    """A window whose gaps are (partially) tiled, with provenance.

    positions/letters describe the current section; letters[i] is 'a' or
    'b' when the gap (i, i+1) is exactly alpha or beta, else None.  ranks
    give the growth stage that produced each point's block; orig_ids map
    points back to the input window, and shift events record every nudge
    an original point received together with its stage bound.
    """

    def __init__(self, params: Params, positions, letters, ranks, orig_ids,
                 schedule: Schedule | None = None):
        self.params = params
        self.positions = list(positions)
        self.letters = list(letters)
        self.ranks = list(ranks)
        self.orig_ids = list(orig_ids)
        self.schedule = schedule
        self.origin_pos: dict[int, QuadReal] = {}
        self.shift_events: dict[int, list[ShiftEvent]] = {}
        self.witnesses: list[PartitionWitness] = []
        self.shift_chains: list[dict] = []
        self.notes: list[str] = []

    @classmethod
    def from_window(cls, params: Params, w: OrbitWindow,
                    schedule: Schedule | None = None) -> "TiledSection":
        t = cls(params, list(w.positions), [None] * (len(w) - 1),
                [0] * len(w), list(range(len(w))), schedule)
        t.origin_pos = {i: p for i, p in enumerate(w.positions)}
        return t

    def window(self) -> OrbitWindow:
        return OrbitWindow(self.positions)

    def gap_values(self):
        return [b - a for a, b in zip(self.positions, self.positions[1:])]

    def is_fully_regular(self) -> bool:
        return all(ch is not None for ch in self.letters)

    def regular_runs(self) -> list[tuple[int, int]]:
        """Maximal point-index runs [i, j] joined by lettered gaps."""
        runs = []
        i = 0
        npts = len(self.positions)
        while i < npts:
            j = i
            while j < npts - 1 and self.letters[j] is not None:
                j += 1
            runs.append((i, j))
            i = j + 1
        return runs

    def run_counts(self, run: tuple[int, int]) -> TileVector:
        i, j = run
        seg = self.letters[i:j]
        p = seg.count("a")
        return TileVector(p, len(seg) - p)

    def displacements(self) -> dict[int, QuadReal]:
        out = {}
        for idx, oid in enumerate(self.orig_ids):
            if oid is not None:
                out[oid] = self.positions[idx] - self.origin_pos[oid]
        return out

    def record_shift(self, oid: int, phase: str, stage: int, bound: QuadReal,
                     shift: QuadReal):
        self.shift_events.setdefault(oid, []).append(
            ShiftEvent(phase, stage, bound, shift))

    def counts(self) -> TileVector:
        p = sum(1 for ch in self.letters if ch == "a")
        q = sum(1 for ch in self.letters if ch == "b")
        return TileVector(p, q)

    def to_json(self) -> dict:
        return {
            "alpha": str(self.params.alpha), "beta": str(self.params.beta),
            "rho": str(self.params.rho),
            "positions": [str(p) for p in self.positions],
            "letters": ["" if ch is None else ch for ch in self.letters],
            "ranks": self.ranks,
            "orig_ids": [-1 if o is None else o for o in self.orig_ids],
            "origin_positions": {str(k): str(v) for k, v in self.origin_pos.items()},
            "witnesses": [
                {"level": w.level, "max_value": str(w.max_value),
                 "eta": str(w.eta), "cuts": list(w.cuts)}
                for w in self.witnesses],
            "notes": self.notes,
        }

    @classmethod
    def from_json(cls, data: dict) -> "TiledSection":
        params = Params(parse_quadreal(data["alpha"]), parse_quadreal(data["beta"]),
                        Fraction(data["rho"]))
        t = cls(params,
                [parse_quadreal(p) for p in data["positions"]],
                [None if ch == "" else ch for ch in data["letters"]],
                list(data["ranks"]),
                [None if o == -1 else o for o in data["orig_ids"]])
        t.origin_pos = {int(k): parse_quadreal(v)
                        for k, v in data.get("origin_positions", {}).items()}
        t.witnesses = [PartitionWitness(w["level"], parse_quadreal(w["max_value"]),
                                        Fraction(w["eta"]), tuple(w["cuts"]))
                       for w in data.get("witnesses", [])]
        t.notes = list(data.get("notes", []))
        return t


# ---------------------------------------------------------------------------
# plan application: the carry rule


def _apply_gap_plan(t: TiledSection, plan: dict[int, TileVector], stage: int,
                    phase: str):
    """Retile the planned gaps and propagate the induced shifts.

    Walking left to right, a running carry holds the displacement of the
    current point: a planned gap adds (new value - old gap) to it, a
    lettered gap transports it rigidly (blocks move as one), and a bare
    unplanned gap absorbs it back to zero.  Every shifted point is checked
    against the bound for its rank before promotion.
    """
    params = t.params
    sched = t.schedule
    zero = quad(0, 0, params.d)
    new_pos: list[QuadReal] = []
    new_letters: list[Optional[str]] = []
    new_ranks: list[int] = []
    new_orig: list[Optional[int]] = []
    planned_letter_idx: list[int] = []
    carry = zero
    npts = len(t.positions)
    for i in range(npts):
        pos = t.positions[i] + carry
        oid = t.orig_ids[i]
        if not carry.is_zero():
            if sched is None:
                bound = None
            elif phase == "grow":
                # growth shifts are rank-indexed: a rank-j atom never moves
                # by eps_{j+1} or more
                bound = sched.rank_bound(t.ranks[i])
            else:
                bound = sched.eps[min(stage, len(sched.eps) - 1)]
            if bound is not None and not abs(carry) < bound:
                raise TilingError(
                    f"shift {carry} at point {i} (rank {t.ranks[i]}) exceeds "
                    f"its bound {bound}")
            if oid is not None:
                t.record_shift(oid, phase, stage, bound if bound is not None
                               else abs(carry) + 1, carry)
        new_pos.append(pos)
        new_ranks.append(t.ranks[i])
        new_orig.append(oid)
        if i == npts - 1:
            break
        if i in plan:
            vec = plan[i]
            d_old = t.positions[i + 1] - t.positions[i]
            carry = carry + (vec.value(params) - d_old)
            word = balanced_word(vec)
            planned_letter_idx.append(len(new_letters))
            run = pos
            for ch in word.letters[:-1]:
                run = run + (params.alpha if ch == "a" else params.beta)
                new_letters.append(ch)
                new_pos.append(run)
                new_ranks.append(stage)
                new_orig.append(None)
            new_letters.append(word.letters[-1])
        else:
            new_letters.append(t.letters[i])
            if t.letters[i] is None:
                carry = zero
    t.positions = new_pos
    t.letters = new_letters
    t.ranks = new_ranks
    t.orig_ids = new_orig
    # promote every run that swallowed a planned gap to the current stage
    marks = set(planned_letter_idx)
    for i, j in t.regular_runs():
        if any(i <= g < j for g in marks):
            for k in range(i, j + 1):
                t.ranks[k] = max(t.ranks[k], stage)


# ---------------------------------------------------------------------------
# block growth


class _Atom(NamedTuple):
    kind: str            # "gap" or "block"
    span: QuadReal       # gap value or block length
    counts: TileVector   # zero for gaps
    gap_index: int       # left point index (gaps); -1 for blocks
    rank: int            # rank of the atom right of this gap / of the block


def build_rank_blocks(w: OrbitWindow, schedule: Schedule, stages: int,
                      seed: int = 0) -> TiledSection:
    """Grow tiled blocks of increasing rank inside a bounded-gap window.

    Stage 1 pairs isolated points; stage k pairs adjacent rank-(k-1)
    blocks, shifting the right one by less than eps_k along an admissible
    composite value whose witness decomposes into lower-rank shifts (each
    rank-j atom moves by less than eps_{j+1}).  Between the pairs of each
    stage, the spacing policy leaves pair_spacing..2*pair_spacing+1 blocks
    untouched.
    """
    params = schedule.params
    if w.periodic:
        raise ValueError("tiling pipelines operate on open windows")
    rng = random.Random(seed)
    t = TiledSection.from_window(params, w, schedule)
    if stages == 0:
        return t
    if stages > schedule.depth:
        raise ValueError("stages exceed schedule depth")
    gaps0 = t.gap_values()
    d_k = gaps0[0]
    for g in gaps0[1:]:
        if d_k < g:
            d_k = g
    d_k = d_k + schedule.shift_budget() * 2  # anchor-spacing bound, rank 0
    for stage in range(1, stages + 1):
        spacing = schedule.pair_spacing[stage]
        if stage == 1:
            units = [(i, i) for i in range(len(t.positions))]
        else:
            units = [r for r in t.regular_runs()
                     if r[1] > r[0] and t.ranks[r[0]] == stage - 1]
        if len(units) < 2:
            t.notes.append(f"stage {stage}: fewer than two rank-{stage - 1} "
                           f"blocks; stage truncated")
            break
        pair_lefts = _select_pairs(len(units), spacing, rng)
        if not pair_lefts:
            t.notes.append(f"stage {stage}: no room for a pair; stage truncated")
            break
        plan: dict[int, TileVector] = {}
        for ui in pair_lefts:
            left, right = units[ui], units[ui + 1]
            seg_plan = _pair_plan(t, left, right, schedule, stage)
            plan.update(seg_plan)
        _apply_gap_plan(t, plan, stage, phase="grow")
        d_k = d_k * (2 * spacing + 3)
        _check_block_spacing(t, stage, d_k)
    return t


def _check_block_spacing(t: TiledSection, stage: int, bound: QuadReal):
    """Left endpoints of adjacent stage-rank blocks stay within the spacing
    bound inherited from the pair-selection policy (interior pairs only)."""
    lefts = [i for i, j in t.regular_runs()
             if j > i and max(t.ranks[i:j + 1]) == stage]
    for a, b in zip(lefts[1:-1], lefts[2:]):
        gap = t.positions[b] - t.positions[a]
        if bound < gap:
            raise TilingError(f"stage {stage}: adjacent block anchors "
                              f"{gap} apart, beyond the spacing bound {bound}")


def _select_pairs(n_units: int, spacing: int, rng) -> list[int]:
    out = []
    i = 0
    while i + 1 < n_units:
        out.append(i)
        i += 2 + rng.randint(spacing, 2 * spacing + 1)
    return out


def _pair_plan(t: TiledSection, left, right, schedule: Schedule,
               stage: int) -> dict[int, TileVector]:
    """Choose admissible values for every bare gap between two blocks.

    The composite reachable set is enumerated with rank-aware corridors:
    after choosing the value of a gap, the accumulated deviation is the
    shift of the atom to the gap's right and must stay under that atom's
    rank bound.  The element closest to rho in frequency (then smallest
    final deviation) is replayed into a per-gap plan; its witness chain is
    stored for audit.
    """
    params = t.params
    rho = params.rho
    atoms: list[_Atom] = []
    i = left[1]
    while i < right[0]:
        if t.letters[i] is not None:
            j = i
            while j < right[0] and t.letters[j] is not None:
                j += 1
            seg = t.letters[i:j]
            p = seg.count("a")
            atoms.append(_Atom("block", t.positions[j] - t.positions[i],
                               TileVector(p, len(seg) - p), -1, t.ranks[i]))
            i = j
        else:
            nxt_rank = t.ranks[i + 1]
            atoms.append(_Atom("gap", t.positions[i + 1] - t.positions[i],
                               TileVector(0, 0), i, nxt_rank))
            i += 1
    if atoms and atoms[-1].kind == "gap":
        # the last gap positions the right pair block: its bound is eps_stage
        atoms[-1] = atoms[-1]._replace(rank=stage - 1)
    total = t.positions[right[0]] - t.positions[left[1]]
    eps1 = schedule.eps[min(1, len(schedule.eps) - 1)]
    # enumerate: state maps counts -> (value, witness over bare gaps)
    zero = quad(0, 0, params.d)
    states: dict[TileVector, tuple[QuadReal, tuple[TileVector, ...]]] = {
        TileVector(0, 0): (zero, ())}
    pref = zero
    for atom in atoms:
        pref = pref + atom.span
        bound = schedule.rank_bound(atom.rank)
        nxt: dict[TileVector, tuple[QuadReal, tuple[TileVector, ...]]] = {}
        if atom.kind == "block":
            for counts, (val, wit) in states.items():
                c2 = counts + atom.counts
                if c2 not in nxt:
                    nxt[c2] = (val + atom.span, wit)
            states = nxt
            continue
        menu = [v for v in enumerate_tileable(params, atom.span - eps1,
                                              atom.span + eps1)
                if not v.is_zero() and abs(v.value(params) - atom.span) < eps1]
        for counts, (val, wit) in states.items():
            for y in menu:
                c2 = counts + y
                if c2 in nxt:
                    continue
                v2 = val + y.value(params)
                if abs(pref - v2) < bound:
                    nxt[c2] = (v2, wit + (y,))
        states = nxt
        if not states:
            break
    eps_s = schedule.eps[stage]
    eta_s = schedule.eta[stage]
    elements = [(counts, val, wit) for counts, (val, wit) in states.items()
                if abs(val - total) < eps_s]
    if not elements:
        raise TilingError(f"stage {stage}: no admissible composite shift "
                          f"between blocks at points {left[1]}..{right[0]}")
    banded = [e for e in elements
              if abs(alpha_frequency(e[0]) - rho) <= eta_s]
    if banded:
        elements = banded
    else:
        t.notes.append(f"stage {stage}: eta band missed; using nearest frequency")
    counts, val, wit = min(
        elements, key=lambda e: (abs(alpha_frequency(e[0]) - rho),
                                 _K(abs(e[1] - total))))
    gap_indices = [a.gap_index for a in atoms if a.kind == "gap"]
    t.shift_chains.append({
        "stage": stage, "anchor": left[1], "target": right[0],
        "total": total, "value": val,
        "gaps": gap_indices, "choices": list(wit),
        "bounds": [schedule.rank_bound(a.rank) for a in atoms if a.kind == "gap"],
        "spans": [a.span for a in atoms if a.kind == "gap"],
    })
    return dict(zip(gap_indices, wit))


class _K:
    __slots__ = ("v",)

    def __init__(self, v):
        self.v = v

    def __lt__(self, other):
        return self.v < other.v


# ---------------------------------------------------------------------------
# finishing


def sparse_tile(source, schedule: Schedule, depth: int | None = None,
                phase: str = "finish") -> TiledSection:
    """Tile every untiled gap, stage by stage along the chain hierarchy.

    Stage n handles the gaps of size at most K_n (one chain class at a
    time), shifting each class member by less than eps_n while the gap
    values are steered onto tileables; existing blocks ride rigidly and
    are never re-tiled.  Chain-class structure at thresholds K_m (m >= n)
    over the pre-existing points is verified unchanged after each stage.
    """
    params = schedule.params
    if isinstance(source, OrbitWindow):
        if source.periodic:
            raise ValueError("tiling pipelines operate on open windows")
        t = TiledSection.from_window(params, source, schedule)
    else:
        t = source
        if t.schedule is None:
            t.schedule = schedule
    depth = schedule.depth if depth is None else depth
    for stage in range(1, depth + 1):
        if t.is_fully_regular():
            break
        before = _class_signature(t, schedule, stage)
        plan = _finish_stage_plan(t, schedule, stage)
        if plan:
            _apply_gap_plan(t, plan, stage, phase=phase)
        after = _class_signature(t, schedule, stage)
        if before != after:
            raise TilingError(f"stage {stage} disturbed chain classes: "
                              f"{before} -> {after}")
    if not t.is_fully_regular():
        left = sum(1 for ch in t.letters if ch is None)
        t.notes.append(f"partial tiling: {left} gaps above K_{depth} remain "
                       f"(schedule depth insufficient for this window)")
    return t


def _class_signature(t: TiledSection, schedule: Schedule, stage: int):
    """Cardinalities, in order, of chain classes over original points at
    each threshold from the current stage up."""
    pts = [p for p, oid in zip(t.positions, t.orig_ids) if oid is not None]
    if len(pts) < 2:
        return ()
    w = OrbitWindow(pts)
    sig = []
    for m in range(stage, schedule.depth + 1):
        cc = chain_classes(w, schedule.K[m])
        sig.append(tuple(len(c) for c in cc.classes))
    return tuple(sig)


def _finish_stage_plan(t: TiledSection, schedule: Schedule,
                       stage: int) -> dict[int, TileVector]:
    """Greedy gap steering for one stage, class by class.

    Within a class the running carry (sum of value changes so far) stays
    strictly inside the stage corridor; each gap's candidate tileables are
    read from the corridor-shifted window, preferring the frequency side
    that rebalances the class mix including the next block.
    """
    params = t.params
    rho = params.rho
    eps_s = schedule.eps[stage]
    k_n = schedule.K[stage]
    zero = quad(0, 0, params.d)
    plan: dict[int, TileVector] = {}
    npts = len(t.positions)
    i = 0
    while i < npts - 1:
        # find the start of a chain class at threshold K_stage
        j = i
        while j < npts - 1 and not k_n < (t.positions[j + 1] - t.positions[j]):
            j += 1
        # class spans points [i, j]
        if j == i:
            i += 1
            continue
        carry = zero
        totals = TileVector(0, 0)
        g = i
        while g < j:
            if t.letters[g] is not None:
                k = g
                p = q = 0
                while k < j and t.letters[k] is not None:
                    p += t.letters[k] == "a"
                    q += t.letters[k] == "b"
                    k += 1
                totals = totals + TileVector(p, q)
                g = k
                continue
            d = t.positions[g + 1] - t.positions[g]
            if k_n < d:
                g += 1
                continue
            # peek the block right of this gap for the side rule
            k = g + 1
            p = q = 0
            while k < j and t.letters[k] is not None:
                p += t.letters[k] == "a"
                q += t.letters[k] == "b"
                k += 1
            peek = totals + TileVector(p, q)
            lo = d - carry - eps_s
            hi = d - carry + eps_s
            vec = _choose_gap_word(params, lo, hi, peek)
            if vec is None:
                raise TilingError(f"stage {stage}: no tileable in the corridor "
                                  f"of gap {g} (window ({lo}, {hi}))")
            plan[g] = vec
            carry = carry + (vec.value(params) - d)
            totals = totals + vec
            g += 1
        i = j + 1
    return plan


def _choose_gap_word(params: Params, lo: QuadReal, hi: QuadReal,
                     running: TileVector) -> Optional[TileVector]:
    rho = params.rho
    cands = [v for v in enumerate_tileable(params, lo, hi)
             if not v.is_zero() and lo < v.value(params) < hi]
    if not cands:
        return None
    want_high = _wants_alpha(rho, running)

    def key(v):
        f = alpha_frequency(v)
        side_miss = 0 if ((f > rho) == want_high or f == rho) else 1
        after = running + v
        return (side_miss, abs(alpha_frequency(after) - rho), abs(f - rho),
                v.p + v.q)

    return min(cands, key=key)


def _wants_alpha(rho: Fraction, counts: TileVector) -> bool:
    if counts.is_zero():
        return True
    return alpha_frequency(counts) <= rho


# ---------------------------------------------------------------------------
# classification and the full pipeline


class Classification(NamedTuple):
    kind: str
    runs: list[tuple[int, int]]
    endpoint_window: Optional[OrbitWindow]


def classify_section(t: TiledSection) -> Classification:
    """Window-level surrogate of the limit trichotomy.

    One run covering everything: fully regular.  A dominant run pinned to
    a window end while others remain: the half-tiled analogue (flagged;
    finishing treats it like any other).  Otherwise finite classes; the
    run endpoints then form the fallback section to finish.
    """
    runs = t.regular_runs()
    npts = len(t.positions)
    if len(runs) == 1 and runs[0] == (0, npts - 1):
        return Classification(FULLY_REGULAR, runs, None)
    sizes = [(j - i + 1) for i, j in runs]
    big = max(sizes)
    big_run = runs[sizes.index(big)]
    touches_end = big_run[0] == 0 or big_run[1] == npts - 1
    endpoints = []
    for i, j in runs:
        endpoints.append(t.positions[i])
        if j > i:
            endpoints.append(t.positions[j])
    ew = OrbitWindow(endpoints) if len(endpoints) > 1 else None
    if touches_end and 2 * big >= npts and len(runs) > 1:
        return Classification(HALF_TILED, runs, ew)
    return Classification(FINITE_CLASSES, runs, ew)


def full_pipeline(w: OrbitWindow, schedule: Schedule, seed: int = 0,
                  stages: int = 1) -> TiledSection:
    """Grow blocks, classify, finish, certify.

    The result is fully regular on the window interior; every original
    point's total displacement stays strictly under min(alpha, 1)/3, and
    partition witnesses for every level up to the schedule depth are
    attached and replayed before returning.
    """
    t = build_rank_blocks(w, schedule, stages=stages, seed=seed)
    cls = classify_section(t)
    t.notes.append(f"after growth: {cls.kind} with {len(cls.runs)} runs")
    if cls.kind != FULLY_REGULAR:
        t = sparse_tile(t, schedule, phase="finish")
    if not t.is_fully_regular():
        raise TilingError("pipeline left untiled gaps")
    _check_displacements(t, schedule)
    attach_witnesses(t)
    return t


def _check_displacements(t: TiledSection, schedule: Schedule):
    budget = qmin(schedule.params.alpha, quad(1, 0, schedule.params.d)) / 3
    for oid, disp in t.displacements().items():
        if budget < abs(disp):
            raise TilingError(f"original point {oid} displaced {disp}, beyond "
                              f"the min(alpha,1)/3 budget")


def attach_witnesses(t: TiledSection, levels: Sequence[int] | None = None,
                     strict: bool = False):
    """Build and store partition witnesses, level by level.

    Pieces are equal-count letter chunks no shorter than the measured
    uniform-frequency run length for the level's eta, so every piece
    inherits the banded frequency; piece values stay under the schedule's
    L for that level.  Levels are attached in order until one is out of
    reach for this window (short windows may not support the deeper
    bands); the achieved depth is recorded, and with ``strict=True`` an
    unreachable level raises :class:`WitnessError` instead.
    """
    sched = t.schedule
    if sched is None:
        raise WitnessError("section has no schedule")
    if not t.is_fully_regular():
        raise WitnessError("witnesses need a fully regular section")
    levels = list(range(1, sched.depth + 1)) if levels is None else list(levels)
    t.witnesses = []
    n = len(t.letters)
    achieved = 0
    for j in levels:
        eta_j = sched.eta[j]
        L_j = sched.L[j]
        rep = verify_uniform_frequency(t, eta_j, witnesses=False)
        reason = None
        n_min = rep.n_eta
        n_max = int((L_j / t.params.beta).floor())
        if n_min is None:
            reason = (f"no uniform run length for eta_{j} = {eta_j}; "
                      f"counterexample {rep.counterexample}")
        elif n_min > n_max or n_min > n:
            reason = (f"level {j} needs runs of {n_min} letters against a "
                      f"piece budget of {min(n_max, n)}")
        if reason is not None:
            if strict:
                raise WitnessError(reason)
            t.notes.append(f"witness levels stop at {achieved}: {reason}")
            break
        pieces = max(1, n // n_min)
        base, extra = divmod(n, pieces)
        if base + (1 if extra else 0) > n_max:  # pragma: no cover - guarded
            pieces = max(1, pieces - 1)
            base, extra = divmod(n, pieces)
        cuts = [0]
        for k in range(pieces):
            cuts.append(cuts[-1] + base + (1 if k < extra else 0))
        wit = PartitionWitness(j, L_j, eta_j, tuple(cuts))
        if not wit.replay(t):
            raise WitnessError(f"level {j} witness failed replay")
        t.witnesses.append(wit)
        achieved = j


class UniformFrequencyReport(NamedTuple):
    eta: Fraction
    n_eta: Optional[int]
    counterexample: Optional[tuple[int, int]]  # (start gap, length)
    witnesses_ok: Optional[bool]


def verify_uniform_frequency(t: TiledSection, eta: Fraction,
                             witnesses: bool = True) -> UniformFrequencyReport:
    """Smallest N such that every run of at least N consecutive gaps has
    alpha-frequency within eta of rho, by exact integer scanning.

    Returns a counterexample window when even the full section fails.
    With ``witnesses=True`` also replays every stored partition witness.
    """
    eta = Fraction(eta)
    if not t.is_fully_regular():
        raise ValueError("section must be regular on its interior")
    rho = t.params.rho
    a_, b_ = rho.numerator, rho.denominator
    n = len(t.letters)
    if n == 0:
        return UniformFrequencyReport(eta, 1, None, True)
    dev = [0] * (n + 1)
    for i, ch in enumerate(t.letters):
        dev[i + 1] = dev[i] + (b_ - a_ if ch == "a" else -a_)

    def ok(run: int) -> Optional[int]:
        # |dev[i+run] - dev[i]| < eta * b_ * run  (strict), scaled to ints
        lim_num = eta.numerator * b_ * run
        lim_den = eta.denominator
        for i in range(n - run + 1):
            if abs(dev[i + run] - dev[i]) * lim_den >= lim_num:
                return i
        return None

    if ok(n) is not None:
        rep = UniformFrequencyReport(eta, None, (0, n), None)
        if witnesses:
            rep = rep._replace(witnesses_ok=all(w.replay(t) for w in t.witnesses))
        return rep
    lo_dev = min(dev)
    hi_dev = max(dev)
    spread = hi_dev - lo_dev
    # all runs of length > spread*eta.den/(eta.num*b_) pass automatically
    start = min(n, int(Fraction(spread * eta.denominator, eta.numerator * b_)) + 1)
    n_eta = start
    run = start - 1
    while run >= 1:
        if ok(run) is not None:
            break
        n_eta = run
        run -= 1
    wok = None
    if witnesses:
        wok = all(w.replay(t) for w in t.witnesses)
    return UniformFrequencyReport(eta, n_eta, None, wok)
