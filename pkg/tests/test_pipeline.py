import random
from fractions import Fraction as F

import pytest

from flowtile.generators import GeneratorSpec, generate
from flowtile.pipeline import (FINITE_CLASSES, FULLY_REGULAR, HALF_TILED,
                               PartitionWitness, TiledSection, TilingError,
                               attach_witnesses, build_rank_blocks,
                               build_schedule, classify_section, full_pipeline,
                               sparse_tile, verify_uniform_frequency)
from flowtile.quadratic import quad, sqrtD
from flowtile.tiles import (TileVector, alpha_frequency, default_params,
                            is_near_rho)
from flowtile.windows import OrbitWindow, chain_classes, insert_blocks

P = default_params()


def section_from_letters(letters, params=P, start=quad(0)):
    pos = [start]
    for ch in letters:
        pos.append(pos[-1] + (params.alpha if ch == "a" else params.beta))
    t = TiledSection(params, pos, list(letters), [1] * len(pos),
                     list(range(len(pos))))
    t.origin_pos = {i: p for i, p in enumerate(pos)}
    return t


class TestSchedule:
    def test_k0_floor(self, schedule4):
        assert not schedule4.K[0] < P.beta * 4

    def test_invariants(self, schedule4):
        s = schedule4
        s.validate()
        total = s.shift_budget()
        assert not (quad(1) / 3) < total
        for a, b in zip(s.K, s.K[1:]):
            assert not b < a + 4

    def test_eps_formula(self, schedule4):
        # eps_n = 2^-n * min(alpha, 1)/3
        for n in range(1, schedule4.depth + 2):
            assert schedule4.eps[n] == quad(F(1, 3 * 2 ** n))

    def test_near_budgets(self, schedule4):
        for n in range(1, schedule4.depth + 1):
            assert schedule4.near[n] == ((schedule4.K[n] + 1) / P.alpha).floor()

    def test_L_prefix_stability(self, schedule4):
        for n, (prev, cur) in enumerate(zip(schedule4.L_stages,
                                            schedule4.L_stages[1:]), start=1):
            assert prev[:n] == cur[:n]

    def test_supplied_k_seq_verified(self):
        s = build_schedule(P, depth=1, k_seq=[quad(7), quad(11)],
                           verify_windows=2)
        assert [str(k) for k in s.K] == ["7", "11"]
        with pytest.raises(ValueError):
            build_schedule(P, depth=1, k_seq=[quad(1), quad(5)],
                           verify_windows=1)

    def test_witnesses_cover_all_stages(self, schedule4):
        stages = {n for n, _, _ in schedule4.witnesses}
        assert stages == set(range(1, schedule4.depth + 1))


class TestBlockGrowth:
    def test_stage_zero_is_identity(self, schedule2):
        w = generate(GeneratorSpec("uniform", count=40, seed=1, k0=schedule2.K[0]))
        t = build_rank_blocks(w, schedule2, stages=0)
        assert t.positions == list(w.positions)
        assert not any(t.letters)

    def test_stage_one_structure(self, schedule2):
        w = generate(GeneratorSpec("uniform", count=60, seed=2, k0=schedule2.K[0]))
        t = build_rank_blocks(w, schedule2, stages=1, seed=5)
        runs = [r for r in t.regular_runs() if r[1] > r[0]]
        assert runs, "no rank-1 blocks formed"
        eta1 = schedule2.eta[1]
        spacing = schedule2.pair_spacing[1]
        for i, j in runs:
            counts = t.run_counts((i, j))
            assert abs(alpha_frequency(counts) - P.rho) <= eta1
            assert max(t.ranks[i:j + 1]) == 1
        # untouched stretch lengths between blocks stay in the detected range
        singles = []
        prev_end = None
        for i, j in t.regular_runs():
            if j == i:
                continue
            if prev_end is not None:
                between = sum(1 for k in range(prev_end + 1, i)
                              if t.orig_ids[k] is not None)
                assert spacing <= between <= 2 * spacing + 1
            prev_end = j
        # shifts recorded only for pair right points, all under eps_1
        for oid, events in t.shift_events.items():
            for ev in events:
                assert abs(ev.shift) < schedule2.eps[1]

    def test_stage_two_witness_chains_replay(self, schedule2):
        w = generate(GeneratorSpec("uniform", count=80, seed=3, k0=schedule2.K[0]))
        t = build_rank_blocks(w, schedule2, stages=2, seed=5)
        chains = [c for c in t.shift_chains if c["stage"] == 2]
        assert chains, "no stage-2 composite shifts recorded"
        for chain in chains:
            dev = quad(0)
            total = quad(0)
            for span, choice, bound in zip(chain["spans"], chain["choices"],
                                           chain["bounds"]):
                dev = dev + (choice.value(P) - span)
                total = total + choice.value(P)
                assert abs(dev) < bound
            assert abs(chain["value"] - chain["total"]) < schedule2.eps[2]
        ranks = set(t.ranks)
        assert 2 in ranks

    def test_rank2_blocks_near_budget(self, schedule2):
        w = generate(GeneratorSpec("uniform", count=80, seed=3, k0=schedule2.K[0]))
        t = build_rank_blocks(w, schedule2, stages=2, seed=5)
        for i, j in t.regular_runs():
            if j > i and max(t.ranks[i:j + 1]) == 2:
                assert is_near_rho(t.run_counts((i, j)), schedule2.near[2], P)


class TestClassify:
    def test_fully_regular(self):
        t = section_from_letters("abab")
        assert classify_section(t).kind == FULLY_REGULAR

    def test_half_tiled_fixture(self):
        # dominant block pinned to the right window end, another block left
        letters = ["a", None, "a", "b", "a", "b", "a", "b"]
        pos = [quad(0)]
        for ch in letters:
            pos.append(pos[-1] + (quad(9) if ch is None else
                                  P.alpha if ch == "a" else P.beta))
        t = TiledSection(P, pos, letters, [0] * len(pos), list(range(len(pos))))
        assert classify_section(t).kind == HALF_TILED

    def test_finite_classes_fixture_endpoints_sparse(self):
        rng = random.Random(1)
        letters = []
        pos = [quad(0)]
        for blk in range(6):
            for _ in range(rng.randint(2, 4)):
                letters.append("a")
                pos.append(pos[-1] + P.alpha)
            letters.append(None)
            pos.append(pos[-1] + quad(30 + blk))
        letters.pop()
        pos.pop()
        t = TiledSection(P, pos, letters, [0] * len(pos), list(range(len(pos))))
        cls = classify_section(t)
        assert cls.kind == FINITE_CLASSES
        assert cls.endpoint_window is not None
        from flowtile.windows import is_sparse_window
        assert is_sparse_window(cls.endpoint_window, quad(20))


class TestSparseTile:
    def test_two_points_distance_six(self):
        # only one tileable lives within eps_1 of 6: six alpha tiles
        sched = build_schedule(P, depth=1, k_seq=[quad(F(23, 4)), quad(F(47, 4))],
                               verify_windows=2)
        w = OrbitWindow([quad(0), quad(6)])
        t = sparse_tile(w, sched)
        assert t.is_fully_regular()
        assert abs((t.positions[-1] - t.positions[0]) - 6) < sched.eps[1]
        counts = t.counts()
        assert abs(alpha_frequency(counts) - P.rho) <= sched.eta[1]

    def test_single_class_window_near_budget(self, schedule2):
        w = generate(GeneratorSpec("uniform", count=12, seed=9, k0=schedule2.K[0]))
        t = sparse_tile(w, schedule2)
        assert t.is_fully_regular()
        assert is_near_rho(t.counts(), schedule2.near[1], P)

    def test_idempotent_on_regular_section(self, schedule2):
        t = section_from_letters("abab")
        t.schedule = schedule2
        before = list(t.positions)
        out = sparse_tile(t, schedule2)
        assert out.positions == before

    def test_multiscale_window_class_preservation(self):
        sched = build_schedule(P, depth=2, k_seq=[quad(7), quad(11), quad(25)],
                               verify_windows=2)
        rng = random.Random(6)
        pos = [quad(0)]
        for _ in range(30):
            pos.append(pos[-1] + quad(rng.choice([41, 401])))
        w = insert_blocks(OrbitWindow(pos), sched.K, quad(1))
        before = [tuple(len(c) for c in chain_classes(w, k).classes)
                  for k in sched.K]
        t = sparse_tile(w, sched)
        assert t.is_fully_regular()
        # original points keep their class structure at every threshold
        kept = OrbitWindow([p for p, o in zip(t.positions, t.orig_ids)
                            if o is not None])
        after = [tuple(len(c) for c in chain_classes(kept, k).classes)
                 for k in sched.K]
        assert before == after


class TestFullPipeline:
    def test_regular_and_displaced_within_budget(self, schedule2):
        w = generate(GeneratorSpec("uniform", count=200, seed=4, k0=schedule2.K[0]))
        t = full_pipeline(w, schedule2, seed=4)
        assert t.is_fully_regular()
        for g, ch in zip(t.gap_values(), t.letters):
            assert g == (P.alpha if ch == "a" else P.beta)
        budget = quad(1) / 3
        for disp in t.displacements().values():
            assert abs(disp) < budget

    def test_rho_complement_symmetry(self):
        from flowtile.tiles import Params
        p1 = Params(quad(1), sqrtD(), F(1, 3))
        p2 = Params(quad(1), sqrtD(), F(2, 3))
        s1 = build_schedule(p1, depth=1, verify_windows=2)
        s2 = build_schedule(p2, depth=1, verify_windows=2)
        w1 = generate(GeneratorSpec("uniform", count=150, seed=8, k0=s1.K[0]))
        w2 = generate(GeneratorSpec("uniform", count=150, seed=8, k0=s2.K[0]))
        t1 = full_pipeline(w1, s1, seed=8)
        t2 = full_pipeline(w2, s2, seed=8)
        f1 = alpha_frequency(t1.counts())
        f2 = alpha_frequency(t2.counts())
        assert abs(f1 - F(1, 3)) < F(1, 10)
        assert abs(f2 - F(2, 3)) < F(1, 10)


class TestUniformFrequency:
    def test_alternation(self):
        t = section_from_letters("ab" * 40)
        rep = verify_uniform_frequency(t, F(1, 4), witnesses=False)
        assert rep.n_eta == 2  # windows of >= 2 letters stay within 1/4

    def test_all_alpha_counterexample(self):
        t = section_from_letters("a" * 30)
        rep = verify_uniform_frequency(t, F(1, 2), witnesses=False)
        assert rep.n_eta is None and rep.counterexample is not None

    def test_monotone_in_eta(self, schedule2):
        w = generate(GeneratorSpec("uniform", count=150, seed=6, k0=schedule2.K[0]))
        t = full_pipeline(w, schedule2, seed=6)
        n8 = verify_uniform_frequency(t, F(1, 8), witnesses=False).n_eta
        n4 = verify_uniform_frequency(t, F(1, 4), witnesses=False).n_eta
        assert n4 <= n8

    def test_witness_replay_and_tamper(self, schedule2):
        w = generate(GeneratorSpec("uniform", count=120, seed=7, k0=schedule2.K[0]))
        t = full_pipeline(w, schedule2, seed=7)
        assert t.witnesses
        rep = verify_uniform_frequency(t, F(1, 4))
        assert rep.witnesses_ok
        bad = PartitionWitness(1, quad(F(1, 2)), F(0), t.witnesses[0].cuts)
        t.witnesses.append(bad)
        rep2 = verify_uniform_frequency(t, F(1, 4))
        assert rep2.witnesses_ok is False


class TestSectionJson:
    def test_round_trip(self, schedule2):
        w = generate(GeneratorSpec("uniform", count=60, seed=11, k0=schedule2.K[0]))
        t = full_pipeline(w, schedule2, seed=11)
        t2 = TiledSection.from_json(t.to_json())
        assert t2.positions == t.positions
        assert t2.letters == t.letters
        assert [w2.cuts for w2 in t2.witnesses] == [w1.cuts for w1 in t.witnesses]


class TestPipelineBoundaries:
    def test_periodic_windows_rejected(self, schedule2):
        from flowtile.windows import Periodic
        w = OrbitWindow([quad(0), quad(9)], Periodic(quad(20)))
        with pytest.raises(ValueError):
            sparse_tile(w, schedule2)
        with pytest.raises(ValueError):
            build_rank_blocks(w, schedule2, stages=1)

    def test_insufficient_depth_flagged(self):
        sched = build_schedule(P, depth=1, verify_windows=2)
        # a gap far above K_1 stays untiled and gets flagged
        w = OrbitWindow([quad(0), quad(9), quad(500), quad(509)])
        t = sparse_tile(w, sched)
        assert not t.is_fully_regular()
        assert any("partial tiling" in n for n in t.notes)


class TestParameterRegimes:
    def test_radicand_three(self):
        from flowtile.quadratic import sqrtD
        from flowtile.tiles import Params
        p3 = Params(quad(1, 0, 3), sqrtD(3), F(1, 2))
        s3 = build_schedule(p3, depth=2, verify_windows=2)
        w = generate(GeneratorSpec("uniform", count=120, seed=1, k0=s3.K[0]))
        t = full_pipeline(w, s3, seed=1)
        assert t.is_fully_regular()
        assert verify_uniform_frequency(t, F(1, 8)).n_eta is not None

    def test_irrational_short_tile(self):
        from flowtile.tiles import Params
        p = Params(sqrtD(), quad(2), F(2, 5))
        s = build_schedule(p, depth=2, verify_windows=2)
        w = generate(GeneratorSpec("uniform", count=120, seed=2, k0=s.K[0]))
        t = full_pipeline(w, s, seed=2)
        assert t.is_fully_regular()
        budget = sqrtD() / 3  # min(alpha, 1)/3 with alpha = sqrt2 > 1 -> 1/3
        from flowtile.quadratic import qmin
        budget = qmin(p.alpha, quad(1)) / 3
        for d in t.displacements().values():
            assert abs(d) < budget

    def test_skewed_rho(self):
        from flowtile.tiles import Params
        p = Params(quad(1), sqrtD(), F(1, 5))
        s = build_schedule(p, depth=2, verify_windows=2)
        w = generate(GeneratorSpec("uniform", count=200, seed=5, k0=s.K[0]))
        t = full_pipeline(w, s, seed=5)
        assert t.is_fully_regular()
        f = alpha_frequency(t.counts())
        assert abs(f - F(1, 5)) <= s.eta[2]

    def test_two_point_window_reports_achieved_level(self, schedule2):
        w = generate(GeneratorSpec("uniform", count=2, seed=4,
                                   k0=schedule2.K[0]))
        t = full_pipeline(w, schedule2, seed=4)
        assert t.is_fully_regular()
        assert [wt.level for wt in t.witnesses] == [1]
        assert any("witness levels stop at 1" in n for n in t.notes)
