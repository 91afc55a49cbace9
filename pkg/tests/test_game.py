"""Tests for the Banach-Mazur game engine (lplab.game)."""

from __future__ import annotations

import dataclasses
import json
import math

import numpy as np
import pytest

from lplab.game import (
    BasicOpenSet,
    EigenfreeParams,
    GameBlock,
    GameCapExceeded,
    MembershipError,
    RoundData,
    adversary_passthrough,
    adversary_random,
    assemble_limit,
    block_ball_member,
    block_from_columns,
    block_norm_c0,
    block_to_dense,
    game_run_to_dict,
    legal_move,
    opening_position,
    play_game,
    scaled_orbit_floor,
    strategy_eigenfree_respond,
    strategy_nonsup_respond,
    verify_eigenfree_run,
    verify_nonsup_run,
)
from lplab.game import _max_col_diff
from lplab.operators import StructuredOperator

EXACT_TOL = 1e-14
NORM_TOL = 1e-12


def _toy_round(k: int = 0, N: int = 0, eps: float = 0.5, L: int = 4, R: int = 3):
    """Hand-sized round record for structural tests."""
    tau = 0.01 * eps
    return RoundData(
        k=k,
        N=N,
        eps=eps,
        alpha=0.01,
        tau=tau,
        L=L,
        R=R,
        N_next=N + (L + 1) * R - 1,
        eps_next=eps * tau / 32.0,
        certified=False,
    )


class TestRoundGeometry:
    def test_honest_round_zero_fixtures(self):
        U0 = opening_position()
        U1, rd = strategy_eigenfree_respond(U0, 0, EigenfreeParams.honest())
        assert rd.tau == pytest.approx(0.01, abs=0)
        assert rd.L == 629
        assert rd.R == 439
        assert rd.N_next == 276_569
        assert rd.eps_next == pytest.approx(3.125e-4, abs=1e-19)
        assert U1.N == 276_569

    def test_net_spacing_below_tau(self):
        _, rd = strategy_eigenfree_respond(
            opening_position(), 0, EigenfreeParams.honest()
        )
        spacing = 2.0 * math.sin(math.pi / rd.L)
        assert spacing <= rd.tau + EXACT_TOL

    def test_escape_growth_strict_and_minimal(self):
        _, rd = strategy_eigenfree_respond(
            opening_position(), 0, EigenfreeParams.honest()
        )
        lratio = math.log1p(-rd.tau / 2.0) - math.log1p(-rd.tau)
        ltarget = math.log(9.0 / 1.0)
        assert (rd.R - 2) * lratio > ltarget
        assert (rd.R - 3) * lratio <= ltarget

    def test_cap_guard_on_deep_honest_round(self):
        with pytest.raises(GameCapExceeded):
            play_game("eigenfree", 3, seed=0, adversary="passthrough")

    def test_spoke_column_outside_window_rejected(self):
        with pytest.raises(ValueError):
            strategy_eigenfree_respond(opening_position(), 1, EigenfreeParams.honest())


class TestGameBlock:
    def test_from_dense_roundtrip(self):
        rng = np.random.default_rng(0)
        M = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
        M /= np.abs(M).sum(axis=1).max()
        blk = GameBlock.from_dense(M)
        assert np.allclose(block_to_dense(blk, 5), M, atol=0)

    def test_family_columns_materialize(self):
        rd = _toy_round()  # N=0, eps=0.5, L=4, R=3 -> window 14
        blk = GameBlock(N=rd.N_next, cols=(), rounds=(rd,))
        M = block_to_dense(blk, rd.N_next + 1)
        half = rd.eps / 2.0
        # spoke column 0: entries at rows 3, 6, 9, 12
        for i in range(1, rd.L + 1):
            assert M[3 * i, 0] == pytest.approx(half * rd.root(i), abs=EXACT_TOL)
        # head column 3 -> (1 - eps/2) e_3 + e_4
        assert M[3, 3] == pytest.approx(1.0 - half, abs=0)
        assert M[4, 3] == 1.0
        # chain column 4 -> e_5
        assert M[5, 4] == 1.0
        # column 5 = N + 2R - 1 is identically zero
        assert np.all(M[:, 5] == 0)
        # diagonal columns 6, 9, 12
        for i in (2, 3, 4):
            j = 3 * i
            col = M[:, j].copy()
            assert col[j] == pytest.approx(rd.root(i) * (1.0 - half), abs=EXACT_TOL)
            col[j] = 0
            assert np.all(col == 0)

    def test_norm_c0_explicit_rows(self):
        blk = block_from_columns(2, {0: {1: 0.25 + 0.0j}, 2: {1: -0.5j, 2: 0.1}})
        assert block_norm_c0(blk) == pytest.approx(0.75, abs=0)

    def test_norm_c0_family_rows_are_exactly_one(self):
        rd = _toy_round()
        blk = GameBlock(N=rd.N_next, cols=(), rounds=(rd,))
        assert block_norm_c0(blk) == 1.0
        M = block_to_dense(blk, rd.N_next + 1)
        assert np.abs(M).sum(axis=1).max() <= 1.0 + EXACT_TOL


class TestLegalMove:
    def test_identical_position_is_illegal(self):
        U = opening_position()
        assert not legal_move(U, U)

    def test_strict_radius_shrink_is_legal(self):
        U = opening_position()
        V = BasicOpenSet(N=U.N, A=U.A, eps=0.5 * U.eps)
        assert legal_move(U, V)

    def test_window_shrink_is_illegal(self):
        blk = GameBlock.zero(3)
        U = BasicOpenSet(N=3, A=blk, eps=1.0)
        V = BasicOpenSet(N=2, A=GameBlock.zero(2), eps=0.1)
        assert not legal_move(U, V)

    def test_large_column_move_is_illegal(self):
        U = BasicOpenSet(N=1, A=GameBlock.zero(1), eps=0.25)
        far = block_from_columns(1, {0: {1: 0.9 + 0.0j}})
        V = BasicOpenSet(N=1, A=far, eps=0.01)
        assert not legal_move(U, V)

    def test_strategy_responses_are_legal(self):
        U0 = opening_position()
        U1, _ = strategy_eigenfree_respond(U0, 0, EigenfreeParams.honest())
        assert legal_move(U0, U1)
        V1, _ = strategy_nonsup_respond(U0, 0, 0)
        assert legal_move(U0, V1)

    def test_eigenfree_column_distance_is_half_eps(self):
        U0 = opening_position()
        U1, _ = strategy_eigenfree_respond(U0, 0, EigenfreeParams.honest())
        assert _max_col_diff(U1.A, U0.A, U0.N) == pytest.approx(0.5, abs=0)


class TestEigenfreeParams:
    def test_honest_parameters_validate(self):
        checks = EigenfreeParams.honest().validate()
        assert all(c["ok"] for c in checks)

    def test_bad_parameters_flagged(self):
        bad = EigenfreeParams(c=0.1, eta=0.5)  # c >= 1/24, eta < 16c
        names = {c["name"]: c["ok"] for c in bad.validate()}
        assert not names["c_small"]
        assert not names["eta_large"]

    def test_product_certificate_honest(self):
        cert = EigenfreeParams.honest().certify_product(2)
        assert cert["certified"]
        assert cert["certified_lower_bound"] >= 8.0 / 32.0 + 0.5
        assert cert["partial_product"] > cert["certified_lower_bound"]

    def test_explicit_alpha_sequence_is_uncertified(self):
        p = EigenfreeParams(a=None, alphas=(0.01, 0.005))
        cert = p.certify_product(2)
        assert not cert["certified"]
        assert cert["certified_lower_bound"] is None


class TestNonsupStrategy:
    def test_worked_example(self):
        U1, rec = strategy_nonsup_respond(opening_position(), 0, 0)
        assert rec.L == 3
        assert rec.eps_next == pytest.approx(1.0 / 96.0, abs=1e-18)
        assert U1.N == 1

    def test_new_column_is_unit_diagonal(self):
        U1, _ = strategy_nonsup_respond(opening_position(), 0, 0)
        M = block_to_dense(U1.A, 2)
        assert M[1, 1] == 1.0
        assert np.all(M[:, 0] == 0)

    def test_old_columns_scaled(self):
        blk = block_from_columns(1, {0: {0: 0.5 + 0.0j}, 1: {1: 0.8 + 0.0j}})
        U = BasicOpenSet(N=1, A=blk, eps=0.5)
        V, rec = strategy_nonsup_respond(U, 1, 3)
        M = block_to_dense(V.A, 3)
        assert M[0, 0] == pytest.approx(0.5 * 0.75, abs=0)
        assert M[1, 1] == pytest.approx(0.8 * 0.75, abs=0)
        assert M[2, 2] == 1.0
        assert rec.L >= 4  # strictly above L_prev

    def test_family_block_rejected(self):
        U1, _ = strategy_eigenfree_respond(
            opening_position(), 0, EigenfreeParams.honest()
        )
        with pytest.raises(ValueError):
            strategy_nonsup_respond(U1, 1, 0)


class TestAdversaries:
    def test_random_is_deterministic_and_legal(self):
        U1, _ = strategy_nonsup_respond(opening_position(), 0, 0)
        a = adversary_random(U1, np.random.default_rng(42))
        b = adversary_random(U1, np.random.default_rng(42))
        assert a == b
        assert legal_move(U1, a)

    def test_random_touches_only_fresh_rows_and_columns(self):
        U1, _ = strategy_nonsup_respond(opening_position(), 0, 0)
        V = adversary_random(U1, np.random.default_rng(1))
        for j, ents in V.A.cols:
            for r, val in ents:
                if j <= U1.N:
                    assert (j, (r, val)) in [
                        (jj, e) for jj, es in U1.A.cols for e in es
                    ]
                else:
                    assert r > U1.N

    def test_passthrough_shrinks_radius(self):
        U1, _ = strategy_nonsup_respond(opening_position(), 0, 0)
        V = adversary_passthrough(U1)
        assert V.A == U1.A
        assert V.eps < U1.eps
        assert legal_move(U1, V)


class TestPlayAndAssemble:
    def test_toy_play_assembles_dense(self):
        run = play_game(
            "eigenfree", 4, seed=3, params=EigenfreeParams.toy_mode(), adversary="random"
        )
        T = assemble_limit(run)
        assert isinstance(T, StructuredOperator)
        assert not run.certified

    def test_honest_play_stays_lazy(self):
        run = play_game("eigenfree", 2, seed=7, adversary="passthrough")
        T = assemble_limit(run)
        assert isinstance(T, GameBlock)
        assert T.N > 10**13
        assert run.certified

    def test_assembled_block_is_member_of_every_set(self):
        run = play_game("nonsup", 2, seed=5, adversary="random")
        blk = run.final_set.A
        for _, S in run.moves:
            assert block_ball_member(blk, S)

    def test_tampered_run_raises_membership_error(self):
        run = play_game("nonsup", 2, seed=5, adversary="random")
        blk = run.final_set.A
        bad_cols = dict((j, dict(ents)) for j, ents in blk.cols)
        bad_cols.setdefault(0, {})[0] = 0.9 + 0.0j  # large entry in an old column
        bad = block_from_columns(blk.N, bad_cols)
        bad_set = BasicOpenSet(N=blk.N, A=bad, eps=run.final_set.eps)
        tampered = dataclasses.replace(
            run, moves=run.moves[:-1] + (("II", bad_set),)
        )
        with pytest.raises(MembershipError):
            assemble_limit(tampered)

    def test_transcript_serialization_is_deterministic(self):
        r1 = play_game("eigenfree", 2, seed=7, adversary="passthrough")
        r2 = play_game("eigenfree", 2, seed=7, adversary="passthrough")
        s1 = json.dumps(game_run_to_dict(r1), sort_keys=True)
        s2 = json.dumps(game_run_to_dict(r2), sort_keys=True)
        assert s1 == s2
        # lazy transcripts stay small even at honest scale
        assert len(s1) < 20_000


class TestVerifyEigenfree:
    def test_honest_k2_passes_and_certifies(self):
        run = play_game("eigenfree", 2, seed=7, adversary="passthrough")
        rep = verify_eigenfree_run(assemble_limit(run), run)
        assert rep["ok"] and rep["certified"]
        assert all(s["status"] == "pass" for s in rep["sections"])
        screen = next(s for s in rep["sections"] if s["name"] == "eigen_screen")
        counts = screen["records"][0]["counts"]
        assert counts["violation"] == 0
        assert counts["artifact"] >= 2  # the two spoke columns

    def test_toy_k4_passes_uncertified(self):
        run = play_game(
            "eigenfree", 4, seed=3, params=EigenfreeParams.toy_mode(), adversary="random"
        )
        rep = verify_eigenfree_run(assemble_limit(run), run)
        assert rep["ok"]
        assert not rep["certified"]
        screen = next(s for s in rep["sections"] if s["name"] == "eigen_screen")
        counts = screen["records"][0]["counts"]
        assert counts["violation"] == 0
        assert counts["cut"] >= 1  # deepest round lies beyond the window

    def test_planted_modulus_violation_is_caught(self):
        # a dishonest round record claims tau = 0.5 while a diagonal entry
        # 0.3 in the spoke column produces an engaged eigenpair of modulus
        # about 0.3 < 1 - tau: the screen must flag it
        rd = dataclasses.replace(_toy_round(eps=1e-3), tau=0.5)
        blk = block_from_columns(
            rd.N_next, {0: {0: 0.3 + 0.0j}}, rounds=(rd,)
        )
        U0 = opening_position()
        U1 = BasicOpenSet(N=rd.N_next, A=blk, eps=1e-4)
        run = play_game("eigenfree", 1, seed=0, adversary="passthrough")
        tampered = dataclasses.replace(run, moves=(("I", U0), ("II", U1)))
        rep = verify_eigenfree_run(None, tampered)
        screen = next(s for s in rep["sections"] if s["name"] == "eigen_screen")
        assert screen["status"] == "fail"
        assert screen["records"][0]["counts"]["violation"] >= 1
        assert not rep["ok"]

    def test_row_coupling_bounds_exact(self):
        run = play_game("eigenfree", 2, seed=1, adversary="random")
        rep = verify_eigenfree_run(None, run)
        section = next(s for s in rep["sections"] if s["name"] == "row_coupling")
        assert section["status"] == "pass"
        for c in section["records"]:
            assert c["lhs"] <= c["rhs"] + EXACT_TOL


class TestScaledOrbitFloor:
    def test_two_coordinate_vector(self):
        v = np.array([1.0 + 0.0j, 1.0])
        rec = scaled_orbit_floor(v)
        assert rec["exact"] == pytest.approx(0.5, abs=0)
        assert rec["grid"] >= rec["exact"] - EXACT_TOL
        assert rec["grid"] == pytest.approx(0.5, abs=5e-3)

    def test_head_only_vector_has_zero_floor(self):
        v = np.array([0.5 - 0.5j, 0.0])
        rec = scaled_orbit_floor(v)
        assert rec["exact"] == 0.0
        assert rec["grid"] <= 2e-2

    def test_headless_vector_has_unit_floor(self):
        v = np.array([0.0 + 0.0j, 0.25j])
        rec = scaled_orbit_floor(v)
        assert rec["exact"] == 1.0
        assert rec["grid"] >= 1.0 - EXACT_TOL


class TestVerifyNonsup:
    def test_k3_random_adversary_full_report(self):
        run = play_game("nonsup", 3, seed=11, adversary="random")
        rep = verify_nonsup_run(assemble_limit(run), run)
        assert rep["ok"] and rep["certified"]
        for s in rep["sections"]:
            assert s["status"] == "pass", s["name"]
        floor = next(s for s in rep["sections"] if s["name"] == "scaled_orbit_floor")
        names = [c["name"] for c in floor["records"]]
        assert "exact_floor_direct_range" in names
        assert "certified_floor_tail_range" in names  # L_5 exceeds n_direct

    def test_floor_exceeds_one_ninth_on_direct_range(self):
        run = play_game("nonsup", 2, seed=2, adversary="passthrough")
        rep = verify_nonsup_run(None, run, n_direct=2_000)
        floor = next(s for s in rep["sections"] if s["name"] == "scaled_orbit_floor")
        direct = next(
            c for c in floor["records"] if c["name"] == "exact_floor_direct_range"
        )
        assert direct["ok"]
        assert direct["rhs"] >= 1.0 / 9.0 - 1e-12

    def test_tail_certificates_on_truncated_direct_range(self):
        run = play_game("nonsup", 2, seed=2, adversary="passthrough")
        rep = verify_nonsup_run(None, run, n_direct=50)
        floor = next(s for s in rep["sections"] if s["name"] == "scaled_orbit_floor")
        tail = next(
            c for c in floor["records"] if c["name"] == "certified_floor_tail_range"
        )
        assert tail["ok"]
        assert tail["certificates"]

    def test_coordinate_floor_round_zero_value(self):
        # exact first-step value: the tracked coordinate starts at 1/2 and
        # is damped only by later diagonal rescalings
        run = play_game("nonsup", 2, seed=3, adversary="passthrough")
        blk = run.final_set.A
        M = block_to_dense(blk, blk.N + 1)
        r = run.side[0].N + 1
        damp = abs(M[r, r])
        assert 0.0 < damp <= 1.0
        rep = verify_nonsup_run(None, run, n_direct=100)
        section = next(s for s in rep["sections"] if s["name"] == "coordinate_floor")
        assert all(c["ok"] for c in section["records"])
