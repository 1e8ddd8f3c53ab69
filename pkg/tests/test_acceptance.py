"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
report lines as they complete. Criteria 1 and 2 need the MovieLens 1M
ratings file; point NLFA_ML1M at it (they skip otherwise, since the file
cannot be redistributed with this repository).
"""

import json
import math
import os
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import pytest

import oracles
from nlfa.admm import (
    HyperParams,
    TerminationPolicy,
    init_state,
    train_fixed,
    train_iteration,
    update_p_column,
    update_z_column,
)
from nlfa.cli import RunConfig, cmd_train
from nlfa.data import ten_fold_splits
from nlfa.metrics import mae, rmse
from nlfa.swarm import Particle, Swarm, SwarmConfig, adaptive_train, init_swarm, measure_and_update, evolve_particle
from nlfa.synthetic import low_rank_problem, random_sparse

ML1M_PATH = os.environ.get("NLFA_ML1M", "")


@contextmanager
def criterion(number, title):
    try:
        yield
    except pytest.skip.Exception:
        print(f"CRITERION {number} SKIP: {title}", flush=True)
        raise
    except BaseException:
        print(f"CRITERION {number} FAIL: {title}", flush=True)
        raise
    print(f"CRITERION {number} PASS: {title}", flush=True)


# ---------------------------------------------------------------- ML1M ---

@pytest.fixture(scope="module")
def ml1m_summaries(tmp_path_factory):
    """Ten-fold summaries for both modes on MovieLens 1M, when available."""
    if not ML1M_PATH or not Path(ML1M_PATH).exists():
        pytest.skip(
            "MovieLens 1M ratings file not available; set NLFA_ML1M=/path/to/ratings.dat"
        )
    summaries = {}
    for mode in ("a2nlf", "anlf"):
        out = tmp_path_factory.mktemp(f"ml1m_{mode}")
        config = RunConfig(
            data=ML1M_PATH,
            sep="dcolon",
            rank=20,
            mode=mode,
            lam=0.5,
            eta=1.0,
            folds=10,
            seed=20240817,
            out=str(out),
        )
        config.validate()
        assert cmd_train(config) == 0
        summaries[mode] = json.loads((out / "summary.json").read_text())
    return summaries


def test_criterion_1_ml1m_accuracy(ml1m_summaries):
    with criterion(1, "ML1M ten-fold adaptive mean test RMSE <= 0.885, <= 10 min/fold"):
        summary = ml1m_summaries["a2nlf"]
        dataset = summary["dataset"]
        assert dataset["nnz"] == 1000209, "unexpected entry count for ML1M"
        assert (dataset["num_rows"], dataset["num_cols"]) == (6040, 3706)
        assert len(summary["folds"]) == 10
        mean_rmse = summary["test_rmse"]["mean"]
        assert mean_rmse <= 0.885, f"mean test RMSE {mean_rmse:.4f} exceeds 0.885"
        for fold in summary["folds"]:
            assert fold["elapsed_s"] <= 600, f"fold {fold['fold']} took {fold['elapsed_s']:.0f}s"


def test_criterion_2_adaptive_no_worse_than_fixed(ml1m_summaries):
    with criterion(2, "ML1M adaptive mean RMSE <= untuned fixed (lam=0.5, eta=1) + 0.005"):
        adaptive = ml1m_summaries["a2nlf"]["test_rmse"]["mean"]
        fixed = ml1m_summaries["anlf"]["test_rmse"]["mean"]
        assert adaptive <= fixed + 0.005, f"adaptive {adaptive:.4f} vs fixed {fixed:.4f}"


# ---------------------------------------------------------- small-scale ---

def test_criterion_3_stationarity_oracle():
    with criterion(3, "column updates are stationary points of the objective (50 instances)"):
        for seed in range(50):
            train, state, hp = oracles.random_instance(
                seed, max_rows=8, max_cols=8, max_rank=3, lam_range=(0.01, 4.0)
            )
            for k in range(state.rank):
                update_p_column(state, train, hp, k)
                g = oracles.objective_of(train, state, hp.lam)
                for u in range(train.num_rows):
                    if train.row_deg[u] == 0:
                        continue
                    grad = oracles.central_diff_p(train, state, hp.lam, u, k, step=1e-5)
                    assert abs(grad) < 1e-6 * (1 + abs(g)), (
                        f"seed {seed}: dg/dp[{u},{k}] = {grad:.3e} at g = {g:.3e}"
                    )
                update_z_column(state, train, hp, k)
                g = oracles.objective_of(train, state, hp.lam)
                for i in range(train.num_cols):
                    if train.col_deg[i] == 0:
                        continue
                    grad = oracles.central_diff_z(train, state, hp.lam, i, k, step=1e-5)
                    assert abs(grad) < 1e-6 * (1 + abs(g)), (
                        f"seed {seed}: dg/dz[{i},{k}] = {grad:.3e} at g = {g:.3e}"
                    )


def test_criterion_4_synthetic_recovery():
    with criterion(4, "rank-2 recovery: held-out RMSE < 0.05 for >= 45 of 50 seeds"):
        wins = 0
        for seed in range(50):
            rng = np.random.default_rng(seed)
            num_rows = int(rng.integers(10, 21))
            num_cols = int(rng.integers(10, 21))
            observed, heldout, _, _ = low_rank_problem(
                num_rows, num_cols, rank=2, observed_fraction=0.6, seed=seed
            )
            state = init_state(num_rows, num_cols, rank=2, seed=seed)
            hp = HyperParams(0.05, 1.0)
            for _ in range(1000):
                train_iteration(state, observed, hp)
                if rmse(state, heldout).value < 0.05:
                    wins += 1
                    break
        assert wins >= 45, f"only {wins} of 50 seeds recovered the held-out entries"


def test_criterion_5_invariant_suite(tmp_path):
    with criterion(5, "invariant suite (nonnegativity, f_hat, bounds, splits, MAE<=RMSE, determinism)"):
        # nonnegativity of the output factors after every iteration
        for seed in range(20):
            train, state, hp = oracles.random_instance(seed + 1000)
            for _ in range(5):
                train_iteration(state, train, hp)
                assert state.A.min() >= 0.0 and state.X.min() >= 0.0

        # f_hat monotone non-increasing over arbitrary measurement streams
        for seed in range(30):
            rng = np.random.default_rng(seed)
            swarm = init_swarm(SwarmConfig(size=4), seed=seed)
            previous = swarm.f_hat
            for _ in range(40):
                measure_and_update(swarm, int(rng.integers(0, 4)), float(50 * rng.random()))
                assert swarm.f_hat <= previous
                previous = swarm.f_hat

        # positions and velocities inside bounds after every evolve step
        for seed in range(30):
            rng = np.random.default_rng(seed + 5000)
            swarm = init_swarm(SwarmConfig(size=4), seed=seed)
            measure_and_update(swarm, 0, float(rng.random()))
            for _ in range(25):
                q = int(rng.integers(0, 4))
                measure_and_update(swarm, q, float(20 * rng.random()))
                evolve_particle(swarm, q)
                p = swarm.particles[q]
                assert (p.position >= swarm.pos_lo).all() and (p.position <= swarm.pos_hi).all()
                assert (p.velocity >= swarm.vel_lo).all() and (p.velocity <= swarm.vel_hi).all()

        # fold splits are pairwise disjoint and cover the entry set
        for seed in range(100):
            rng = np.random.default_rng(seed)
            num_rows = int(rng.integers(4, 12))
            num_cols = int(rng.integers(4, 12))
            nnz = int(rng.integers(10, num_rows * num_cols + 1))
            matrix = random_sparse(num_rows, num_cols, nnz=nnz, seed=seed)
            keys = {(e.row, e.col) for e in matrix.entries()}
            for split in ten_fold_splits(matrix, seed):
                parts = [
                    {(e.row, e.col) for e in m.entries()}
                    for m in (split.train, split.validation, split.test)
                ]
                assert parts[0] | parts[1] | parts[2] == keys
                assert not (parts[0] & parts[1])
                assert not (parts[0] & parts[2])
                assert not (parts[1] & parts[2])

        # MAE never exceeds RMSE
        for seed in range(100):
            rng = np.random.default_rng(seed)
            num_rows = int(rng.integers(2, 15))
            num_cols = int(rng.integers(2, 15))
            nnz = int(rng.integers(1, num_rows * num_cols + 1))
            target = random_sparse(num_rows, num_cols, nnz=nnz, seed=seed)
            state = init_state(num_rows, num_cols, int(rng.integers(1, 5)), seed=seed)
            assert mae(state, target).value <= rmse(state, target).value + 1e-15

        # end-to-end determinism: identical seeds give identical summaries
        data = tmp_path / "ratings.dat"
        matrix = random_sparse(12, 9, nnz=70, seed=3, value_range=(1.0, 5.0))
        data.write_text(
            "\n".join(f"{e.row}::{e.col}::{e.value:.6f}" for e in matrix.entries()) + "\n",
            encoding="utf-8",
        )

        def run(tag):
            out = tmp_path / tag
            config = RunConfig(
                data=str(data), rank=2, mode="a2nlf", swarm_size=3, folds=2,
                max_iters=25, seed=11, out=str(out),
            )
            config.validate()
            assert cmd_train(config) == 0
            summary = json.loads((out / "summary.json").read_text())
            return summary

        def strip(obj):
            if isinstance(obj, dict):
                return {k: strip(v) for k, v in obj.items() if "elapsed" not in k and k != "out"}
            if isinstance(obj, list):
                return [strip(v) for v in obj]
            return obj

        first, second = run("one"), run("two")
        assert json.dumps(strip(first), sort_keys=True) == json.dumps(strip(second), sort_keys=True)


def test_criterion_6_degenerate_swarm_equals_fixed():
    with criterion(6, "Q=1 zero-velocity swarm reproduces fixed-mode trajectories to 1e-12"):
        lam, eta = 0.3, 1.1
        observed, heldout, _, _ = low_rank_problem(14, 11, rank=3, observed_fraction=0.7, seed=21)
        policy = TerminationPolicy(tol=1e-9, max_iters=80)

        fixed_state = init_state(14, 11, rank=3, seed=21)
        fixed_state, fixed_report = train_fixed(
            observed, fixed_state, HyperParams(lam, eta), policy, validation=heldout
        )

        position = np.array([lam, eta])
        swarm = Swarm(
            particles=[Particle(velocity=np.zeros(2), position=position.copy(),
                                pbest=position.copy())],
            pos_lo=np.array([2.0 ** -8, 2.0 ** -8]),
            pos_hi=np.array([4.0, 1.618]),
            vel_lo=np.array([-0.8, -0.32]),
            vel_hi=np.array([0.8, 0.32]),
            inertia=0.729,
            accel_pbest=1.496,
            accel_gbest=1.496,
            rng=np.random.default_rng(21),
        )
        swarm_state = init_state(14, 11, rank=3, seed=21)
        swarm_state, swarm_report = adaptive_train(observed, heldout, swarm_state, swarm, policy)

        assert swarm_report.iterations == fixed_report.iterations
        assert swarm_report.reason == fixed_report.reason
        for name in ("P", "Z", "A", "X", "H", "W"):
            diff = np.abs(getattr(swarm_state, name) - getattr(fixed_state, name)).max()
            assert diff <= 1e-12, f"{name} diverged by {diff:.3e}"
        assert [r.train_rmse for r in swarm_report.records] == [
            r.train_rmse for r in fixed_report.records
        ]


def test_criterion_7_linear_cost_scaling():
    with criterion(7, "train_iteration wall time doubles within 1.35x per |entries| doubling"):
        def best_time(nnz, rank=10, reps=9, iters_per_rep=3):
            train = random_sparse(400, 400, nnz=nnz, seed=nnz, value_range=(1.0, 5.0))
            hp = HyperParams(0.5, 1.0)
            warm = init_state(400, 400, rank, seed=1)
            train_iteration(warm, train, hp)
            times = []
            for _ in range(reps):
                state = init_state(400, 400, rank, seed=1)
                start = time.perf_counter()
                for _ in range(iters_per_rep):
                    train_iteration(state, train, hp)
                times.append((time.perf_counter() - start) / iters_per_rep)
            return min(times)

        t1 = best_time(10_000)
        t2 = best_time(20_000)
        t4 = best_time(40_000)
        lo, hi = 2 / 1.35, 2 * 1.35
        for name, ratio in (("1e4->2e4", t2 / t1), ("2e4->4e4", t4 / t2)):
            assert lo <= ratio <= hi, (
                f"{name}: ratio {ratio:.2f} outside [{lo:.2f}, {hi:.2f}] "
                f"(times {t1*1e3:.2f}/{t2*1e3:.2f}/{t4*1e3:.2f} ms)"
            )
