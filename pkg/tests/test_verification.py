import json

import numpy as np
import pytest

from privlp.constraint import (ConstraintPrivateParams, VertexArgminOracle, setcover_lp,
                               solve_constraint_private)
from privlp.io import TraceWriter
from privlp.lowsens import LowSensParams, solve_scalar_private
from privlp.lp import FeasibilityLp, PublicRegion
from privlp.verification import (DEFAULT_SEEDS, brute_force_vertex_argopt, check_feasibility,
                                 load_seeds, map_trials, random_cover, random_simplex_lp,
                                 regret_replay, setcover_opt)


class TestFeasibilityCheck:
    def test_feasible_point(self):
        lp = FeasibilityLp(np.eye(2), np.ones(2))
        rep = check_feasibility(lp, [0.5, 0.5], 0.0)
        assert rep.n_violated == 0 and rep.success

    def test_constructed_violations(self):
        lp = FeasibilityLp(np.eye(6), np.zeros(6))
        x = np.zeros(6)
        x[[2, 5]] = 0.3
        assert check_feasibility(lp, x, 0.2).n_violated == 2

    def test_shape(self):
        with pytest.raises(ValueError):
            check_feasibility(FeasibilityLp(np.eye(2), np.ones(2)), [1.0], 0.1)

    def test_report_serializes(self):
        rep = check_feasibility(FeasibilityLp(np.eye(2), np.ones(2)), [0.0, 2.0], 0.5, seed=7)
        d = rep.to_dict(include_runtime=False)
        assert d["seed"] == 7 and d["n_violated"] == 1 and "runtime" not in d
        json.dumps(d)


class TestArgopt:
    def test_ties(self):
        V = np.eye(2)
        assert brute_force_vertex_argopt(np.ones(2), np.eye(2), V) == 0

    def test_single_vertex(self):
        assert brute_force_vertex_argopt(np.ones(1), np.ones((1, 3)), np.ones((1, 3))) == 0

    def test_matches_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            A = rng.normal(size=(4, 3))
            y = rng.dirichlet(np.ones(4))
            V = rng.normal(size=(5, 3))
            oracle = VertexArgminOracle(V)
            oracle.prepare(None, None, None)
            np.testing.assert_array_equal(oracle(y, A, None, None),
                                          V[brute_force_vertex_argopt(y, A, V)])


def test_seeds(tmp_path):
    p = tmp_path / "seeds.txt"
    p.write_text("# comment\n1\n2\n\n3\n")
    assert load_seeds(p) == (1, 2, 3)
    assert len(DEFAULT_SEEDS) == 200


def test_map_trials_parallel_matches_serial():
    assert map_trials(abs, [-1, 2, -3], workers=2) == map_trials(abs, [-1, 2, -3]) == [1, 2, 3]


def test_random_simplex_lp_feasible():
    lp, x_star = random_simplex_lp(10, 4, np.random.default_rng(1))
    assert np.all(lp.A @ x_star <= lp.b + 1e-12)
    assert np.abs(lp.A).max() <= 1


def _write_mw_trace(path):
    lp, _ = random_simplex_lp(8, 4, np.random.default_rng(2))
    with TraceWriter(path) as tr:
        solve_scalar_private(lp, LowSensParams("scalar", 1.0, 1e-6, 1.0, 0.0), 0, trace=tr)


def _write_dmw_trace(path):
    rng = np.random.default_rng(3)
    cover = random_cover(12, 4, rng, p=0.5)
    costs = rng.uniform(1, 2, size=4)
    lp = setcover_lp(cover, costs, setcover_opt(cover, costs))
    rho = lp.region.opt / costs.min() - 1
    with TraceWriter(path) as tr:
        solve_constraint_private(lp, VertexArgminOracle(), ConstraintPrivateParams(1, 1e-6, 0.8, 3, rho),
                                 0, trace=tr)


def _tamper(path, index, key, delta):
    lines = path.read_text().splitlines()
    rec = json.loads(lines[index])
    rec[key][0] += delta
    lines[index] = json.dumps(rec)
    path.write_text("\n".join(lines) + "\n")


class TestReplay:
    @pytest.mark.parametrize("writer,engine", [(_write_mw_trace, "mw"), (_write_dmw_trace, "dmw")])
    def test_fresh_trace(self, tmp_path, writer, engine):
        p = tmp_path / "t.jsonl"
        writer(p)
        rep = regret_replay(p)
        assert rep["engine"] == engine and rep["consistent"] and rep["passed"]

    @pytest.mark.parametrize("index", [0, 3, -2])
    def test_tampered_loss(self, tmp_path, index):
        p = tmp_path / "t.jsonl"
        _write_dmw_trace(p)
        _tamper(p, index, "loss", 0.05)
        assert not regret_replay(p)["consistent"]

    def test_tampered_distribution(self, tmp_path):
        p = tmp_path / "t.jsonl"
        _write_mw_trace(p)
        _tamper(p, 1, "distribution", 1e-6)
        assert not regret_replay(p)["passed"]

    def test_empty(self, tmp_path):
        p = tmp_path / "t.jsonl"
        p.write_text("")
        rep = regret_replay(p)
        assert rep["passed"] and rep["vacuous"]

    def test_malformed(self, tmp_path):
        p = tmp_path / "t.jsonl"
        p.write_text('{"t": 0, "loss": [1.0]}\n')
        with pytest.raises(ValueError):
            regret_replay(p)
