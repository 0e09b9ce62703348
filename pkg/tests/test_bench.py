import json
import math

import numpy as np
import pytest

from mgsearch.bench import ExperimentConfig, run_experiment
from mgsearch.bench import io as report_io
from mgsearch.bench.config import load_config, parse_key_values
from mgsearch.bench.runner import (
    ExperimentError,
    ProfileReport,
    checkpoint_grid,
    contract_quality_run,
    improvement_factor,
)
from mgsearch.cli import main
from mgsearch.core import InvalidParameterError
from mgsearch.domains import queens
from mgsearch.domains.graphfile import read_graph
from mgsearch.induction import DepthModels
from mgsearch.search import backtracking_multigoal

SMALL = dict(width=15, height=15, goals=6, max_wall_length=4)


def _cfg(**kw):
    base = dict(domain="grid", domain_params=SMALL, seeds=(0, 1), trials=2, R=40, checkpoint_pct=10)
    base.update(kw)
    return ExperimentConfig(**base)


# -- config ----------------------------------------------------------------------


def test_config_validation():
    for bad in (
        dict(trials=0),
        dict(heuristic="nope"),
        dict(R=None),
        dict(R_pct=10),
        dict(alpha=2.0),
        dict(checkpoint_pct=0),
        dict(mode="contract-quality", R=None),
    ):
        with pytest.raises(InvalidParameterError):
            _cfg(**bad)


def test_config_dict_roundtrip():
    cfg = _cfg(heuristic="progress", heuristic_params={"sigma": 4})
    assert ExperimentConfig.from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg
    with pytest.raises(InvalidParameterError, match="bogus"):
        ExperimentConfig.from_dict({"bogus": 1})


def test_key_value_format(tmp_path):
    text = """
    # grid run
    domain = "grid"
    domain_params.width = 15
    domain_params.height = 15
    seeds = [3, 4]
    R_pct = 20
    heuristic = progress
    """
    data = parse_key_values(text)
    assert data["domain_params"] == {"width": 15, "height": 15}
    assert data["heuristic"] == "progress"
    path = tmp_path / "c.cfg"
    path.write_text(text)
    cfg = load_config(path)
    assert cfg.seeds == (3, 4) and cfg.R_pct == 20
    with pytest.raises(InvalidParameterError, match="line 1"):
        parse_key_values("no equals sign")


def test_checkpoint_grid():
    pct, gen = checkpoint_grid(200, 25)
    assert pct == (0, 25, 50, 75, 100)
    assert gen == (0, 50, 100, 150, 200)
    assert checkpoint_grid(10, 30)[0][-1] == 100.0


# -- runner ----------------------------------------------------------------------


def test_single_trial_has_zero_std():
    rep = run_experiment(_cfg(seeds=(0,), trials=1))
    r = rep.results[0]
    assert rep.means == tuple(float(r.goals_at(g)) for g in rep.generated)
    assert all(s == 0 for s in rep.stds)


def test_seed_permutation_invariance():
    a = run_experiment(_cfg(seeds=(0, 1, 2), trials=1, heuristic="progress"))
    b = run_experiment(_cfg(seeds=(2, 0, 1), trials=1, heuristic="progress"))
    assert np.allclose(a.means, b.means) and np.allclose(a.stds, b.stds)


def test_report_bounds():
    rep = run_experiment(_cfg(heuristic="sum"))
    m = rep.matrix()
    assert np.all(m.min(axis=0) <= np.array(rep.means)) and np.all(np.array(rep.means) <= m.max(axis=0))
    assert rep.trials == 4
    assert rep.percent_means()[-1] == pytest.approx(100 * rep.means[-1] / 6)


def test_unknown_domain_param_names_trial():
    with pytest.raises(ExperimentError, match="colour"):
        run_experiment(_cfg(domain_params={"colour": 1}))


def test_trial_error_names_trial():
    with pytest.raises(ExperimentError, match=r"trial 0 \(seed 0\)"):
        run_experiment(_cfg(domain="web", domain_params={"n_nodes": 50}, heuristic="sum"))


@pytest.mark.parametrize(
    "kw",
    [
        dict(heuristic="mu"),
        dict(heuristic="induction", heuristic_params={"sigma": 2}),
        dict(heuristic="combined", heuristic_params={"distance": "sum"}),
        dict(heuristic="combined", heuristic_params={"source": "induction"}),
        dict(heuristic="mu", mode="contract-resources", clustering=True, diversification=True),
        dict(algorithm="hill_climbing", heuristic="min_dist", heuristic_params={"walk_length": 3}),
        dict(algorithm="backtracking", heuristic="progress"),
        dict(domain="robots", algorithm="multi_robot", heuristic="progress"),
    ],
)
def test_algorithm_heuristic_combinations(kw):
    rep = run_experiment(_cfg(seeds=(0,), **kw))
    assert rep.trials == 2
    assert all(r.generated <= 40 for r in rep.results)


def test_other_domains():
    q = run_experiment(ExperimentConfig(domain="queens", domain_params={"n": 6}, algorithm="backtracking", R_pct=100))
    assert q.means[-1] == 4
    msa = run_experiment(
        ExperimentConfig(domain="msa", domain_params={"sequences": ["ACG", "AG"]}, algorithm="astar_epsilon", R=500)
    )
    assert msa.means[-1] >= 1
    web = run_experiment(
        ExperimentConfig(domain="web", domain_params={"n_nodes": 2000}, heuristic="combined", R_pct=5, checkpoint_pct=50)
    )
    assert web.trials == 1


def test_graph_domain(tmp_path):
    path = tmp_path / "g.mgsg"
    assert main(["gen-domain", "--kind", "web", "--out", str(path), "--set", "n_nodes=400"]) == 0
    rep = run_experiment(ExperimentConfig(domain="graph", domain_params={"path": str(path)}, heuristic="distance", R=100))
    assert rep.results[0].generated == 100


def test_improvement_factor_conventions():
    a = ProfileReport((0, 50, 100), (0, 5, 10), (0.0, 2.0, 4.0), (0, 0, 0), ())
    b = ProfileReport((0, 50, 100), (0, 5, 10), (0.0, 1.0, 0.0), (0, 0, 0), ())
    assert improvement_factor(a, a) == (1.0, 1.0, 1.0)
    assert improvement_factor(a, b) == (1.0, 2.0, math.inf)
    c = ProfileReport((0, 100), (0, 10), (0.0, 1.0), (0, 0), ())
    with pytest.raises(InvalidParameterError):
        improvement_factor(a, c)


def test_double_is_constant_two():
    a = run_experiment(_cfg(seeds=(0,), trials=1))
    doubled = ProfileReport(a.checkpoint_pct, a.generated, tuple(2 * m for m in a.means), a.stds, ())
    f = improvement_factor(doubled, a)
    assert all(v == 2.0 for v, m in zip(f, a.means) if m > 0)


def test_contract_quality_first_goal_matches_trace():
    n = 6
    cfg = ExperimentConfig(
        domain="queens",
        domain_params={"n": n},
        algorithm="backtracking",
        heuristic="lexicographic",
        mode="contract-quality",
        quality_target=1 / queens.count_solutions(n),
    )
    rep = contract_quality_run(cfg)
    first = backtracking_multigoal(queens.nqueens_problem(n)).discoveries[0].generated
    assert rep.results[0].generated == first and rep.results[0].reached


def test_contract_quality_full_target():
    cfg = ExperimentConfig(
        domain="grid", domain_params=SMALL, seeds=(0, 1), mode="contract-quality", quality_target=1.0, heuristic="progress"
    )
    rep = contract_quality_run(cfg)
    assert rep.reached_fraction == 1.0
    for r in rep.results:
        assert r.generated <= 15 * 15


def test_contract_quality_validates():
    with pytest.raises(InvalidParameterError):
        contract_quality_run(_cfg())


def test_contract_vs_anytime_only_changes_scores():
    a = run_experiment(_cfg(heuristic="bfs", mode="anytime"))
    b = run_experiment(_cfg(heuristic="bfs", mode="contract-resources"))
    assert a.generated == b.generated and a.means == b.means


# -- io ----------------------------------------------------------------------------


def test_csv_and_json_roundtrip(tmp_path):
    rep = run_experiment(_cfg(heuristic="progress"))
    csv_text = report_io.report_csv(rep)
    assert csv_text.splitlines()[0] == "checkpoint_pct,generated,goals_mean,goals_std,trials"
    (tmp_path / "r.csv").write_text(csv_text)
    (tmp_path / "r.json").write_text(report_io.report_json(rep))
    from_csv = report_io.load_report(tmp_path / "r.csv")
    from_json = report_io.load_report(tmp_path / "r.json")
    assert from_json.means == rep.means and from_json.config == rep.config
    assert np.allclose(from_csv.means, rep.means, rtol=1e-5)
    assert report_io.fmt(math.inf) == "inf" and report_io.fmt(1 / 3) == "0.333333"


def test_csv_is_deterministic():
    cfg = _cfg(heuristic="mu")
    assert report_io.report_csv(run_experiment(cfg)) == report_io.report_csv(run_experiment(cfg))


# -- cli ---------------------------------------------------------------------------


def _write_cfg(tmp_path, name, **kw):
    path = tmp_path / f"{name}.json"
    path.write_text(json.dumps(_cfg(**kw).to_dict()))
    return path


def test_cli_run_and_report(tmp_path, capsys):
    base = _write_cfg(tmp_path, "bfs")
    cand = _write_cfg(tmp_path, "prog", heuristic="progress")
    out = tmp_path / "out"
    assert main(["run", "--config", str(base), "--out", str(out)]) == 0
    assert main(["run", "--config", str(cand), "--out", str(out), "--format", "json"]) == 0
    assert main(["run", "--config", str(cand), "--out", str(out), "--trials", "1", "--seed", "5"]) == 0
    assert (out / "prog.csv").read_text().splitlines()[1].endswith(",2")
    cmp_path = tmp_path / "cmp.csv"
    assert main(["report", "--baseline", str(out / "bfs.csv"), "--candidate", str(out / "prog.json"), "--out", str(cmp_path)]) == 0
    header = cmp_path.read_text().splitlines()[0]
    assert header == "checkpoint_pct,generated,baseline_mean,candidate_mean,improvement_factor"


def test_cli_quality_run(tmp_path):
    path = tmp_path / "q.cfg"
    path.write_text('domain = "queens"\ndomain_params.n = 5\nalgorithm = "backtracking"\nmode = "contract-quality"\nquality_target = 0.5\n')
    assert main(["run", "--config", str(path), "--out", str(tmp_path)]) == 0
    rows = (tmp_path / "q.csv").read_text().splitlines()
    assert rows[0] == "seed,trial,target,total_goals,generated,reached" and rows[1].split(",")[2] == "5"


@pytest.mark.parametrize("kind,extra", [("grid", ["--set", "width=10", "--set", "height=10"]), ("queens", ["--set", "n=5"]), ("knight", ["--set", "n=3"])])
def test_cli_gen_domain_graphs(tmp_path, kind, extra):
    path = tmp_path / f"{kind}.mgsg"
    assert main(["gen-domain", "--kind", kind, "--out", str(path)] + extra) == 0
    g = read_graph(path)
    assert g.n > 0
    if kind == "queens":
        assert int(g.goals.sum()) == 10


def test_cli_gen_msa(tmp_path):
    path = tmp_path / "s.fa"
    assert main(["gen-domain", "--kind", "msa", "--out", str(path), "--seed", "2"]) == 0
    assert path.read_text().startswith(">seq0\n")


def test_cli_induce(tmp_path):
    path = tmp_path / "m.txt"
    assert main(["induce", "--sizes", "4,5", "--depth", "3", "--out", str(path)]) == 0
    assert DepthModels.load(path).D == 3


def test_cli_errors(tmp_path, capsys):
    assert main(["run", "--config", str(tmp_path / "missing.json"), "--out", str(tmp_path)]) == 2
    assert "error:" in capsys.readouterr().err
    assert main(["gen-domain", "--kind", "grid", "--out", str(tmp_path / "x"), "--set", "colour=1"]) == 2
