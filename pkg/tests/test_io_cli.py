import csv
import json
import shutil
from pathlib import Path

import pytest

from zext import cli, dispatch
from zext.crosscheck import BENCH_COLUMNS, crosscheck, summary
from zext.fixtures import path_b, star_a, triangle_c
from zext.generate import KINDS, GenerateError, generate
from zext.io import FormatError, instance_to_dict, load, parse_instance, save, write_instance
from zext.metric import MetricTree, validate_cost

CORPUS = Path(__file__).resolve().parents[1] / "corpus"


def doc_text(**over):
    doc = {"vertices": 3, "edges": [[0, 1], [1, 2]], "terminals": {"0": "x", "2": "y"},
           "metric": {"matrix": {"labels": ["x", "y"], "rows": [[0, 2], [2, 0]]}}, "q": 4}
    doc.update(over)
    return json.dumps(doc)


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestFormat:
    def test_star_document(self):
        inst = load(CORPUS / "star-a.json")
        assert inst.graph.n == 4 and len(inst.terminals) == 3

    @pytest.mark.parametrize("make", [star_a, path_b, triangle_c])
    def test_round_trip(self, make):
        inst = make()
        once = parse_instance(write_instance(inst))
        twice = parse_instance(write_instance(once))
        assert instance_to_dict(once) == instance_to_dict(twice) == instance_to_dict(inst)

    def test_corpus_round_trip(self):
        for path in sorted(CORPUS.glob("*.json")):
            inst = load(path)
            assert instance_to_dict(parse_instance(write_instance(inst))) == instance_to_dict(inst)

    def test_contracted_graph_renumbered(self):
        inst = path_b()
        inst = inst.with_graph(inst.graph.contract([0]))
        doc = instance_to_dict(inst)
        assert doc["vertices"] == 3 and doc["meta"]["merged_from"][0] == [0, 1]

    def test_save_load(self, tmp_path):
        save(star_a(), tmp_path / "a.json")
        assert instance_to_dict(load(tmp_path / "a.json")) == instance_to_dict(star_a())

    def test_cost_class_accepts_non_metric(self):
        rows = [[0, 1, 5], [1, 0, 1], [5, 1, 0]]
        m = {"class": "cost", "matrix": {"labels": ["x", "y", "z"], "rows": rows}}
        inst = parse_instance(doc_text(metric=m))
        assert validate_cost(inst.cost).kind == "simple-cost"
        m["class"] = "metric"
        with pytest.raises(FormatError) as err:
            parse_instance(doc_text(metric=m))
        assert err.value.where == "metric.matrix"

    @pytest.mark.parametrize("over, where", [
        ({"edges": [[0, 7]]}, "edges[0]"),
        ({"terminals": {"0": "w"}}, "terminals.0"),
        ({"vertices": -1}, "vertices"),
        ({"metric": {"matrix": {"labels": ["x", "y"], "rows": [[0, 1], [2, 0]]}}}, "metric.matrix"),
        ({"metric": {"tree": {"nodes": ["a", "b", "c"], "edges": [["a", "b"]], "labels": ["a"]}}},
         "metric.tree"),
        ({"metric": {"tree": {"nodes": ["a", "b"], "edges": [["a", "q"]]}}}, "metric.tree.edges[0]"),
        ({"q": "many"}, "q"),
        ({"unary": {"1": {"w": 1}}}, "unary.1"),
    ])
    def test_error_locations(self, over, where):
        with pytest.raises(FormatError) as err:
            parse_instance(doc_text(**over))
        assert err.value.where == where

    def test_syntax_error_has_line(self):
        with pytest.raises(FormatError) as err:
            parse_instance('{\n  "vertices": 3,\n  oops\n}')
        assert err.value.where.startswith("line 3")


class TestGenerate:
    def test_tree(self):
        t = generate("tree", seed=1, tree_nodes=8)
        assert isinstance(t, MetricTree) and len(t.nodes) == 8 and len(t.edges) == 7

    def test_leaf_instance(self):
        inst = generate("leaf-metric-instance", seed=2, n=6)
        assert inst.tree.is_leaf_metric and set(inst.labels) == set(inst.tree.leaves)
        assert validate_cost(inst.tree.cost_matrix()).kind == "tree-metric"
        assert inst.meta["expected"]["source"] == "derived"

    @pytest.mark.parametrize("kind", [k for k in KINDS if k != "tree"])
    def test_same_seed_same_bytes(self, kind):
        assert write_instance(generate(kind, seed=9)) == write_instance(generate(kind, seed=9))

    def test_unknown_kind(self):
        with pytest.raises(GenerateError):
            generate("hypergraph", seed=0)

    def test_cli_bytes(self, capsys, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        assert run_cli(capsys, "gen", "ml-instance", "--seed", "4", "-o", str(a))[0] == 0
        assert run_cli(capsys, "gen", "ml-instance", "--seed", "4", "-o", str(b))[0] == 0
        assert a.read_bytes() == b.read_bytes()


class TestDispatch:
    def test_auto_routes(self):
        assert dispatch.choose(load(CORPUS / "leaf-metric-instance-00.json")) == "leaf-gap"
        assert dispatch.choose(load(CORPUS / "tree-metric-instance-00.json")) == "tree-gap"
        assert dispatch.choose(load(CORPUS / "matrix-metric-instance-00.json")) == "pushing"
        assert dispatch.choose(load(CORPUS / "cost-instance-00.json")) == "contractions"

    def test_mismatch_is_usage_error(self):
        with pytest.raises(dispatch.UsageError):
            dispatch.run(load(CORPUS / "cost-instance-00.json"), "leaf-gap")


class TestCli:
    def test_solve_brute_star(self, capsys):
        code, out, _ = run_cli(capsys, "solve", str(CORPUS / "star-a.json"), "--algorithm", "brute")
        rec = json.loads(out)
        assert code == 0 and rec["cost"] == 4 and rec["verified"]

    def test_solve_auto_leaf(self, capsys):
        code, out, _ = run_cli(capsys, "solve", str(CORPUS / "leaf-metric-instance-00.json"))
        assert code == 0 and json.loads(out)["algorithm"] == "leaf-gap"

    def test_solve_text(self, capsys):
        code, out, _ = run_cli(capsys, "solve", str(CORPUS / "path-b.json"), "--out", "text")
        assert code == 0 and "cost: 2" in out

    def test_solve_no_solution(self, capsys):
        code, out, _ = run_cli(capsys, "solve", str(CORPUS / "star-a.json"), "--algorithm",
                               "leaf-gap", "--q", "3")
        assert json.loads(out)["cost"] == "inf"

    def test_usage_error(self, capsys):
        code, _, err = run_cli(capsys, "solve", str(CORPUS / "cost-instance-00.json"),
                               "--algorithm", "leaf-gap")
        assert code == 2 and "usage error" in err

    def test_format_error_exit(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(doc_text(edges=[[0, 9]]))
        code, _, err = run_cli(capsys, "solve", str(bad))
        assert code == 1 and "edges[0]" in err

    def test_validate(self, capsys, tmp_path):
        f = tmp_path / "m.json"
        f.write_text(json.dumps({"labels": ["a", "b", "c"], "rows": [[0, 1, 5], [1, 0, 1], [5, 1, 0]]}))
        code, out, _ = run_cli(capsys, "validate", str(f))
        rec = json.loads(out)
        assert code == 0 and rec["class"] == "simple-cost" and rec["witness"]

    def test_reconstruct(self, capsys, tmp_path):
        f = tmp_path / "m.json"
        f.write_text(json.dumps({"labels": ["a", "b", "c"], "rows": [[0, 2, 2], [2, 0, 2], [2, 2, 0]]}))
        code, out, _ = run_cli(capsys, "reconstruct-tree", str(f))
        tree = json.loads(out)["tree"]
        assert code == 0 and len(tree["nodes"]) == 4

    def test_sparsify_and_kernelize(self, capsys):
        code, out, _ = run_cli(capsys, "sparsify", str(CORPUS / "star-a.json"), "--k", "2", "--s", "3")
        assert code == 0 and parse_instance(out).graph.m == 3
        code, out, _ = run_cli(capsys, "kernelize", str(CORPUS / "star-a.json"), "--q", "0")
        assert code == 0 and parse_instance(out).meta["kernel"]["rejected"]

    def test_crosscheck_corpus(self, capsys):
        code, out, _ = run_cli(capsys, "crosscheck", "--corpus", str(CORPUS))
        assert code == 0 and "fail" not in out.split("summary:")[1]

    def test_crosscheck_reports_corruption(self, capsys, tmp_path):
        doc = json.loads((CORPUS / "star-a.json").read_text())
        doc.setdefault("meta", {})["expected"] = {"source": "derived", "optimum": 5}
        (tmp_path / "star-a.json").write_text(json.dumps(doc))
        code, out, _ = run_cli(capsys, "crosscheck", "--corpus", str(tmp_path))
        assert code == 1 and "stored expected value disagrees" in out
        recs = crosscheck(tmp_path)
        assert summary(recs).get("fail") == 1

    def test_bench_columns(self, capsys, tmp_path):
        corpus = tmp_path / "c"
        corpus.mkdir()
        for name in ("star-a.json", "path-b.json"):
            shutil.copy(CORPUS / name, corpus / name)
        out = tmp_path / "bench.csv"
        code, _, _ = run_cli(capsys, "bench", "--corpus", str(corpus), "--csv", str(out))
        with open(out, newline="") as fh:
            rows = list(csv.reader(fh))
        assert code == 0 and rows[0] == list(BENCH_COLUMNS)
        assert list(BENCH_COLUMNS) == ["instance", "algorithm", "seed", "n", "m", "|D|", "k", "q",
                                       "rho", "gap", "cost", "crossings", "branches", "ms", "verified"]
        assert len(rows) > 2

    def test_seed_from_environment(self, capsys, monkeypatch):
        monkeypatch.setenv("ZEXT_SEED", "7")
        run_cli(capsys, "gen", "cost-instance")
        _, a, _ = run_cli(capsys, "gen", "cost-instance")
        _, b, _ = run_cli(capsys, "gen", "cost-instance", "--seed", "7")
        assert a == b

    def test_missing_file(self, capsys):
        code, _, err = run_cli(capsys, "solve", "/nonexistent/file.json")
        assert code == 1
