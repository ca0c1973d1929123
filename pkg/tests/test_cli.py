import io
import json

import pytest

from conftest import DEMO_DOCUMENT
from treeprob import run_cli

DEMO_Q_DOCUMENT = """\
{
  "version": "1",
  "root": 0,
  "edges": [[0, "a", 1], [0, "b", 2], [1, "a", 3], [3, "a", 5], [3, "b", 6]],
  "leaf_mass": [[2, "1/2"], [5, "1/4"], [6, "1/4"]],
  "metadata": {}
}
"""

CYCLIC_DOCUMENT = """\
{
  "version": "1",
  "root": 0,
  "edges": [[0, "a", 1], [1, "a", 0]],
  "leaf_mass": [[0, "1"]],
  "metadata": {}
}
"""


def invoke(argv):
    out, err = io.StringIO(), io.StringIO()
    code, report = run_cli(argv, out=out, err=err)
    return code, report, out.getvalue(), err.getvalue()


@pytest.fixture
def demo_q_file(tmp_path):
    path = tmp_path / "demo_q.tree"
    path.write_text(DEMO_Q_DOCUMENT, "utf-8")
    return str(path)


@pytest.fixture
def cyclic_file(tmp_path):
    path = tmp_path / "cyclic.tree"
    path.write_text(CYCLIC_DOCUMENT, "utf-8")
    return str(path)


class TestValidate:
    def test_valid_document(self, demo_file):
        code, report, out, err = invoke(["validate", demo_file])
        assert code == 0
        assert err == ""
        assert report.results["leaf_count"]["value"] == 3
        assert report.results["branching_count"]["value"] == 3
        assert report.results["mode"]["value"] == "exact"
        assert "leaf_count = 3" in out

    def test_float_flag(self, demo_file):
        code, report, _, _ = invoke(["validate", "--float", demo_file])
        assert code == 0
        assert report.results["mode"]["value"] == "float"

    def test_json_output(self, demo_file):
        code, report, out, _ = invoke(["validate", "--json", demo_file])
        assert code == 0
        payload = json.loads(out)
        assert payload["command"] == "validate"
        digest = payload["inputs"][demo_file]
        assert digest.startswith("sha256:") and len(digest) == 71

    def test_cyclic_document(self, cyclic_file):
        code, report, out, err = invoke(["validate", cyclic_file])
        assert code == 2
        assert report is None
        assert "CycleDetected" in err

    def test_missing_file(self, tmp_path):
        code, report, _, err = invoke(["validate", str(tmp_path / "nope.tree")])
        assert code == 2
        assert report is None
        assert "error:" in err


class TestAnalyze:
    def test_demo_metrics(self, demo_file):
        code, report, out, _ = invoke(["analyze", demo_file])
        assert code == 0
        assert report.results["mean_length"] == {
            "value": 2.5,
            "unit": "branches",
            "exact": "5/2",
        }
        assert report.results["leaf_entropy"] == {
            "value": 1.5,
            "unit": "bits",
            "exact": "3/2",
        }
        assert report.results["entropy_rate"] == {
            "value": 0.6,
            "unit": "bits/branch",
            "exact": "3/5",
        }
        assert "mean_length = 2.5 branches (exact 5/2)" in out

    def test_branching_node_distribution_lines(self, demo_file):
        _, report, out, _ = invoke(["analyze", demo_file])
        dist = report.results["branching_node_distribution"]["value"]
        assert dist == {"0": 0.4, "1": 0.3, "3": 0.3}
        assert "branching_node_distribution[0] = 0.4" in out

    def test_single_node_tree_omits_rate(self, tmp_path):
        path = tmp_path / "point.tree"
        path.write_text(
            '{"root": "r", "edges": [], "leaf_mass": [["r", "1"]]}', "utf-8"
        )
        code, report, _, _ = invoke(["analyze", str(path)])
        assert code == 0
        assert report.results["mean_length"]["value"] == 0.0
        assert "entropy_rate" not in report.results


class TestDivergence:
    def test_tree_reference(self, demo_file, demo_q_file):
        code, report, _, _ = invoke(["divergence", demo_file, demo_q_file])
        assert code == 0
        assert report.results["divergence"] == {
            "value": 0.25,
            "unit": "bits",
            "exact": "1/4",
        }
        assert report.results["normalized_divergence"]["value"] == pytest.approx(
            0.1, rel=1e-12
        )
        assert len(report.inputs) == 2
        assert report.all_checks_pass()

    def test_product_reference(self, demo_file):
        code, report, _, _ = invoke(
            ["divergence", demo_file, "--product", "1/2,1/2"]
        )
        assert code == 0
        assert report.results["divergence"] == {
            "value": 1.0,
            "unit": "bits",
            "exact": "1",
        }
        assert report.results["normalized_divergence"]["value"] == pytest.approx(
            0.4, rel=1e-12
        )
        check = report.checks[0]
        assert check["name"] == "pinsker-tree"
        assert check["passed"]

    def test_tail_epsilons(self, demo_file):
        _, report, _, _ = invoke(
            ["divergence", demo_file, "--product", "1/2,1/2",
             "--epsilons", "1/2,1"]
        )
        tails = report.results["tail_probability"]["value"]
        assert tails == {"0.5": 0.7, "1.0": 0.3}

    def test_infinite_divergence_reported(self, demo_file, tmp_path):
        # reference lacking a branch the tree uses has infinite divergence
        path = tmp_path / "narrow.tree"
        path.write_text(
            '{"root": 0, "edges": [[0, "a", 1], [0, "b", 2]],'
            ' "leaf_mass": [[1, "1/2"], [2, "1/2"]]}',
            "utf-8",
        )
        code, report, _, _ = invoke(["divergence", demo_file, str(path)])
        assert report.results["divergence"]["value"] == "inf"
        assert report.results["normalized_divergence"]["value"] == "inf"
        assert code == 0
        assert report.all_checks_pass()

    def test_requires_exactly_one_reference(self, demo_file, demo_q_file):
        code, _, _, err = invoke(["divergence", demo_file])
        assert code == 2
        assert "exactly one reference" in err
        code, _, _, err = invoke(
            ["divergence", demo_file, demo_q_file, "--product", "1/2,1/2"]
        )
        assert code == 2

    def test_wrong_product_arity(self, demo_file):
        code, _, _, err = invoke(
            ["divergence", demo_file, "--product", "1/2,1/4,1/4"]
        )
        assert code == 2
        assert "AlphabetMismatch" in err


class TestCheck:
    def test_default_functionals(self, demo_file):
        code, report, out, _ = invoke(["check", demo_file])
        assert code == 0
        names = [check["name"] for check in report.checks]
        assert names == [
            "lansit[path-length]",
            "differential-lansit[path-length]",
            "lansit[surprisal]",
            "differential-lansit[surprisal]",
        ]
        assert all(check["passed"] for check in report.checks)
        assert all(check["tolerance"] == 0.0 for check in report.checks)
        assert out.count(": PASS") == 4

    def test_path_length_sides(self, demo_file):
        _, report, _, _ = invoke(["check", demo_file])
        lansit = report.checks[0]
        assert lansit["leaf_side"] == 2.5
        assert lansit["node_side"] == 2.5
        assert lansit["residual"] == 0.0
        differential = report.checks[1]
        assert differential["leaf_side"] == 1.0
        assert differential["node_side"] == 1.0

    def test_functional_file(self, demo_file, tmp_path):
        path = tmp_path / "f.json"
        values = {str(n): str(n * n) for n in (0, 1, 2, 3, 5, 6)}
        path.write_text(json.dumps(values), "utf-8")
        code, report, _, _ = invoke(
            ["check", demo_file, "--functional", str(path)]
        )
        assert code == 0
        assert [c["name"] for c in report.checks] == [
            "lansit[file]",
            "differential-lansit[file]",
        ]
        assert report.all_checks_pass()

    def test_functional_file_missing_nodes(self, demo_file, tmp_path):
        path = tmp_path / "partial.json"
        path.write_text('{"0": "1"}', "utf-8")
        code, _, _, err = invoke(
            ["check", demo_file, "--functional", str(path)]
        )
        assert code == 2
        assert "FunctionalIncomplete" in err

    def test_float_mode_uses_tolerance(self, demo_file):
        code, report, _, _ = invoke(["check", "--float", demo_file])
        assert code == 0
        assert all(check["tolerance"] == 1e-9 for check in report.checks)
        assert report.all_checks_pass()


class TestSweep:
    def test_csv_to_stdout(self):
        code, _, out, _ = invoke(
            ["sweep", "--target", "2/3,1/3", "--budgets", "4,16"]
        )
        assert code == 0
        lines = out.splitlines()
        assert lines[0].startswith("leaf_count,mean_length,")
        assert lines[1].startswith("4,2.25,")
        assert lines[2].startswith("16,")

    def test_csv_to_file(self, tmp_path):
        target = tmp_path / "sweep.csv"
        code, report, out, _ = invoke(
            ["sweep", "--target", "2/3,1/3", "--budgets", "4,16",
             "--out", str(target)]
        )
        assert code == 0
        assert report.results["csv_path"]["value"] == str(target)
        text = target.read_text("utf-8")
        assert text.startswith("leaf_count,")
        assert "rows = 2" in out

    def test_json_embeds_csv(self):
        code, _, out, _ = invoke(
            ["sweep", "--target", "1/2,1/2", "--budgets", "2,4", "--json"]
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["command"] == "sweep"
        assert payload["results"]["generator_algorithm"]["value"] == (
            "python-random-mt19937"
        )
        assert payload["results"]["csv"]["value"].startswith("leaf_count,")
        assert payload["results"]["final_normalized_divergence"]["value"] == 0.0

    def test_invalid_budgets(self):
        code, _, _, err = invoke(
            ["sweep", "--target", "2/3,1/3", "--budgets", "16,4"]
        )
        assert code == 2
        assert "ParamsInvalid" in err

    def test_invalid_target(self):
        code, _, _, err = invoke(
            ["sweep", "--target", "2/3,1/2", "--budgets", "4,16"]
        )
        assert code == 2


class TestParsing:
    def test_help_exits_zero(self):
        code, report, _, _ = invoke(["--help"])
        assert code == 0
        assert report is None

    def test_unknown_command(self):
        code, report, _, _ = invoke(["frobnicate"])
        assert code == 2
        assert report is None

    def test_missing_required_argument(self):
        code, _, _, _ = invoke(["sweep", "--target", "1/2,1/2"])
        assert code == 2
