import json
import subprocess
import sys

import pytest

from lflat import cli

SHEAR = [[1, 1], [0, 1]]
SYMPLECTIC = {"epsilon": 1, "q": [[0, 1], [-1, 0]]}
HYPERBOLIC_PAIR = {"generator": {"duality": {"epsilon": 0, "q": [[0, 1], [1, 0]]},
                                 "rep": {"generators": {"g": [[1, 0], [0, 1]]}}}}


def run_main(tmp_path, command, job, *extra):
    src, out = tmp_path / "in.json", tmp_path / "out.json"
    src.write_text(job if isinstance(job, str) else json.dumps(job))
    code = cli.main([command, "--input", str(src), "--output", str(out), *extra])
    return code, out.read_text()


def test_ok_and_report_header(tmp_path):
    job = {"complex": {"standard": "circle"}, "system": {"stalk_dim": 2, "monodromy": {"e1-2": SHEAR}}}
    code, text = run_main(tmp_path, "cohomology", job, "--seed", "7", "--budget", "5")
    rep = json.loads(text)
    assert code == cli.EXIT_OK
    assert (rep["status"], rep["seed"], rep["budget"]) == ("ok", 7, 5)
    assert rep["result"]["H"] == [1, 1]


@pytest.mark.parametrize("command, job", [
    ("cohomology", {"complex": {"standard": "circle"}}),
    ("cohomology", {"complex": {"standard": "circle"}, "system": {"stalk_dim": 1, "monodromy": {"e0-9": [[2]]}}}),
    ("classify", {"generator": {"duality": {"epsilon": 0, "q": [[1, 0], [0, 2]]},
                                "rep": {"generators": {"g": [[0, 1], [1, 0]]}}}}),
    ("pairing", {"manifold": {"standard": "circle"}, "system": {"stalk_dim": 1},
                 "duality": {"epsilon": 0, "q": [[0.5]]}}),
    ("k0-ranks", {"duality": {"epsilon": 1, "q": [[1, 0], [0, 1]]}}),
])
def test_validation_errors_exit_2(tmp_path, command, job):
    code, text = run_main(tmp_path, command, job)
    rep = json.loads(text)
    assert code == cli.EXIT_VALIDATION and rep["status"] == "validation_error"
    assert set(rep["error"]) == {"module", "operation", "type", "diagnostic"}


def test_unreadable_input_exits_2(tmp_path):
    code, text = run_main(tmp_path, "cohomology", "{not json")
    assert code == cli.EXIT_VALIDATION and json.loads(text)["error"]["type"] == "JSONDecodeError"


def test_infinite_holonomy_cannot_be_classified(tmp_path):
    job = {"generator": {"duality": SYMPLECTIC, "rep": {"generators": {"g": SHEAR}}}}
    code, text = run_main(tmp_path, "classify", job)
    assert code == cli.EXIT_COMPUTATION
    assert json.loads(text)["error"]["type"] == "InfiniteGroupError"


def test_tau_needs_the_right_parity(tmp_path):
    job = {"manifold": {"standard": "circle"}, "system": {"stalk_dim": 1},
           "duality": {"epsilon": 0, "q": [[1]]}, "lagrangian": [[1]], "z": 0}
    code, _ = run_main(tmp_path, "tau-lagrangian", job)
    assert code in (cli.EXIT_VALIDATION, cli.EXIT_COMPUTATION)


def test_exhausted_budget_is_inconclusive(tmp_path):
    code, text = run_main(tmp_path, "reduce", HYPERBOLIC_PAIR, "--budget", "0")
    rep = json.loads(text)
    assert code == cli.EXIT_INCONCLUSIVE and rep["status"] == "inconclusive"
    assert rep["result"]["residue_dim"] == 2
    code, text = run_main(tmp_path, "reduce", HYPERBOLIC_PAIR)
    assert code == cli.EXIT_OK and json.loads(text)["result"]["residue_dim"] == 0


def test_output_is_byte_identical_across_runs(tmp_path):
    job = {"manifold": {"standard": "circle"}, "system": {"stalk_dim": 2, "monodromy": {"e1-2": SHEAR}},
           "duality": SYMPLECTIC, "lagrangian": [[1, 0]], "z": 3}
    texts = {run_main(tmp_path, "tau-lagrangian", job, "--seed", "3")[1] for _ in range(3)}
    assert len(texts) == 1
    rep = json.loads(texts.pop())
    assert rep["result"]["tau"] == -2


def test_corpus_wrapper_is_unwrapped(tmp_path):
    wrapped = {"command": "reduce", "job": HYPERBOLIC_PAIR, "oracle": {}}
    code, text = run_main(tmp_path, "reduce", wrapped)
    assert code == cli.EXIT_OK and json.loads(text)["result"]["residue_dim"] == 0


def test_console_entry_point(tmp_path):
    src, out = tmp_path / "in.json", tmp_path / "out.json"
    src.write_text(json.dumps({"duality": {"epsilon": 0, "q": [[1, 0], [0, -2]]}}))
    proc = subprocess.run([sys.executable, "-m", "lflat.cli", "k0-ranks", "--input", str(src),
                           "--output", str(out)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert json.loads(out.read_text())["result"]["ranks"] == [1, 1]
