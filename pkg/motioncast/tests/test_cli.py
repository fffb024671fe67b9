import os

import pandas as pd
import pytest

from motioncast.cli import main
from motioncast.general_utils.serialization import read_json, write_json
from motioncast.tests.make_data.create_data import create_blob, create_ellipse


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    config = write_json(
        {
            "suite": {"classes": ["wave", "jump"], "per_class": 2, "duration_frames": 8},
            "geodesic": {"nb_intervals": 1},
        },
        str(root / "config.json"),
    )
    library_dir = str(root / "library")
    assert main(["gen", "--out", library_dir, "--seed", "3", "--config", config]) == 0
    return {
        "root": root,
        "config": config,
        "library": os.path.join(library_dir, "library.json"),
        "sequences": os.path.join(library_dir, "sequences"),
    }


def _out(workspace, name):
    return str(workspace["root"] / name)


def test_gen_writes_a_library_and_manifest(workspace):
    library = read_json(workspace["library"])
    manifest = read_json(os.path.join(os.path.dirname(workspace["library"]), "run_manifest.json"))

    assert [record["id"] for record in library["sequences"]] == [
        "wave_000",
        "wave_001",
        "jump_000",
        "jump_001",
    ]
    assert manifest["command"] == "gen"
    assert manifest["seeds"] == {"seed": 3}
    assert "library.json" in manifest["outputs"]
    assert "sequences/wave_000.json" in manifest["outputs"]


def test_gen_is_reproducible(workspace):
    out = _out(workspace, "gen_again")
    assert main(["gen", "--out", out, "--seed", "3", "--config", workspace["config"]]) == 0

    for name in ("library.json", os.path.join("sequences", "jump_001.json")):
        with open(os.path.join(out, name), "rb") as first, open(
            os.path.join(os.path.dirname(workspace["library"]), name), "rb"
        ) as second:
            assert first.read() == second.read()


def test_usage_and_runtime_errors(workspace):
    assert main(["gen", "--out", _out(workspace, "no_seed")]) == 2
    assert main(["teleport", "--out", _out(workspace, "unknown")]) == 2
    missing = str(workspace["root"] / "missing.json")
    assert main(["distance", "--out", _out(workspace, "missing"), "--a", missing, "--b", missing]) == 1
    assert main(["seq-dist", "--out", _out(workspace, "seq_dist_none")]) == 1
    assert not os.path.exists(os.path.join(_out(workspace, "seq_dist_none"), "run_manifest.json"))


def test_distance(workspace):
    a = write_json(create_blob(32).to_dict(), str(workspace["root"] / "blob.json"))
    b = write_json(create_ellipse(32).to_dict(), str(workspace["root"] / "ellipse.json"))
    config = write_json(
        {"geodesic": {"nb_intervals": 4, "max_iters": 200}}, str(workspace["root"] / "geodesic.json")
    )
    out = _out(workspace, "distance")

    assert main(["distance", "--out", out, "--a", a, "--b", b, "--config", config, "--save-path"]) == 0
    result = read_json(os.path.join(out, "distance.json"))
    assert result["distance"] > 0
    assert result["distance"] ** 2 <= 2 * result["energy"] * (1 + 1e-9)
    assert len(read_json(os.path.join(out, "geodesic_path.json"))) == 5
    assert read_json(os.path.join(out, "run_manifest.json"))["config"]["geodesic"]["nb_intervals"] == 4


def test_self_similarity(workspace):
    out = _out(workspace, "self_sim")
    sequence = os.path.join(workspace["sequences"], "wave_000.json")

    assert main(
        ["self-sim", "--out", out, "--seq", sequence, "--config", workspace["config"], "--format", "json"]
    ) == 0
    matrix = read_json(os.path.join(out, "self_similarity.json"))
    assert matrix["ids"] == matrix["columns"]
    assert matrix["ids"][0] == "f000"
    assert all(matrix["values"][i][i] == 0 for i in range(len(matrix["ids"])))


def test_sequence_distances(workspace):
    out = _out(workspace, "seq_dist")
    a = os.path.join(workspace["sequences"], "wave_000.json")
    b = os.path.join(workspace["sequences"], "jump_000.json")

    assert main(["seq-dist", "--out", out, "--a", a, "--b", b, "--config", workspace["config"]]) == 0
    alignment = read_json(os.path.join(out, "alignment.json"))
    assert (alignment["a"], alignment["b"]) == ("wave_000", "jump_000")
    assert alignment["path"][0] == [0, 0]
    assert os.path.isfile(os.path.join(out, "frame_costs.csv"))

    out = _out(workspace, "seq_dist_lib")
    assert main(
        ["seq-dist", "--out", out, "--lib", workspace["library"], "--config", workspace["config"]]
    ) == 0
    matrix = pd.read_csv(os.path.join(out, "sequence_distances.csv"), index_col=0)
    assert matrix.shape == (4, 4)


def test_annotate(workspace):
    out = _out(workspace, "annotate")
    query = os.path.join(workspace["sequences"], "jump_001.json")

    assert main(
        [
            "annotate",
            "--out",
            out,
            "--lib",
            workspace["library"],
            "--query",
            query,
            "--config",
            workspace["config"],
            "--k",
            "1",
        ]
    ) == 0
    annotation = read_json(os.path.join(out, "annotations.json"))["jump_001"]
    assert annotation["action_label"] == "jump"
    assert [neighbor["id"] for neighbor in annotation["neighbors"]] == ["jump_001"]


def test_annotate_with_bagging_needs_a_seed(workspace):
    query = os.path.join(workspace["sequences"], "jump_001.json")
    assert main(
        ["annotate", "--out", _out(workspace, "bagging"), "--lib", workspace["library"], "--query", query, "--bagging"]
    ) == 1


def test_eval(workspace):
    out = _out(workspace, "eval")

    assert main(
        [
            "eval",
            "--out",
            out,
            "--lib",
            workspace["library"],
            "--seed",
            "4",
            "--protocol",
            "one-shot",
            "--trials",
            "3",
            "--k",
            "1",
            "--config",
            workspace["config"],
        ]
    ) == 0
    report = read_json(os.path.join(out, "report.json"))
    assert len(report["trials"]) == 3
    assert report["confusion_matrix"]["classes"] == ["jump", "wave"]
    assert 0.0 <= report["accuracy_mean"] <= 1.0
    manifest = read_json(os.path.join(out, "run_manifest.json"))
    assert manifest["config"]["evaluation"]["protocol"] == "one-shot"
    assert sorted(manifest["outputs"]) == manifest["outputs"]


def test_corrupt(workspace):
    out = _out(workspace, "corrupt")

    assert main(["corrupt", "--out", out, "--lib", workspace["library"], "--rate", "0.5", "--seed", "1"]) == 0
    corruption = read_json(os.path.join(out, "corruption.json"))
    library = read_json(os.path.join(out, "library.json"))
    labels = {record["id"]: record for record in library["sequences"]}

    assert len(corruption["corrupted_ids"]) == 2
    for entry_id in corruption["corrupted_ids"]:
        assert labels[entry_id]["action_label"] != labels[entry_id]["ground_truth_label"]
    assert not os.path.exists(os.path.join(out, "sequences"))


def test_rl_train_and_eval(workspace):
    out = _out(workspace, "rl")

    assert main(["rl-train", "--out", out, "--seed", "1", "--episodes", "5", "--mode", "flat"]) == 0
    curve = pd.read_csv(os.path.join(out, "learning_curve.csv"))
    assert len(curve) == 5
    assert os.path.isfile(os.path.join(out, "agent.dat"))
    assert isinstance(read_json(os.path.join(out, "policy.json")), dict)

    eval_out = _out(workspace, "rl_eval")
    agent = os.path.join(out, "agent.dat")
    assert main(["rl-eval", "--out", eval_out, "--seed", "2", "--episodes", "3", "--agent", agent]) == 0
    assert len(pd.read_csv(os.path.join(eval_out, "evaluation.csv"))) == 3
    assert set(read_json(os.path.join(eval_out, "evaluation_summary.json"))) == {"goal_rate", "mean_reward"}


def _same_outputs(first_dir, second_dir):
    manifests = [read_json(os.path.join(folder, "run_manifest.json")) for folder in (first_dir, second_dir)]
    for manifest in manifests:
        manifest.pop("timing")
    assert manifests[0] == manifests[1]
    outputs = manifests[0]["outputs"]
    for name in outputs:
        if name == "run_manifest.json":
            continue
        with open(os.path.join(first_dir, name), "rb") as first, open(os.path.join(second_dir, name), "rb") as second:
            assert first.read() == second.read(), name


@pytest.mark.parametrize(
    "arguments",
    [
        ["eval", "--seed", "4", "--protocol", "split", "--trials", "3", "--k", "1"],
        ["rl-train", "--seed", "1", "--episodes", "5", "--mode", "annotated"],
    ],
    ids=["eval", "rl-train"],
)
def test_rerunning_with_the_same_seed_reproduces_every_output(workspace, arguments):
    extra = ["--lib", workspace["library"], "--config", workspace["config"]] if arguments[0] == "eval" else []
    first = _out(workspace, f"{arguments[0]}_first")
    second = _out(workspace, f"{arguments[0]}_second")

    assert main([arguments[0], "--out", first] + arguments[1:] + extra) == 0
    assert main([arguments[0], "--out", second] + arguments[1:] + extra) == 0
    _same_outputs(first, second)
