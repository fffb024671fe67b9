"""Command line driver exposing every pipeline stage.

Every command writes its outputs below --out and finishes by writing run_manifest.json, which lists all outputs.
Exit codes: 0 on success, 2 on usage errors, 1 on runtime errors.
"""
import argparse
import os
import sys
import time
from dataclasses import dataclass, field
from datetime import datetime
from importlib.metadata import PackageNotFoundError, version
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd

from motioncast.annotation.library import PrimitiveLibrary
from motioncast.blueprints.annotator import MotionAnnotator
from motioncast.config.geometry_config import AlignmentConfig, GeodesicConfig, MetricConfig
from motioncast.config.training_config import (
    AnnotationConfig,
    CrateRewardConfig,
    EvaluationConfig,
    LearnConfig,
    SuiteConfig,
    WipeRewardConfig,
)
from motioncast.evaluation.eval_metrics import plot_learning_curves, plot_similarity_heatmap
from motioncast.general_utils.exceptions import MotionCastError
from motioncast.general_utils.general_utils import (
    load_for_production,
    logger,
    save_to_production,
)
from motioncast.general_utils.serialization import (
    library_files,
    load_library,
    load_sequence,
    load_shape,
    read_config,
    save_library,
    save_sequence,
    write_csv,
    write_json,
)
from motioncast.geometry.correspondence import align
from motioncast.geometry.metric import geodesic
from motioncast.rl.environments import CrateEnvironment, WipeEnvironment
from motioncast.rl.options import default_option_library, options_from_primitives
from motioncast.rl.q_learning import evaluate_policy, train
from motioncast.similarity.sequence_similarity import (
    dtw_align,
    frame_cost_matrix,
    pairwise_sequence_distances,
    self_similarity,
)
from motioncast.synthetic.generators import corrupt_labels, generate, suite_specs


def _tool_version() -> str:
    try:
        return version("motioncast")
    except PackageNotFoundError:
        return "unknown"


@dataclass
class RunManifest:
    """Record of one command run. Written last, so its presence marks a completed run.

    Only the timing block changes between identical runs.
    """

    command: str
    out_dir: str
    config: Dict[str, Any] = field(default_factory=dict)
    seeds: Dict[str, Optional[int]] = field(default_factory=dict)
    inputs: Dict[str, Any] = field(default_factory=dict)
    outputs: List[str] = field(default_factory=list)
    started: float = field(default_factory=time.time)

    def output(self, file_name: str) -> str:
        """Register an output file and return its path below the output directory."""
        path = os.path.join(self.out_dir, file_name)
        os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
        if file_name not in self.outputs:
            self.outputs.append(file_name)
        return path

    def write(self) -> str:
        finished = time.time()
        payload = {
            "command": self.command,
            "config": self.config,
            "seeds": self.seeds,
            "inputs": self.inputs,
            "outputs": sorted(self.outputs),
            "tool_version": _tool_version(),
            "timing": {
                "started": datetime.utcfromtimestamp(self.started).isoformat(),
                "finished": datetime.utcfromtimestamp(finished).isoformat(),
                "wall_clock_seconds": round(finished - self.started, 3),
            },
        }
        return write_json(payload, os.path.join(self.out_dir, "run_manifest.json"))


def _dump(config: Any) -> Dict[str, Any]:
    return config.model_dump(mode="json")


def _geometry_configs(args: argparse.Namespace):
    metric = read_config(MetricConfig, args.config, "metric")
    if args.metric:
        metric = read_config(MetricConfig, args.metric)
    geodesic_config = read_config(
        GeodesicConfig, args.config, "geodesic", {"nb_intervals": args.intervals}
    )
    alignment = read_config(
        AlignmentConfig, args.config, "alignment", {"strict_correspondence": args.strict or None}
    )
    return metric, geodesic_config, alignment


def _annotation_config(args: argparse.Namespace) -> AnnotationConfig:
    return read_config(
        AnnotationConfig,
        args.config,
        "annotation",
        {"k": args.k, "use_bagging": args.bagging or None, "nb_bags": args.bags},
    )


def _record_geometry(manifest: RunManifest, metric, geodesic_config, alignment) -> None:
    manifest.config.update(
        {"metric": _dump(metric), "geodesic": _dump(geodesic_config), "alignment": _dump(alignment)}
    )


def _write_matrix(manifest: RunManifest, frame: pd.DataFrame, name: str, file_format: str) -> None:
    if file_format == "json":
        write_json(
            {
                "ids": [str(label) for label in frame.index],
                "columns": [str(label) for label in frame.columns],
                "values": frame.to_numpy().tolist(),
            },
            manifest.output(f"{name}.json"),
        )
    else:
        write_csv(frame, manifest.output(f"{name}.csv"))


def cmd_gen(args: argparse.Namespace, manifest: RunManifest) -> None:
    overrides = {"per_class": args.per_class, "noise_sigma": args.noise}
    if args.suite == "default":
        suite = read_config(SuiteConfig, args.config, "suite", overrides)
    else:
        suite = read_config(SuiteConfig, args.suite, None, overrides)
    manifest.config["suite"] = _dump(suite)
    manifest.seeds["seed"] = args.seed
    files = {}
    entries = []
    for spec in suite_specs(suite, args.seed):
        sequence = generate(spec)
        files[sequence.id] = save_sequence(
            sequence, manifest.output(os.path.join("sequences", f"{sequence.id}.json"))
        )
        entries.append(sequence)
    save_library(PrimitiveLibrary(tuple(entries)), args.out, sequence_files=files)
    manifest.output("library.json")


def cmd_distance(args: argparse.Namespace, manifest: RunManifest) -> None:
    metric, geodesic_config, alignment = _geometry_configs(args)
    _record_geometry(manifest, metric, geodesic_config, alignment)
    manifest.inputs.update({"a": args.a, "b": args.b})
    correspondence = align(load_shape(args.a), load_shape(args.b), alignment)
    path = geodesic(correspondence.shape_a, correspondence.shape_b, metric, geodesic_config)
    write_json(
        {
            "distance": path.length,
            "energy": path.energy,
            "converged": path.converged,
            "iterations": path.iterations,
            "alignment_residual": correspondence.residual,
            "reparameterization": correspondence.reparam.to_dict(),
            "rotation": correspondence.rotation.tolist(),
        },
        manifest.output("distance.json"),
    )
    if args.save_path:
        write_json([shape.to_dict() for shape in path.shapes], manifest.output("geodesic_path.json"))


def cmd_self_sim(args: argparse.Namespace, manifest: RunManifest) -> None:
    metric, geodesic_config, alignment = _geometry_configs(args)
    _record_geometry(manifest, metric, geodesic_config, alignment)
    manifest.inputs["seq"] = args.seq
    manifest.config["region"] = args.region
    sequence = load_sequence(args.seq)
    matrix = self_similarity(
        sequence, metric, args.region, geodesic_config, alignment, n_jobs=args.jobs
    ).to_frame()
    _write_matrix(manifest, matrix, "self_similarity", args.format)
    if args.heatmap:
        plot_similarity_heatmap(
            matrix, manifest.output("self_similarity.svg"), title=f"Self-similarity of {sequence.id}"
        )


def cmd_seq_dist(args: argparse.Namespace, manifest: RunManifest) -> None:
    metric, geodesic_config, alignment = _geometry_configs(args)
    _record_geometry(manifest, metric, geodesic_config, alignment)
    if args.lib:
        manifest.inputs["lib"] = args.lib
        library = load_library(args.lib)
        matrix = pairwise_sequence_distances(
            list(library.entries), metric, geodesic_config, alignment, args.jobs
        )
        _write_matrix(manifest, matrix, "sequence_distances", args.format)
        if args.heatmap:
            plot_similarity_heatmap(
                matrix, manifest.output("sequence_distances.svg"), title="Sequence distances"
            )
        return
    if not (args.a and args.b):
        raise MotionCastError("seq-dist needs either --lib or both --a and --b.")
    manifest.inputs.update({"a": args.a, "b": args.b})
    a, b = load_sequence(args.a), load_sequence(args.b)
    cost = frame_cost_matrix(a, b, metric, geodesic_config, alignment, args.jobs)
    result = dtw_align(cost)
    cost_frame = pd.DataFrame(
        cost,
        index=[f"{a.id}_f{i:03d}" for i in range(a.nb_frames)],
        columns=[f"{b.id}_f{j:03d}" for j in range(b.nb_frames)],
    )
    _write_matrix(manifest, cost_frame, "frame_costs", args.format)
    write_json(
        {
            "a": a.id,
            "b": b.id,
            "distance": result.normalized_cost,
            "raw_cost": result.raw_cost,
            "path": [list(step) for step in result.path],
        },
        manifest.output("alignment.json"),
    )


def cmd_annotate(args: argparse.Namespace, manifest: RunManifest) -> None:
    if args.bagging and args.seed is None:
        raise MotionCastError("annotate with --bagging needs --seed.")
    metric, geodesic_config, alignment = _geometry_configs(args)
    annotation_config = _annotation_config(args)
    _record_geometry(manifest, metric, geodesic_config, alignment)
    manifest.config["annotation"] = _dump(annotation_config)
    manifest.seeds["seed"] = args.seed
    manifest.inputs.update({"lib": args.lib, "query": list(args.query)})
    annotator = MotionAnnotator(
        annotation_config, metric, geodesic_config, alignment, n_jobs=args.jobs
    )
    annotator.fit(load_library(args.lib))
    queries = [load_sequence(path) for path in args.query]
    annotations = annotator.predict_many(queries, random_state=args.seed or 0)
    write_json(
        {query.id: annotation.to_dict() for query, annotation in zip(queries, annotations)},
        manifest.output("annotations.json"),
    )


def cmd_eval(args: argparse.Namespace, manifest: RunManifest) -> None:
    metric, geodesic_config, alignment = _geometry_configs(args)
    annotation_config = _annotation_config(args)
    evaluation_config = read_config(
        EvaluationConfig,
        args.config,
        "evaluation",
        {
            "protocol": args.protocol,
            "trials": args.trials,
            "split_fraction": args.split_fraction,
            "global_random_state": args.seed,
        },
    )
    _record_geometry(manifest, metric, geodesic_config, alignment)
    manifest.config.update(
        {"annotation": _dump(annotation_config), "evaluation": _dump(evaluation_config)}
    )
    manifest.seeds["seed"] = args.seed
    manifest.inputs["lib"] = args.lib
    annotator = MotionAnnotator(
        annotation_config, metric, geodesic_config, alignment, n_jobs=args.jobs
    )
    report = annotator.fit_eval(load_library(args.lib), evaluation_config)
    write_json(report.to_dict(), manifest.output("report.json"))
    write_csv(report.confusion, manifest.output("confusion_matrix.csv"))
    write_csv(report.trial_scores, manifest.output("trials.csv"), index=False)
    _write_matrix(manifest, annotator.compute_library_distances(), "library_distances", args.format)
    if args.heatmap:
        plot_similarity_heatmap(
            annotator.compute_library_distances(),
            manifest.output("library_distances.svg"),
            title="Library sequence distances",
        )


def cmd_corrupt(args: argparse.Namespace, manifest: RunManifest) -> None:
    manifest.inputs["lib"] = args.lib
    manifest.seeds["seed"] = args.seed
    manifest.config["corruption"] = {"rate": args.rate, "mode": args.mode, "classes": args.classes}
    library = load_library(args.lib)
    result = corrupt_labels(library, args.rate, args.mode, args.classes, random_state=args.seed)
    save_library(result.library, args.out, sequence_files=library_files(args.lib))
    manifest.output("library.json")
    write_json(
        {
            "corrupted_ids": list(result.corrupted_ids),
            "new_labels": {
                entry_id: result.library.get(entry_id).action_label for entry_id in result.corrupted_ids
            },
        },
        manifest.output("corruption.json"),
    )


def _environment(args: argparse.Namespace):
    if args.env == "crate":
        return CrateEnvironment(
            size=args.grid_size, rewards=read_config(CrateRewardConfig, args.config, "crate_rewards")
        )
    return WipeEnvironment(
        width=args.grid_size, rewards=read_config(WipeRewardConfig, args.config, "wipe_rewards")
    )


def cmd_rl_train(args: argparse.Namespace, manifest: RunManifest) -> None:
    learn_config = read_config(
        LearnConfig,
        args.config,
        "learn",
        {"episodes": args.episodes, "global_random_state": args.seed},
    )
    manifest.config.update({"learn": _dump(learn_config), "env": args.env, "mode": args.mode})
    manifest.seeds["seed"] = args.seed
    if args.lib:
        manifest.inputs["lib"] = args.lib
        options = options_from_primitives(load_library(args.lib))
    else:
        options = default_option_library()
    env = _environment(args)
    result = train(env, options, learn_config, args.mode)
    write_csv(result.curve, manifest.output("learning_curve.csv"), index=False)
    write_json(result.policy, manifest.output("policy.json"))
    write_json([option.to_dict() for option in result.options], manifest.output("options.json"))
    save_to_production(result, file_path=os.path.join(args.out, ""), file_name="agent")
    manifest.output("agent.dat")
    if args.heatmap:
        plot_learning_curves({args.mode: result.curve}, manifest.output("learning_curve.svg"))


def cmd_rl_eval(args: argparse.Namespace, manifest: RunManifest) -> None:
    manifest.inputs["agent"] = args.agent
    manifest.seeds["seed"] = args.seed
    manifest.config.update({"env": args.env, "episodes": args.episodes})
    result = load_for_production(file_name=args.agent)
    rollouts = evaluate_policy(_environment(args), result, args.episodes, args.seed)
    if args.format == "json":
        write_json(rollouts.to_dict(orient="records"), manifest.output("evaluation.json"))
    else:
        write_csv(rollouts, manifest.output("evaluation.csv"), index=False)
    write_json(
        {
            "mean_reward": float(rollouts["reward"].mean()) if len(rollouts) else 0.0,
            "goal_rate": float(rollouts["reached_goal"].mean()) if len(rollouts) else 0.0,
        },
        manifest.output("evaluation_summary.json"),
    )


COMMANDS = {
    "gen": cmd_gen,
    "distance": cmd_distance,
    "self-sim": cmd_self_sim,
    "seq-dist": cmd_seq_dist,
    "annotate": cmd_annotate,
    "eval": cmd_eval,
    "corrupt": cmd_corrupt,
    "rl-train": cmd_rl_train,
    "rl-eval": cmd_rl_eval,
}


def _add_geometry_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--metric", help="MetricConfig JSON file.")
    parser.add_argument("--intervals", type=int, help="Number of geodesic time intervals.")
    parser.add_argument(
        "--strict", action="store_true", help="Align every frame pair on its own."
    )


def _add_annotation_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--k", type=int, help="Number of nearest neighbors.")
    parser.add_argument("--bagging", action="store_true", help="Use bootstrap aggregation.")
    parser.add_argument("--bags", type=int, help="Number of bootstrap resamples.")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="motioncast",
        description="Motion primitive similarity, annotation and primitive-based reinforcement learning.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str, seed_required: bool = False) -> argparse.ArgumentParser:
        sub = subparsers.add_parser(name, help=help_text)
        sub.add_argument("--out", required=True, help="Output directory.")
        sub.add_argument("--config", help="JSON file with config sections.")
        sub.add_argument("--jobs", type=int, default=1, help="Parallel jobs for distance workloads.")
        sub.add_argument("--format", choices=["csv", "json"], default="csv", help="Table format.")
        sub.add_argument("--seed", type=int, required=seed_required, help="Random seed.")
        sub.add_argument("--heatmap", action="store_true", help="Also render SVG plots.")
        return sub

    gen = add("gen", "Generate a synthetic motion suite.", seed_required=True)
    gen.add_argument("--suite", default="default", help="'default' or a SuiteConfig JSON file.")
    gen.add_argument("--per-class", type=int, help="Sequences per class.")
    gen.add_argument("--noise", type=float, help="Per point noise standard deviation.")

    distance = add("distance", "Geodesic distance between two shapes.")
    distance.add_argument("--a", required=True, help="Shape JSON file.")
    distance.add_argument("--b", required=True, help="Shape JSON file.")
    distance.add_argument("--save-path", action="store_true", help="Write the geodesic path.")
    _add_geometry_flags(distance)

    self_sim = add("self-sim", "Self-similarity matrix of a sequence.")
    self_sim.add_argument("--seq", required=True, help="Sequence JSON file.")
    self_sim.add_argument("--region", nargs="+", help="Restrict the metric to these region tags.")
    _add_geometry_flags(self_sim)

    seq_dist = add("seq-dist", "DTW distance between sequences.")
    seq_dist.add_argument("--a", help="Sequence JSON file.")
    seq_dist.add_argument("--b", help="Sequence JSON file.")
    seq_dist.add_argument("--lib", help="Library manifest for all pairs distances.")
    _add_geometry_flags(seq_dist)

    annotate = add("annotate", "Annotate sequences against a library.")
    annotate.add_argument("--lib", required=True, help="Library manifest.")
    annotate.add_argument("--query", required=True, nargs="+", help="Sequence JSON files.")
    _add_geometry_flags(annotate)
    _add_annotation_flags(annotate)

    evaluation = add("eval", "Monte Carlo evaluation of label transfer.", seed_required=True)
    evaluation.add_argument("--lib", required=True, help="Library manifest.")
    evaluation.add_argument("--protocol", choices=["split", "one-shot"])
    evaluation.add_argument("--trials", type=int)
    evaluation.add_argument("--split-fraction", type=float)
    _add_geometry_flags(evaluation)
    _add_annotation_flags(evaluation)

    corrupt = add("corrupt", "Corrupt the action labels of a library.", seed_required=True)
    corrupt.add_argument("--lib", required=True, help="Library manifest.")
    corrupt.add_argument("--rate", type=float, required=True)
    corrupt.add_argument("--mode", choices=["uniform", "class-targeted"], default="uniform")
    corrupt.add_argument("--classes", nargs="+", help="Targeted classes.")

    for name, help_text in (
        ("rl-train", "Train a semi-Markov Q-learner."),
        ("rl-eval", "Roll out a trained agent greedily."),
    ):
        sub = add(name, help_text, seed_required=True)
        sub.add_argument("--env", choices=["crate", "wipe"], default="crate")
        sub.add_argument("--grid-size", type=int, default=6)
        sub.add_argument("--episodes", type=int)
        if name == "rl-train":
            sub.add_argument("--mode", choices=["annotated", "flat", "micro"], default="annotated")
            sub.add_argument("--lib", help="Library manifest whose primitives become options.")
        else:
            sub.add_argument("--agent", required=True, help="Agent file written by rl-train.")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_signal:
        return int(exit_signal.code or 0)
    if args.command == "rl-eval" and args.episodes is None:
        args.episodes = 20

    os.makedirs(args.out, exist_ok=True)
    manifest = RunManifest(command=args.command, out_dir=args.out)
    logger(f"{datetime.utcnow()}: Start command {args.command}.")
    try:
        COMMANDS[args.command](args, manifest)
    except (ValueError, OSError, KeyError) as error:
        logger(f"{datetime.utcnow()}: Command {args.command} failed: {error}")
        print(f"motioncast {args.command}: error: {error}", file=sys.stderr)
        return 1
    manifest.write()
    return 0


if __name__ == "__main__":
    sys.exit(main())
