"""Command-line surface: file-in, file-out subcommands over the pipeline.

Every run writes a run.json provenance file (the resolved config, no
timestamps) beside its outputs, so identical inputs + flags + seed give
byte-identical output trees.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import click
import numpy as np

from . import __version__
from .equivalences import automorphic_orbits, regular_refinement, structural_classes
from .features import (
    DEFAULT_OPERATORS,
    DEFAULT_PRIMITIVES,
    FeatureLearnConfig,
    descriptors_from_json,
    descriptors_to_json,
    features_from_csv,
    features_to_csv,
    learn_features,
)
from .graph import Graph, load_edge_list
from .roles import (
    RoleModel,
    factorize_at_rank,
    hard_assignment,
    model_from_json,
    model_to_json,
    select_rank,
    soft_memberships,
)
from .transfer import (
    estimate_transition_model,
    role_time_series,
    series_to_csv,
    transfer_memberships,
    transition_to_json,
)

ORACLE_KINDS = ("structural", "structural-weak", "automorphic", "regular")


@dataclass(frozen=True)
class RunConfig:
    """Resolved flags for one CLI run; echoed verbatim into run.json."""

    subcommand: str
    inputs: tuple[str, ...]
    output_dir: str = "."
    primitives: tuple[str, ...] = DEFAULT_PRIMITIVES
    operators: tuple[str, ...] = DEFAULT_OPERATORS
    bin_fraction: float = 0.5
    lam: float = 1.0
    maxiter: int = 10
    criterion: str = "aic"
    bits: int = 16
    trials: int = 5
    seed: int = 1
    rank: int | None = None
    hard: bool = False
    kind: str = "structural"


def _read(path: str) -> str:
    p = Path(path)
    if not p.is_file():
        raise ValueError(f"input file not found: {path}")
    return p.read_text()


def _load_graph(path: str) -> Graph:
    return load_edge_list(_read(path))


def _load_model(path: str) -> RoleModel:
    try:
        return model_from_json(_read(path))
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise ValueError(f"malformed model file {path}: {exc}") from exc


def _write_run_json(config: RunConfig, outdir: Path) -> None:
    doc = asdict(config)
    doc["inputs"] = list(config.inputs)
    doc["primitives"] = list(config.primitives)
    doc["operators"] = list(config.operators)
    doc["version"] = __version__
    (outdir / "run.json").write_text(json.dumps(doc, indent=2) + "\n")


def _memberships_csv(w: np.ndarray) -> str:
    header = "node," + ",".join(f"role_{k}" for k in range(w.shape[1]))
    lines = [header]
    for node in range(w.shape[0]):
        lines.append(f"{node}," + ",".join(repr(float(v)) for v in w[node]))
    return "\n".join(lines) + "\n"


def _run_learn(config: RunConfig, outdir: Path) -> None:
    g = _load_graph(config.inputs[0])
    fl = FeatureLearnConfig(
        primitives=config.primitives,
        operators=config.operators,
        bin_fraction=config.bin_fraction,
        threshold=config.lam,
        maxiter=config.maxiter,
    )
    x = learn_features(g, fl)
    (outdir / "features.csv").write_text(features_to_csv(x))
    (outdir / "descriptors.json").write_text(descriptors_to_json(x.descriptors))


def _run_select_rank(config: RunConfig, outdir: Path) -> None:
    x = features_from_csv(_read(config.inputs[0]))
    descriptors = None
    if len(config.inputs) > 1:
        descriptors = descriptors_from_json(_read(config.inputs[1]))
        if len(descriptors) != x.shape[1]:
            raise ValueError("descriptor count does not match feature columns")
    if config.rank is not None:
        model = factorize_at_rank(
            x,
            config.rank,
            criterion=config.criterion,
            b=config.bits,
            seed=config.seed,
            descriptors=descriptors,
            maxiter=config.maxiter,
        )
    else:
        model = select_rank(
            x,
            criterion=config.criterion,
            b=config.bits,
            trials=config.trials,
            seed=config.seed,
            descriptors=descriptors,
            maxiter=config.maxiter,
        )
    (outdir / "model.json").write_text(model_to_json(model))


def _run_assign(config: RunConfig, outdir: Path) -> None:
    model = _load_model(config.inputs[0])
    if config.hard:
        labels = hard_assignment(model.w)
        lines = ["node,role"] + [f"{node},{int(r)}" for node, r in enumerate(labels)]
        (outdir / "assignments.csv").write_text("\n".join(lines) + "\n")
    else:
        (outdir / "assignments.csv").write_text(_memberships_csv(soft_memberships(model.w)))


def _run_transfer(config: RunConfig, outdir: Path) -> None:
    model = _load_model(config.inputs[0])
    g2 = _load_graph(config.inputs[1])
    w = transfer_memberships(g2, model, seed=config.seed)
    (outdir / "memberships.csv").write_text(_memberships_csv(w))


def _parse_manifest(path: str) -> tuple[tuple[int, ...], tuple[str, ...]]:
    """Snapshot manifest: one edge-list path per line, optionally preceded by
    an integer timestamp. Relative paths resolve against the manifest."""
    base = Path(path).parent
    timestamps: list[int] = []
    paths: list[str] = []
    next_t = 0
    for lineno, raw in enumerate(_read(path).splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(maxsplit=1)
        if len(parts) == 2 and parts[0].lstrip("-").isdigit():
            t, target = int(parts[0]), parts[1]
        else:
            t, target = next_t, line
        next_t = t + 1
        timestamps.append(t)
        paths.append(str(base / target))
    if len(paths) < 2:
        raise ValueError(f"manifest {path} must list at least 2 snapshots")
    if len(set(timestamps)) != len(timestamps):
        raise ValueError(f"manifest {path} has duplicate timestamps")
    return tuple(timestamps), tuple(paths)


def _run_dynamic(config: RunConfig, outdir: Path) -> None:
    model = _load_model(config.inputs[0])
    timestamps, paths = _parse_manifest(config.inputs[1])
    graphs = [_load_graph(p) for p in paths]
    series = role_time_series(graphs, model, timestamps=timestamps)
    (outdir / "series.csv").write_text(series_to_csv(series))
    # one global transition: stack all consecutive snapshot pairs with a
    # shared node count and solve them jointly
    pairs = [
        (series.memberships[i], series.memberships[i + 1])
        for i in range(len(graphs) - 1)
        if series.memberships[i].shape[0] == series.memberships[i + 1].shape[0]
    ]
    if not pairs:
        raise ValueError("no consecutive snapshots share a node count")
    w_a = np.vstack([a for a, _ in pairs])
    w_b = np.vstack([b for _, b in pairs])
    t = estimate_transition_model(w_a, w_b)
    (outdir / "transition.json").write_text(transition_to_json(t))


def _run_oracle(config: RunConfig, outdir: Path) -> None:
    g = _load_graph(config.inputs[0])
    if config.kind == "structural":
        partition = structural_classes(g, variant="strict")
    elif config.kind == "structural-weak":
        partition = structural_classes(g, variant="weak")
    elif config.kind == "automorphic":
        partition = automorphic_orbits(g)
    elif config.kind == "regular":
        partition = regular_refinement(g)
    else:
        raise ValueError(f"unknown oracle kind {config.kind!r}")
    doc = {"classes": [sorted(c) for c in partition.classes]}
    text = json.dumps(doc, indent=2) + "\n"
    (outdir / "classes.json").write_text(text)
    print(text, end="")


_RUNNERS = {
    "learn": (_run_learn, 1),
    "select-rank": (_run_select_rank, None),
    "assign": (_run_assign, 1),
    "transfer": (_run_transfer, 2),
    "dynamic": (_run_dynamic, 2),
    "oracle": (_run_oracle, 1),
}


def execute(config: RunConfig) -> int:
    """Run one subcommand; returns the process exit status."""
    if config.subcommand not in _RUNNERS:
        raise ValueError(f"unknown subcommand {config.subcommand!r}")
    runner, arity = _RUNNERS[config.subcommand]
    if arity is not None and len(config.inputs) != arity:
        raise ValueError(f"{config.subcommand} takes exactly {arity} input path(s)")
    outdir = Path(config.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    runner(config, outdir)
    _write_run_json(config, outdir)
    return 0


def _split_names(_ctx, _param, value: str) -> tuple[str, ...]:
    names = tuple(s.strip() for s in value.split(",") if s.strip())
    if not names:
        raise click.BadParameter("expected a comma-separated list of names")
    return names


def _dispatch(config: RunConfig) -> None:
    try:
        status = execute(config)
    except (ValueError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        raise SystemExit(1) from exc
    raise SystemExit(status)


_output_dir = click.option(
    "--output-dir", default=".", show_default=True, help="Directory for output files."
)
_seed = click.option("--seed", default=1, show_default=True, help="Random seed.")


@click.group()
@click.version_option(__version__)
def main():
    """Structural role discovery in graphs."""


@main.command()
@click.argument("graph_path", metavar="EDGELIST")
@click.option(
    "--primitives",
    default=",".join(DEFAULT_PRIMITIVES),
    show_default=True,
    callback=_split_names,
    help="Comma-separated primitive feature names.",
)
@click.option(
    "--operators",
    default=",".join(DEFAULT_OPERATORS),
    show_default=True,
    callback=_split_names,
    help="Comma-separated neighbor aggregation operators.",
)
@click.option("--bin-fraction", default=0.5, show_default=True, help="Log-binning fraction p.")
@click.option(
    "--lambda",
    "lam",
    default=1.0,
    show_default=True,
    help="Feature-graph agreement threshold.",
)
@click.option("--maxiter", default=10, show_default=True, help="Feature recursion depth cap.")
@_seed
@_output_dir
def learn(graph_path, primitives, operators, bin_fraction, lam, maxiter, seed, output_dir):
    """Learn recursive features: EDGELIST -> features.csv + descriptors.json."""
    _dispatch(
        RunConfig(
            subcommand="learn",
            inputs=(graph_path,),
            output_dir=output_dir,
            primitives=primitives,
            operators=operators,
            bin_fraction=bin_fraction,
            lam=lam,
            maxiter=maxiter,
            seed=seed,
        )
    )


@main.command("select-rank")
@click.argument("features_path", metavar="FEATURES_CSV")
@click.argument("descriptors_path", metavar="[DESCRIPTORS_JSON]", required=False)
@click.option(
    "--criterion",
    type=click.Choice(["mdl", "aic"]),
    default="aic",
    show_default=True,
    help="Model selection criterion.",
)
@click.option("--bits", default=16, show_default=True, help="Bits per parameter (mdl).")
@click.option(
    "--trials",
    default=5,
    show_default=True,
    help="Consecutive non-improving ranks before the sweep stops.",
)
@click.option("--maxiter", default=500, show_default=True, help="NMF iteration cap.")
@click.option("--rank", default=None, type=int, help="Skip the sweep and fit this rank.")
@_seed
@_output_dir
def select_rank_cmd(
    features_path, descriptors_path, criterion, bits, trials, maxiter, rank, seed, output_dir
):
    """Pick a role count by cost sweep: FEATURES_CSV -> model.json."""
    inputs = (features_path,) if descriptors_path is None else (features_path, descriptors_path)
    _dispatch(
        RunConfig(
            subcommand="select-rank",
            inputs=inputs,
            output_dir=output_dir,
            criterion=criterion,
            bits=bits,
            trials=trials,
            maxiter=maxiter,
            rank=rank,
            seed=seed,
        )
    )


@main.command()
@click.argument("model_path", metavar="MODEL_JSON")
@click.option("--hard/--soft", default=False, help="Argmax labels vs row-normalized memberships.")
@_seed
@_output_dir
def assign(model_path, hard, seed, output_dir):
    """Emit role assignments: MODEL_JSON -> assignments.csv."""
    _dispatch(
        RunConfig(
            subcommand="assign",
            inputs=(model_path,),
            output_dir=output_dir,
            hard=hard,
            seed=seed,
        )
    )


@main.command()
@click.argument("model_path", metavar="MODEL_JSON")
@click.argument("graph_path", metavar="EDGELIST")
@_seed
@_output_dir
def transfer(model_path, graph_path, seed, output_dir):
    """Score a new graph under a fitted model: -> memberships.csv."""
    _dispatch(
        RunConfig(
            subcommand="transfer",
            inputs=(model_path, graph_path),
            output_dir=output_dir,
            seed=seed,
        )
    )


@main.command()
@click.argument("model_path", metavar="MODEL_JSON")
@click.argument("manifest_path", metavar="MANIFEST")
@_seed
@_output_dir
def dynamic(model_path, manifest_path, seed, output_dir):
    """Track roles over snapshots: -> series.csv + transition.json.

    MANIFEST lists one edge-list path per line (optional leading integer
    timestamp); relative paths resolve against the manifest file.
    """
    _dispatch(
        RunConfig(
            subcommand="dynamic",
            inputs=(model_path, manifest_path),
            output_dir=output_dir,
            seed=seed,
        )
    )


@main.command()
@click.argument("graph_path", metavar="EDGELIST")
@click.option(
    "--kind",
    type=click.Choice(list(ORACLE_KINDS)),
    default="structural",
    show_default=True,
    help="Equivalence relation to compute.",
)
@_seed
@_output_dir
def oracle(graph_path, kind, seed, output_dir):
    """Exact node-equivalence classes: EDGELIST -> classes.json (+ stdout)."""
    _dispatch(
        RunConfig(
            subcommand="oracle",
            inputs=(graph_path,),
            output_dir=output_dir,
            kind=kind,
            seed=seed,
        )
    )


if __name__ == "__main__":
    main()
