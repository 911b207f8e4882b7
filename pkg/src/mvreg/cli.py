"""Batch command line: pairwise, register, section, saliency, retrieve,
bench.  Exit codes: 0 success, 1 input error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import bench as bench_mod
from . import figures, report
from .averaging import ViewGraph
from .cloud import PointCloud
from .config import RunConfig, read_config
from .errors import InputError, NumericalError
from .geometry import RigidMotion, read_transform, write_transform
from .icp import icp_adaptive
from .pipeline import register_multiview
from .ply import PlyDocument, read_ply, write_ply
from .retrieval import read_standard_triangle, retrieve_faces
from .saliency import TriangleMesh, saliency
from .synthetic import make_multiview_scene

_SCENES = {
    "desk4": lambda seed: make_multiview_scene(seed, n_views=4, points_per_view=700),
    "desk6": lambda seed: make_multiview_scene(seed, n_views=6, points_per_view=700),
}


def _load_config(args) -> RunConfig:
    cfg = read_config(args.config) if args.config else RunConfig()
    if getattr(args, "seed", None) is not None:
        cfg = RunConfig(icp=cfg.icp, pipeline=cfg.pipeline,
                        retrieval=cfg.retrieval, seed=args.seed)
    return cfg


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_cloud(path) -> PointCloud:
    return PointCloud(read_ply(path).vertices)


def _load_mesh(path) -> TriangleMesh:
    doc = read_ply(path)
    if doc.faces is None or not len(doc.faces):
        raise InputError(f"{path}: mesh subcommands need a PLY with faces")
    return TriangleMesh(doc.vertices, doc.faces)


def _unique_stems(paths) -> list[str]:
    stems = [Path(p).stem for p in paths]
    dupes = {s for s in stems if stems.count(s) > 1}
    if dupes:
        raise InputError(f"duplicate input stems: {sorted(dupes)}")
    return stems


def _cmd_pairwise(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args)
    source = _load_cloud(args.source)
    target = _load_cloud(args.target)
    init = read_transform(args.init) if args.init else RigidMotion.identity()
    result = icp_adaptive(source, target, init, cfg.icp)
    write_transform(result.motion, out / "pairwise_transform.txt")
    report.write_pairwise_report(result, out / "pairwise_report.csv")
    if result.overlap_rate < cfg.icp.min_overlap:
        print(f"warning: overlap rate {result.overlap_rate:.3f} below "
              f"min_overlap {cfg.icp.min_overlap:.3f}", file=sys.stderr)
    print(f"pairwise: rms={result.final_rms:.6g} overlap={result.overlap_rate:.3f} "
          f"iterations={result.iterations_used} converged={result.converged}")
    return 0


def _cmd_register(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args)
    stems = _unique_stems(args.clouds)
    clouds = [_load_cloud(p) for p in args.clouds]
    if args.init_dir:
        motions = [read_transform(Path(args.init_dir) / f"{s}.txt") for s in stems]
        init = ViewGraph.anchored(motions)
    else:
        init = ViewGraph(tuple(RigidMotion.identity() for _ in clouds), ())
    result = register_multiview(clouds, init, cfg.pipeline)
    tdir = out / "transforms"
    tdir.mkdir(exist_ok=True)
    for stem, motion in zip(stems, result.graph.global_motions):
        write_transform(motion, tdir / f"{stem}.txt")
    fused = np.concatenate([
        m.apply(c.points) for c, m in zip(clouds, result.graph.global_motions)
    ])
    write_ply(PlyDocument(vertices=fused), out / "fused.ply", binary=True)
    report.write_registration_report(result, out / "report.csv")
    figures.save_error_history(result.error_history, out / "error_history.png")
    print(f"register: objective={result.objective:.6g} "
          f"outer_iterations={len(result.error_history)} "
          f"seconds={result.wall_seconds:.2f}")
    return 0


def _cmd_section(args) -> int:
    _ = _load_config(args)
    out = _out_dir(args)
    stems = _unique_stems(args.clouds)
    clouds = [_load_cloud(p) for p in args.clouds]
    if args.transforms:
        motions = [read_transform(Path(args.transforms) / f"{s}.txt") for s in stems]
        clouds = [c.transformed(m) for c, m in zip(clouds, motions)]
    rows = report.cross_section(clouds, args.axis, args.position, args.thickness)
    report.write_section_csv(rows, out / "section.csv")
    figures.save_section_figure(rows, out / "section.png", args.axis, args.position)
    print(f"section: {len(rows)} points from {len(clouds)} views")
    return 0


def _cmd_saliency(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args)
    mesh = _load_mesh(args.mesh)
    field = saliency(mesh, cfg.retrieval)
    doc = PlyDocument(vertices=mesh.vertices, faces=mesh.faces,
                      scalars={"saliency": field.values})
    write_ply(doc, out / "saliency.ply", binary=False)
    report.write_saliency_summary(field.values, out / "saliency_summary.csv")
    figures.save_saliency_histogram(field.values, out / "saliency_hist.png")
    print(f"saliency: {mesh.n_vertices} vertices, max={field.values.max():.6g}")
    return 0


def _cmd_retrieve(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args)
    standard = read_standard_triangle(args.standard)
    stems = _unique_stems(args.models)
    meshes = [_load_mesh(p) for p in args.models]
    results = retrieve_faces(meshes, standard, cfg.retrieval, ids=stems)
    report.write_retrieval_report(results, out / "retrieval.csv")
    figures.save_retrieval_figure(results, cfg.retrieval.thres_ft, out / "retrieval.png")
    n_face = sum(r.is_face for r in results)
    print(f"retrieve: {n_face}/{len(results)} models classified as faces")
    return 0


def _cmd_bench(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args)
    if args.scene not in _SCENES:
        raise InputError(f"unknown scene {args.scene!r}; choose from {sorted(_SCENES)}")
    try:
        levels = [float(x) for x in args.levels.split(",") if x.strip()]
    except ValueError:
        raise InputError(f"bad --levels value {args.levels!r}") from None
    if not levels:
        raise InputError("no noise levels given")
    clouds, truth = _SCENES[args.scene](cfg.seed)
    result = bench_mod.run_benchmark(clouds, truth, levels, args.trials,
                                     cfg.seed, cfg.pipeline)
    bench_mod.write_bench_table(result, out / "bench.csv")
    bench_mod.write_bench_objectives(result, out / "bench_objectives.csv")
    figures.save_bench_trials(result, out / "bench_trials.png")
    for e in result.entries:
        print(f"bench: level={e.noise_level:g} {e.strategy}: "
              f"mean={e.mean_objective:.6g} std={e.std_objective:.6g} "
              f"time={e.mean_seconds:.2f}s failures={e.failures}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mvreg",
        description="Multi-view point cloud registration and 3D face retrieval",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key = value config file")
        p.add_argument("--seed", type=int, default=None, help="RNG seed override")
        p.add_argument("--out", default=".", help="output directory")

    p = sub.add_parser("pairwise", help="register one cloud onto another")
    p.add_argument("source")
    p.add_argument("target")
    p.add_argument("--init", help="initial transform file")
    common(p)
    p.set_defaults(func=_cmd_pairwise)

    p = sub.add_parser("register", help="register N clouds jointly")
    p.add_argument("clouds", nargs="+")
    p.add_argument("--init-dir", help="directory of per-view initial transforms")
    common(p)
    p.set_defaults(func=_cmd_register)

    p = sub.add_parser("section", help="cross-section CSV and figure")
    p.add_argument("clouds", nargs="+")
    p.add_argument("--axis", choices=("x", "y", "z"), default="z")
    p.add_argument("--position", type=float, required=True)
    p.add_argument("--thickness", type=float, required=True)
    p.add_argument("--transforms", help="directory of per-view transforms to apply")
    common(p)
    p.set_defaults(func=_cmd_section)

    p = sub.add_parser("saliency", help="per-vertex saliency of a mesh")
    p.add_argument("mesh")
    common(p)
    p.set_defaults(func=_cmd_saliency)

    p = sub.add_parser("retrieve", help="face/non-face retrieval over models")
    p.add_argument("standard", help="standard facial triangle file")
    p.add_argument("models", nargs="+")
    common(p)
    p.set_defaults(func=_cmd_retrieve)

    p = sub.add_parser("bench", help="Monte-Carlo noise robustness benchmark")
    p.add_argument("--scene", default="desk4")
    p.add_argument("--levels", default="0.02,0.04,0.06")
    p.add_argument("--trials", type=int, default=50)
    common(p)
    p.set_defaults(func=_cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
