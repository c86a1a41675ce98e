"""``edgelbp`` command line: curvature, describe, distmat, evaluate.

Settings come from defaults, then ``--config FILE``, then explicit flags.
Exit status: 0 on success, 1 if some input failed, 2 on a bad configuration.
"""

from __future__ import annotations

import argparse
import csv
import glob
import logging
import os
import sys
import time

from .config import ConfigError, RunConfig
from .curvature import FIELD_NAMES, curvature_field, estimate_principal_curvatures
from .errors import EdgeLBPError, ParamMismatchError
from .io import load_mesh
from .lbp import ALPHAS, compute_descriptor, load_descriptor, save_descriptor
from .retrieval import GroundTruth, evaluate
from .similarity import METRICS, DistanceMatrix, distance_matrix

log = logging.getLogger("edgelbp")

DESCRIPTOR_SUFFIX = ".elbp"
MESH_SUFFIXES = (".off", ".obj", ".ply")

# flag dest -> RunConfig attribute
_CONFIG_FLAGS = {
    "h": "h", "P": "P", "n_rings": "n_rings", "rmax_mode": "rmax_mode", "r_max": "r_max",
    "rmax_c": "rmax_c", "alpha": "alpha", "metric": "metric", "e_cutoff": "e_cutoff",
    "averaging_ring_size": "averaging_ring_size", "output_dir": "output_dir", "n_jobs": "n_jobs",
}


def _add_common(p):
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("-o", "--output-dir", dest="output_dir")
    p.add_argument("-v", "--verbose", action="store_true")


def _add_field(p):
    p.add_argument("--h", choices=FIELD_NAMES, help="curvature field coded on the rings")
    p.add_argument("--averaging-ring-size", dest="averaging_ring_size", type=int)


def build_parser():
    parser = argparse.ArgumentParser(prog="edgelbp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("curvature", help="export a curvature field as CSV")
    p.add_argument("mesh")
    p.add_argument("--field", choices=FIELD_NAMES + ("all",), default="all")
    p.add_argument("--out", help="CSV path (default: <output-dir>/<mesh>_curvature.csv)")
    _add_field(p)
    _add_common(p)

    p = sub.add_parser("describe", help="compute one descriptor per mesh")
    p.add_argument("inputs", nargs="*", help="mesh files, directories or glob patterns")
    _add_field(p)
    p.add_argument("-P", dest="P", type=int, help="samples per ring")
    p.add_argument("--n-rings", dest="n_rings", type=int)
    p.add_argument("--rmax-mode", dest="rmax_mode", choices=("explicit", "area", "edge"))
    p.add_argument("--r-max", dest="r_max", type=float, help="outer radius (explicit mode)")
    p.add_argument("--rmax-c", dest="rmax_c", type=float, help="edge-length multiple (edge mode)")
    p.add_argument("--alpha", choices=ALPHAS)
    p.add_argument("-j", "--jobs", dest="n_jobs", type=int)
    _add_common(p)

    p = sub.add_parser("distmat", help="distance matrix of a descriptor directory")
    p.add_argument("descriptors", help="directory of descriptor files")
    p.add_argument("--metric", choices=METRICS)
    p.add_argument("--out", help="CSV path (default: <output-dir>/distances.csv)")
    _add_common(p)

    p = sub.add_parser("evaluate", help="retrieval scores of a distance matrix")
    p.add_argument("distmat", help="distance matrix CSV")
    p.add_argument("labels", help="CSV of model_id,class")
    p.add_argument("--e-cutoff", dest="e_cutoff", type=int)
    _add_common(p)
    return parser


def resolve_config(args):
    cfg = RunConfig.load(args.config) if getattr(args, "config", None) else RunConfig()
    for dest, attr in _CONFIG_FLAGS.items():
        v = getattr(args, dest, None)
        if v is not None:
            setattr(cfg, attr, v)
    if getattr(args, "inputs", None):
        cfg.inputs = list(args.inputs)
    return cfg.validate()


def expand_inputs(patterns):
    paths = []
    for pat in patterns:
        if os.path.isdir(pat):
            found = [os.path.join(pat, f) for f in os.listdir(pat) if f.lower().endswith(MESH_SUFFIXES)]
        else:
            found = glob.glob(pat) or [pat]
        paths.extend(sorted(found))
    return list(dict.fromkeys(paths))


def model_id(path):
    return os.path.splitext(os.path.basename(path))[0]


def cmd_curvature(args, cfg):
    mesh = load_mesh(args.mesh)
    pc = estimate_principal_curvatures(mesh, cfg.averaging_ring_size)
    names = FIELD_NAMES if args.field == "all" else (args.field,)
    out = args.out or os.path.join(cfg.output_dir, f"{model_id(args.mesh)}_curvature.csv")
    os.makedirs(os.path.dirname(os.path.abspath(out)), exist_ok=True)
    cols = [curvature_field(pc, n).values for n in names]
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["vertex", *names])
        for v in range(mesh.n_vertices):
            w.writerow([v, *(f"{c[v]:.17g}" for c in cols)])
    log.info("wrote %s", out)
    return 0


def cmd_describe(args, cfg):
    paths = expand_inputs(cfg.inputs)
    if not paths:
        raise ConfigError("no input meshes")
    os.makedirs(cfg.output_dir, exist_ok=True)
    cfg.save(os.path.join(cfg.output_dir, "config.json"))
    ids = [model_id(p) for p in paths]
    if len(set(ids)) != len(ids):
        raise ConfigError("input meshes must have distinct file names")
    failed = 0
    rows = []
    t_all = time.perf_counter()
    for path, mid in zip(paths, ids):
        t0 = time.perf_counter()
        try:
            mesh = load_mesh(path)
            r_max = cfg.resolve_rmax(mesh)
            pc = estimate_principal_curvatures(mesh, cfg.averaging_ring_size)
            h = curvature_field(pc, cfg.h)
            desc = compute_descriptor(mesh, h, cfg.P, cfg.n_rings, r_max, cfg.alpha,
                                      n_jobs=cfg.n_jobs, model_id=mid)
            save_descriptor(desc, os.path.join(cfg.output_dir, mid + DESCRIPTOR_SUFFIX))
            rows.append([mid, path, desc.n_vertices, desc.n_admissible, repr(r_max),
                         f"{time.perf_counter() - t0:.6f}", "ok"])
        except (EdgeLBPError, OSError, ValueError) as exc:
            failed += 1
            log.error("%s: %s", path, exc)
            rows.append([mid, path, "", "", "", f"{time.perf_counter() - t0:.6f}",
                         f"{type(exc).__name__}: {exc}"])
    with open(os.path.join(cfg.output_dir, "manifest.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["model_id", "path", "n_vertices", "n_admissible", "r_max", "seconds", "status"])
        w.writerows(rows)
    log.info("%d descriptors, %d failures, %.2f s", len(rows) - failed, failed, time.perf_counter() - t_all)
    return 1 if failed else 0


def cmd_distmat(args, cfg):
    files = sorted(f for f in os.listdir(args.descriptors) if f.endswith(DESCRIPTOR_SUFFIX))
    if not files:
        raise ConfigError(f"no {DESCRIPTOR_SUFFIX} files in {args.descriptors}")
    descs = [load_descriptor(os.path.join(args.descriptors, f)) for f in files]
    ids = [d.model_id or f[: -len(DESCRIPTOR_SUFFIX)] for d, f in zip(descs, files)]
    dm = distance_matrix(descs, cfg.metric, model_ids=ids)
    out = args.out or os.path.join(cfg.output_dir, "distances.csv")
    os.makedirs(os.path.dirname(os.path.abspath(out)), exist_ok=True)
    dm.to_csv(out)
    log.info("wrote %s (%d models)", out, len(ids))
    return 0


def cmd_evaluate(args, cfg):
    dm = DistanceMatrix.from_csv(args.distmat)
    gt = GroundTruth.from_csv(args.labels)
    report = evaluate(dm, gt, cfg.e_cutoff)
    os.makedirs(cfg.output_dir, exist_ok=True)
    paths = report.write(cfg.output_dir)
    print(" ".join(f"{k}={v:.4f}" for k, v in report.scores().items()))
    log.info("wrote %s", ", ".join(paths.values()))
    return 0


_COMMANDS = {"curvature": cmd_curvature, "describe": cmd_describe, "distmat": cmd_distmat,
             "evaluate": cmd_evaluate}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = resolve_config(args)
    except ConfigError as exc:
        log.error("bad configuration: %s", exc)
        return 2
    try:
        return _COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        log.error("bad configuration: %s", exc)
        return 2
    except ParamMismatchError as exc:
        log.error("%s", exc)
        return 2
    except (EdgeLBPError, OSError, ValueError, KeyError) as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
