"""Command-line interface mirroring the pipeline stages.

Commands print a JSON result to stdout so scripts (and the test suite) can
consume them. The config path may also come from the ASBUILT_CONFIG
environment variable; --seed overrides the project RNG seed.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import AsBuiltError
from .geometry import PixelPoint, Ray, Vec3
from .project import (
    cmd_align,
    cmd_eval,
    cmd_fit_planes,
    cmd_measure,
    cmd_query,
    cmd_register,
    cmd_texture,
    create_fixture_project,
    load_project,
)
from . import formats


def _add_project_args(p: argparse.ArgumentParser):
    p.add_argument("--project", required=True, help="project directory or project.json")
    p.add_argument("--seed", type=int, default=None, help="override the config rng seed")
    p.add_argument("--config", default=None, help="alternate config JSON path")


def _vec3(text: str) -> Vec3:
    parts = [float(x) for x in text.split(",")]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected x,y,z")
    return Vec3(*parts)


def _pixel(text: str) -> PixelPoint:
    parts = [float(x) for x in text.split(",")]
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected u,v")
    return PixelPoint(*parts)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="asbuilt",
        description="Align a SLAM keyframe map to a CAD model and inspect the as-built structure.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fixture", help="generate the synthetic facade demo project")
    p.add_argument("--out", required=True, help="directory to create")
    p.add_argument("--windows", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("register", help="P3P-register the first keyframe from the stored clicks")
    _add_project_args(p)

    p = sub.add_parser("align", help="recover the map->model similarity and align the database")
    _add_project_args(p)

    p = sub.add_parser("fit-planes", help="RANSAC plane segmentation of the aligned cloud")
    _add_project_args(p)

    p = sub.add_parser("query", help="spatial image query along a ray")
    _add_project_args(p)
    p.add_argument("--origin", type=_vec3, required=True, help="ray origin x,y,z")
    p.add_argument("--direction", type=_vec3, required=True, help="ray direction x,y,z")

    p = sub.add_parser("measure", help="two-click metric measurement on a keyframe image")
    _add_project_args(p)
    p.add_argument("--keyframe", type=int, required=True)
    p.add_argument("--p1", type=_pixel, required=True, help="first click u,v")
    p.add_argument("--p2", type=_pixel, required=True, help="second click u,v")

    p = sub.add_parser("texture", help="build the textured model for the region of interest")
    _add_project_args(p)
    p.add_argument("--out", default=None, help="output directory (default outputs/textured)")

    p = sub.add_parser("eval", help="statistical evaluation of a measurement CSV")
    _add_project_args(p)
    p.add_argument("--csv", required=True)
    p.add_argument("--alpha", type=float, default=0.01)

    p = sub.add_parser("serve", help="run the HTTP API")
    _add_project_args(p)
    p.add_argument("--address", default="127.0.0.1:8000")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "fixture":
            path = create_fixture_project(args.out, n_windows=args.windows, seed=args.seed)
            print(json.dumps({"project": str(path)}))
            return 0

        project = load_project(args.project, config_path=args.config, seed=args.seed)
        if args.command == "register":
            pose = cmd_register(project)
            print(json.dumps({"pose": formats.pose_to_dict(pose)}))
        elif args.command == "align":
            T = cmd_align(project)
            print(json.dumps({"similarity": formats.similarity_to_dict(T)}))
        elif args.command == "fit-planes":
            planes = cmd_fit_planes(project)
            print(
                json.dumps(
                    {
                        "planes": [
                            {"a": p.params.a, "b": p.params.b, "c": p.params.c,
                             "d": p.params.d, "members": len(p.member_indices),
                             "score": p.score}
                            for p in planes
                        ]
                    }
                )
            )
        elif args.command == "query":
            d = args.direction.to_array()
            norm = float((d @ d) ** 0.5)
            ray = Ray(args.origin, Vec3.from_array(d / norm))
            print(json.dumps(cmd_query(project, ray)))
        elif args.command == "measure":
            print(json.dumps(cmd_measure(project, args.keyframe, args.p1, args.p2)))
        elif args.command == "texture":
            print(json.dumps(cmd_texture(project, args.out)))
        elif args.command == "eval":
            print(json.dumps(cmd_eval(project, args.csv, alpha=args.alpha)))
        elif args.command == "serve":
            from .server import serve

            serve(project, args.address)
        return 0
    except AsBuiltError as exc:
        print(
            json.dumps({"code": exc.code, "message": str(exc), "context": exc.context}),
            file=sys.stderr,
        )
        return 1


if __name__ == "__main__":
    sys.exit(main())
