"""Project ingestion and the staged pipeline commands.

A project directory holds the inputs (CAD mesh, intrinsics, keyframe
manifest, SLAM point cloud, registration clicks) plus a ``project.json``
naming them and carrying per-module configuration. Commands persist their
outputs under ``state/`` and ``outputs/`` and enforce the stage order
register -> align -> fit-planes -> {query, measure, texture, eval}.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import formats
from .errors import FormatError, StageOrderError
from .geometry import (
    CameraIntrinsics,
    PixelPoint,
    Ray,
    RigidPose,
    Similarity,
    TriangleMesh,
    Vec3,
    rotation_angle_between,
)
from .measurement import binarize, detect_windows, measure, rgb_to_gray, scale_from_window, trace_contours
from .planes import FittedPlane, RansacConfig, extract_planes, refine_plane_least_squares
from .registration import (
    Correspondence3D2D,
    PatchMatchConfig,
    align_map,
    alignment_rms,
    horn_similarity,
    model_alignment_pairs,
    register_first_keyframe,
)
from .spatial import Keyframe, MapPoint, build_database, query_image
from .stats import Sample, error_stats, two_factor_anova_rep, welch_t_test
from .texturing import PlaneBoundary, build_textured_model
from .geometry import PlaneParams

CONFIG_ENV_VAR = "ASBUILT_CONFIG"

STAGE_REGISTER = "register"
STAGE_ALIGN = "align"
STAGE_FIT_PLANES = "fit-planes"


@dataclass(frozen=True)
class MeasurementConfig:
    window_height_m: float = 1.8288
    min_area_fraction: float = 0.005
    simplify_fraction: float = 0.02


@dataclass(frozen=True)
class TexturingConfig:
    resolution_px_per_m: float = 100.0
    every_nth: int = 10


@dataclass(frozen=True)
class ProjectConfig:
    rng_seed: int = 0
    ransac: RansacConfig = field(default_factory=RansacConfig)
    ncc: PatchMatchConfig = field(default_factory=PatchMatchConfig)
    measurement: MeasurementConfig = field(default_factory=MeasurementConfig)
    texturing: TexturingConfig = field(default_factory=TexturingConfig)

    @staticmethod
    def from_dict(d: dict, seed_override: int | None = None) -> "ProjectConfig":
        d = dict(d or {})
        rng_seed = int(d.get("rng_seed", 0))
        if seed_override is not None:
            rng_seed = int(seed_override)
        ransac_d = dict(d.get("ransac", {}))
        ransac_d.setdefault("rng_seed", rng_seed)
        if seed_override is not None:
            ransac_d["rng_seed"] = rng_seed
        try:
            return ProjectConfig(
                rng_seed=rng_seed,
                ransac=RansacConfig(**ransac_d),
                ncc=PatchMatchConfig(**d.get("ncc", {})),
                measurement=MeasurementConfig(**d.get("measurement", {})),
                texturing=TexturingConfig(**d.get("texturing", {})),
            )
        except (TypeError, ValueError) as exc:
            raise FormatError(f"bad config block: {exc}") from exc

    def to_dict(self) -> dict:
        return {
            "rng_seed": self.rng_seed,
            "ransac": asdict(self.ransac),
            "ncc": asdict(self.ncc),
            "measurement": asdict(self.measurement),
            "texturing": asdict(self.texturing),
        }


@dataclass(frozen=True)
class ClickRecord:
    """User input: four registration correspondences, a query ray, or a
    measurement pixel pair."""

    kind: str
    model_points: tuple | None = None
    image_points: tuple | None = None
    ray: Ray | None = None
    pixel_pair: tuple | None = None

    def __post_init__(self):
        if self.kind == "registration":
            if self.model_points is None or len(self.model_points) != 4:
                raise ValueError("registration clicks need four model points")
            if self.image_points is None or len(self.image_points) != 4:
                raise ValueError("registration clicks need four image points")
        elif self.kind == "query":
            if self.ray is None:
                raise ValueError("query click needs a ray")
        elif self.kind == "measurement":
            if self.pixel_pair is None or len(self.pixel_pair) != 2:
                raise ValueError("measurement clicks need two pixel points")
        else:
            raise ValueError(f"unknown click kind {self.kind!r}")


class Project:
    """A loaded project: parsed inputs plus paths for the staged state."""

    def __init__(self, root: Path, spec: dict, config: ProjectConfig):
        self.root = Path(root)
        self.spec = spec
        self.config = config
        self.mesh: TriangleMesh = formats.read_obj(self._input_path("mesh"))
        self.intrinsics: CameraIntrinsics = formats.read_intrinsics(self._input_path("intrinsics"))
        self.keyframes: list[Keyframe] = formats.read_keyframes(self._input_path("keyframes"))
        self.points: list[MapPoint] = formats.read_ply(self._input_path("point_cloud"))
        self.region_of_interest: tuple = tuple(spec.get("region_of_interest", []))
        self._db_cache = None
        self._scales_cache: dict = {}

    # ----- paths ---------------------------------------------------------

    def _input_path(self, key: str) -> Path:
        try:
            rel = self.spec[key]
        except KeyError as exc:
            raise FormatError(f"project file missing field {key!r}", field=key) from exc
        path = self.root / rel
        if not path.exists():
            raise FormatError(f"referenced file does not exist: {path}", path=str(path), field=key)
        return path

    @property
    def state_dir(self) -> Path:
        return self.root / "state"

    @property
    def outputs_dir(self) -> Path:
        return self.root / "outputs"

    @property
    def registration_path(self) -> Path:
        return self.state_dir / "registration.json"

    @property
    def alignment_path(self) -> Path:
        return self.state_dir / "alignment.json"

    @property
    def aligned_keyframes_path(self) -> Path:
        return self.state_dir / "aligned_keyframes.json"

    @property
    def aligned_cloud_path(self) -> Path:
        return self.state_dir / "aligned_cloud.ply"

    @property
    def planes_path(self) -> Path:
        return self.state_dir / "planes.json"

    # ----- stage bookkeeping ----------------------------------------------

    def stage_done(self, stage: str) -> bool:
        return {
            STAGE_REGISTER: self.registration_path,
            STAGE_ALIGN: self.alignment_path,
            STAGE_FIT_PLANES: self.planes_path,
        }[stage].exists()

    def require_stage(self, stage: str, for_command: str) -> None:
        if not self.stage_done(stage):
            raise StageOrderError(
                f"{for_command} requires the {stage} stage to have run",
                stage=stage,
                command=for_command,
            )

    def invalidate_cache(self) -> None:
        self._db_cache = None
        self._scales_cache = {}

    # ----- loaded state ----------------------------------------------------

    def registration_clicks(self) -> ClickRecord:
        rel = self.spec.get("clicks")
        if rel is None:
            raise FormatError("project file has no clicks entry", field="clicks")
        path = self.root / rel
        if not path.exists():
            raise FormatError(f"referenced file does not exist: {path}", path=str(path), field="clicks")
        d = json.loads(path.read_text())
        try:
            model = tuple(Vec3(*map(float, p)) for p in d["model"])
            image = tuple(PixelPoint(*map(float, p)) for p in d["image"])
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"{path}: bad clicks record: {exc}", path=str(path)) from exc
        return ClickRecord(kind="registration", model_points=model, image_points=image)

    def registered_pose(self) -> RigidPose:
        d = json.loads(self.registration_path.read_text())
        return formats.pose_from_dict(d["pose"], "world_to_camera")

    def alignment(self) -> Similarity:
        d = json.loads(self.alignment_path.read_text())
        return formats.similarity_from_dict(d["similarity"])

    def aligned_keyframes(self) -> list[Keyframe]:
        return formats.read_keyframes(self.aligned_keyframes_path)

    def aligned_points(self) -> list[MapPoint]:
        return formats.read_ply(self.aligned_cloud_path)

    def fitted_planes(self):
        d = json.loads(self.planes_path.read_text())
        planes = [
            FittedPlane(
                params=PlaneParams(p["a"], p["b"], p["c"], p["d"]),
                member_indices=tuple(p["members"]),
                score=int(p["score"]),
            )
            for p in d["planes"]
        ]
        return planes, list(d["outliers"])

    def load_image(self, image_ref: str) -> np.ndarray:
        return formats.load_image(self.root / image_ref)

    def database(self):
        if self._db_cache is None:
            planes, _ = self.fitted_planes()
            self._db_cache = build_database(
                self.aligned_points(), self.aligned_keyframes(), self.mesh, planes
            )
        return self._db_cache


def load_project(path, config_path=None, seed: int | None = None) -> Project:
    """Load and validate a project from ``project.json`` (or its directory).

    ``config_path`` (or the ASBUILT_CONFIG environment variable) replaces the
    embedded config block; ``seed`` overrides the RNG seed.
    """
    path = Path(path)
    if path.is_dir():
        path = path / "project.json"
    if not path.exists():
        raise FormatError(f"project file does not exist: {path}", path=str(path))
    try:
        spec = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(
            f"{path}: line {exc.lineno}: {exc.msg}", path=str(path), line=exc.lineno
        ) from exc
    if config_path is None:
        config_path = os.environ.get(CONFIG_ENV_VAR) or None
    if config_path is not None:
        cfg_file = Path(config_path)
        if not cfg_file.exists():
            raise FormatError(f"config file does not exist: {cfg_file}", path=str(cfg_file))
        try:
            config_dict = json.loads(cfg_file.read_text())
        except json.JSONDecodeError as exc:
            raise FormatError(f"{cfg_file}: {exc.msg}", path=str(cfg_file), line=exc.lineno) from exc
    else:
        config_dict = spec.get("config", {})
    config = ProjectConfig.from_dict(config_dict, seed_override=seed)
    return Project(root=path.parent, spec=spec, config=config)


def save_project_spec(spec: dict, root: Path) -> Path:
    path = Path(root) / "project.json"
    path.write_text(json.dumps(spec, indent=2) + "\n")
    return path


# ---------------------------------------------------------------------------
# stage commands

def cmd_register(project: Project, clicks: ClickRecord | None = None) -> RigidPose:
    """P3P registration of the first keyframe from four clicked
    correspondences; persists the pose and the clicks used."""
    if clicks is None:
        clicks = project.registration_clicks()
    if clicks.kind != "registration":
        raise ValueError("cmd_register needs registration clicks")
    corr = [
        Correspondence3D2D(m, px)
        for m, px in zip(clicks.model_points, clicks.image_points)
    ]
    pose = register_first_keyframe(corr, project.intrinsics)
    project.state_dir.mkdir(parents=True, exist_ok=True)
    record = {
        "pose": formats.pose_to_dict(pose),
        "clicks": {
            "model": [[p.x, p.y, p.z] for p in clicks.model_points],
            "image": [[p.u, p.v] for p in clicks.image_points],
        },
    }
    project.registration_path.write_text(json.dumps(record, indent=2) + "\n")
    project.invalidate_cache()
    return pose


def cmd_align(project: Project) -> Similarity:
    """Recover the SLAM->model similarity from the registration clicks and
    transform the cloud and keyframes into model coordinates."""
    project.require_stage(STAGE_REGISTER, "align")
    reg = json.loads(project.registration_path.read_text())
    clicks_model = tuple(Vec3(*p) for p in reg["clicks"]["model"])
    clicks_image = tuple(PixelPoint(*p) for p in reg["clicks"]["image"])
    keyframes = sorted(project.keyframes, key=lambda k: k.id)
    if len(keyframes) < 2:
        raise FormatError("alignment needs at least two keyframes")
    kf1, kf2 = keyframes[0], keyframes[1]
    image1 = rgb_to_gray(project.load_image(kf1.image_ref))
    image2 = rgb_to_gray(project.load_image(kf2.image_ref))
    pairs = model_alignment_pairs(
        clicks_model, clicks_image, kf1, kf2, image1, image2,
        project.intrinsics, project.config.ncc,
    )
    T = horn_similarity(pairs)
    residual_m = alignment_rms(pairs, T)
    aligned_points, aligned_keyframes = align_map(project.points, project.keyframes, T)

    # consistency between the P3P-registered pose and the aligned first pose
    registered = project.registered_pose()
    aligned_kf1 = next(k for k in aligned_keyframes if k.id == kf1.id)
    rot_gap = rotation_angle_between(
        registered.rotation, aligned_kf1.pose.as_world_to_camera().rotation
    )
    center_gap = (
        registered.camera_center() - aligned_kf1.pose.camera_center()
    ).norm()

    project.state_dir.mkdir(parents=True, exist_ok=True)
    record = {
        "similarity": formats.similarity_to_dict(T),
        "residual_m": residual_m,
        "registration_consistency": {
            "rotation_rad": rot_gap,
            "center_m": center_gap,
        },
    }
    project.alignment_path.write_text(json.dumps(record, indent=2) + "\n")
    formats.write_keyframes(aligned_keyframes, project.aligned_keyframes_path)
    formats.write_ply(aligned_points, project.aligned_cloud_path)
    project.invalidate_cache()
    return T


def cmd_fit_planes(project: Project):
    """RANSAC plane segmentation of the aligned cloud."""
    project.require_stage(STAGE_ALIGN, "fit-planes")
    points = project.aligned_points()
    positions = np.array([p.position.to_array() for p in points]).reshape(-1, 3)
    planes, outlier_rows = extract_planes(positions, project.config.ransac)
    # outputs refer to map-point indices, not row numbers
    index_of = [p.index for p in points]
    record = {
        "planes": [
            {
                "a": pl.params.a, "b": pl.params.b, "c": pl.params.c, "d": pl.params.d,
                "members": [index_of[i] for i in pl.member_indices],
                "score": pl.score,
            }
            for pl in planes
        ],
        "outliers": [index_of[i] for i in outlier_rows],
    }
    project.state_dir.mkdir(parents=True, exist_ok=True)
    project.planes_path.write_text(json.dumps(record, indent=2) + "\n")
    project.invalidate_cache()
    return planes


def _require_query_stages(project: Project, command: str) -> None:
    project.require_stage(STAGE_REGISTER, command)
    project.require_stage(STAGE_ALIGN, command)
    project.require_stage(STAGE_FIT_PLANES, command)


def _persist_output(project: Project, prefix: str, request: dict, result: dict) -> None:
    project.outputs_dir.mkdir(parents=True, exist_ok=True)
    digest = hashlib.sha1(
        json.dumps(request, sort_keys=True).encode()
    ).hexdigest()[:12]
    payload = {"request": request, "result": result}
    (project.outputs_dir / f"{prefix}_{digest}.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n"
    )


def cmd_query(project: Project, ray: Ray) -> dict:
    """Spatial image query: returns the source keyframe and provenance."""
    _require_query_stages(project, "query")
    db = project.database()
    kf_id, vertex_index, vertex, point_index = query_image(db, ray)
    kf = db.keyframes[kf_id]
    result = {
        "keyframe_id": kf_id,
        "image": kf.image_ref,
        "vertex_index": vertex_index,
        "vertex": [vertex.x, vertex.y, vertex.z],
        "point_index": point_index,
    }
    request = {
        "origin": [ray.origin.x, ray.origin.y, ray.origin.z],
        "direction": [ray.direction.x, ray.direction.y, ray.direction.z],
    }
    _persist_output(project, "query", request, result)
    return result


def detect_window_scales(project: Project, image: np.ndarray):
    """Windows and their scale factors for one keyframe image."""
    cfg = project.config.measurement
    gray = rgb_to_gray(image)
    contours = trace_contours(binarize(gray))
    h, w = gray.shape
    rects = detect_windows(
        contours, cfg.min_area_fraction, (w, h), simplify_fraction=cfg.simplify_fraction
    )
    return [scale_from_window(r, cfg.window_height_m) for r in rects]


def cmd_measure(project: Project, keyframe_id: int, p1: PixelPoint, p2: PixelPoint) -> dict:
    """Two-click metric measurement on a queried keyframe image."""
    _require_query_stages(project, "measure")
    db = project.database()
    if keyframe_id not in db.keyframes:
        raise FormatError(f"unknown keyframe id {keyframe_id}", keyframe=keyframe_id)
    kf = db.keyframes[keyframe_id]
    if keyframe_id not in project._scales_cache:
        project._scales_cache[keyframe_id] = detect_window_scales(
            project, project.load_image(kf.image_ref)
        )
    scales = project._scales_cache[keyframe_id]
    meters, idx = measure(p1, p2, scales)
    used = scales[idx]
    result = {
        "meters": meters,
        "scale_index": idx,
        "pixels_per_meter": used.pixels_per_meter,
        "window_corners": [[c.u, c.v] for c in used.rect.corners],
        "n_windows": len(scales),
    }
    request = {
        "keyframe_id": keyframe_id,
        "p1": [p1.u, p1.v],
        "p2": [p2.u, p2.v],
    }
    _persist_output(project, "measure", request, result)
    return result


def project_boundaries(project: Project, db) -> list[PlaneBoundary]:
    """Plane boundaries for the configured region of interest.

    Each region id selects the mesh triangles tagged with it; their vertices
    define the plane (least squares) and the in-plane bounding rectangle is
    the boundary polygon. Normals are oriented toward the cameras.
    """
    if project.mesh.plane_tags is None:
        return []
    centers = np.array(
        [kf.pose.camera_center().to_array() for kf in db.keyframes.values()]
    )
    mean_center = centers.mean(axis=0) if len(centers) else np.zeros(3)
    boundaries = []
    for target_id in project.region_of_interest:
        vids = sorted(
            {
                int(v)
                for tri, tag in zip(project.mesh.triangles, project.mesh.plane_tags)
                if tag == target_id
                for v in tri
            }
        )
        if len(vids) < 3:
            continue
        verts = project.mesh.vertices[vids]
        plane = refine_plane_least_squares(verts)
        n = plane.normal()
        centroid = verts.mean(axis=0)
        if float((mean_center - centroid) @ n) < 0:
            plane = PlaneParams(-plane.a, -plane.b, -plane.c, -plane.d)
            n = -n
        # in-plane bounding rectangle as the boundary polygon
        ref = verts[0]
        u = verts[np.argmax(np.linalg.norm(verts - ref, axis=1))] - ref
        u = u - (u @ n) * n
        u = u / np.linalg.norm(u)
        v = np.cross(n, u)
        coords = (verts - ref) @ np.column_stack([u, v])
        umin, vmin = coords.min(axis=0)
        umax, vmax = coords.max(axis=0)
        corners = [
            ref + umin * u + vmin * v,
            ref + umax * u + vmin * v,
            ref + umax * u + vmax * v,
            ref + umin * u + vmax * v,
        ]
        # project corners onto the plane exactly
        corners = [c - (float(c @ n) + plane.d) * n for c in corners]
        plane_index = None
        if db.planes:
            angles = [
                math.acos(min(1.0, abs(float(p.params.normal() @ n))))
                for p in db.planes
            ]
            best = int(np.argmin(angles))
            if angles[best] < math.radians(10.0):
                plane_index = best
        boundaries.append(
            PlaneBoundary(
                plane=plane,
                polygon=tuple(Vec3.from_array(c) for c in corners),
                target_id=target_id,
                plane_index=plane_index,
            )
        )
    return boundaries


def cmd_texture(project: Project, out_dir=None) -> dict:
    """Composite per-boundary textures and write the textured model."""
    _require_query_stages(project, "texture")
    db = project.database()
    boundaries = project_boundaries(project, db)
    cfg = project.config.texturing
    atlas = build_textured_model(
        db,
        boundaries,
        project.intrinsics,
        project.load_image,
        resolution_px_per_m=cfg.resolution_px_per_m,
        every_nth=cfg.every_nth,
    )
    out = Path(out_dir) if out_dir is not None else project.outputs_dir / "textured"
    paths = formats.write_textured_model(project.mesh, atlas, out)
    return {
        "obj": str(paths["obj"]),
        "mtl": str(paths["mtl"]),
        "textures": {tid: str(p) for tid, p in paths["textures"].items()},
        "zero_coverage": list(atlas.zero_coverage),
        "boundaries": [b.target_id for b in boundaries],
    }


def cmd_eval(project: Project, csv_path, alpha: float = 0.01) -> dict:
    """Statistical evaluation of a measurement CSV (two methods compared
    per dimension plus a two-factor ANOVA with replication)."""
    _require_query_stages(project, "eval")
    records = formats.read_measurement_csv(csv_path)
    methods = sorted({r["method"] for r in records})
    dims = sorted({r["dimension"] for r in records})
    if len(methods) != 2:
        raise FormatError(
            f"evaluation needs exactly two methods, found {methods}", methods=methods
        )

    def values(method, dim):
        return [r["measured_m"] for r in records if r["method"] == method and r["dimension"] == dim]

    result = {"methods": methods, "dimensions": dims, "alpha": alpha, "welch": {}, "error_stats": {}}
    for dim in dims:
        a, b = (Sample(values(m, dim)) for m in methods)
        t = welch_t_test(a, b, alpha=alpha)
        result["welch"][dim] = {
            "mean_a": t.mean_a, "mean_b": t.mean_b, "t_stat": t.t_stat, "df": t.df,
            "t_crit_two_tail": t.t_crit_two_tail, "p_two_tail": t.p_two_tail,
        }
    for method in methods:
        result["error_stats"][method] = {}
        for dim in dims:
            rows = [r for r in records if r["method"] == method and r["dimension"] == dim]
            measured = np.array([r["measured_m"] for r in rows])
            actual = np.array([r["actual_m"] for r in rows])
            if len(np.unique(actual)) == 1:
                stats = error_stats(Sample(measured), float(actual[0]))
                mse, std = stats.mse, stats.std_dev
            else:
                mse = float(np.mean((measured - actual) ** 2))
                std = float(np.std(measured, ddof=1))
            result["error_stats"][method][dim] = {
                "mse_m2": mse, "mse_cm2": mse * 1e4, "std_dev_m": std,
                "std_dev_cm": std * 100.0, "n": len(rows),
            }

    counts = {len(values(m, d)) for m in methods for d in dims}
    if len(counts) == 1 and len(dims) == 2:
        n = counts.pop()
        cube = np.array([[values(m, d) for d in dims] for m in methods])
        anova = two_factor_anova_rep(cube, alpha=alpha)
        result["anova"] = {
            src.name: {
                "ss": src.ss, "df": src.df, "ms": src.ms, "f": src.f,
                "p_value": src.p_value, "f_critical": src.f_critical,
            }
            for src in (anova.sample, anova.factor, anova.interaction)
        }
        result["anova"]["within"] = {
            "ss": anova.within_ss, "df": anova.within_df, "ms": anova.within_ms,
        }
    project.outputs_dir.mkdir(parents=True, exist_ok=True)
    (project.outputs_dir / "eval.json").write_text(
        json.dumps(result, indent=2, sort_keys=True) + "\n"
    )
    return result


# ---------------------------------------------------------------------------
# fixture project generation

def create_fixture_project(root, n_windows: int = 3, seed: int = 0) -> Path:
    """Write a complete synthetic-facade project directory.

    Inputs are in the SLAM frame exactly as a real SLAM front end would hand
    them over (first keyframe pose = identity); ground-truth registration
    clicks are included so the whole pipeline can run unattended. A
    measurement CSV with two synthetic methods is included for the
    evaluation stage.
    """
    from .synthetic import make_fixture

    root = Path(root)
    (root / "images").mkdir(parents=True, exist_ok=True)
    fixture = make_fixture(n_windows=n_windows, seed=seed)

    for kf in fixture.model_keyframes:
        formats.save_image(fixture.render_keyframe(kf.id), root / kf.image_ref)
    formats.write_obj(fixture.mesh, root / "mesh.obj")
    formats.write_intrinsics(fixture.intrinsics, root / "intrinsics.json")
    formats.write_keyframes(fixture.slam_keyframes, root / "keyframes.json")
    formats.write_ply(fixture.slam_points, root / "cloud.ply")
    clicks = {
        "model": [[p.x, p.y, p.z] for p in fixture.clicks_model],
        "image": [[p.u, p.v] for p in fixture.clicks_kf0],
    }
    (root / "clicks.json").write_text(json.dumps(clicks, indent=2) + "\n")

    rng = np.random.default_rng(seed + 1)
    records = []
    from .synthetic import WINDOW_HEIGHT_M, WINDOW_WIDTH_M

    specs = {
        ("reference", "width"): (1.97673, 0.0492),
        ("proposed", "width"): (2.04084, 0.0428),
        ("reference", "height"): (1.75758, 0.0417),
        ("proposed", "height"): (1.82494, 0.0327),
    }
    for (method, dim), (mean, sd) in specs.items():
        actual = WINDOW_WIDTH_M if dim == "width" else WINDOW_HEIGHT_M
        for window_id in range(15):
            for rep in range(2):
                records.append(
                    {
                        "method": method,
                        "window_id": f"w{window_id}",
                        "dimension": dim,
                        "measured_m": round(float(rng.normal(mean, sd)), 6),
                        "actual_m": actual,
                    }
                )
    formats.write_measurement_csv(records, root / "measurements.csv")

    spec = {
        "mesh": "mesh.obj",
        "intrinsics": "intrinsics.json",
        "keyframes": "keyframes.json",
        "point_cloud": "cloud.ply",
        "clicks": "clicks.json",
        "region_of_interest": ["wall_main"],
        "config": ProjectConfig(rng_seed=seed).to_dict(),
    }
    return save_project_spec(spec, root)
