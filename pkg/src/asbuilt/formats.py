"""Project file formats.

* CAD mesh: ASCII OBJ subset (`v x y z`, triangular `f i j k` 1-based,
  optional `o <name>` groups mapped to plane-boundary ids).
* Point cloud: ASCII PLY with float x/y/z plus int source_keyframe and
  int point_index properties.
* Keyframe manifest: JSON array of {id, image, pose{qw,qx,qy,qz,tx,ty,tz},
  direction}.
* Intrinsics: JSON {fx, fy, cx, cy, width, height}.
* Measurement CSV: header method,window_id,dimension,measured_m,actual_m.
* Textured output: OBJ + MTL + PNG per plane boundary.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import FormatError
from .geometry import (
    CameraIntrinsics,
    RigidPose,
    Similarity,
    TriangleMesh,
    Vec3,
)
from .spatial import Keyframe, MapPoint


# ---------------------------------------------------------------------------
# OBJ mesh

def write_obj(mesh: TriangleMesh, path) -> None:
    lines = []
    tags = mesh.plane_tags
    if tags is None:
        for v in mesh.vertices:
            lines.append(f"v {v[0]:.9g} {v[1]:.9g} {v[2]:.9g}")
        for t in mesh.triangles:
            lines.append(f"f {t[0] + 1} {t[1] + 1} {t[2] + 1}")
    else:
        for v in mesh.vertices:
            lines.append(f"v {v[0]:.9g} {v[1]:.9g} {v[2]:.9g}")
        current = None
        for t, tag in zip(mesh.triangles, tags):
            if tag != current:
                lines.append(f"o {tag}")
                current = tag
            lines.append(f"f {t[0] + 1} {t[1] + 1} {t[2] + 1}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_obj(path) -> TriangleMesh:
    vertices = []
    triangles = []
    tags = []
    current_tag = None
    saw_tag = False
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            if parts[0] == "v":
                if len(parts) < 4:
                    raise ValueError("vertex needs three coordinates")
                vertices.append([float(parts[1]), float(parts[2]), float(parts[3])])
            elif parts[0] == "f":
                if len(parts) != 4:
                    raise ValueError("only triangular faces are supported")
                idx = [int(p.split("/")[0]) - 1 for p in parts[1:]]
                triangles.append(idx)
                tags.append(current_tag)
            elif parts[0] == "o":
                current_tag = parts[1] if len(parts) > 1 else None
                saw_tag = current_tag is not None
            # other directives (vn, vt, s, mtllib...) are ignored
        except (ValueError, IndexError) as exc:
            raise FormatError(
                f"{path}: line {lineno}: {exc}", path=str(path), line=lineno
            ) from exc
    if not triangles:
        raise FormatError(f"{path}: mesh has no faces", path=str(path))
    plane_tags = tuple(tags) if saw_tag else None
    try:
        return TriangleMesh(np.array(vertices), np.array(triangles), plane_tags=plane_tags)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}", path=str(path)) from exc


# ---------------------------------------------------------------------------
# PLY point cloud

def write_ply(points, path) -> None:
    points = list(points)
    header = [
        "ply",
        "format ascii 1.0",
        f"element vertex {len(points)}",
        "property float x",
        "property float y",
        "property float z",
        "property int source_keyframe",
        "property int point_index",
        "end_header",
    ]
    body = [
        f"{p.position.x:.9g} {p.position.y:.9g} {p.position.z:.9g} "
        f"{p.source_keyframe} {p.index}"
        for p in points
    ]
    Path(path).write_text("\n".join(header + body) + "\n")


def read_ply(path) -> list[MapPoint]:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0].strip() != "ply":
        raise FormatError(f"{path}: not a PLY file", path=str(path))
    n_vertices = None
    properties = []
    body_start = None
    for i, line in enumerate(lines[1:], start=1):
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "element":
            if parts[1] != "vertex":
                raise FormatError(f"{path}: unsupported element {parts[1]}", path=str(path))
            n_vertices = int(parts[2])
        elif parts[0] == "property":
            properties.append(parts[2])
        elif parts[0] == "end_header":
            body_start = i + 1
            break
    if body_start is None or n_vertices is None:
        raise FormatError(f"{path}: malformed PLY header", path=str(path))
    required = ["x", "y", "z", "source_keyframe", "point_index"]
    for name in required:
        if name not in properties:
            raise FormatError(f"{path}: missing property {name}", path=str(path), field=name)
    col = {name: properties.index(name) for name in required}
    points = []
    for lineno in range(body_start, body_start + n_vertices):
        try:
            parts = lines[lineno].split()
            points.append(
                MapPoint(
                    position=Vec3(
                        float(parts[col["x"]]), float(parts[col["y"]]), float(parts[col["z"]])
                    ),
                    index=int(parts[col["point_index"]]),
                    source_keyframe=int(parts[col["source_keyframe"]]),
                )
            )
        except (IndexError, ValueError) as exc:
            raise FormatError(
                f"{path}: line {lineno + 1}: {exc}", path=str(path), line=lineno + 1
            ) from exc
    return points


# ---------------------------------------------------------------------------
# JSON records

def pose_to_dict(pose: RigidPose) -> dict:
    q = pose.rotation
    t = pose.translation
    return {
        "qw": q[0], "qx": q[1], "qy": q[2], "qz": q[3],
        "tx": t.x, "ty": t.y, "tz": t.z,
    }


def pose_from_dict(d: dict, direction: str) -> RigidPose:
    try:
        q = (float(d["qw"]), float(d["qx"]), float(d["qy"]), float(d["qz"]))
        t = Vec3(float(d["tx"]), float(d["ty"]), float(d["tz"]))
    except KeyError as exc:
        raise FormatError(f"pose record missing field {exc}", field=str(exc)) from exc
    norm = math.sqrt(sum(x * x for x in q))
    if norm <= 0:
        raise FormatError("pose quaternion has zero norm")
    q = tuple(x / norm for x in q)
    return RigidPose(q, t, direction)


def similarity_to_dict(T: Similarity) -> dict:
    d = pose_to_dict(RigidPose(T.rotation, T.translation))
    d["scale"] = T.scale
    return d


def similarity_from_dict(d: dict) -> Similarity:
    pose = pose_from_dict(d, "world_to_camera")
    try:
        scale = float(d["scale"])
    except KeyError as exc:
        raise FormatError("similarity record missing scale", field="scale") from exc
    return Similarity(pose.rotation, pose.translation, scale)


def write_keyframes(keyframes, path) -> None:
    records = [
        {
            "id": kf.id,
            "image": kf.image_ref,
            "pose": pose_to_dict(kf.pose.as_world_to_camera()),
            "direction": "world_to_camera",
        }
        for kf in keyframes
    ]
    Path(path).write_text(json.dumps(records, indent=2) + "\n")


def read_keyframes(path) -> list[Keyframe]:
    try:
        records = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: {exc}", path=str(path)) from exc
    if not isinstance(records, list):
        raise FormatError(f"{path}: keyframe manifest must be a JSON array", path=str(path))
    keyframes = []
    for i, rec in enumerate(records):
        try:
            direction = rec.get("direction", "world_to_camera")
            keyframes.append(
                Keyframe(
                    id=int(rec["id"]),
                    pose=pose_from_dict(rec["pose"], direction),
                    image_ref=str(rec["image"]),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(
                f"{path}: keyframe record {i}: {exc}", path=str(path), record=i
            ) from exc
    return keyframes


def write_intrinsics(K: CameraIntrinsics, path) -> None:
    Path(path).write_text(
        json.dumps(
            {"fx": K.fx, "fy": K.fy, "cx": K.cx, "cy": K.cy,
             "width": K.width, "height": K.height},
            indent=2,
        )
        + "\n"
    )


def read_intrinsics(path) -> CameraIntrinsics:
    try:
        d = json.loads(Path(path).read_text())
        return CameraIntrinsics(
            fx=float(d["fx"]), fy=float(d["fy"]), cx=float(d["cx"]), cy=float(d["cy"]),
            width=int(d["width"]), height=int(d["height"]),
        )
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: {exc}", path=str(path)) from exc
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: bad intrinsics: {exc}", path=str(path)) from exc


# ---------------------------------------------------------------------------
# measurement CSV

MEASUREMENT_HEADER = ["method", "window_id", "dimension", "measured_m", "actual_m"]


def read_measurement_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != MEASUREMENT_HEADER:
            raise FormatError(
                f"{path}: expected header {','.join(MEASUREMENT_HEADER)}",
                path=str(path),
                header=reader.fieldnames,
            )
        records = []
        for i, row in enumerate(reader):
            try:
                records.append(
                    {
                        "method": row["method"],
                        "window_id": row["window_id"],
                        "dimension": row["dimension"],
                        "measured_m": float(row["measured_m"]),
                        "actual_m": float(row["actual_m"]),
                    }
                )
            except (TypeError, ValueError) as exc:
                raise FormatError(
                    f"{path}: row {i + 2}: {exc}", path=str(path), line=i + 2
                ) from exc
    return records


def write_measurement_csv(records, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(MEASUREMENT_HEADER)
        for r in records:
            writer.writerow(
                [r["method"], r["window_id"], r["dimension"], r["measured_m"], r["actual_m"]]
            )


# ---------------------------------------------------------------------------
# images

def load_image(path) -> np.ndarray:
    with Image.open(path) as img:
        return np.asarray(img.convert("RGB"))


def save_image(array: np.ndarray, path) -> None:
    arr = np.asarray(array)
    if arr.ndim == 2:
        Image.fromarray(arr.astype(np.uint8), mode="L").save(path)
    elif arr.shape[2] == 4:
        Image.fromarray(arr.astype(np.uint8), mode="RGBA").save(path)
    else:
        Image.fromarray(arr.astype(np.uint8), mode="RGB").save(path)


# ---------------------------------------------------------------------------
# textured model output (OBJ + MTL + PNG per boundary)

def write_textured_model(mesh: TriangleMesh, atlas, out_dir, stem: str = "textured") -> dict:
    """Write the textured model; returns the paths written."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    obj_path = out / f"{stem}.obj"
    mtl_path = out / f"{stem}.mtl"

    texture_paths = {}
    mtl_lines = []
    for tid in sorted(atlas.textures):
        rgb, alpha = atlas.textures[tid]
        png = out / f"{stem}_{tid}.png"
        save_image(np.dstack([rgb, alpha]), png)
        texture_paths[tid] = png
        mtl_lines += [
            f"newmtl {tid}",
            "Ka 1 1 1",
            "Kd 1 1 1",
            f"map_Kd {png.name}",
            "",
        ]
    mtl_path.write_text("\n".join(mtl_lines))

    lines = [f"mtllib {mtl_path.name}"]
    for v in mesh.vertices:
        lines.append(f"v {v[0]:.9g} {v[1]:.9g} {v[2]:.9g}")
    # one vt per (boundary, vertex) pair, indexed for face statements
    vt_index = {}
    for tid in sorted(atlas.uvs):
        for vi, (u, v) in sorted(atlas.uvs[tid].items()):
            vt_index[(tid, vi)] = len(vt_index) + 1
            # OBJ v coordinate runs bottom-up; ortho v runs top-down
            lines.append(f"vt {u:.9g} {1.0 - v:.9g}")
    tags = mesh.plane_tags or tuple(None for _ in mesh.triangles)
    current = None
    for tri, tag in zip(mesh.triangles, tags):
        if tag != current:
            lines.append(f"o {tag}")
            if tag in atlas.textures:
                lines.append(f"usemtl {tag}")
            current = tag
        if tag in atlas.uvs and all((tag, int(v)) in vt_index for v in tri):
            f = " ".join(f"{int(v) + 1}/{vt_index[(tag, int(v))]}" for v in tri)
        else:
            f = " ".join(str(int(v) + 1) for v in tri)
        lines.append(f"f {f}")
    obj_path.write_text("\n".join(lines) + "\n")
    return {"obj": obj_path, "mtl": mtl_path, "textures": texture_paths}
