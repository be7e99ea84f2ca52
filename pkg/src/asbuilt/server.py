"""HTTP API over a project: the backend of the inspector UI.

Read endpoints answer concurrently against an immutable project snapshot;
the mutating /register command runs exclusively and atomically swaps the
snapshot. Errors are JSON bodies {code, message, context}.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import FileResponse, JSONResponse, Response

from .errors import (
    AsBuiltError,
    EmptyDatabaseError,
    FormatError,
    IntegrityError,
    QueryMissError,
    StageOrderError,
)
from .geometry import PixelPoint, Ray, Vec3
from . import formats
from .project import (
    ClickRecord,
    Project,
    cmd_align,
    cmd_fit_planes,
    cmd_measure,
    cmd_query,
    cmd_register,
    load_project,
)
from .spatial import pick_mesh as spatial_pick_mesh, snap_to_vertex

_STATUS_BY_CODE = {
    QueryMissError.code: 404,
    StageOrderError.code: 409,
    FormatError.code: 400,
    IntegrityError.code: 400,
    EmptyDatabaseError.code: 404,
}


def _error_response(exc: AsBuiltError) -> JSONResponse:
    status = _STATUS_BY_CODE.get(exc.code, 422)
    return JSONResponse(
        status_code=status,
        content={"code": exc.code, "message": str(exc), "context": exc.context},
    )


def create_app(project: Project) -> FastAPI:
    app = FastAPI(title="asbuilt", docs_url=None, redoc_url=None)
    state = {"project": project}
    write_lock = threading.Lock()

    @app.exception_handler(AsBuiltError)
    async def handle_asbuilt_error(request: Request, exc: AsBuiltError):
        return _error_response(exc)

    @app.get("/status")
    def status():
        proj = state["project"]
        return {
            "registered": proj.stage_done("register"),
            "aligned": proj.stage_done("align"),
            "planes": proj.stage_done("fit-planes"),
            "keyframes": len(proj.keyframes),
            "region_of_interest": list(proj.region_of_interest),
        }

    @app.get("/model")
    def model(textured: bool = False):
        proj = state["project"]
        if textured:
            obj = proj.outputs_dir / "textured" / "textured.obj"
            if not obj.exists():
                return JSONResponse(
                    status_code=404,
                    content={
                        "code": "not_textured",
                        "message": "textured model not built; run the texture stage",
                        "context": {},
                    },
                )
            return Response(content=obj.read_bytes(), media_type="text/plain")
        mesh_path = proj.root / proj.spec["mesh"]
        return Response(content=mesh_path.read_bytes(), media_type="text/plain")

    @app.post("/snap")
    def snap(body: dict):
        # mesh-only pick for pre-alignment clicks (registration corners)
        proj = state["project"]
        ray = _parse_ray(body)
        hit = spatial_pick_mesh(proj.mesh, ray)
        if hit is None:
            raise QueryMissError("ray does not intersect the model mesh")
        vertex_index, vertex = snap_to_vertex(proj.mesh, hit)
        return {
            "hit": [hit.x, hit.y, hit.z],
            "vertex_index": vertex_index,
            "vertex": [vertex.x, vertex.y, vertex.z],
        }

    @app.get("/keyframes")
    def keyframes():
        proj = state["project"]
        aligned = proj.stage_done("align")
        frames = proj.aligned_keyframes() if aligned else proj.keyframes
        return [
            {
                "id": kf.id,
                "image": kf.image_ref,
                "pose": formats.pose_to_dict(kf.pose.as_world_to_camera()),
                "direction": "world_to_camera",
                "aligned": aligned,
            }
            for kf in sorted(frames, key=lambda k: k.id)
        ]

    @app.get("/keyframes/{kf_id}/image")
    def keyframe_image(kf_id: int):
        proj = state["project"]
        for kf in proj.keyframes:
            if kf.id == kf_id:
                return FileResponse(proj.root / kf.image_ref, media_type="image/png")
        return JSONResponse(
            status_code=404,
            content={"code": "unknown_keyframe", "message": f"no keyframe {kf_id}", "context": {}},
        )

    @app.post("/pick")
    def pick(body: dict):
        proj = state["project"]
        ray = _parse_ray(body)
        result = cmd_query(proj, ray)
        return {
            "hit": result["vertex"],
            "vertex_index": result["vertex_index"],
            "vertex": result["vertex"],
            "point_index": result["point_index"],
            "keyframe_id": result["keyframe_id"],
            "image": result["image"],
        }

    @app.post("/register")
    def register(body: dict):
        with write_lock:
            proj = state["project"]
            clicks = _parse_clicks(body)
            cmd_register(proj, clicks)
            T = cmd_align(proj)
            cmd_fit_planes(proj)
            fresh = load_project(proj.root)  # snapshot swap
            state["project"] = fresh
            alignment = json.loads(fresh.alignment_path.read_text())
        return {
            "similarity": alignment["similarity"],
            "residual_m": alignment["residual_m"],
            "registration_consistency": alignment["registration_consistency"],
        }

    @app.post("/measure")
    def do_measure(body: dict):
        proj = state["project"]
        try:
            kf_id = int(body["keyframe_id"])
            p1 = PixelPoint(float(body["p1"][0]), float(body["p1"][1]))
            p2 = PixelPoint(float(body["p2"][0]), float(body["p2"][1]))
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise FormatError(f"bad measure request: {exc}") from exc
        result = cmd_measure(proj, kf_id, p1, p2)
        return {
            "meters": result["meters"],
            "scale_used": {
                "index": result["scale_index"],
                "pixels_per_meter": result["pixels_per_meter"],
                "window_corners": result["window_corners"],
            },
        }

    @app.get("/textures/{boundary}")
    def texture(boundary: str):
        proj = state["project"]
        png = proj.outputs_dir / "textured" / f"textured_{boundary}.png"
        if not png.exists():
            return JSONResponse(
                status_code=404,
                content={
                    "code": "not_textured",
                    "message": f"no texture for boundary {boundary!r}; run the texture stage",
                    "context": {"boundary": boundary},
                },
            )
        return FileResponse(png, media_type="image/png")

    return app


def _parse_ray(body: dict) -> Ray:
    try:
        origin = [float(x) for x in body["origin"]]
        direction = [float(x) for x in body["direction"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad pick request: {exc}") from exc
    d = np.asarray(direction)
    norm = float(np.linalg.norm(d))
    if norm <= 0:
        raise FormatError("ray direction must be nonzero")
    d = d / norm
    return Ray(Vec3(*origin), Vec3(float(d[0]), float(d[1]), float(d[2])))


def _parse_clicks(body: dict) -> ClickRecord:
    try:
        clicks = body["clicks"]
        model = tuple(Vec3(*map(float, p)) for p in clicks["model"])
        image = tuple(PixelPoint(*map(float, p)) for p in clicks["image"])
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad register request: {exc}") from exc
    try:
        return ClickRecord(kind="registration", model_points=model, image_points=image)
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


def serve(project: Project, address: str = "127.0.0.1:8000"):
    """Run the API with uvicorn (blocking)."""
    import uvicorn

    host, _, port = address.partition(":")
    app = create_app(project)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8000), log_level="info")
