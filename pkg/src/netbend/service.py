"""HTTP + WebSocket service exposing the engine to interactive clients.

The graph and weights are immutable and shared; every request carries its
own PatchSet, so sessions can never observe each other's edits. The live
channel coalesces bursts with latest-wins semantics: only the most recent
pending request is guaranteed to be rendered, and reply sequence numbers
are monotonically non-decreasing.
"""

from __future__ import annotations

import asyncio
import base64
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import Response
from pydantic import BaseModel

from .activations import schema_catalog
from .graph import ModelGraph, graph_description
from .patches import PatchParseError, PatchSchemaError, PatchSet, deserialize
from .render import FORMATS, PatchValidationError, render_bytes

__all__ = ["create_app", "serve"]


class RenderRequest(BaseModel):
    patches: dict | None = None
    seed: int = 0
    format: str = "ppm"


def _patchset_from_obj(obj: dict | None) -> PatchSet:
    if obj is None:
        return PatchSet()
    return deserialize(json.dumps(obj))


def _schema_error_body(exc: Exception) -> dict:
    code = getattr(exc, "code", "bad_request")
    return {
        "errors": [{"code": code, "subject": "", "message": str(exc)}],
        "warnings": [],
    }


def create_app(graph: ModelGraph, default_seed: int = 0) -> FastAPI:
    app = FastAPI(title="netbend render service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    pool = ThreadPoolExecutor(max_workers=os.cpu_count() or 2)
    app.state.graph = graph

    # the model is immutable, so both catalogs are frozen to fixed bytes
    model_bytes = json.dumps(graph_description(graph), separators=(",", ":")).encode()
    catalog_bytes = json.dumps(schema_catalog(), separators=(",", ":")).encode()

    @app.get("/api/model")
    def get_model() -> Response:
        return Response(content=model_bytes, media_type="application/json")

    @app.get("/api/activations")
    def get_activations() -> Response:
        return Response(content=catalog_bytes, media_type="application/json")

    def _render(req: RenderRequest) -> tuple[bytes, str]:
        if req.format not in FORMATS:
            raise PatchSchemaError("bad_format", f"format must be one of {list(FORMATS)}")
        patches = _patchset_from_obj(req.patches)
        seed = req.seed if req.seed is not None else default_seed
        return render_bytes(graph, patches, seed, req.format)

    @app.post("/api/render")
    async def post_render(req: RenderRequest) -> Response:
        loop = asyncio.get_running_loop()
        try:
            payload, content_type = await loop.run_in_executor(pool, _render, req)
        except PatchValidationError as exc:
            return Response(
                content=json.dumps(exc.report.to_json_obj()),
                status_code=400,
                media_type="application/json",
            )
        except (PatchSchemaError, PatchParseError) as exc:
            return Response(
                content=json.dumps(_schema_error_body(exc)),
                status_code=400,
                media_type="application/json",
            )
        return Response(content=payload, media_type=content_type)

    @app.websocket("/ws")
    async def live_channel(ws: WebSocket) -> None:
        await ws.accept()
        queue: asyncio.Queue = asyncio.Queue()
        closed = object()

        async def reader() -> None:
            try:
                while True:
                    queue.put_nowait(await ws.receive_text())
            except WebSocketDisconnect:
                queue.put_nowait(closed)

        task = asyncio.create_task(reader())
        loop = asyncio.get_running_loop()
        try:
            while True:
                msg = await queue.get()
                # latest wins: a newer queued request supersedes this one
                while not queue.empty():
                    newer = queue.get_nowait()
                    if newer is closed:
                        return
                    msg = newer
                if msg is closed:
                    return
                seq = None
                try:
                    body = json.loads(msg)
                    seq = body.get("seq") if isinstance(body, dict) else None
                    req = RenderRequest(
                        patches=body.get("patches"),
                        seed=body.get("seed", default_seed),
                        format=body.get("format", "ppm"),
                    )
                    started = time.perf_counter()
                    payload, _ = await loop.run_in_executor(pool, _render, req)
                    render_ms = (time.perf_counter() - started) * 1000.0
                    await ws.send_json(
                        {
                            "seq": seq,
                            "image": base64.b64encode(payload).decode("ascii"),
                            "format": req.format,
                            "render_ms": render_ms,
                        }
                    )
                except PatchValidationError as exc:
                    await ws.send_json({"seq": seq, "error": exc.report.to_json_obj()})
                except (PatchSchemaError, PatchParseError, ValueError) as exc:
                    await ws.send_json({"seq": seq, "error": _schema_error_body(exc)})
        finally:
            task.cancel()

    return app


def serve(graph: ModelGraph, host: str = "127.0.0.1", port: int = 8639, default_seed: int = 0) -> None:
    import uvicorn

    uvicorn.run(create_app(graph, default_seed=default_seed), host=host, port=port)
