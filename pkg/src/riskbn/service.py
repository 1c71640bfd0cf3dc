"""HTTP service: network management, queries, d-separation, anomaly
screening, filter sessions, and catalog access.

Networks are immutable once stored; every store returns a fresh id.  The
store is in-memory with an optional persistence directory (canonical JSON
written on store, reloaded at startup).  Filter sessions serialize their
own observes behind a per-session lock.
"""

from __future__ import annotations

import itertools
import json
import pathlib
import threading
import time

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import api
from .errors import NotFound, ParseError, RiskbnError, ZeroMass, ConflictingEvidence, StateSpaceTooLarge
from .factors import Evidence
from .network import load_doc, save
from .temporal import DynamicNet, dynamic_load_doc, dynamic_save, filter_init, filter_step, is_dynamic_doc
from . import catalog as catalog_mod

_STATUS = {
    "ParseError": 400,
    "ValidationFailed": 400,
    "CardinalityMismatch": 400,
    "StateOutOfRange": 400,
    "VariableNotInScope": 400,
    "OverlappingSets": 400,
    "CycleDetected": 400,
    "StateSpaceTooLarge": 400,
    "EmptyDataset": 400,
    "InsufficientData": 400,
    "NotFound": 404,
    "ZeroMass": 409,
    "ConflictingEvidence": 409,
}


class NetworkStore:
    def __init__(self, persist_dir: str | None = None):
        self._nets: dict[str, object] = {}
        self._meta: dict[str, dict] = {}
        self._counter = itertools.count(1)
        self._lock = threading.Lock()
        self._dir = pathlib.Path(persist_dir) if persist_dir else None
        if self._dir:
            self._dir.mkdir(parents=True, exist_ok=True)
            self._reload()

    def _reload(self):
        highest = 0
        for path in sorted(self._dir.glob("net-*.json")):
            doc = json.loads(path.read_text())
            net = dynamic_load_doc(doc) if is_dynamic_doc(doc) else load_doc(doc)
            net_id = path.stem
            self._nets[net_id] = net
            self._meta[net_id] = doc.get("meta", {})
            try:
                highest = max(highest, int(net_id.split("-")[1]))
            except (IndexError, ValueError):
                pass
        self._counter = itertools.count(highest + 1)

    def store(self, net, meta: dict | None = None) -> str:
        with self._lock:
            net_id = f"net-{next(self._counter)}"
            self._nets[net_id] = net
            self._meta[net_id] = dict(meta or {}, created_at=time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()))
            if self._dir:
                text = save(net, self._meta[net_id]) if not isinstance(net, DynamicNet) \
                    else dynamic_save(net, self._meta[net_id])
                (self._dir / f"{net_id}.json").write_text(text)
            return net_id

    def get(self, net_id: str):
        try:
            return self._nets[net_id]
        except KeyError:
            raise NotFound(f"no network {net_id!r}", locus=net_id) from None

    def listing(self) -> list[dict]:
        return [
            {"id": net_id,
             "kind": "dynamic" if isinstance(net, DynamicNet) else "static",
             "variables": len(net.slice_vars) if isinstance(net, DynamicNet)
                          else len(net.variables),
             "meta": {k: v for k, v in self._meta[net_id].items()}}
            for net_id, net in sorted(self._nets.items())
        ]


class SessionStore:
    def __init__(self):
        self._sessions: dict[str, dict] = {}
        self._counter = itertools.count(1)
        self._lock = threading.Lock()

    def create(self, net_id: str, dnet: DynamicNet) -> str:
        with self._lock:
            sid = f"sess-{next(self._counter)}"
            self._sessions[sid] = {
                "network_id": net_id,
                "dnet": dnet,
                "state": filter_init(dnet),
                "history": [],
                "lock": threading.Lock(),
            }
            return sid

    def get(self, sid: str) -> dict:
        try:
            return self._sessions[sid]
        except KeyError:
            raise NotFound(f"no session {sid!r}", locus=sid) from None

    def delete(self, sid: str):
        with self._lock:
            if sid not in self._sessions:
                raise NotFound(f"no session {sid!r}", locus=sid)
            del self._sessions[sid]


def create_app(persist_dir: str | None = None, cors_origins: list[str] | None = None) -> FastAPI:
    app = FastAPI(title="riskbn", docs_url=None, redoc_url=None)
    nets = NetworkStore(persist_dir)
    sessions = SessionStore()
    app.state.networks = nets
    app.state.sessions = sessions

    if cors_origins:
        from fastapi.middleware.cors import CORSMiddleware

        app.add_middleware(CORSMiddleware, allow_origins=list(cors_origins),
                           allow_methods=["*"], allow_headers=["*"])

    @app.exception_handler(RiskbnError)
    async def riskbn_error(_req: Request, exc: RiskbnError):
        return JSONResponse(status_code=_STATUS.get(exc.code, 400), content=exc.to_dict())

    @app.exception_handler(ValueError)
    async def value_error(_req: Request, exc: ValueError):
        return JSONResponse(status_code=400,
                            content={"code": "Invalid", "message": str(exc), "locus": None})

    @app.post("/networks")
    async def post_network(body: dict):
        net = dynamic_load_doc(body) if is_dynamic_doc(body) else load_doc(body)
        return {"id": nets.store(net, body.get("meta", {}))}

    @app.get("/networks")
    async def list_networks():
        return {"networks": nets.listing()}

    @app.get("/networks/{net_id}")
    async def get_network(net_id: str):
        return api.net_document(nets.get(net_id))

    @app.post("/networks/{net_id}/query")
    async def query(net_id: str, body: dict):
        return api.run_query(nets.get(net_id), body.get("targets", []),
                             body.get("evidence", {}), body.get("method", "exact"))

    @app.post("/networks/{net_id}/dsep")
    async def dsep(net_id: str, body: dict):
        return api.run_dsep(nets.get(net_id), body.get("x", []), body.get("y", []),
                            body.get("z", []))

    @app.post("/networks/{net_id}/jtree")
    async def jtree(net_id: str):
        return api.run_jtree(nets.get(net_id))

    @app.post("/networks/{net_id}/anomaly")
    async def anomaly(net_id: str, body: dict):
        return api.run_anomaly(nets.get(net_id), body.get("observed", {}),
                               body.get("reported", {}),
                               float(body.get("threshold", 0.05)))

    @app.get("/catalog")
    async def catalog_listing():
        return api.catalog_listing()

    @app.get("/catalog/{catalog_id}")
    async def catalog_show(catalog_id: str, variant: str | None = None):
        return api.catalog_entry_json(catalog_id, variant)

    @app.post("/catalog/{catalog_id}/instantiate")
    async def catalog_instantiate(catalog_id: str, variant: str | None = None):
        entry_json = api.catalog_entry_json(catalog_id, variant)
        entry = catalog_mod.build(catalog_id)
        net = entry.variants[variant] if variant else entry.net
        meta = {"catalog_id": catalog_id}
        if variant:
            meta["variant"] = variant
        return {"id": nets.store(net, meta), "kind": entry_json["kind"]}

    @app.post("/sessions")
    async def create_session(body: dict):
        net_id = body.get("network_id")
        net = nets.get(net_id)
        if not isinstance(net, DynamicNet):
            raise ValueError(f"network {net_id!r} is static; sessions need a dynamic network")
        sid = sessions.create(net_id, net)
        return {"session_id": sid}

    @app.post("/sessions/{sid}/observe")
    async def observe(sid: str, body: dict):
        sess = sessions.get(sid)
        with sess["lock"]:
            dnet: DynamicNet = sess["dnet"]
            ev = Evidence.from_json(body.get("evidence", {}),
                                    {v.name: v for v in dnet.slice_vars})
            t = body.get("t")
            if t is not None and int(t) != sess["state"].t + 1:
                raise ValueError(
                    f"out-of-order tick {t}; expected {sess['state'].t + 1}")
            sess["state"] = filter_step(dnet, sess["state"], ev)
            tick = api.session_tick_json(dnet, sess["state"])
            sess["history"].append({"tick": tick, "evidence": body.get("evidence", {})})
            return tick

    @app.get("/sessions/{sid}")
    async def session_history(sid: str):
        sess = sessions.get(sid)
        return {"network_id": sess["network_id"],
                "t": int(sess["state"].t),
                "history": list(sess["history"])}

    @app.delete("/sessions/{sid}")
    async def delete_session(sid: str):
        sessions.delete(sid)
        return {"deleted": sid}

    return app


def main(argv: list[str] | None = None):
    import argparse

    import uvicorn

    parser = argparse.ArgumentParser(prog="riskbn-service")
    parser.add_argument("--addr", default="127.0.0.1:8080")
    parser.add_argument("--persist-dir", default=None)
    parser.add_argument("--cors-origin", action="append", default=[])
    args = parser.parse_args(argv)
    host, _, port = args.addr.rpartition(":")
    app = create_app(args.persist_dir, args.cors_origin)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))


if __name__ == "__main__":
    main()
