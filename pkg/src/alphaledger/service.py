"""HTTP/JSON service exposing exploration sessions.

Endpoints (all bodies and responses JSON):

* ``POST /sessions`` -- create a session (dataset name, alpha, eta,
  policy + params); returns the session state.
* ``GET /sessions/{id}`` -- full session state.
* ``POST /sessions/{id}/visualizations`` -- register a visualization;
  returns the derived record or a descriptive marker.
* ``POST /sessions/{id}/hypotheses`` -- explicit test spec.
* ``PUT /sessions/{id}/hypotheses/{hid}`` -- override a hypothesis.
* ``DELETE /sessions/{id}/hypotheses/{hid}`` -- remove from the ledger.
* ``POST /sessions/{id}/hypotheses/{hid}/star`` -- body {"on": bool}.
* ``GET /sessions/{id}/hypotheses/{hid}/flip?direction=...`` -- flip factor.

Sessions persist as append-only JSON-lines event logs under
``<data_dir>/sessions`` and are reloaded on startup; mutations are
serialized per session (one logical writer), reads are lock-free.
"""

from __future__ import annotations

import threading
from pathlib import Path
from typing import Optional

from fastapi import Body, FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware

from .dataset import Dataset, load_dataset
from .errors import AlphaLedgerError, NotFoundError, StateError
from .ledger import LedgerConfig, policy_from_dict
from .session import (
    Session,
    VisualizationSpec,
    add_hypothesis,
    create_session,
    data_to_flip,
    delete_hypothesis,
    override_hypothesis,
    record_to_dict,
    record_visualization,
    save_session,
    session_state,
    load_session,
    star_hypothesis,
    star_selection_warning,
)


class SessionStore:
    """In-memory session registry with optional JSONL persistence."""

    def __init__(self, data_dir: Optional[Path] = None):
        self.data_dir = Path(data_dir) if data_dir else None
        self.sessions: dict[str, Session] = {}
        self.locks: dict[str, threading.Lock] = {}
        self.datasets: dict[str, Dataset] = {}
        self._registry_lock = threading.Lock()
        if self.data_dir:
            self._load_persisted()

    def _session_dir(self) -> Optional[Path]:
        if not self.data_dir:
            return None
        d = self.data_dir / "sessions"
        d.mkdir(parents=True, exist_ok=True)
        return d

    def _load_persisted(self) -> None:
        session_dir = self._session_dir()
        if not session_dir:
            return
        for path in sorted(session_dir.glob("*.jsonl")):
            try:
                session = load_session(path, self.resolve_dataset)
            except AlphaLedgerError:
                continue  # damaged or orphaned log; leave the file alone
            self.sessions[session.id] = session
            self.locks[session.id] = threading.Lock()

    def resolve_dataset(self, name: str) -> Dataset:
        if name in self.datasets:
            return self.datasets[name]
        if self.data_dir:
            for candidate in (self.data_dir / name, self.data_dir / f"{name}.csv"):
                if candidate.is_file():
                    dataset = load_dataset(candidate, name=name)
                    self.datasets[name] = dataset
                    return dataset
        raise NotFoundError(f"unknown dataset {name!r}")

    def register_dataset(self, dataset: Dataset) -> None:
        self.datasets[dataset.name] = dataset

    def add(self, session: Session) -> None:
        with self._registry_lock:
            self.sessions[session.id] = session
            self.locks[session.id] = threading.Lock()

    def get(self, session_id: str) -> Session:
        if session_id in self.sessions:
            return self.sessions[session_id]
        # Not in memory: try the persisted event log (covers datasets that
        # were registered only after the store was constructed).
        session_dir = self._session_dir()
        if session_dir:
            path = session_dir / f"{session_id}.jsonl"
            if path.is_file():
                session = load_session(path, self.resolve_dataset)
                self.add(session)
                return session
        raise NotFoundError(f"unknown session {session_id!r}")

    def lock(self, session_id: str) -> threading.Lock:
        self.get(session_id)
        return self.locks[session_id]

    def persist(self, session: Session) -> None:
        session_dir = self._session_dir()
        if session_dir:
            save_session(session, session_dir / f"{session.id}.jsonl")


def _http_error(exc: AlphaLedgerError) -> HTTPException:
    if isinstance(exc, NotFoundError):
        return HTTPException(status_code=404, detail=str(exc.args[0] if exc.args else exc))
    if isinstance(exc, (StateError,)):
        return HTTPException(status_code=409, detail=str(exc))
    return HTTPException(status_code=400, detail=str(exc))


def create_app(data_dir: Optional[str] = None, store: Optional[SessionStore] = None) -> FastAPI:
    """Build the FastAPI app; ``store`` can be injected for tests."""
    app = FastAPI(title="alphaledger", version="0.1.0")
    # The browser client is served as static files from anywhere.
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    app.state.store = store or SessionStore(Path(data_dir) if data_dir else None)

    def _store() -> SessionStore:
        return app.state.store

    @app.post("/sessions")
    def create(payload: dict = Body(...)):
        store = _store()
        try:
            dataset = store.resolve_dataset(payload["dataset"])
            policy_spec = payload.get("policy", {"name": "fixed"})
            if isinstance(policy_spec, str):
                policy_spec = {"name": policy_spec}
            config = LedgerConfig(
                alpha=payload.get("alpha", 0.05),
                eta=payload.get("eta"),
                omega=payload.get("omega"),
                policy=policy_from_dict(policy_spec),
            )
            session = create_session(dataset, config, payload.get("id"))
        except AlphaLedgerError as exc:
            raise _http_error(exc) from exc
        except KeyError as exc:
            raise HTTPException(status_code=400, detail=f"missing field: {exc}") from exc
        store.add(session)
        store.persist(session)
        return session_state(session)

    @app.get("/sessions/{session_id}")
    def get_state(session_id: str):
        store = _store()
        try:
            return session_state(store.get(session_id))
        except AlphaLedgerError as exc:
            raise _http_error(exc) from exc

    @app.post("/sessions/{session_id}/visualizations")
    def post_visualization(session_id: str, payload: dict = Body(...)):
        store = _store()
        try:
            with store.lock(session_id):
                session = store.get(session_id)
                viz = VisualizationSpec.from_dict(payload)
                record = record_visualization(session, viz)
                store.persist(session)
        except AlphaLedgerError as exc:
            raise _http_error(exc) from exc
        if record is None:
            return {"descriptive": True, "record": None, "wealth": session.ledger.wealth}
        return {
            "descriptive": False,
            "record": record_to_dict(session, record),
            "wealth": session.ledger.wealth,
        }

    @app.post("/sessions/{session_id}/hypotheses")
    def post_hypothesis(session_id: str, payload: dict = Body(...)):
        store = _store()
        try:
            with store.lock(session_id):
                session = store.get(session_id)
                record = add_hypothesis(session, payload)
                store.persist(session)
        except AlphaLedgerError as exc:
            raise _http_error(exc) from exc
        return {"record": record_to_dict(session, record), "wealth": session.ledger.wealth}

    @app.put("/sessions/{session_id}/hypotheses/{record_id}")
    def put_hypothesis(session_id: str, record_id: int, payload: dict = Body(...)):
        store = _store()
        try:
            with store.lock(session_id):
                session = store.get(session_id)
                record = override_hypothesis(session, record_id, payload)
                store.persist(session)
        except AlphaLedgerError as exc:
            raise _http_error(exc) from exc
        return {"record": record_to_dict(session, record), "wealth": session.ledger.wealth}

    @app.delete("/sessions/{session_id}/hypotheses/{record_id}")
    def remove_hypothesis(session_id: str, record_id: int):
        store = _store()
        try:
            with store.lock(session_id):
                session = store.get(session_id)
                delete_hypothesis(session, record_id)
                store.persist(session)
        except AlphaLedgerError as exc:
            raise _http_error(exc) from exc
        return session_state(session)

    @app.post("/sessions/{session_id}/hypotheses/{record_id}/star")
    def star(session_id: str, record_id: int, payload: dict = Body(...)):
        store = _store()
        try:
            with store.lock(session_id):
                session = store.get(session_id)
                record = star_hypothesis(session, record_id, bool(payload.get("on", True)))
                store.persist(session)
        except AlphaLedgerError as exc:
            raise _http_error(exc) from exc
        return {
            "record": record_to_dict(session, record),
            "warning": star_selection_warning(session),
        }

    @app.get("/sessions/{session_id}/hypotheses/{record_id}/flip")
    def flip(session_id: str, record_id: int, direction: str = "to_reject"):
        store = _store()
        try:
            session = store.get(session_id)
            factor = data_to_flip(session, record_id, direction)
        except AlphaLedgerError as exc:
            raise _http_error(exc) from exc
        return {
            "id": record_id,
            "direction": direction,
            "flip_factor": factor,
            "unreachable": factor is None,
        }

    @app.get("/datasets/{name}")
    def dataset_info(name: str):
        store = _store()
        try:
            return store.resolve_dataset(name).describe()
        except AlphaLedgerError as exc:
            raise _http_error(exc) from exc

    return app
