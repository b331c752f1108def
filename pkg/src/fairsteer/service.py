"""HTTP API for review sessions.

A session owns an event log and, once trained, a loop state. Training and
iterating are long-running, so they run as background jobs: the endpoint
returns 202 with a job id and the client polls ``GET /jobs/{job_id}``.
A session accepts one job at a time (409 otherwise). All mutating
transitions are atomic: a failed job leaves the session exactly as it was.

Error contract: 404 for unknown session / job / node ids, 409 for a busy
session, 422 for invalid configuration or edit payloads, each with a JSON
body ``{"error": <code>, "detail": <human readable>}``.
"""

from __future__ import annotations

import logging
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any

from fastapi import FastAPI, Query, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import __version__
from .bundle import export_document
from .encoding import build_encoding_spec
from .errors import EmptyLog, FairsteerError, NotInternal, UnknownNode
from .eventlog import EventLog, parse_xes_with_report
from .loop import LoopState, ParityProbe, bootstrap, run_iteration
from .mlp import TrainConfig, finetune_config
from .simulate import (
    SimConfig,
    builtin_cancer_screening,
    ground_truth_rates,
    model_from_json,
    simulate,
)
from .surgery import actions_from_json, routed_samples
from .tree import TreeParams, tree_to_canonical

logger = logging.getLogger(__name__)


class HttpError(Exception):
    """Carries a status code and a machine-readable error body."""

    def __init__(self, status: int, code: str, detail: str):
        self.status = status
        self.code = code
        self.detail = detail
        super().__init__(detail)


@dataclass
class Job:
    job_id: str
    session_id: str
    kind: str  # "train" | "iterate"
    status: str = "pending"  # pending | running | done | failed
    progress: dict = field(default_factory=dict)
    error: dict | None = None

    def to_json(self) -> dict:
        return {
            "job_id": self.job_id,
            "session_id": self.session_id,
            "kind": self.kind,
            "status": self.status,
            "progress": self.progress,
            "error": self.error,
        }


@dataclass
class Session:
    session_id: str
    lock: threading.Lock = field(default_factory=threading.Lock)
    log: EventLog | None = None
    state: LoopState | None = None
    active_job: Job | None = None

    @property
    def busy(self) -> bool:
        return self.active_job is not None and self.active_job.status in (
            "pending",
            "running",
        )


class SessionStore:
    """In-memory sessions + jobs with a small worker pool."""

    def __init__(self, max_workers: int = 2):
        self.sessions: dict[str, Session] = {}
        self.jobs: dict[str, Job] = {}
        self.lock = threading.Lock()
        self.executor = ThreadPoolExecutor(max_workers=max_workers)
        #: Test hook: when set, background jobs wait on this event before
        #: starting their work.
        self.job_gate: threading.Event | None = None

    def create_session(self) -> Session:
        session = Session(session_id=uuid.uuid4().hex[:12])
        with self.lock:
            self.sessions[session.session_id] = session
        return session

    def get_session(self, session_id: str) -> Session:
        with self.lock:
            session = self.sessions.get(session_id)
        if session is None:
            raise HttpError(404, "unknown_session", f"no session {session_id!r}")
        return session

    def get_job(self, job_id: str) -> Job:
        with self.lock:
            job = self.jobs.get(job_id)
        if job is None:
            raise HttpError(404, "unknown_job", f"no job {job_id!r}")
        return job

    def submit(self, session: Session, kind: str, work) -> Job:
        """Register and launch a job; 409 when one is already in flight."""
        with session.lock:
            if session.busy:
                raise HttpError(
                    409,
                    "job_in_flight",
                    f"session {session.session_id} already has job "
                    f"{session.active_job.job_id} ({session.active_job.status})",
                )
            job = Job(
                job_id=uuid.uuid4().hex[:12],
                session_id=session.session_id,
                kind=kind,
            )
            session.active_job = job
        with self.lock:
            self.jobs[job.job_id] = job

        def run() -> None:
            if self.job_gate is not None:
                self.job_gate.wait()
            job.status = "running"
            try:
                result = work(job)
                with session.lock:
                    session.state = result
                job.status = "done"
            except Exception as exc:  # job errors surface via polling
                job.status = "failed"
                code = exc.code if isinstance(exc, FairsteerError) else "internal"
                job.error = {"error": code, "detail": str(exc)}
                logger.exception("job %s failed", job.job_id)

        self.executor.submit(run)
        return job


# -- request bodies -----------------------------------------------------------


class SimulateRequest(BaseModel):
    model_config = {"protected_namespaces": ()}

    model: Any = "cancer_screening"
    female_refusal: float = 0.5
    male_refusal: float = 0.0
    num_cases: int = Field(default=1000, ge=1)
    seed: int = 42


class ProbeBody(BaseModel):
    attribute: str
    groups: tuple[str, str]
    target_class: str


class TrainRequest(BaseModel):
    window: int = Field(default=3, ge=1)
    attributes: list[str] = []
    hidden_layers: list[int] = [64, 64]
    epochs: int = Field(default=30, ge=0)
    batch_size: int = Field(default=32, ge=1)
    learning_rate: float = Field(default=1e-3, gt=0)
    seed: int = 0
    shuffle: bool = True
    class_weighting: bool = False
    max_depth: int = Field(default=8, ge=0)
    min_samples_leaf: int = Field(default=5, ge=1)
    criterion: str = "gini"
    probes: list[ProbeBody] = []


class IterateRequest(BaseModel):
    edits: list[dict] = []
    epochs: int = Field(default=10, ge=0)
    changed_only: bool = False


def create_app(store: SessionStore | None = None) -> FastAPI:
    app = FastAPI(title="fairsteer", version=__version__)
    app.state.store = store if store is not None else SessionStore()

    @app.exception_handler(HttpError)
    async def handle_http_error(request: Request, exc: HttpError) -> JSONResponse:
        return JSONResponse(
            status_code=exc.status,
            content={"error": exc.code, "detail": exc.detail},
        )

    @app.exception_handler(FairsteerError)
    async def handle_engine_error(
        request: Request, exc: FairsteerError
    ) -> JSONResponse:
        status = 404 if isinstance(exc, UnknownNode) else 422
        return JSONResponse(
            status_code=status, content={"error": exc.code, "detail": str(exc)}
        )

    def _store() -> SessionStore:
        return app.state.store

    def _trained(session: Session) -> LoopState:
        if session.state is None:
            raise HttpError(
                422, "not_trained", f"session {session.session_id} has no model yet"
            )
        return session.state

    def _with_log(session: Session) -> EventLog:
        if session.log is None:
            raise HttpError(
                422, "no_log", f"session {session.session_id} has no event log"
            )
        return session.log

    @app.post("/sessions", status_code=201)
    def create_session() -> dict:
        session = _store().create_session()
        return {"session_id": session.session_id}

    @app.post("/sessions/{session_id}/log")
    async def upload_log(session_id: str, request: Request) -> dict:
        session = _store().get_session(session_id)
        body = await request.body()
        log, report = parse_xes_with_report(body)
        with session.lock:
            if session.busy:
                raise HttpError(409, "job_in_flight", "session is busy")
            session.log = log
            session.state = None
        return {
            "num_traces": report.num_traces,
            "num_events": report.num_events,
            "activities": list(log.activity_alphabet),
            "warnings": report.warnings,
        }

    @app.post("/sessions/{session_id}/simulate")
    def simulate_log(session_id: str, body: SimulateRequest) -> dict:
        session = _store().get_session(session_id)
        if body.model == "cancer_screening":
            model = builtin_cancer_screening(
                female_refusal=body.female_refusal,
                male_refusal=body.male_refusal,
            )
        elif isinstance(body.model, dict):
            model = model_from_json(body.model)
        else:
            raise HttpError(
                422,
                "unknown_model",
                f"model must be 'cancer_screening' or an inline model "
                f"document, got {body.model!r}",
            )
        log = simulate(model, SimConfig(num_cases=body.num_cases, seed=body.seed))
        try:
            rates = ground_truth_rates(model)
        except FairsteerError:
            rates = None
        with session.lock:
            if session.busy:
                raise HttpError(409, "job_in_flight", "session is busy")
            session.log = log
            session.state = None
        return {
            "num_traces": len(log.traces),
            "num_events": sum(len(t.events) for t in log.traces),
            "activities": list(log.activity_alphabet),
            "ground_truth_rates": rates,
        }

    @app.post("/sessions/{session_id}/train", status_code=202)
    def start_train(session_id: str, body: TrainRequest) -> dict:
        session = _store().get_session(session_id)
        log = _with_log(session)
        # cheap validation up front so config errors are synchronous 422s
        if not log.traces:
            raise EmptyLog("log has no traces")
        build_encoding_spec(log, window=body.window, attributes=body.attributes)
        config = TrainConfig(
            epochs=body.epochs,
            batch_size=body.batch_size,
            learning_rate=body.learning_rate,
            seed=body.seed,
            shuffle=body.shuffle,
            class_weighting=body.class_weighting,
        )
        params = TreeParams(
            max_depth=body.max_depth,
            min_samples_leaf=body.min_samples_leaf,
            criterion=body.criterion,
        )
        probes = tuple(
            ParityProbe(
                attribute=p.attribute,
                groups=p.groups,
                target_class=p.target_class,
            )
            for p in body.probes
        )

        def work(job: Job) -> LoopState:
            def on_epoch(epoch: int, loss: float) -> None:
                job.progress = {
                    "epoch": epoch + 1,
                    "epochs": body.epochs,
                    "loss": loss,
                }

            return bootstrap(
                log,
                window=body.window,
                attributes=tuple(body.attributes),
                hidden_layers=tuple(body.hidden_layers),
                train_config=config,
                tree_params=params,
                probes=probes,
                on_epoch=on_epoch,
            )

        job = _store().submit(session, "train", work)
        return {"job_id": job.job_id, "status": job.status}

    @app.post("/sessions/{session_id}/iterate", status_code=202)
    def start_iterate(session_id: str, body: IterateRequest) -> dict:
        session = _store().get_session(session_id)
        state = _trained(session)
        try:
            edits = actions_from_json(body.edits)
        except (ValueError, KeyError, TypeError) as exc:
            raise HttpError(422, "invalid_edit", str(exc)) from exc
        # referenced nodes must exist now; deeper failures surface via the job
        for edit in edits:
            node = state.tree.find(edit.node_id)  # may raise UnknownNode -> 404
            if hasattr(edit, "excluded_attributes"):
                for attribute in edit.excluded_attributes:
                    state.dataset.spec.columns_for_attribute(attribute)
            elif node.is_leaf:
                raise NotInternal(edit.node_id)
        config = finetune_config(
            TrainConfig(seed=state.model.seed), epochs=body.epochs
        )

        def work(job: Job) -> LoopState:
            def on_epoch(epoch: int, loss: float) -> None:
                job.progress = {
                    "epoch": epoch + 1,
                    "epochs": body.epochs,
                    "loss": loss,
                }

            next_state, relabel = run_iteration(
                state,
                edits,
                finetune=config,
                changed_only=body.changed_only,
                on_epoch=on_epoch,
            )
            job.progress = {
                **job.progress,
                "relabeled": relabel.changed,
                "total": relabel.total,
            }
            return next_state

        job = _store().submit(session, "iterate", work)
        return {"job_id": job.job_id, "status": job.status}

    @app.get("/sessions/{session_id}/tree")
    def get_tree(session_id: str) -> dict:
        session = _store().get_session(session_id)
        state = _trained(session)
        return tree_to_canonical(state.tree)

    @app.get("/sessions/{session_id}/tree/node/{node_id}/samples")
    def get_node_samples(
        session_id: str, node_id: int, limit: int = Query(default=20, ge=1)
    ) -> dict:
        session = _store().get_session(session_id)
        state = _trained(session)
        indices = routed_samples(state.tree, node_id, state.distillation)
        samples = []
        for row in indices[:limit]:
            case_id, prefix_length = state.distillation.provenance[row]
            samples.append(
                {
                    "case_id": case_id,
                    "prefix_length": prefix_length,
                    "model_label": state.distillation.class_names[
                        int(state.distillation.labels[row])
                    ],
                    "original_label": state.distillation.class_names[
                        int(state.distillation.ground_truth[row])
                    ],
                }
            )
        return {
            "node_id": node_id,
            "count": int(indices.shape[0]),
            "samples": samples,
        }

    @app.get("/sessions/{session_id}/metrics")
    def get_metrics(session_id: str) -> dict:
        session = _store().get_session(session_id)
        state = _trained(session)
        return {
            "iteration": state.iteration,
            "history": [
                {"iteration": i, **report.to_json()}
                for i, report in enumerate(state.metrics_history)
            ],
        }

    @app.get("/jobs/{job_id}")
    def get_job(job_id: str) -> dict:
        return _store().get_job(job_id).to_json()

    @app.get("/sessions/{session_id}/export")
    def export_session(session_id: str) -> dict:
        session = _store().get_session(session_id)
        state = _trained(session)
        return export_document(state)

    return app


def default_app() -> FastAPI:
    """App factory for ``uvicorn fairsteer.service:default_app``."""
    return create_app()
