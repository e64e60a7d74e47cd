"""The operational centre: live queue, per-doctor learners, event-sourced state.

Every mutation is computed first, written to an append-only JSON-lines log,
and only then applied in memory, so any centre state is reproducible by
replaying the log (plus the latest snapshot). Doctor models learn online:
when a doctor takes a patient the model makes a prediction it will be held
to; when the consultation closes the observed minutes update the model.
"""

from __future__ import annotations

import json
import os
import random
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import fql, scheduler, triage
from .config import EngineConfig
from .errors import NotFoundError, ValidationError

EVENTS_FILE = "events.jsonl"
SNAPSHOT_FILE = "snapshot.json"

WAITING = "waiting"
IN_CONSULTATION = "in-consultation"
DONE = "done"


class WallClock:
    """Minutes since the epoch; the service's default time source."""

    def now_min(self) -> float:
        return time.time() / 60.0


class VirtualClock:
    """Deterministic clock for tests and simulations; only moves forward."""

    def __init__(self, start: float = 0.0):
        self._now = float(start)

    def now_min(self) -> float:
        return self._now

    def advance(self, minutes: float) -> None:
        if minutes < 0:
            raise ValueError("clock cannot move backwards")
        self._now += minutes


@dataclass
class PatientCase:
    id: str
    name: str
    age: float
    assessment: triage.Assessment
    triage_result: triage.TriageResult
    arrival_min: float
    predicted_consult: float
    status: str = WAITING
    doctor_id: str | None = None
    notes: list = field(default_factory=list)
    consult_start_min: float | None = None
    consult_end_min: float | None = None
    observed_min: float | None = None
    consult_record: dict | None = None   # learner activation at takeover

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "age": self.age,
            "assessment": self.assessment.to_dict(),
            "triage": self.triage_result.to_dict(),
            "arrival_min": self.arrival_min,
            "predicted_consult_min": self.predicted_consult,
            "status": self.status,
            "doctor_id": self.doctor_id,
            "notes": list(self.notes),
            "consult_start_min": self.consult_start_min,
            "consult_end_min": self.consult_end_min,
            "observed_min": self.observed_min,
        }


@dataclass
class Doctor:
    id: str
    model: fql.FqlModel
    current_case_id: str | None = None


def _updated_copy(model: fql.FqlModel, record: fql.ActivationRecord,
                  observed: float) -> fql.FqlModel:
    copy = fql.FqlModel(
        severity=model.severity, age=model.age, bins=model.bins,
        q=model.q.copy(), visits=model.visits.copy(), epoch=model.epoch,
        alpha=model.alpha, eef=model.eef, visit_floor=model.visit_floor)
    return fql.update(copy, record, observed)


class CentreService:
    """Single-writer centre state machine over an event log."""

    def __init__(self, data_dir, config: EngineConfig | None = None, clock=None):
        self.config = config if config is not None else EngineConfig()
        self.clock = clock if clock is not None else WallClock()
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.cases: dict[str, PatientCase] = {}
        self.queue_order: list[str] = []
        self.doctors: dict[str, Doctor] = {}
        self.pool_model = self._fresh_model()
        self.events_applied = 0
        self._case_counter = 0
        self._rng = random.Random(self.config.service.seed)
        self._fis = self.config.triage_fis()
        self._recover()
        self._events_fh = open(self.data_dir / EVENTS_FILE, "a")

    # --- construction helpers -------------------------------------------

    def _fresh_model(self) -> fql.FqlModel:
        c = self.config.fql
        return fql.FqlModel.fresh(alpha=c.alpha, eef=c.eef(),
                                  visit_floor=c.visit_floor)

    def _doctor(self, doctor_id: str) -> Doctor:
        if doctor_id not in self.doctors:
            self.doctors[doctor_id] = Doctor(doctor_id, self._fresh_model())
        return self.doctors[doctor_id]

    def _severity_input(self, result: triage.TriageResult) -> float:
        # the learners' severity scale tops out at 10; scores past it all
        # mean "maximally urgent" for consult-time purposes
        hi = self.pool_model.severity.universe[1]
        return min(result.crisp_ts, hi)

    def close(self) -> None:
        self._events_fh.close()

    # --- persistence ------------------------------------------------------

    def _recover(self) -> None:
        snap_path = self.data_dir / SNAPSHOT_FILE
        from_seq = 0
        if snap_path.exists():
            with open(snap_path) as fh:
                snapshot = json.load(fh)
            self._load_snapshot(snapshot)
            from_seq = snapshot["seq"]
        events_path = self.data_dir / EVENTS_FILE
        if events_path.exists():
            with open(events_path) as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    event = json.loads(line)
                    if event["seq"] <= from_seq:
                        continue
                    self._apply(event)

    def _append_event(self, kind: str, payload: dict) -> dict:
        event = {"seq": self.events_applied + 1, "type": kind,
                 "at_min": self.clock.now_min(), "payload": payload}
        self._events_fh.write(json.dumps(event) + "\n")
        self._events_fh.flush()
        os.fsync(self._events_fh.fileno())
        return event

    def snapshot(self) -> None:
        doc = {
            "seq": self.events_applied,
            "case_counter": self._case_counter,
            "cases": {cid: self._case_to_snapshot(c) for cid, c in self.cases.items()},
            "queue_order": list(self.queue_order),
            "doctors": {
                d.id: {"model": fql.persist(d.model),
                       "current_case_id": d.current_case_id}
                for d in self.doctors.values()
            },
            "pool_model": fql.persist(self.pool_model),
        }
        tmp = self.data_dir / (SNAPSHOT_FILE + ".tmp")
        with open(tmp, "w") as fh:
            json.dump(doc, fh)
        os.replace(tmp, self.data_dir / SNAPSHOT_FILE)

    def _case_to_snapshot(self, case: PatientCase) -> dict:
        doc = case.to_dict()
        doc["consult_record"] = case.consult_record
        return doc

    def _case_from_snapshot(self, doc: dict) -> PatientCase:
        tr = doc["triage"]
        result = triage.TriageResult(
            crisp_ts=tr["crisp_ts"],
            vital_scores=dict(tr["vital_scores"]),
            out_of_table=tuple(tr["out_of_table"]),
            base_colour=tr["base_colour"],
            colour=tr["colour"],
            applied_overrides=tuple((t["flag"], t["from"], t["to"])
                                    for t in tr["applied_overrides"]),
        )
        return PatientCase(
            id=doc["id"], name=doc["name"], age=doc["age"],
            assessment=triage.Assessment.from_dict(doc["assessment"]),
            triage_result=result,
            arrival_min=doc["arrival_min"],
            predicted_consult=doc["predicted_consult_min"],
            status=doc["status"], doctor_id=doc["doctor_id"],
            notes=list(doc["notes"]),
            consult_start_min=doc["consult_start_min"],
            consult_end_min=doc["consult_end_min"],
            observed_min=doc["observed_min"],
            consult_record=doc.get("consult_record"),
        )

    def _load_snapshot(self, doc: dict) -> None:
        self.events_applied = doc["seq"]
        self._case_counter = doc["case_counter"]
        self.cases = {cid: self._case_from_snapshot(c)
                      for cid, c in doc["cases"].items()}
        self.queue_order = list(doc["queue_order"])
        self.doctors = {
            did: Doctor(did, fql.restore(d["model"]), d["current_case_id"])
            for did, d in doc["doctors"].items()
        }
        self.pool_model = fql.restore(doc["pool_model"])

    # --- queue optimization ------------------------------------------------

    def _optimized_order(self, now: float) -> list[str]:
        waiting = [c for c in self.cases.values() if c.status == WAITING]
        if not waiting:
            return []
        waiting.sort(key=lambda c: c.arrival_min)
        queue = scheduler.Queue(
            tuple(scheduler.PatientRecord(c.id, c.triage_result.crisp_ts,
                                          c.arrival_min, c.predicted_consult)
                  for c in waiting),
            now=max(now, max(c.arrival_min for c in waiting)))
        result = scheduler.optimize(queue, params=self.config.ga)
        ids = [waiting[pos - 1].id for pos in result.order]
        if self.config.service.pin_urgent:
            reds = [i for i in ids if self.cases[i].triage_result.colour == "red"]
            rest = [i for i in ids if self.cases[i].triage_result.colour != "red"]
            ids = reds + rest
        return ids

    # --- operations ---------------------------------------------------------

    def submit_triage(self, assessment, name: str, age: float,
                      operator: str | None = None) -> PatientCase:
        """Triage one arrival, enqueue it, and re-optimize the queue."""
        if not isinstance(assessment, triage.Assessment):
            assessment = triage.Assessment.from_dict(assessment)
        if not name or not str(name).strip():
            raise ValidationError("patient name is required", field="name")
        try:
            age = float(age)
        except (TypeError, ValueError):
            raise ValidationError("age must be a number", field="age")
        if not (0 <= age <= 130):
            raise ValidationError("age out of range", field="age")

        result = triage.triage(assessment, fis=self._fis,
                               thresholds=self.config.thresholds,
                               pain_weights=self.config.pain_weights,
                               overrides=self.config.overrides)
        minutes, _ = fql.predict(self.pool_model,
                                 self._severity_input(result), age,
                                 self._rng, mode="greedy")
        case_id = f"c{self._case_counter + 1:06d}"
        now = self.clock.now_min()

        shadow = dict(self.cases)
        shadow[case_id] = PatientCase(
            id=case_id, name=str(name), age=age, assessment=assessment,
            triage_result=result, arrival_min=now, predicted_consult=minutes)
        order = self._order_preview(shadow, now)

        payload = {
            "case_id": case_id,
            "name": str(name),
            "age": age,
            "operator": operator,
            "assessment": assessment.to_dict(),
            "triage": result.to_dict(),
            "predicted_consult_min": minutes,
            "arrival_min": now,
            "queue_order": order,
        }
        event = self._append_event("patient_submitted", payload)
        self._apply(event)
        self._maybe_snapshot()
        return self.cases[case_id]

    def _order_preview(self, shadow_cases: dict, now: float) -> list[str]:
        original = self.cases
        self.cases = shadow_cases
        try:
            return self._optimized_order(now)
        finally:
            self.cases = original

    def next_patient(self, doctor_id: str, notes: str = "",
                     operator: str | None = None) -> PatientCase | None:
        """Close the doctor's current consultation (learning from its actual
        duration), re-optimize, and hand over the queue head, if any."""
        doctor = self._doctor(doctor_id)
        now = self.clock.now_min()
        closed = None
        model_view = doctor.model
        if doctor.current_case_id is not None:
            case = self.cases[doctor.current_case_id]
            observed = max(0.0, now - case.consult_start_min)
            closed = {"case_id": case.id, "observed_min": observed,
                      "notes": notes}
            # the takeover prediction must see the post-closure model, but the
            # real update only happens when the event applies, so predict
            # against an updated throwaway copy
            model_view = _updated_copy(
                doctor.model, fql.ActivationRecord.from_dict(case.consult_record),
                observed)
        # the doctor's current case is in-consultation, never in the waiting
        # set, so the closure does not change the optimization input
        order = self._optimized_order(now)
        next_block = None
        if order:
            head_id = order[0]
            head = self.cases[head_id]
            _, record = fql.predict(model_view,
                                    self._severity_input(head.triage_result),
                                    head.age, self._rng, mode="learn")
            next_block = {"case_id": head_id,
                          "record": record.to_dict(),
                          "predicted_min": record.predicted_minutes}
            order = order[1:]
        payload = {
            "doctor_id": doctor_id,
            "operator": operator,
            "closed": closed,
            "next": next_block,
            "queue_order": order,
        }
        event = self._append_event("next_patient", payload)
        self._apply(event)
        self._maybe_snapshot()
        if next_block is None:
            return None
        return self.cases[next_block["case_id"]]

    def _maybe_snapshot(self) -> None:
        interval = self.config.service.snapshot_interval
        if interval > 0 and self.events_applied % interval == 0:
            self.snapshot()

    # --- event application (shared by live path and replay) -----------------

    def _apply(self, event: dict) -> None:
        kind = event["type"]
        payload = event["payload"]
        if kind == "patient_submitted":
            self._apply_submit(event["at_min"], payload)
        elif kind == "next_patient":
            self._apply_next(event["at_min"], payload)
        else:
            raise ValidationError(f"unknown event type {kind!r}")
        self.events_applied = event["seq"]

    def _apply_submit(self, at_min: float, payload: dict) -> None:
        tr = payload["triage"]
        result = triage.TriageResult(
            crisp_ts=tr["crisp_ts"],
            vital_scores=dict(tr["vital_scores"]),
            out_of_table=tuple(tr["out_of_table"]),
            base_colour=tr["base_colour"],
            colour=tr["colour"],
            applied_overrides=tuple((t["flag"], t["from"], t["to"])
                                    for t in tr["applied_overrides"]),
        )
        case = PatientCase(
            id=payload["case_id"],
            name=payload["name"],
            age=payload["age"],
            assessment=triage.Assessment.from_dict(payload["assessment"]),
            triage_result=result,
            arrival_min=payload["arrival_min"],
            predicted_consult=payload["predicted_consult_min"],
        )
        self.cases[case.id] = case
        self.queue_order = list(payload["queue_order"])
        self._case_counter += 1

    def _apply_next(self, at_min: float, payload: dict) -> None:
        doctor = self._doctor(payload["doctor_id"])
        closed = payload["closed"]
        if closed is not None:
            case = self.cases[closed["case_id"]]
            record = fql.ActivationRecord.from_dict(case.consult_record)
            fql.update(doctor.model, record, closed["observed_min"])
            case.status = DONE
            case.consult_end_min = at_min
            case.observed_min = closed["observed_min"]
            if closed["notes"]:
                case.notes.append(closed["notes"])
            doctor.current_case_id = None
        nxt = payload["next"]
        if nxt is not None:
            case = self.cases[nxt["case_id"]]
            case.status = IN_CONSULTATION
            case.doctor_id = doctor.id
            case.consult_start_min = at_min
            case.consult_record = nxt["record"]
            doctor.current_case_id = case.id
        self.queue_order = list(payload["queue_order"])

    # --- read side -----------------------------------------------------------

    def queue_state(self) -> list[dict]:
        now = self.clock.now_min()
        rows = []
        projected = 0.0
        for pos, case_id in enumerate(self.queue_order, start=1):
            case = self.cases[case_id]
            rows.append({
                "position": pos,
                "id": case.id,
                "name": case.name,
                "colour": case.triage_result.colour,
                "crisp_ts": case.triage_result.crisp_ts,
                "waited_min": max(0.0, now - case.arrival_min),
                "projected_start_min": projected,
                "expected_consult_min": case.predicted_consult,
            })
            projected += case.predicted_consult
        return rows

    def get_patient(self, case_id: str) -> PatientCase:
        if case_id not in self.cases:
            raise NotFoundError(f"no patient case {case_id!r}")
        return self.cases[case_id]

    def search_patients(self, query: str = "") -> list[PatientCase]:
        q = (query or "").strip().lower()
        hits = [c for c in self.cases.values()
                if q in c.name.lower() or q in c.id.lower()]
        hits.sort(key=lambda c: c.arrival_min)
        return hits

    def doctor_model_stats(self, doctor_id: str) -> dict:
        # read-only: an unknown doctor is reported as a fresh model without
        # being registered (registration happens on the first next_patient)
        doctor = self.doctors.get(doctor_id)
        model = doctor.model if doctor else self._fresh_model()
        return {
            "doctor_id": doctor_id,
            "epoch": model.epoch,
            "alpha": model.alpha,
            "epsilon": fql.epsilon(model.epoch, model.eef),
            "bins_min": [m for _, m in model.bins],
            "q_shape": list(model.q.shape),
            "total_visits": int(model.visits.sum()),
            "current_case_id": doctor.current_case_id if doctor else None,
        }

    def state_fingerprint(self) -> dict:
        """Everything that defines the centre state, in comparable form."""
        return {
            "events_applied": self.events_applied,
            "case_counter": self._case_counter,
            "cases": {cid: self._case_to_snapshot(c)
                      for cid, c in sorted(self.cases.items())},
            "queue_order": list(self.queue_order),
            "doctors": {
                d.id: {"model": fql.persist(d.model),
                       "current_case_id": d.current_case_id}
                for d in sorted(self.doctors.values(), key=lambda d: d.id)
            },
        }
