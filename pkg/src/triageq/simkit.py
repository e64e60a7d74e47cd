"""Desk-scale experiments: triage agreement against plain CTS arithmetic,
teacher-driven online learning curves, and FIFO-vs-optimized queue replays."""

from __future__ import annotations

import csv
import io
import itertools
import math
import random
from dataclasses import dataclass, field

from . import fql, fuzzy, scheduler, triage
from .config import SimConfig
from .errors import ValidationError

COLOURS = triage.COLOUR_ORDER


# --- traces ---------------------------------------------------------------

@dataclass(frozen=True)
class TraceRow:
    patient_id: str
    arrival_min: float
    ts: float
    consult_min: float


@dataclass(frozen=True)
class ArrivalTrace:
    rows: tuple[TraceRow, ...]
    source: str = "generated"

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))
        arrivals = [r.arrival_min for r in self.rows]
        if arrivals != sorted(arrivals):
            raise ValidationError("trace arrivals must be non-decreasing",
                                  field="arrival_min")
        if any(r.consult_min <= 0 for r in self.rows):
            raise ValidationError("consult times must be > 0", field="consult_min")

    def to_csv(self, path=None) -> str | None:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["patient_id", "arrival_min", "ts", "consult_min"])
        for r in self.rows:
            writer.writerow([r.patient_id, r.arrival_min, r.ts, r.consult_min])
        text = buf.getvalue()
        if path is None:
            return text
        with open(path, "w", newline="") as fh:
            fh.write(text)
        return None

    @classmethod
    def from_csv(cls, path) -> "ArrivalTrace":
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            expected = ["patient_id", "arrival_min", "ts", "consult_min"]
            if reader.fieldnames != expected:
                raise ValidationError(
                    f"trace header must be {','.join(expected)}", field="header")
            rows = []
            for raw in reader:
                try:
                    rows.append(TraceRow(raw["patient_id"], float(raw["arrival_min"]),
                                         float(raw["ts"]), float(raw["consult_min"])))
                except (TypeError, ValueError) as exc:
                    raise ValidationError(f"bad trace row {raw!r}: {exc}")
        return cls(tuple(rows), source="file")


def generate_trace(n: int, seed: int, sim: SimConfig | None = None) -> ArrivalTrace:
    """Synthetic workload: Poisson arrivals, colour mix skewed green,
    log-normal consult times. Clearly synthetic; parameters live in SimConfig."""
    sim = sim if sim is not None else SimConfig()
    rng = random.Random(seed)
    rows = []
    t = 0.0
    bands = [(0.0, 3.0), (3.0, 5.0), (5.0, 7.0), (7.0, 10.0)]
    for i in range(n):
        t += rng.expovariate(sim.arrival_rate_per_min)
        u = rng.random()
        cum = 0.0
        band = bands[-1]
        for share, b in zip(sim.colour_mix, bands):
            cum += share
            if u < cum:
                band = b
                break
        ts = rng.uniform(*band)
        consult = rng.lognormvariate(math.log(sim.consult_median_min),
                                     sim.consult_sigma)
        consult = min(max(consult, 2.0), 120.0)
        rows.append(TraceRow(f"p{i:03d}", t, ts, consult))
    return ArrivalTrace(tuple(rows))


def heavy_load_trace(sim: SimConfig | None = None) -> ArrivalTrace:
    """The fixed benchmark workload: a tight arrival burst with urgent
    patients landing in the back half, where ordering matters most."""
    sim = sim if sim is not None else SimConfig()
    rng = random.Random(sim.heavy_seed)
    rows = []
    t = 0.0
    n = sim.heavy_n
    red_slots = {n - 5, n - 2}   # urgent arrivals placed late on purpose
    for i in range(n):
        t += rng.expovariate(sim.heavy_arrival_rate_per_min)
        if i in red_slots:
            ts = rng.uniform(7.0, 10.0)
        else:
            ts = rng.choice([rng.uniform(0, 3), rng.uniform(0, 3),
                             rng.uniform(3, 5), rng.uniform(5, 7)])
        consult = min(max(rng.lognormvariate(math.log(sim.consult_median_min),
                                             sim.consult_sigma), 2.0), 120.0)
        rows.append(TraceRow(f"p{i:03d}", t, ts, consult))
    return ArrivalTrace(tuple(rows))


# --- schedule benchmark -----------------------------------------------------

@dataclass
class BenchmarkReport:
    policy: str
    waits: dict                      # patient_id -> minutes
    served_order: tuple
    start_times: dict                # patient_id -> minutes
    mean_wait: float
    mean_wait_by_colour: dict
    makespan: float
    idle_min: float

    def to_dict(self) -> dict:
        return {
            "policy": self.policy,
            "mean_wait_min": self.mean_wait,
            "mean_wait_by_colour": dict(self.mean_wait_by_colour),
            "makespan_min": self.makespan,
            "idle_min": self.idle_min,
            "served_order": list(self.served_order),
            "waits": dict(self.waits),
            "start_times": dict(self.start_times),
        }

    def waits_csv(self, path=None) -> str | None:
        """Wait-time pairs in served order, for external plotting."""
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["patient_id", "wait_min"])
        for pid in self.served_order:
            writer.writerow([pid, self.waits[pid]])
        text = buf.getvalue()
        if path is None:
            return text
        with open(path, "w", newline="") as fh:
            fh.write(text)
        return None


def run_schedule_benchmark(trace: ArrivalTrace, policy: str,
                           prediction_noise_sigma: float | None = None,
                           seed: int = 0,
                           ga_params: scheduler.GaParams | None = None,
                           thresholds: triage.ColourThresholds | None = None,
                           sim: SimConfig | None = None) -> BenchmarkReport:
    """Replay a trace against one queue policy.

    A single doctor serves patients; whenever the doctor frees, the policy
    picks the next patient among those already arrived. The optimizing policy
    re-runs the queue search on noise-perturbed consult estimates; waits are
    measured from arrival to consultation start.
    """
    if not trace.rows:
        raise ValidationError("empty trace", field="trace")
    if policy not in ("fifo", "ga"):
        raise ValueError(f"unknown policy {policy!r}")
    sim = sim if sim is not None else SimConfig()
    if prediction_noise_sigma is None:
        prediction_noise_sigma = sim.prediction_noise_sigma
    thresholds = thresholds if thresholds is not None else triage.ColourThresholds()
    ga_params = ga_params if ga_params is not None else scheduler.GaParams()

    rng = random.Random(seed)
    estimates = {
        r.patient_id: max(1.0, r.consult_min + rng.gauss(0.0, prediction_noise_sigma))
        for r in trace.rows
    }

    pending = list(trace.rows)
    waiting: list[TraceRow] = []
    waits, starts = {}, {}
    served = []
    t = 0.0
    idle = 0.0
    while pending or waiting:
        while pending and pending[0].arrival_min <= t:
            waiting.append(pending.pop(0))
        if not waiting:
            next_arrival = pending[0].arrival_min
            idle += next_arrival - t
            t = next_arrival
            continue
        if policy == "fifo":
            chosen = waiting[0]
        else:
            queue = scheduler.Queue(
                tuple(scheduler.PatientRecord(r.patient_id, r.ts, r.arrival_min,
                                              estimates[r.patient_id])
                      for r in waiting),
                now=t)
            result = scheduler.optimize(queue, params=ga_params)
            chosen = waiting[result.order[0] - 1]
        waiting.remove(chosen)
        starts[chosen.patient_id] = t
        waits[chosen.patient_id] = t - chosen.arrival_min
        served.append(chosen.patient_id)
        t += chosen.consult_min
    by_colour: dict[str, list[float]] = {}
    for r in trace.rows:
        colour = thresholds.colour_for(r.ts)
        by_colour.setdefault(colour, []).append(waits[r.patient_id])
    return BenchmarkReport(
        policy=policy,
        waits=waits,
        served_order=tuple(served),
        start_times=starts,
        mean_wait=sum(waits.values()) / len(waits),
        mean_wait_by_colour={c: sum(v) / len(v) for c, v in by_colour.items()},
        makespan=t,
        idle_min=idle,
    )


# --- teacher experiment -----------------------------------------------------

def generate_teacher(seed: int) -> fuzzy.Fis:
    """A random but valid rule base over the learner's input space: every
    antecedent combination maps to one randomly drawn time bin."""
    rng = random.Random(seed)
    severity = fql.default_severity_variable()
    age = fql.default_age_variable()
    output = fql.bins_variable()
    bin_names = output.label_names
    rules = tuple(
        fuzzy.Rule(antecedent=(("severity", s), ("age", a)),
                   consequent=("consult_min", rng.choice(bin_names)))
        for s, a in itertools.product(severity.label_names, age.label_names))
    # product strengths and scaled consequents make the crisp output a smooth
    # strength-weighted blend of the rule bins, the same surface the online
    # learner can represent
    return fuzzy.Fis((severity, age), output, rules,
                     tnorm="product", implication="scale")


@dataclass(frozen=True)
class CurveEntry:
    epoch: int
    predicted: float
    observed: float
    abs_error: float


@dataclass(frozen=True)
class LearningCurve:
    entries: tuple[CurveEntry, ...]
    window: int = 100

    def sliding_avg(self) -> list[tuple[int, float]]:
        """Mean absolute error over the trailing window; defined from epoch >= window."""
        out = []
        errors = [e.abs_error for e in self.entries]
        total = sum(errors[:self.window])
        for i in range(self.window, len(errors) + 1):
            out.append((i, total / self.window))
            if i < len(errors):
                total += errors[i] - errors[i - self.window]
        return out

    @property
    def final_sliding_avg(self) -> float:
        errors = [e.abs_error for e in self.entries[-self.window:]]
        return sum(errors) / len(errors)

    def to_csv(self, path=None) -> str | None:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["epoch", "predicted", "observed", "abs_error"])
        for e in self.entries:
            writer.writerow([e.epoch, e.predicted, e.observed, e.abs_error])
        text = buf.getvalue()
        if path is None:
            return text
        with open(path, "w", newline="") as fh:
            fh.write(text)
        return None


def teacher_value(teacher: fuzzy.Fis, model: fql.FqlModel, row: int) -> float:
    """What the teacher answers at the row's full-activation point."""
    sev, age = model.row_center(row)
    return fuzzy.infer(teacher, {"severity": sev, "age": age})


def teacher_alignment(model: fql.FqlModel, teacher: fuzzy.Fis,
                      min_visits: int = 50) -> list[tuple[int, bool]]:
    """For each well-visited row, does the learner's best column sit on the
    bin closest to the teacher's answer?"""
    out = []
    minutes = [m for _, m in model.bins]
    for row in range(model.q.shape[0]):
        if int(model.visits[row].sum()) < min_visits:
            continue
        target = teacher_value(teacher, model, row)
        nearest = min(range(len(minutes)), key=lambda c: (abs(minutes[c] - target), c))
        best = int(model.q[row].argmax())
        out.append((row, best == nearest))
    return out


def run_teacher_experiment(seed: int, epochs: int, noise_sigma: float = 0.0,
                           window: int = 100):
    """Train a fresh learner against a random teacher.

    Every epoch draws a random (severity, age), asks the learner in learn
    mode, observes the teacher's answer plus Gaussian noise, and applies the
    q-table update. Returns (curve, model, teacher).
    """
    if epochs < 300:
        raise ValidationError("teacher experiment needs epochs >= 300",
                              field="epochs")
    teacher = generate_teacher(seed)
    model = fql.FqlModel.fresh()
    rng = random.Random(seed ^ 0x5EED)
    entries = []
    for _ in range(epochs):
        severity = rng.uniform(*model.severity.universe)
        age = rng.uniform(*model.age.universe)
        predicted, record = fql.predict(model, severity, age, rng, mode="learn")
        observed = fuzzy.infer(teacher, {"severity": severity, "age": age})
        if noise_sigma > 0:
            observed += rng.gauss(0.0, noise_sigma)
        observed = max(0.0, observed)
        fql.update(model, record, observed)
        entries.append(CurveEntry(record.epoch, predicted, observed,
                                  abs(predicted - observed)))
    return LearningCurve(tuple(entries), window=window), model, teacher


# --- triage agreement -------------------------------------------------------

# Representative pain maps per stratum; scores land on the pain label plateaus.
PAIN_STRATA = (
    ("none", triage.PainMap()),
    ("low", triage.PainMap.of(head="mild")),
    ("medium", triage.PainMap.of(chest="severe")),
    ("high", triage.PainMap.of(head="severe", chest="severe", abdomen="severe")),
)


@dataclass(frozen=True)
class AgreementReport:
    strata: dict   # name -> {"under": n, "correct": n, "over": n, *_pct}

    def to_dict(self) -> dict:
        return {"strata": {k: dict(v) for k, v in self.strata.items()}}


def band_grid() -> list[triage.VitalSet]:
    """One representative reading (the plateau midpoint) per CTS band per vital."""
    mids = {}
    for kind, rows in triage._vital_band_specs().items():
        mids[kind] = [(lo + hi) / 2.0 for _, lo, hi, _ in rows]
    return [triage.VitalSet(sbp, hr, temp, rr)
            for sbp, hr, temp, rr in itertools.product(
                mids["sbp"], mids["hr"], mids["temp"], mids["rr"])]


def triage_agreement(grid: list[triage.VitalSet] | None = None,
                     fis: fuzzy.Fis | None = None,
                     thresholds: triage.ColourThresholds | None = None,
                     strata=PAIN_STRATA) -> AgreementReport:
    """Compare the fuzzy scorer's colour with plain CTS point arithmetic.

    The comparator ignores pain (CTS arithmetic has no pain term), so the
    pain strata measure how regional pain moves the fuzzy colour."""
    grid = grid if grid is not None else band_grid()
    fis = fis if fis is not None else triage.default_triage_fis()
    thresholds = thresholds if thresholds is not None else triage.ColourThresholds()
    report = {}
    for name, pain in strata:
        counts = {"under": 0, "correct": 0, "over": 0}
        for vitals in grid:
            oracle = thresholds.colour_for(float(triage.cts_point_sum(vitals)))
            assessment = triage.Assessment(vitals=vitals, pain=pain)
            got = triage.triage(assessment, fis=fis, thresholds=thresholds).colour
            delta = triage.colour_severity(got) - triage.colour_severity(oracle)
            key = "correct" if delta == 0 else ("over" if delta > 0 else "under")
            counts[key] += 1
        total = len(grid)
        report[name] = {
            **counts,
            "under_pct": 100.0 * counts["under"] / total,
            "correct_pct": 100.0 * counts["correct"] / total,
            "over_pct": 100.0 * counts["over"] / total,
        }
    return AgreementReport(report)
