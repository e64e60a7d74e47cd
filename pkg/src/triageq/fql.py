"""Online fuzzy Q-learning for consult-time prediction.

The model is a contextual bandit over a rule table: rows are combinations of
input labels (severity x age), columns are candidate time bins. Each
prediction picks a column per active rule (explore with probability eps(t),
exploit otherwise) and blends the chosen bins by normalized rule strength.
Observed consult durations update only the chosen cells.
"""

from __future__ import annotations

import itertools
import json
import random
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import fuzzy
from .errors import NoRuleFiredError, SchemaError, StaleRecordError, ValidationError

SCHEMA = "fql-model/1"

# Exploration schedule: linear decay to a floor.
@dataclass(frozen=True)
class EefParams:
    slope: float = 0.0038
    floor: float = 0.05
    cutoff: int = 250

    def __post_init__(self):
        if not (0.0 < self.floor < 1.0):
            raise ValueError("eef floor must be in (0, 1)")
        if self.cutoff <= 0:
            raise ValueError("eef cutoff must be > 0")


DEFAULT_EEF = EefParams()


def epsilon(t: int, eef: EefParams = DEFAULT_EEF) -> float:
    """Exploration probability at epoch t: 1 - slope*t until the cutoff, then the floor."""
    if t < 0:
        raise ValueError("epoch must be >= 0")
    if t < eef.cutoff:
        return max(eef.floor, 1.0 - eef.slope * t)
    return eef.floor


# Twelve 5-minute bins covering 5..60 min.
DEFAULT_BINS = tuple((f"min_{m}", float(m)) for m in range(5, 65, 5))


def default_severity_variable() -> fuzzy.LinguisticVariable:
    return fuzzy.LinguisticVariable("severity", (0.0, 10.0), (
        ("low", fuzzy.gaussian_plateau(0.0, 2.5, 0.3)),
        ("medium", fuzzy.gaussian_plateau(3.5, 6.5, 0.3)),
        ("high", fuzzy.gaussian_plateau(7.5, 10.0, 0.3)),
    ))


def default_age_variable() -> fuzzy.LinguisticVariable:
    return fuzzy.LinguisticVariable("age", (0.0, 100.0), (
        ("child", fuzzy.gaussian_plateau(0.0, 15.0, 2.5)),
        ("adult", fuzzy.gaussian_plateau(22.0, 58.0, 2.5)),
        ("elderly", fuzzy.gaussian_plateau(65.0, 100.0, 2.5)),
    ))


def bins_variable(bins=DEFAULT_BINS) -> fuzzy.LinguisticVariable:
    """The time bins as fuzzy sets, usable as a fuzzy output variable.

    The universe pads one spacing past the extreme bins so every bin keeps a
    (near) complete, symmetric curve and defuzzifies back to its own minutes.
    """
    minutes = [m for _, m in bins]
    spacing = minutes[1] - minutes[0] if len(minutes) > 1 else max(minutes[0], 1.0)
    universe = (minutes[0] - spacing, minutes[-1] + spacing)
    return fuzzy.LinguisticVariable(
        "consult_min", universe,
        tuple((name, fuzzy.gaussian_plateau(m, m, spacing / 2.0)) for name, m in bins))


@dataclass(frozen=True)
class ActivationEntry:
    row: int
    strength: float          # normalized; entries sum to 1
    column: int
    chosen_by: str           # "explore" | "exploit"


@dataclass(frozen=True)
class ActivationRecord:
    epoch: int
    entries: tuple[ActivationEntry, ...]
    predicted_minutes: float

    def to_dict(self) -> dict:
        return {
            "epoch": self.epoch,
            "predicted_minutes": self.predicted_minutes,
            "entries": [
                {"row": e.row, "strength": e.strength,
                 "column": e.column, "chosen_by": e.chosen_by}
                for e in self.entries
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ActivationRecord":
        try:
            entries = tuple(ActivationEntry(e["row"], e["strength"],
                                            e["column"], e["chosen_by"])
                            for e in doc["entries"])
            return cls(doc["epoch"], entries, doc["predicted_minutes"])
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"bad activation record: {exc}") from exc


@dataclass
class FqlModel:
    """Mutable learner state. Callers must serialize update() calls per model."""

    severity: fuzzy.LinguisticVariable
    age: fuzzy.LinguisticVariable
    bins: tuple[tuple[str, float], ...]
    q: np.ndarray
    visits: np.ndarray
    epoch: int
    alpha: float
    eef: EefParams
    visit_floor: float = 0.05   # min normalized strength for a counted visit

    @classmethod
    def fresh(cls, severity=None, age=None, bins=DEFAULT_BINS,
              alpha=0.1, eef=DEFAULT_EEF, visit_floor=0.05) -> "FqlModel":
        severity = severity if severity is not None else default_severity_variable()
        age = age if age is not None else default_age_variable()
        if not (0.0 < alpha <= 1.0):
            raise ValueError("alpha must be in (0, 1]")
        rows = len(severity.labels) * len(age.labels)
        cols = len(bins)
        return cls(severity=severity, age=age, bins=tuple(bins),
                   q=np.zeros((rows, cols)), visits=np.zeros((rows, cols), dtype=np.int64),
                   epoch=0, alpha=alpha, eef=eef, visit_floor=visit_floor)

    @property
    def row_labels(self) -> tuple[tuple[str, str], ...]:
        return tuple(itertools.product(self.severity.label_names,
                                       self.age.label_names))

    def row_center(self, row: int) -> tuple[float, float]:
        """Plateau midpoints of the row's labels (where it activates fully)."""
        sev_label, age_label = self.row_labels[row]
        s = self.severity.mf(sev_label)
        a = self.age.mf(age_label)
        return ((s.center_low + s.center_high) / 2.0,
                (a.center_low + a.center_high) / 2.0)

    def bin_minutes(self, column: int) -> float:
        return self.bins[column][1]


def _clamped(var: fuzzy.LinguisticVariable, value: float) -> float:
    lo, hi = var.universe
    if value < lo or value > hi:
        warnings.warn(f"{var.name}={value:g} outside [{lo:g}, {hi:g}]; clamping",
                      stacklevel=3)
        return min(max(value, lo), hi)
    return value


def _activations(model: FqlModel, severity: float, age: float) -> np.ndarray:
    sev = _clamped(model.severity, severity)
    ag = _clamped(model.age, age)
    sev_deg = np.array([mf.evaluate(sev) for _, mf in model.severity.labels])
    age_deg = np.array([mf.evaluate(ag) for _, mf in model.age.labels])
    return np.outer(sev_deg, age_deg).ravel()


def predict(model: FqlModel, severity: float, age: float,
            rng: random.Random, mode: str = "learn"):
    """One prediction pass.

    Returns (minutes, record). In learn mode each active rule flips its own
    exploration coin at eps(epoch); greedy mode always exploits. Ties on the
    q-row argmax break to the lowest column.
    """
    if mode not in ("learn", "greedy"):
        raise ValueError(f"unknown mode {mode!r}")
    phi = _activations(model, severity, age)
    total = phi.sum()
    if total <= 0.0:
        raise NoRuleFiredError("no rule activates for the supplied inputs")
    eps = epsilon(model.epoch, model.eef)
    n_cols = len(model.bins)
    entries = []
    minutes = 0.0
    for row in np.flatnonzero(phi > 0.0):
        weight = float(phi[row] / total)
        if mode == "learn" and rng.random() < eps:
            column = rng.randrange(n_cols)
            chosen_by = "explore"
        else:
            column = int(np.argmax(model.q[row]))   # first max = lowest column
            chosen_by = "exploit"
        minutes += weight * model.bin_minutes(column)
        entries.append(ActivationEntry(int(row), weight, column, chosen_by))
    record = ActivationRecord(model.epoch, tuple(entries), minutes)
    return minutes, record


def reward(predicted: float, observed: float) -> float:
    """Negative absolute prediction error; zero only on an exact call."""
    if observed < 0:
        raise ValidationError("observed minutes must be >= 0", field="observed")
    return -abs(predicted - observed)


def update(model: FqlModel, record: ActivationRecord, observed: float) -> FqlModel:
    """Move each chosen cell toward its per-rule reward; advance the epoch.

    Only (row, chosen-column) cells of the record's entries change. Visits
    count entries whose normalized strength reaches the model's visit floor.
    """
    if observed < 0:
        raise ValidationError("observed minutes must be >= 0", field="observed")
    if record.epoch != model.epoch:
        raise StaleRecordError(
            f"record epoch {record.epoch} != model epoch {model.epoch}")
    for entry in record.entries:
        r = -abs(model.bin_minutes(entry.column) - observed)
        cell = model.q[entry.row, entry.column]
        model.q[entry.row, entry.column] = cell + model.alpha * entry.strength * (r - cell)
        if entry.strength >= model.visit_floor:
            model.visits[entry.row, entry.column] += 1
    model.epoch += 1
    return model


# --- persistence --------------------------------------------------------------

def persist(model: FqlModel) -> dict:
    return {
        "schema": SCHEMA,
        "severity": fuzzy._variable_to_dict(model.severity),
        "age": fuzzy._variable_to_dict(model.age),
        "bins": [[name, minutes] for name, minutes in model.bins],
        "q": model.q.tolist(),
        "visits": model.visits.tolist(),
        "epoch": model.epoch,
        "alpha": model.alpha,
        "eef": {"slope": model.eef.slope, "floor": model.eef.floor,
                "cutoff": model.eef.cutoff},
        "visit_floor": model.visit_floor,
    }


def restore(doc: dict) -> FqlModel:
    if not isinstance(doc, dict) or doc.get("schema") != SCHEMA:
        raise SchemaError(f"expected schema {SCHEMA!r}, got {doc.get('schema') if isinstance(doc, dict) else doc!r}")
    try:
        severity = fuzzy._variable_from_dict(doc["severity"])
        age = fuzzy._variable_from_dict(doc["age"])
        bins = tuple((name, float(m)) for name, m in doc["bins"])
        q = np.array(doc["q"], dtype=float)
        visits = np.array(doc["visits"], dtype=np.int64)
        eef = EefParams(**doc["eef"])
        model = FqlModel(severity=severity, age=age, bins=bins, q=q,
                         visits=visits, epoch=int(doc["epoch"]),
                         alpha=float(doc["alpha"]), eef=eef,
                         visit_floor=float(doc.get("visit_floor", 0.05)))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, SchemaError):
            raise
        raise SchemaError(f"bad model document: {exc}") from exc
    expected = (len(severity.labels) * len(age.labels), len(bins))
    if model.q.shape != expected or model.visits.shape != expected:
        raise SchemaError(f"q-table shape {model.q.shape} != {expected}")
    return model


def save_model(model: FqlModel, path) -> None:
    with open(path, "w") as fh:
        json.dump(persist(model), fh)


def load_model(path) -> FqlModel:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"not valid JSON: {exc}") from exc
    return restore(doc)
