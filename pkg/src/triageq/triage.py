"""Triage scoring: CTS point bands, pain aggregation, and the fuzzy scorer.

Vital signs earn integer points from the Cape Triage Score bands; the fuzzy
system blends the same bands into a continuous urgency score so that two
patients inside one CTS colour can still be ranked against each other.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping, NamedTuple, Sequence

from . import fuzzy
from .errors import ValidationError

VITAL_KINDS = ("sbp", "hr", "temp", "rr")

# Plausibility bounds enforced at intake (exclusive).
PLAUSIBLE_RANGES = {
    "sbp": (20.0, 350.0),
    "hr": (10.0, 300.0),
    "temp": (25.0, 45.0),
    "rr": (1.0, 80.0),
}


class Band(NamedTuple):
    lo: float | None   # None = open towards -inf
    hi: float | None   # None = open towards +inf
    points: int
    lo_open: bool = False
    hi_open: bool = False

    def contains(self, x: float) -> bool:
        if self.lo is not None and (x < self.lo or (self.lo_open and x == self.lo)):
            return False
        if self.hi is not None and (x > self.hi or (self.hi_open and x == self.hi)):
            return False
        return True


# CTS point bands per vital, ascending. "<b" rows become open-below bands and
# ">b" rows open-above; values falling in the gaps between listed integer bands
# take the more severe neighbouring score (over-triage is the safe direction).
CTS_BANDS: dict[str, tuple[Band, ...]] = {
    "sbp": (
        Band(71, 80, 2),
        Band(81, 100, 1),
        Band(101, 199, 0),
        Band(199, None, 2, lo_open=True),
    ),
    "hr": (
        Band(None, 40, 2, hi_open=True),
        Band(41, 50, 1),
        Band(51, 100, 0),
        Band(101, 110, 1),
        Band(111, 129, 2),
    ),
    "temp": (
        Band(None, 35, 2, hi_open=True),
        Band(35, 38.4, 0),
        Band(38.5, None, 2, lo_open=True),
    ),
    "rr": (
        Band(None, 9, 2, hi_open=True),
        Band(9, 14, 0),
        Band(15, 20, 1),
        Band(21, 29, 2),
    ),
}

# Sides where the table stops short of the plausible range; readings beyond
# them clamp to the most severe listed score and are flagged out-of-table.
OUT_OF_TABLE_SCORE = 2


class VitalScore(NamedTuple):
    points: int
    out_of_table: bool


def _check_plausible(kind: str, value: float) -> None:
    if kind not in PLAUSIBLE_RANGES:
        raise ValidationError(f"unknown vital kind {kind!r}", field=kind)
    lo, hi = PLAUSIBLE_RANGES[kind]
    if not (lo < value < hi):
        raise ValidationError(
            f"{kind}={value!r} outside plausible range ({lo:g}, {hi:g})", field=kind
        )


def score_vital(kind: str, value: float) -> VitalScore:
    """CTS points for one vital reading.

    Readings past the most extreme listed band clamp to the most severe listed
    score and carry an out-of-table marker.
    """
    value = float(value)
    _check_plausible(kind, value)
    bands = CTS_BANDS[kind]
    for band in bands:
        if band.contains(value):
            return VitalScore(band.points, False)
    first, last = bands[0], bands[-1]
    if first.lo is not None and value < first.lo:
        return VitalScore(OUT_OF_TABLE_SCORE, True)
    if last.hi is not None and value > last.hi:
        return VitalScore(OUT_OF_TABLE_SCORE, True)
    # gap between two adjacent listed bands: take the more severe side
    for left, right in zip(bands, bands[1:]):
        left_edge = left.hi if left.hi is not None else left.lo
        right_edge = right.lo
        if left_edge is not None and right_edge is not None \
                and left_edge <= value <= right_edge:
            return VitalScore(max(left.points, right.points), False)
    raise AssertionError(f"band table for {kind!r} does not cover {value!r}")


# --- pain -------------------------------------------------------------------

PAIN_REGIONS = ("head", "chest", "abdomen", "pelvis", "back",
                "left-arm", "right-arm", "left-leg", "right-leg")
LIMB_REGIONS = frozenset(("left-arm", "right-arm", "left-leg", "right-leg"))
PAIN_SEVERITIES = {"mild": 1, "severe": 2}

# Location weights for the pain sum; limbs are recorded but never scored.
DEFAULT_PAIN_WEIGHTS = {"head": 2.0, "chest": 2.0, "abdomen": 2.0,
                        "pelvis": 1.0, "back": 1.0}

PAIN_SCORE_MAX = 2 * sum(DEFAULT_PAIN_WEIGHTS.values())


@dataclass(frozen=True)
class PainEntry:
    region: str
    severity: str

    def __post_init__(self):
        if self.region not in PAIN_REGIONS:
            raise ValidationError(f"unknown pain region {self.region!r}", field="pain")
        if self.severity not in PAIN_SEVERITIES:
            raise ValidationError(f"unknown pain severity {self.severity!r}", field="pain")


@dataclass(frozen=True)
class PainMap:
    entries: tuple[PainEntry, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        regions = [e.region for e in self.entries]
        if len(set(regions)) != len(regions):
            raise ValidationError("duplicate pain region", field="pain")

    @classmethod
    def of(cls, **regions: str) -> "PainMap":
        """PainMap.of(chest="severe", back="mild"); underscores map to hyphens."""
        return cls(tuple(PainEntry(r.replace("_", "-"), s) for r, s in regions.items()))


def pain_score(pain: PainMap, weights: Mapping[str, float] | None = None) -> float:
    """Weighted sum of non-limb regional pain; empty map scores 0."""
    weights = DEFAULT_PAIN_WEIGHTS if weights is None else weights
    total = 0.0
    for entry in pain.entries:
        if entry.region in LIMB_REGIONS:
            continue
        total += weights.get(entry.region, 0.0) * PAIN_SEVERITIES[entry.severity]
    return total


# --- assessment -------------------------------------------------------------

class Avpu(enum.IntEnum):
    ALERT = 0
    VOICE = 1
    PAIN = 2
    UNRESPONSIVE = 3

    @classmethod
    def parse(cls, value) -> "Avpu":
        if isinstance(value, cls):
            return value
        if isinstance(value, str):
            try:
                return cls[value.upper()]
            except KeyError:
                raise ValidationError(f"unknown AVPU level {value!r}", field="avpu")
        try:
            return cls(int(value))
        except (ValueError, TypeError):
            raise ValidationError(f"unknown AVPU level {value!r}", field="avpu")


@dataclass(frozen=True)
class VitalSet:
    sbp: float
    hr: float
    temp: float
    rr: float

    def __post_init__(self):
        for kind in VITAL_KINDS:
            value = getattr(self, kind)
            try:
                value = float(value)
            except (TypeError, ValueError):
                raise ValidationError(f"{kind} must be a number", field=kind)
            object.__setattr__(self, kind, value)
            _check_plausible(kind, value)


@dataclass(frozen=True)
class Assessment:
    vitals: VitalSet
    consciousness: Avpu = Avpu.ALERT
    pain: PainMap = PainMap()
    flags: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "flags", frozenset(self.flags))

    @classmethod
    def from_dict(cls, doc: Mapping) -> "Assessment":
        try:
            vitals = VitalSet(doc["sbp"], doc["hr"], doc["temp"], doc["rr"])
        except KeyError as exc:
            raise ValidationError(f"missing vital field {exc.args[0]!r}",
                                  field=exc.args[0])
        pain_doc = doc.get("pain", [])
        if not isinstance(pain_doc, (list, tuple)):
            raise ValidationError("pain must be a list of {region, severity}",
                                  field="pain")
        entries = []
        for item in pain_doc:
            try:
                entries.append(PainEntry(item["region"], item["severity"]))
            except (KeyError, TypeError):
                raise ValidationError("pain entries need region and severity",
                                      field="pain")
        return cls(
            vitals=vitals,
            consciousness=Avpu.parse(doc.get("avpu", 0)),
            pain=PainMap(tuple(entries)),
            flags=frozenset(doc.get("flags", [])),
        )

    def to_dict(self) -> dict:
        return {
            "sbp": self.vitals.sbp,
            "hr": self.vitals.hr,
            "temp": self.vitals.temp,
            "rr": self.vitals.rr,
            "avpu": int(self.consciousness),
            "pain": [{"region": e.region, "severity": e.severity}
                     for e in self.pain.entries],
            "flags": sorted(self.flags),
        }


# --- colours and overrides ----------------------------------------------------

COLOUR_ORDER = ("green", "yellow", "orange", "red")


def colour_severity(colour: str) -> int:
    return COLOUR_ORDER.index(colour)


@dataclass(frozen=True)
class ColourThresholds:
    """Lower score bound per colour; a score maps to the highest colour reached."""
    green: float = 0.0
    yellow: float = 3.0
    orange: float = 5.0
    red: float = 7.0

    def __post_init__(self):
        bounds = [getattr(self, c) for c in COLOUR_ORDER]
        if bounds != sorted(bounds):
            raise ValueError("colour thresholds must be non-decreasing")

    def colour_for(self, score: float) -> str:
        chosen = COLOUR_ORDER[0]
        for colour in COLOUR_ORDER:
            if score >= getattr(self, colour):
                chosen = colour
        return chosen

    def to_dict(self) -> dict:
        return {c: getattr(self, c) for c in COLOUR_ORDER}


@dataclass(frozen=True)
class OverrideRule:
    """If `flag` is present, raise the colour to at least `at_least`."""
    flag: str
    at_least: str

    def __post_init__(self):
        if self.at_least not in COLOUR_ORDER:
            raise ValueError(f"unknown colour {self.at_least!r}")


DEFAULT_OVERRIDES = (OverrideRule("pvb", "yellow"),)


def apply_overrides(colour: str, flags: Iterable[str],
                    rules: Sequence[OverrideRule] = DEFAULT_OVERRIDES):
    """Apply if-then colour upgrades in order. Idempotent; never downgrades."""
    flags = set(flags)
    transitions = []
    for rule in rules:
        if rule.flag in flags and colour_severity(colour) < colour_severity(rule.at_least):
            transitions.append((rule.flag, colour, rule.at_least))
            colour = rule.at_least
    return colour, tuple(transitions)


@dataclass(frozen=True)
class TriageResult:
    crisp_ts: float
    vital_scores: dict
    out_of_table: tuple[str, ...]
    base_colour: str
    colour: str
    applied_overrides: tuple[tuple[str, str, str], ...]

    def to_dict(self) -> dict:
        return {
            "crisp_ts": self.crisp_ts,
            "vital_scores": dict(self.vital_scores),
            "out_of_table": list(self.out_of_table),
            "base_colour": self.base_colour,
            "colour": self.colour,
            "applied_overrides": [
                {"flag": f, "from": a, "to": b} for f, a, b in self.applied_overrides
            ],
        }


# --- the fuzzy scorer ---------------------------------------------------------

# Label metadata per vital: (label, plateau_lo, plateau_hi, points). Plateaus of
# the outermost bands extend to the universe edges, mirroring the clamp rule.
def _vital_band_specs() -> dict[str, list[tuple[str, float, float, int]]]:
    specs: dict[str, list[tuple[str, float, float, int]]] = {}
    side_names = {
        "sbp": ("very_low", "low", "normal", "very_high"),
        "hr": ("very_low", "low", "normal", "high", "very_high"),
        "temp": ("low", "normal", "high"),
        "rr": ("low", "normal", "high", "very_high"),
    }
    resolution = {"sbp": 1.0, "hr": 1.0, "temp": 0.1, "rr": 1.0}
    for kind, bands in CTS_BANDS.items():
        lo_u, hi_u = PLAUSIBLE_RANGES[kind]
        res = resolution[kind]
        rows = []
        for i, band in enumerate(bands):
            lo = band.lo if band.lo is not None else lo_u
            hi = band.hi if band.hi is not None else hi_u
            if band.lo_open:
                lo = lo + res
            if band.hi_open:
                hi = hi - res
            if i == 0:
                lo = lo_u
            if i == len(bands) - 1:
                hi = hi_u
            rows.append((side_names[kind][i], lo, hi, band.points))
        specs[kind] = rows
    return specs


AVPU_LABELS = (("alert", 0), ("voice", 1), ("pain", 2), ("unresponsive", 3))

# Pain bands over the weighted pain sum; points mirror the AVPU scale.
PAIN_LABELS = (
    ("none", 0.0, 0.0, 0.75, 0),
    ("low", 2.0, 3.0, 0.75, 1),
    ("medium", 4.0, 7.0, 1.0, 2),
    ("high", 9.0, PAIN_SCORE_MAX, 1.5, 3),
)

TS_UNIVERSE = (0.0, 14.0)
DEFAULT_SPREAD_RATIO = 0.1
DEFAULT_OUTPUT_SIGMA = 0.5


def _vital_variable(kind: str, spread_ratio: float) -> tuple[fuzzy.LinguisticVariable, dict]:
    rows = _vital_band_specs()[kind]
    widths = [hi - lo for _, lo, hi, _ in rows]
    labels = []
    points_by_label = {}
    for i, (name, lo, hi, points) in enumerate(rows):
        # each shoulder is sized against the narrower of the two bands it
        # separates, so wide bands cannot bleed across narrow neighbours
        left_w = min(widths[i], widths[i - 1]) if i > 0 else widths[i]
        right_w = min(widths[i], widths[i + 1]) if i < len(rows) - 1 else widths[i]
        labels.append((name, fuzzy.gaussian_plateau(
            lo, hi,
            max(left_w * spread_ratio, 1e-6),
            max(right_w * spread_ratio, 1e-6))))
        points_by_label[name] = points
    var = fuzzy.LinguisticVariable(kind, PLAUSIBLE_RANGES[kind], tuple(labels))
    return var, points_by_label


@lru_cache(maxsize=8)
def default_triage_fis(spread_ratio: float = DEFAULT_SPREAD_RATIO,
                       output_sigma: float = DEFAULT_OUTPUT_SIGMA) -> fuzzy.Fis:
    """The CTS-shaped scorer: one rule per combination of input bands, whose
    consequent is the summed point total of its antecedents."""
    inputs = []
    points_maps = []
    for kind in VITAL_KINDS:
        var, pts = _vital_variable(kind, spread_ratio)
        inputs.append(var)
        points_maps.append(pts)

    avpu_var = fuzzy.LinguisticVariable(
        "consciousness", (0.0, 3.0),
        tuple((name, fuzzy.gaussian_plateau(level, level, 0.2))
              for name, level in AVPU_LABELS))
    inputs.append(avpu_var)
    points_maps.append({name: level for name, level in AVPU_LABELS})

    pain_var = fuzzy.LinguisticVariable(
        "pain", (0.0, PAIN_SCORE_MAX),
        tuple((name, fuzzy.gaussian_plateau(lo, hi, spread))
              for name, lo, hi, spread, _ in PAIN_LABELS))
    inputs.append(pain_var)
    points_maps.append({name: pts for name, _, _, _, pts in PAIN_LABELS})

    n_out = int(TS_UNIVERSE[1]) + 1
    output = fuzzy.LinguisticVariable(
        "ts", TS_UNIVERSE,
        tuple((f"ts_{k}", fuzzy.gaussian_plateau(float(k), float(k), output_sigma))
              for k in range(n_out)))

    rules = []
    label_sets = [tuple(pm.keys()) for pm in points_maps]
    names = [v.name for v in inputs]
    for combo in itertools.product(*label_sets):
        total = sum(points_maps[j][lab] for j, lab in enumerate(combo))
        total = min(total, n_out - 1)
        rules.append(fuzzy.Rule(
            antecedent=tuple(zip(names, combo)),
            consequent=("ts", f"ts_{total}"),
        ))
    return fuzzy.Fis(tuple(inputs), output, tuple(rules))


def triage(assessment: Assessment,
           fis: fuzzy.Fis | None = None,
           thresholds: ColourThresholds | None = None,
           pain_weights: Mapping[str, float] | None = None,
           overrides: Sequence[OverrideRule] = DEFAULT_OVERRIDES) -> TriageResult:
    """Score one assessment: crisp TS from the fuzzy system, colour from the
    thresholds, then the if-then override pass."""
    fis = fis if fis is not None else default_triage_fis()
    thresholds = thresholds if thresholds is not None else ColourThresholds()
    scores = {}
    markers = []
    for kind in VITAL_KINDS:
        result = score_vital(kind, getattr(assessment.vitals, kind))
        scores[kind] = result.points
        if result.out_of_table:
            markers.append(kind)
    inputs = {
        "sbp": assessment.vitals.sbp,
        "hr": assessment.vitals.hr,
        "temp": assessment.vitals.temp,
        "rr": assessment.vitals.rr,
        "consciousness": float(assessment.consciousness),
        "pain": pain_score(assessment.pain, pain_weights),
    }
    crisp = fuzzy.infer(fis, inputs)
    base = thresholds.colour_for(crisp)
    colour, transitions = apply_overrides(base, assessment.flags, overrides)
    return TriageResult(
        crisp_ts=crisp,
        vital_scores=scores,
        out_of_table=tuple(markers),
        base_colour=base,
        colour=colour,
        applied_overrides=transitions,
    )


def cts_point_sum(vitals: VitalSet) -> int:
    """Plain CTS arithmetic: summed vital points (the discrete comparator)."""
    return sum(score_vital(kind, getattr(vitals, kind)).points
               for kind in VITAL_KINDS)
