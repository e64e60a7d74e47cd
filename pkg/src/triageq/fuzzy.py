"""Mamdani-style fuzzy inference engine.

Membership curves are plateau-topped: a flat region of full membership with
Gaussian (or linear) shoulders on either side. A system is a set of input
variables, one output variable, and conjunctive rules; inference clips (or
scales) each rule's consequent curve by its firing strength, aggregates with
max, and defuzzifies by sampling the output universe.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import CoverageError, MissingInputError, NoRuleFiredError, SchemaError

MF_KINDS = ("gaussian-plateau", "trapezoid", "triangle")
TNORMS = ("min", "product")
DEFUZZ_METHODS = ("centroid", "mean-of-maxima")
IMPLICATIONS = ("clip", "scale")

DEFUZZ_SAMPLES = 1001
COVERAGE_SAMPLES = 201


@dataclass(frozen=True)
class MembershipFunction:
    """A plateau curve: membership 1.0 on [center_low, center_high], decaying outside.

    ``gaussian-plateau`` shoulders fall off as exp(-0.5 ((x - edge) / spread)^2);
    ``trapezoid`` shoulders fall linearly to zero over one spread;
    ``triangle`` is a trapezoid whose plateau is a single point.
    """

    kind: str
    center_low: float
    center_high: float
    spread_left: float
    spread_right: float

    def __post_init__(self):
        if self.kind not in MF_KINDS:
            raise ValueError(f"unknown membership kind {self.kind!r}")
        if not (self.spread_left > 0 and self.spread_right > 0):
            raise ValueError("membership spreads must be > 0")
        if self.center_low > self.center_high:
            raise ValueError("center_low must be <= center_high")
        if self.kind == "triangle" and self.center_low != self.center_high:
            raise ValueError("triangle requires center_low == center_high")

    def evaluate(self, x):
        """Membership degree in [0, 1]; accepts scalars or numpy arrays."""
        xs = np.asarray(x, dtype=float)
        below = self.center_low - xs
        above = xs - self.center_high
        if self.kind == "gaussian-plateau":
            left = np.exp(-0.5 * (below / self.spread_left) ** 2)
            right = np.exp(-0.5 * (above / self.spread_right) ** 2)
        else:
            left = np.clip(1.0 - below / self.spread_left, 0.0, 1.0)
            right = np.clip(1.0 - above / self.spread_right, 0.0, 1.0)
        out = np.where(below > 0, left, np.where(above > 0, right, 1.0))
        if np.isscalar(x) or xs.ndim == 0:
            return float(out)
        return out


def mf_eval(mf: MembershipFunction, x: float) -> float:
    """Evaluate one membership curve at x."""
    return mf.evaluate(x)


def gaussian_plateau(center_low, center_high, spread_left, spread_right=None):
    if spread_right is None:
        spread_right = spread_left
    return MembershipFunction("gaussian-plateau", center_low, center_high,
                              spread_left, spread_right)


def triangle(center, spread):
    return MembershipFunction("triangle", center, center, spread, spread)


def trapezoid(center_low, center_high, spread_left, spread_right=None):
    if spread_right is None:
        spread_right = spread_left
    return MembershipFunction("trapezoid", center_low, center_high,
                              spread_left, spread_right)


@dataclass(frozen=True)
class LinguisticVariable:
    """A named input or output with an ordered set of labelled membership curves."""

    name: str
    universe: tuple[float, float]
    labels: tuple[tuple[str, MembershipFunction], ...]

    def __post_init__(self):
        lo, hi = self.universe
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise ValueError(f"variable {self.name!r}: universe must be a finite interval")
        object.__setattr__(self, "universe", (float(lo), float(hi)))
        if not self.labels:
            raise ValueError(f"variable {self.name!r}: needs at least one label")
        names = [n for n, _ in self.labels]
        if len(set(names)) != len(names):
            raise ValueError(f"variable {self.name!r}: duplicate label names")
        object.__setattr__(self, "labels", tuple((n, mf) for n, mf in self.labels))

    @property
    def label_names(self):
        return tuple(n for n, _ in self.labels)

    def mf(self, label: str) -> MembershipFunction:
        for n, m in self.labels:
            if n == label:
                return m
        raise KeyError(f"variable {self.name!r} has no label {label!r}")

    def fuzzify(self, x: float) -> list[tuple[str, float]]:
        """Degrees for every label at x, in declaration order."""
        if not math.isfinite(x):
            raise ValueError(f"variable {self.name!r}: cannot fuzzify non-finite value")
        return [(n, mf.evaluate(x)) for n, mf in self.labels]

    def check_coverage(self, samples: int = COVERAGE_SAMPLES) -> None:
        """Raise CoverageError unless every sampled universe point has some membership."""
        grid = np.linspace(self.universe[0], self.universe[1], samples)
        best = np.zeros_like(grid)
        for _, mf in self.labels:
            best = np.maximum(best, mf.evaluate(grid))
        if np.any(best <= 0.0):
            worst = grid[int(np.argmin(best))]
            raise CoverageError(
                f"variable {self.name!r}: no label covers x={worst:g}"
            )


@dataclass(frozen=True)
class Rule:
    """IF all antecedent (variable, label) pairs THEN consequent, with a weight."""

    antecedent: tuple[tuple[str, str], ...]
    consequent: tuple[str, str]
    weight: float = 1.0

    def __post_init__(self):
        if not self.antecedent:
            raise ValueError("rule needs at least one antecedent term")
        if not (0.0 <= self.weight <= 1.0):
            raise ValueError("rule weight must be in [0, 1]")
        object.__setattr__(self, "antecedent", tuple(tuple(t) for t in self.antecedent))
        object.__setattr__(self, "consequent", tuple(self.consequent))


@dataclass(frozen=True)
class Fis:
    """An immutable inference system; all validation happens at construction."""

    inputs: tuple[LinguisticVariable, ...]
    output: LinguisticVariable
    rules: tuple[Rule, ...]
    tnorm: str = "min"
    defuzz: str = "centroid"
    implication: str = "clip"

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "rules", tuple(self.rules))
        if self.tnorm not in TNORMS:
            raise ValueError(f"unknown tnorm {self.tnorm!r}")
        if self.defuzz not in DEFUZZ_METHODS:
            raise ValueError(f"unknown defuzzification {self.defuzz!r}")
        if self.implication not in IMPLICATIONS:
            raise ValueError(f"unknown implication {self.implication!r}")
        if not self.rules:
            raise ValueError("rule base is empty")
        names = [v.name for v in self.inputs]
        if len(set(names)) != len(names):
            raise ValueError("duplicate input variable names")
        for var in (*self.inputs, self.output):
            var.check_coverage()
        self._validate_rule_references()
        self._compile()

    def _validate_rule_references(self):
        by_name = {v.name: v for v in self.inputs}
        out_labels = set(self.output.label_names)
        for i, rule in enumerate(self.rules):
            seen = set()
            for var, label in rule.antecedent:
                if var not in by_name:
                    raise ValueError(f"rule {i}: unknown input variable {var!r}")
                if label not in by_name[var].label_names:
                    raise ValueError(f"rule {i}: variable {var!r} has no label {label!r}")
                if var in seen:
                    raise ValueError(f"rule {i}: variable {var!r} appears twice")
                seen.add(var)
            cvar, clabel = rule.consequent
            if cvar != self.output.name:
                raise ValueError(f"rule {i}: consequent variable {cvar!r} is not the output")
            if clabel not in out_labels:
                raise ValueError(f"rule {i}: output has no label {clabel!r}")

    def _compile(self):
        """Precompute index tables so rule strengths become one numpy gather."""
        offsets = {}
        flat_len = 0
        for var in self.inputs:
            offsets[var.name] = flat_len
            flat_len += len(var.labels)
        neutral = flat_len  # extra slot holding degree 1.0 for unused variables
        label_pos = {
            var.name: {lab: k for k, lab in enumerate(var.label_names)}
            for var in self.inputs
        }
        n_vars = len(self.inputs)
        gather = np.full((len(self.rules), n_vars), neutral, dtype=np.intp)
        var_col = {var.name: j for j, var in enumerate(self.inputs)}
        for i, rule in enumerate(self.rules):
            for var, label in rule.antecedent:
                gather[i, var_col[var]] = offsets[var] + label_pos[var][label]
        out_pos = {lab: k for k, lab in enumerate(self.output.label_names)}
        grid = np.linspace(self.output.universe[0], self.output.universe[1],
                           DEFUZZ_SAMPLES)
        curves = np.vstack([mf.evaluate(grid) for _, mf in self.output.labels])
        object.__setattr__(self, "_gather", gather)
        object.__setattr__(self, "_flat_len", flat_len)
        object.__setattr__(self, "_weights", np.array([r.weight for r in self.rules]))
        object.__setattr__(self, "_consequent_idx",
                           np.array([out_pos[r.consequent[1]] for r in self.rules],
                                    dtype=np.intp))
        object.__setattr__(self, "_out_grid", grid)
        object.__setattr__(self, "_out_curves", curves)

    def _degree_vector(self, inputs: Mapping[str, float]) -> np.ndarray:
        flat = np.empty(self._flat_len + 1)
        flat[-1] = 1.0
        pos = 0
        for var in self.inputs:
            if var.name not in inputs:
                raise MissingInputError(var.name)
            x = float(inputs[var.name])
            for _, mf in var.labels:
                flat[pos] = mf.evaluate(x)
                pos += 1
        return flat

    def strengths(self, inputs: Mapping[str, float]) -> np.ndarray:
        flat = self._degree_vector(inputs)
        terms = flat[self._gather]
        if self.tnorm == "min":
            base = terms.min(axis=1)
        else:
            base = terms.prod(axis=1)
        return self._weights * base


def rule_strengths(fis: Fis, inputs: Mapping[str, float]) -> list[tuple[int, float]]:
    """Firing strength of every rule: weight combined with the antecedent tnorm."""
    return [(i, float(s)) for i, s in enumerate(fis.strengths(inputs))]


def infer(fis: Fis, inputs: Mapping[str, float]) -> float:
    """Run one inference to a crisp output value.

    Pure and deterministic; raises NoRuleFiredError when the rule base leaves
    the supplied input vector uncovered.
    """
    strengths = fis.strengths(inputs)
    heights = np.zeros(len(fis.output.labels))
    np.maximum.at(heights, fis._consequent_idx, strengths)
    if not np.any(heights > 0.0):
        raise NoRuleFiredError("no rule fired for the supplied inputs")
    if fis.implication == "clip":
        aggregate = np.minimum(heights[:, None], fis._out_curves).max(axis=0)
    else:
        aggregate = (heights[:, None] * fis._out_curves).max(axis=0)
    if fis.defuzz == "centroid":
        mass = aggregate.sum()
        if mass <= 0.0:
            raise NoRuleFiredError("aggregated output has zero mass")
        return float(np.dot(fis._out_grid, aggregate) / mass)
    peak = aggregate.max()
    at_peak = fis._out_grid[aggregate >= peak - 1e-12]
    return float(at_peak.mean())


def min_rule_strength_on_grid(fis: Fis, points_per_axis: int = 5) -> float:
    """Smallest max-rule-strength over a full input grid (coverage diagnostics)."""
    axes = [np.linspace(v.universe[0], v.universe[1], points_per_axis)
            for v in fis.inputs]
    names = [v.name for v in fis.inputs]
    worst = math.inf
    idx = np.zeros(len(axes), dtype=int)
    total = points_per_axis ** len(axes)
    for flat in range(total):
        rem = flat
        point = {}
        for j, axis in enumerate(axes):
            rem, k = divmod(rem, points_per_axis)
            point[names[j]] = float(axis[k])
        worst = min(worst, float(fis.strengths(point).max()))
    return worst


# --- JSON serialization -----------------------------------------------------

def _mf_to_dict(mf: MembershipFunction) -> dict:
    return {
        "kind": mf.kind,
        "center_low": mf.center_low,
        "center_high": mf.center_high,
        "spread_left": mf.spread_left,
        "spread_right": mf.spread_right,
    }


def _mf_from_dict(doc: dict) -> MembershipFunction:
    try:
        return MembershipFunction(doc["kind"], doc["center_low"], doc["center_high"],
                                  doc["spread_left"], doc["spread_right"])
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"bad membership function document: {exc}") from exc


def _variable_to_dict(var: LinguisticVariable) -> dict:
    return {
        "name": var.name,
        "universe": list(var.universe),
        "labels": [{"name": n, "mf": _mf_to_dict(mf)} for n, mf in var.labels],
    }


def _variable_from_dict(doc: dict) -> LinguisticVariable:
    try:
        labels = tuple((lab["name"], _mf_from_dict(lab["mf"])) for lab in doc["labels"])
        return LinguisticVariable(doc["name"], tuple(doc["universe"]), labels)
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"bad variable document: {exc}") from exc


def fis_to_dict(fis: Fis) -> dict:
    return {
        "inputs": [_variable_to_dict(v) for v in fis.inputs],
        "output": _variable_to_dict(fis.output),
        "rules": [
            {
                "if": [list(term) for term in r.antecedent],
                "then": list(r.consequent),
                "weight": r.weight,
            }
            for r in fis.rules
        ],
        "tnorm": fis.tnorm,
        "defuzz": fis.defuzz,
        "implication": fis.implication,
    }


def fis_from_dict(doc: dict) -> Fis:
    try:
        inputs = tuple(_variable_from_dict(d) for d in doc["inputs"])
        output = _variable_from_dict(doc["output"])
        rules = tuple(
            Rule(
                antecedent=tuple((v, l) for v, l in r["if"]),
                consequent=tuple(r["then"]),
                weight=r.get("weight", 1.0),
            )
            for r in doc["rules"]
        )
        return Fis(inputs, output, rules,
                   tnorm=doc.get("tnorm", "min"),
                   defuzz=doc.get("defuzz", "centroid"),
                   implication=doc.get("implication", "clip"))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, SchemaError):
            raise
        raise SchemaError(f"bad inference-system document: {exc}") from exc


def save_fis(fis: Fis, path) -> None:
    with open(path, "w") as fh:
        json.dump(fis_to_dict(fis), fh, indent=2)


def load_fis(path) -> Fis:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"not valid JSON: {exc}") from exc
    return fis_from_dict(doc)
