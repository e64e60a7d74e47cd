"""Queue ordering: urgency-weighted waiting cost and its optimizers.

A queue order is scored by summing, over queue positions, each patient's
urgency weight (TS + 1) times their total wait: time already waited plus the
expected consult time of everyone served ahead of them.

Orders are encoded as a single integer in [1, n!]. The decoder peels off
factorial-sized batches, which lays all permutations out in lexicographic
order, so any numeric optimizer can search the index line. A genetic
algorithm over indices does the searching here; small queues can be solved
exactly by enumeration.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ValidationError

MAX_BRUTE_FORCE = 9


@dataclass(frozen=True)
class PatientRecord:
    id: str
    ts: float                 # urgency score
    arrival: float            # minutes on the shared timeline
    expected_consult: float   # minutes, > 0

    def __post_init__(self):
        if not math.isfinite(self.ts) or self.ts < 0:
            raise ValidationError(f"patient {self.id!r}: ts must be >= 0", field="ts")
        if not math.isfinite(self.arrival):
            raise ValidationError(f"patient {self.id!r}: bad arrival", field="arrival")
        if not (math.isfinite(self.expected_consult) and self.expected_consult > 0):
            raise ValidationError(
                f"patient {self.id!r}: expected consult must be > 0",
                field="expected_consult_min")


@dataclass(frozen=True)
class Queue:
    patients: tuple[PatientRecord, ...]
    now: float

    def __post_init__(self):
        object.__setattr__(self, "patients", tuple(self.patients))
        ids = [p.id for p in self.patients]
        if len(set(ids)) != len(ids):
            raise ValidationError("duplicate patient ids in queue", field="patients")
        if self.patients and self.now < max(p.arrival for p in self.patients):
            raise ValidationError("queue time precedes a patient arrival", field="now_min")

    @classmethod
    def from_dict(cls, doc: dict) -> "Queue":
        try:
            patients = tuple(
                PatientRecord(str(p["id"]), float(p["ts"]), float(p["arrival_min"]),
                              float(p["expected_consult_min"]))
                for p in doc["patients"])
            return cls(patients, float(doc["now_min"]))
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"bad queue document: {exc}") from exc

    def to_dict(self) -> dict:
        return {
            "now_min": self.now,
            "patients": [
                {"id": p.id, "ts": p.ts, "arrival_min": p.arrival,
                 "expected_consult_min": p.expected_consult}
                for p in self.patients
            ],
        }


@dataclass
class GaParams:
    population: int = 100
    generations: int = 200
    crossover_rate: float = 0.8
    mutation_rate: float = 0.05
    elitism: int = 2
    seed: int = 0
    polish: bool = True   # final adjacent-transposition refinement pass

    def __post_init__(self):
        if self.population < 2:
            raise ValueError("population must be >= 2")
        if not (0 <= self.elitism < self.population):
            raise ValueError("elitism must be < population")
        for name in ("crossover_rate", "mutation_rate"):
            if not (0.0 <= getattr(self, name) <= 1.0):
                raise ValueError(f"{name} must be in [0, 1]")


@dataclass(frozen=True)
class ScheduleResult:
    order: tuple[int, ...]            # 1-based positions into Queue.patients
    fitness: float
    per_patient_wait: tuple[float, ...]  # aligned with `order`
    generations_run: int
    evaluations: int

    def to_dict(self, queue: Queue | None = None) -> dict:
        doc = {
            "order": list(self.order),
            "fitness": self.fitness,
            "per_patient_wait_min": list(self.per_patient_wait),
            "generations_run": self.generations_run,
            "evaluations": self.evaluations,
        }
        if queue is not None:
            start = queue.now
            rows = []
            for pos, wait in zip(self.order, self.per_patient_wait):
                p = queue.patients[pos - 1]
                rows.append({"id": p.id, "projected_start_min": start,
                             "projected_wait_min": wait})
                start += p.expected_consult
            doc["patients"] = rows
        return doc


# --- index <-> permutation ----------------------------------------------------

def _factorials(n: int) -> list[int]:
    out = [1]
    for k in range(1, n + 1):
        out.append(out[-1] * k)
    return out


def index_to_permutation(index: int, n: int) -> tuple[int, ...]:
    """Decode a 1-based index into the permutation of 1..n at that position.

    Indices are grouped in batches of p! (p = n minus the element position):
    the quotient of the working value by p! picks the (quotient+1)-th smallest
    remaining element and the remainder carries forward, except that a zero
    remainder means the quotient itself picks and p! carries instead. The
    resulting enumeration over 1..n! is exactly lexicographic. Exact integer
    arithmetic throughout, so any n is representable.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    facts = _factorials(n)
    if not (1 <= index <= facts[n]):
        raise ValueError(f"index {index} out of range [1, {facts[n]}] for n={n}")
    remaining = list(range(1, n + 1))
    out = []
    work = index
    for element in range(1, n):
        f = facts[n - element]
        quotient, rem = divmod(work, f)
        if rem == 0:
            pick = quotient
            work = f
        else:
            pick = quotient + 1
            work = rem
        out.append(remaining.pop(pick - 1))
    out.append(remaining[0])
    return tuple(out)


def permutation_to_index(seq: Sequence[int]) -> int:
    """Inverse of index_to_permutation (1-based)."""
    n = len(seq)
    if sorted(seq) != list(range(1, n + 1)):
        raise ValueError("input is not a permutation of 1..n")
    facts = _factorials(n)
    remaining = list(range(1, n + 1))
    index = 1
    for element, value in enumerate(seq[:-1]):
        pos = remaining.index(value)
        index += pos * facts[n - 1 - element]
        remaining.pop(pos)
    return index


# --- cost ----------------------------------------------------------------------

def fitness(queue: Queue, order: Sequence[int], now: float | None = None) -> float:
    """Urgency-weighted total waiting time of serving `queue` in `order`.

    Each patient contributes (ts + 1) * (now - arrival + sum of expected
    consult times of everyone ordered ahead).
    """
    now = queue.now if now is None else now
    n = len(queue.patients)
    if sorted(order) != list(range(1, n + 1)):
        raise ValueError("order is not a permutation of queue positions")
    if queue.patients and now < max(p.arrival for p in queue.patients):
        raise ValueError("now precedes a patient arrival")
    total = 0.0
    ahead = 0.0
    for pos in order:
        p = queue.patients[pos - 1]
        total += (p.ts + 1.0) * (now - p.arrival + ahead)
        ahead += p.expected_consult
    return total


def waits_for_order(queue: Queue, order: Sequence[int],
                    now: float | None = None) -> tuple[float, ...]:
    """Total wait (already waited + still to wait) per patient, in order positions."""
    now = queue.now if now is None else now
    waits = []
    ahead = 0.0
    for pos in order:
        p = queue.patients[pos - 1]
        waits.append(now - p.arrival + ahead)
        ahead += p.expected_consult
    return tuple(waits)


def _result_for(queue: Queue, order: Sequence[int], now: float,
                generations_run: int, evaluations: int) -> ScheduleResult:
    return ScheduleResult(tuple(order), fitness(queue, order, now),
                          waits_for_order(queue, order, now),
                          generations_run, evaluations)


def brute_force(queue: Queue, now: float | None = None) -> ScheduleResult:
    """Exact optimum by full enumeration; ties break to the lowest index."""
    now = queue.now if now is None else now
    n = len(queue.patients)
    if n < 1:
        raise ValueError("queue is empty")
    if n > MAX_BRUTE_FORCE:
        raise ValueError(
            f"brute force is limited to {MAX_BRUTE_FORCE} patients ({n} given); "
            "use optimize() instead")
    weights = np.array([p.ts + 1.0 for p in queue.patients])
    waited = np.array([now - p.arrival for p in queue.patients])
    consult = np.array([p.expected_consult for p in queue.patients])
    # all permutations in lexicographic order; argmin picks the first optimum
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.intp)
    ahead = np.cumsum(consult[perms], axis=1)
    ahead = np.concatenate([np.zeros((len(perms), 1)), ahead[:, :-1]], axis=1)
    costs = (weights[perms] * (waited[perms] + ahead)).sum(axis=1)
    best = int(np.argmin(costs))
    order = tuple(int(v) + 1 for v in perms[best])
    return _result_for(queue, order, now, 0, len(perms))


# --- genetic search over indices ------------------------------------------------

_MUT_DENOM = 1 << 32


def _mutate_index(index: int, nf: int, rng: random.Random) -> int:
    # multiply by a log-uniform factor in [0.5, 2] using exact integer math
    factor_num = int(round(2.0 ** rng.uniform(-1.0, 1.0) * _MUT_DENOM))
    mutated = (index * factor_num) // _MUT_DENOM
    return min(max(mutated, 1), nf)


def _crossover_indices(a: int, b: int, nf: int, rng: random.Random) -> int:
    child = (a + b) // 2
    if child == a or child == b:
        # midpoint collision: inject a fresh draw instead of a clone
        child = rng.randint(1, nf)
    return child


def optimize(queue: Queue, now: float | None = None,
             params: GaParams | None = None) -> ScheduleResult:
    """Search the index space for a low-cost order.

    Generation 0 always contains index 1 (arrival order), and elites survive
    unchanged, so the result is never worse than first-come-first-served.
    Deterministic for a fixed seed. Queues whose n! fits inside one population
    are solved exhaustively.
    """
    now = queue.now if now is None else now
    params = params if params is not None else GaParams()
    n = len(queue.patients)
    if n < 1:
        raise ValueError("queue is empty")
    if n == 1:
        return _result_for(queue, (1,), now, 0, 1)
    nf = math.factorial(n)
    cache: dict[int, float] = {}
    evaluations = 0

    def cost(index: int) -> float:
        nonlocal evaluations
        got = cache.get(index)
        if got is None:
            got = fitness(queue, index_to_permutation(index, n), now)
            cache[index] = got
            evaluations += 1
        return got

    if nf <= params.population:
        best = min(range(1, nf + 1), key=cost)
        return _result_for(queue, index_to_permutation(best, n), now, 0, evaluations)

    rng = random.Random(params.seed)
    population = [1] + [rng.randint(1, nf) for _ in range(params.population - 1)]
    best_index = min(population, key=cost)

    def tournament() -> int:
        picks = [population[rng.randrange(len(population))] for _ in range(3)]
        return min(picks, key=cost)

    for _ in range(params.generations):
        ranked = sorted(population, key=cost)
        next_gen = ranked[:params.elitism]
        while len(next_gen) < params.population:
            parent_a = tournament()
            if rng.random() < params.crossover_rate:
                parent_b = tournament()
                child = _crossover_indices(parent_a, parent_b, nf, rng)
            else:
                child = parent_a
            if rng.random() < params.mutation_rate:
                child = _mutate_index(child, nf, rng)
            next_gen.append(child)
        population = next_gen
        gen_best = min(population, key=cost)
        if cost(gen_best) < cost(best_index):
            best_index = gen_best

    order = index_to_permutation(best_index, n)
    if params.polish:
        order = _polish_order(queue, order, now, cost)
    return _result_for(queue, order, now, params.generations, evaluations)


def _polish_order(queue: Queue, order, now: float, cost) -> tuple[int, ...]:
    """Hill-climb over adjacent transpositions until no swap improves.

    The waiting-cost objective only changes by w_a*t_b - w_b*t_a when two
    neighbours swap, so this pass settles the fine ordering that coarse
    index-space moves rarely reach.
    """
    order = list(order)
    best = cost(permutation_to_index(order))
    improved = True
    while improved:
        improved = False
        for k in range(len(order) - 1):
            order[k], order[k + 1] = order[k + 1], order[k]
            trial = cost(permutation_to_index(order))
            if trial < best:
                best = trial
                improved = True
            else:
                order[k], order[k + 1] = order[k + 1], order[k]
    return tuple(order)
