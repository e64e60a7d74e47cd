import itertools
import json
import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from triageq import scheduler
from triageq.errors import ValidationError


class TestIndexToPermutation:
    # published index/sequence pairs for n=4
    PUBLISHED = {
        1: (1, 2, 3, 4),
        2: (1, 2, 4, 3),
        3: (1, 3, 2, 4),
        4: (1, 3, 4, 2),
        5: (1, 4, 2, 3),
        6: (1, 4, 3, 2),
        7: (2, 1, 3, 4),
        8: (2, 1, 4, 3),
    }

    def test_published_pairs(self):
        for index, seq in self.PUBLISHED.items():
            assert scheduler.index_to_permutation(index, 4) == seq

    def test_last_index_is_reversal(self):
        # independent oracle: full lexicographic enumeration
        all_perms = sorted(itertools.permutations(range(1, 5)))
        assert all_perms[-1] == (4, 3, 2, 1)
        assert scheduler.index_to_permutation(24, 4) == (4, 3, 2, 1)

    def test_full_enumeration_is_lexicographic(self):
        for n in range(1, 7):
            expected = sorted(itertools.permutations(range(1, n + 1)))
            got = [scheduler.index_to_permutation(i, n)
                   for i in range(1, math.factorial(n) + 1)]
            assert got == expected

    def test_out_of_range_index_names_bounds(self):
        with pytest.raises(ValueError) as err:
            scheduler.index_to_permutation(0, 4)
        assert "[1, 24]" in str(err.value)
        with pytest.raises(ValueError):
            scheduler.index_to_permutation(25, 4)
        with pytest.raises(ValueError):
            scheduler.index_to_permutation(1, 0)

    def test_large_n_uses_exact_integers(self):
        n = 60
        last = math.factorial(n)
        assert scheduler.index_to_permutation(1, n) == tuple(range(1, n + 1))
        assert scheduler.index_to_permutation(last, n) == tuple(range(n, 0, -1))
        middle = scheduler.index_to_permutation(last // 2 + 7, n)
        assert scheduler.permutation_to_index(middle) == last // 2 + 7


class TestPermutationToIndex:
    def test_published_inverses(self):
        assert scheduler.permutation_to_index([1, 2, 3, 4]) == 1
        assert scheduler.permutation_to_index([2, 1, 4, 3]) == 8
        assert scheduler.permutation_to_index([1, 4, 3, 2]) == 6

    def test_exhaustive_round_trip_n7(self):
        n = 7
        for index in range(1, math.factorial(n) + 1):
            seq = scheduler.index_to_permutation(index, n)
            assert scheduler.permutation_to_index(seq) == index

    def test_rejects_non_permutations(self):
        with pytest.raises(ValueError):
            scheduler.permutation_to_index([1, 1, 2])
        with pytest.raises(ValueError):
            scheduler.permutation_to_index([0, 1, 2])
        with pytest.raises(ValueError):
            scheduler.permutation_to_index([2, 3, 4])

    @given(n=st.integers(1, 10), data=st.data())
    @settings(max_examples=100)
    def test_round_trip_random(self, n, data):
        index = data.draw(st.integers(1, math.factorial(n)))
        seq = scheduler.index_to_permutation(index, n)
        assert scheduler.permutation_to_index(seq) == index


def patient(pid, ts, arrival, consult):
    return scheduler.PatientRecord(pid, ts, arrival, consult)


def two_patient_queue():
    return scheduler.Queue(
        (patient("A", 2.0, 0.0, 10.0), patient("B", 0.0, 0.0, 30.0)),
        now=0.0)


class TestFitness:
    def test_single_patient(self):
        queue = scheduler.Queue((patient("A", 2.0, 40.0, 15.0),), now=100.0)
        assert scheduler.fitness(queue, (1,)) == (2 + 1) * (100 - 40)

    def test_two_patient_orders(self):
        queue = two_patient_queue()
        assert scheduler.fitness(queue, (1, 2)) == 3 * 0 + 1 * 10
        assert scheduler.fitness(queue, (2, 1)) == 1 * 0 + 3 * 30

    def test_zero_ts_still_counts_waiting(self):
        queue = scheduler.Queue(
            (patient("A", 0.0, 0.0, 5.0), patient("B", 0.0, 0.0, 5.0)),
            now=60.0)
        # both weights are (0+1): queue time is never dropped from the cost
        assert scheduler.fitness(queue, (1, 2)) == 1 * 60 + 1 * 65

    def test_rejects_bad_order_and_time(self):
        queue = two_patient_queue()
        with pytest.raises(ValueError):
            scheduler.fitness(queue, (1, 1))
        with pytest.raises(ValueError):
            scheduler.fitness(queue, (1, 2), now=-5.0)

    @given(seed=st.integers(0, 10_000))
    @settings(max_examples=60)
    def test_matches_event_walk_simulation(self, seed):
        # independent check: walk the order, accumulating consult start times
        rng = random.Random(seed)
        n = rng.randint(1, 8)
        pats = tuple(patient(f"p{i}", rng.uniform(0, 10), rng.uniform(0, 200),
                             rng.uniform(1, 90)) for i in range(n))
        now = max(p.arrival for p in pats)
        queue = scheduler.Queue(pats, now)
        order = list(range(1, n + 1))
        rng.shuffle(order)
        clock = now
        total = 0.0
        for pos in order:
            p = queue.patients[pos - 1]
            total += (p.ts + 1.0) * (clock - p.arrival)
            clock += p.expected_consult
        assert scheduler.fitness(queue, order) == pytest.approx(total, rel=1e-9)


class TestBruteForce:
    def test_two_patient_example(self):
        result = scheduler.brute_force(two_patient_queue())
        assert result.order == (1, 2)
        assert result.fitness == 10.0
        assert result.evaluations == 2

    def test_symmetric_queue_breaks_ties_to_first_index(self):
        queue = scheduler.Queue(
            tuple(patient(f"p{i}", 1.0, 0.0, 10.0) for i in range(4)), now=0.0)
        result = scheduler.brute_force(queue)
        assert result.order == (1, 2, 3, 4)

    def test_size_limit_points_to_optimize(self):
        queue = scheduler.Queue(
            tuple(patient(f"p{i}", 1.0, 0.0, 10.0) for i in range(10)), now=0.0)
        with pytest.raises(ValueError) as err:
            scheduler.brute_force(queue)
        assert "optimize" in str(err.value)

    def test_matches_ratio_sort_oracle(self):
        # the cost is minimized by serving in increasing consult/(ts+1) order
        rng = random.Random(123)
        for _ in range(20):
            n = rng.randint(2, 7)
            pats = tuple(patient(f"p{i}", rng.uniform(0, 10),
                                 rng.uniform(0, 100), rng.uniform(1, 60))
                         for i in range(n))
            queue = scheduler.Queue(pats, max(p.arrival for p in pats))
            result = scheduler.brute_force(queue)
            ratio_order = sorted(
                range(1, n + 1),
                key=lambda pos: (queue.patients[pos - 1].expected_consult
                                 / (queue.patients[pos - 1].ts + 1.0)))
            assert result.fitness == pytest.approx(
                scheduler.fitness(queue, ratio_order), rel=1e-9)


class TestOptimize:
    def test_single_patient_trivial(self):
        queue = scheduler.Queue((patient("A", 3.0, 5.0, 20.0),), now=10.0)
        result = scheduler.optimize(queue)
        assert result.order == (1,)
        assert result.generations_run == 0

    def test_small_queue_solved_exhaustively(self):
        queue = two_patient_queue()
        result = scheduler.optimize(queue)
        assert result.order == (1, 2)
        assert result.fitness == 10.0

    def test_never_worse_than_arrival_order(self):
        rng = random.Random(5)
        for trial in range(10):
            n = rng.randint(2, 12)
            pats = tuple(patient(f"p{i}", rng.uniform(0, 10),
                                 rng.uniform(0, 100), rng.uniform(1, 60))
                         for i in range(n))
            queue = scheduler.Queue(pats, max(p.arrival for p in pats))
            params = scheduler.GaParams(population=20, generations=10,
                                        seed=trial)
            result = scheduler.optimize(queue, params=params)
            fifo = scheduler.fitness(queue, list(range(1, n + 1)))
            assert result.fitness <= fifo + 1e-9

    def test_matches_brute_force_on_seeded_instances(self):
        rng = random.Random(17)
        for seed in range(5):
            pats = tuple(patient(f"p{i}", rng.uniform(0, 10),
                                 rng.uniform(0, 100), rng.uniform(1, 60))
                         for i in range(7))
            queue = scheduler.Queue(pats, max(p.arrival for p in pats))
            exact = scheduler.brute_force(queue)
            got = scheduler.optimize(queue, params=scheduler.GaParams(seed=seed))
            assert got.fitness == pytest.approx(exact.fitness, rel=1e-9)

    def test_deterministic_for_fixed_seed(self):
        rng = random.Random(2)
        pats = tuple(patient(f"p{i}", rng.uniform(0, 10), rng.uniform(0, 100),
                             rng.uniform(1, 60)) for i in range(9))
        queue = scheduler.Queue(pats, max(p.arrival for p in pats))
        params = scheduler.GaParams(seed=42)
        first = scheduler.optimize(queue, params=params)
        second = scheduler.optimize(queue, params=params)
        assert first.order == second.order
        assert first.fitness == second.fitness

    def test_shift_invariance_of_argmin(self):
        # moving the whole timeline leaves the best order unchanged
        rng = random.Random(31)
        for _ in range(10):
            n = rng.randint(2, 6)
            pats = tuple(patient(f"p{i}", rng.uniform(0, 10),
                                 rng.uniform(0, 100), rng.uniform(1, 60))
                         for i in range(n))
            now = max(p.arrival for p in pats)
            queue = scheduler.Queue(pats, now)
            shift = rng.uniform(1, 500)
            shifted = scheduler.Queue(
                tuple(patient(p.id, p.ts, p.arrival + shift, p.expected_consult)
                      for p in pats), now + shift)
            assert scheduler.brute_force(queue).order == \
                scheduler.brute_force(shifted).order

    def test_result_fitness_consistent(self):
        queue = two_patient_queue()
        result = scheduler.optimize(queue)
        assert result.fitness == scheduler.fitness(queue, result.order)
        assert result.per_patient_wait == scheduler.waits_for_order(
            queue, result.order)


class TestQueueJson:
    def test_round_trip(self):
        queue = scheduler.Queue(
            (patient("A", 2.0, 1.0, 10.5), patient("B", 0.0, 3.0, 30.0)),
            now=12.0)
        doc = json.loads(json.dumps(queue.to_dict()))
        again = scheduler.Queue.from_dict(doc)
        assert again == queue

    def test_validation(self):
        with pytest.raises(ValidationError):
            scheduler.Queue((patient("A", 1, 0, 10), patient("A", 1, 0, 10)), 0)
        with pytest.raises(ValidationError):
            scheduler.Queue((patient("A", 1, 10, 10),), now=5.0)
        with pytest.raises(ValidationError):
            patient("A", 1.0, 0.0, 0.0)
        with pytest.raises(ValidationError):
            patient("A", -1.0, 0.0, 5.0)
        with pytest.raises(ValidationError):
            scheduler.Queue.from_dict({"patients": []})

    def test_result_document_projects_starts(self):
        queue = two_patient_queue()
        doc = scheduler.brute_force(queue).to_dict(queue)
        assert [row["id"] for row in doc["patients"]] == ["A", "B"]
        assert doc["patients"][0]["projected_start_min"] == 0.0
        assert doc["patients"][1]["projected_start_min"] == 10.0


class TestGaParams:
    def test_validation(self):
        with pytest.raises(ValueError):
            scheduler.GaParams(population=1)
        with pytest.raises(ValueError):
            scheduler.GaParams(elitism=100, population=100)
        with pytest.raises(ValueError):
            scheduler.GaParams(crossover_rate=1.5)
