import json

import pytest

from triageq import fql
from triageq.config import EngineConfig
from triageq.errors import NotFoundError, ValidationError
from triageq.service import (DONE, IN_CONSULTATION, WAITING, CentreService,
                             VirtualClock)

GREEN = {"sbp": 120, "hr": 80, "temp": 36.5, "rr": 14}
RED = {"sbp": 75, "hr": 120, "temp": 39.5, "rr": 27}
YELLOW = {"sbp": 90, "hr": 105, "temp": 36.5, "rr": 14}


@pytest.fixture
def centre(tmp_path):
    clock = VirtualClock()
    svc = CentreService(tmp_path / "data", clock=clock)
    yield svc, clock
    svc.close()


class TestSubmit:
    def test_first_patient_heads_queue(self, centre):
        svc, _ = centre
        case = svc.submit_triage(GREEN, "Alice", 30)
        assert case.status == WAITING
        assert svc.queue_order == [case.id]
        assert case.triage_result.colour == "green"
        assert case.predicted_consult > 0

    def test_red_patient_jumps_ahead(self, centre):
        svc, clock = centre
        green = svc.submit_triage(GREEN, "Alice", 30)
        clock.advance(5)
        red = svc.submit_triage(RED, "Bob", 58)
        assert red.triage_result.colour == "red"
        assert svc.queue_order[0] == red.id
        assert set(svc.queue_order) == {green.id, red.id}

    def test_malformed_vitals_leave_queue_unchanged(self, centre):
        svc, _ = centre
        svc.submit_triage(GREEN, "Alice", 30)
        before = list(svc.queue_order)
        with pytest.raises(ValidationError) as err:
            svc.submit_triage({"sbp": 0, "hr": 80, "temp": 36.5, "rr": 14},
                              "Mallory", 20)
        assert err.value.field == "sbp"
        assert svc.queue_order == before
        assert len(svc.cases) == 1

    def test_demographics_validated(self, centre):
        svc, _ = centre
        with pytest.raises(ValidationError):
            svc.submit_triage(GREEN, "", 30)
        with pytest.raises(ValidationError):
            svc.submit_triage(GREEN, "Zed", "???")


class TestNextPatient:
    def test_empty_queue_returns_none_without_learning(self, centre):
        svc, _ = centre
        assert svc.next_patient("dr-a") is None
        assert svc.doctors["dr-a"].model.epoch == 0

    def test_observed_minutes_come_from_the_clock(self, centre):
        svc, clock = centre
        case = svc.submit_triage(GREEN, "Alice", 30)
        taken = svc.next_patient("dr-a")
        assert taken.id == case.id
        assert taken.status == IN_CONSULTATION
        clock.advance(25)
        svc.next_patient("dr-a", notes="all good")
        closed = svc.get_patient(case.id)
        assert closed.status == DONE
        assert closed.observed_min == pytest.approx(25.0)
        assert closed.notes == ["all good"]
        assert svc.doctors["dr-a"].model.epoch == 1

    def test_urgent_latecomer_served_first(self, centre):
        svc, clock = centre
        green = svc.submit_triage(GREEN, "Alice", 30)
        clock.advance(3)
        red = svc.submit_triage(RED, "Bob", 58)
        taken = svc.next_patient("dr-a")
        assert taken.id == red.id
        assert svc.queue_order == [green.id]

    def test_epoch_equals_completed_consultations(self, centre):
        svc, clock = centre
        for i in range(3):
            svc.submit_triage(GREEN, f"P{i}", 30 + i)
        for expected in range(1, 4):
            clock.advance(15)
            svc.next_patient("dr-a")
            # epoch lags by one: the first call only opens a consultation
            assert svc.doctors["dr-a"].model.epoch == expected - 1
        clock.advance(15)
        svc.next_patient("dr-a")
        assert svc.doctors["dr-a"].model.epoch == 3

    def test_one_consultation_per_doctor(self, centre):
        svc, clock = centre
        svc.submit_triage(GREEN, "Alice", 30)
        svc.submit_triage(YELLOW, "Carol", 44)
        a = svc.next_patient("dr-a")
        b = svc.next_patient("dr-b")
        assert a.id != b.id
        assert svc.doctors["dr-a"].current_case_id == a.id
        assert svc.doctors["dr-b"].current_case_id == b.id


class TestQueueView:
    def test_empty_centre(self, centre):
        svc, _ = centre
        assert svc.queue_state() == []

    def test_projected_start_accumulates_expected_consults(self, centre):
        svc, clock = centre
        for i in range(3):
            svc.submit_triage(GREEN, f"P{i}", 30 + i)
            clock.advance(2)
        rows = svc.queue_state()
        assert [r["position"] for r in rows] == [1, 2, 3]
        assert rows[0]["projected_start_min"] == 0.0
        assert rows[1]["projected_start_min"] == pytest.approx(
            rows[0]["expected_consult_min"])
        assert rows[2]["projected_start_min"] == pytest.approx(
            rows[0]["expected_consult_min"] + rows[1]["expected_consult_min"])
        assert [r["id"] for r in rows] == svc.queue_order

    def test_waited_so_far_tracks_clock(self, centre):
        svc, clock = centre
        case = svc.submit_triage(GREEN, "Alice", 30)
        clock.advance(12)
        rows = svc.queue_state()
        assert rows[0]["waited_min"] == pytest.approx(12.0)


class TestSearch:
    def test_empty_query_returns_everything(self, centre):
        svc, _ = centre
        a = svc.submit_triage(GREEN, "Alice", 30)
        b = svc.submit_triage(YELLOW, "Bob", 41)
        assert {c.id for c in svc.search_patients("")} == {a.id, b.id}

    def test_substring_match_on_name_and_id(self, centre):
        svc, _ = centre
        a = svc.submit_triage(GREEN, "Alice Amber", 30)
        svc.submit_triage(YELLOW, "Bob", 41)
        assert [c.id for c in svc.search_patients("amber")] == [a.id]
        assert [c.id for c in svc.search_patients(a.id)] == [a.id]

    def test_unknown_id_not_found(self, centre):
        svc, _ = centre
        with pytest.raises(NotFoundError):
            svc.get_patient("c999999")

    def test_read_your_writes(self, centre):
        svc, _ = centre
        case = svc.submit_triage(GREEN, "Alice", 30)
        assert svc.get_patient(case.id).name == "Alice"


class TestPersistence:
    def test_crash_replay_restores_state(self, tmp_path):
        clock = VirtualClock()
        svc = CentreService(tmp_path / "d", clock=clock)
        svc.submit_triage(GREEN, "Alice", 30)
        clock.advance(4)
        svc.submit_triage(RED, "Bob", 58)
        svc.next_patient("dr-a")
        clock.advance(21)
        svc.next_patient("dr-a", notes="transferred")
        fingerprint = svc.state_fingerprint()
        svc.close()  # no graceful shutdown beyond closing the file handle

        revived = CentreService(tmp_path / "d", clock=clock)
        assert revived.state_fingerprint() == fingerprint
        revived.close()

    def test_replay_from_snapshot_plus_tail(self, tmp_path):
        clock = VirtualClock()
        config = EngineConfig()
        config.service.snapshot_interval = 2
        svc = CentreService(tmp_path / "d", config=config, clock=clock)
        for i in range(5):
            svc.submit_triage(GREEN, f"P{i}", 30 + i)
            clock.advance(1)
        fingerprint = svc.state_fingerprint()
        svc.close()
        assert (tmp_path / "d" / "snapshot.json").exists()
        revived = CentreService(tmp_path / "d", config=config, clock=clock)
        assert revived.state_fingerprint() == fingerprint
        revived.close()

    def test_failed_append_leaves_state_untouched(self, centre, monkeypatch):
        svc, _ = centre
        svc.submit_triage(GREEN, "Alice", 30)
        before = svc.state_fingerprint()

        def boom(*args, **kwargs):
            raise OSError("disk full")

        monkeypatch.setattr(svc._events_fh, "write", boom)
        with pytest.raises(OSError):
            svc.submit_triage(YELLOW, "Bob", 44)
        assert svc.state_fingerprint() == before

    def test_every_case_is_in_exactly_one_state(self, centre):
        svc, clock = centre
        ids = [svc.submit_triage(GREEN, f"P{i}", 30 + i).id for i in range(4)]
        svc.next_patient("dr-a")
        clock.advance(10)
        svc.next_patient("dr-a")
        statuses = {cid: svc.get_patient(cid).status for cid in ids}
        waiting = [c for c, s in statuses.items() if s == WAITING]
        in_consult = [c for c, s in statuses.items() if s == IN_CONSULTATION]
        done = [c for c, s in statuses.items() if s == DONE]
        assert len(waiting) + len(in_consult) + len(done) == 4
        assert sorted(waiting) == sorted(svc.queue_order)
        assert len(in_consult) == 1


class TestModelStats:
    def test_unknown_doctor_reported_fresh_without_registration(self, centre):
        svc, _ = centre
        stats = svc.doctor_model_stats("dr-new")
        assert stats["epoch"] == 0
        assert stats["epsilon"] == 1.0
        assert "dr-new" not in svc.doctors

    def test_stats_after_consultations(self, centre):
        svc, clock = centre
        svc.submit_triage(GREEN, "Alice", 30)
        svc.next_patient("dr-a")
        clock.advance(10)
        svc.next_patient("dr-a")
        stats = svc.doctor_model_stats("dr-a")
        assert stats["epoch"] == 1
        assert stats["q_shape"] == [9, 12]
        assert stats["total_visits"] >= 1
