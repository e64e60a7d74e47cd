"""Record real API responses into fixtures/ for the UI contract tests.

Runs the service in-process with a virtual clock, drives one realistic
sequence (two submissions, a takeover, a queue read), and captures every
response body verbatim.
"""

import json
import sys
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from triageq.httpapi import create_app
from triageq.service import CentreService, VirtualClock

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

GREEN = {
    "name": "Grace Field",
    "age": 34,
    "assessment": {"sbp": 120, "hr": 80, "temp": 36.5, "rr": 14, "avpu": 0,
                   "pain": [], "flags": []},
}
RED = {
    "name": "Rita Moss",
    "age": 61,
    "assessment": {"sbp": 75, "hr": 120, "temp": 39.5, "rr": 27, "avpu": 1,
                   "pain": [{"region": "chest", "severity": "severe"},
                            {"region": "abdomen", "severity": "mild"}],
                   "flags": []},
}
INVALID = {
    "name": "Bad Reading",
    "age": 50,
    "assessment": {"sbp": 0, "hr": 80, "temp": 36.5, "rr": 14, "avpu": 0,
                   "pain": [], "flags": []},
}


def main() -> int:
    FIXTURES.mkdir(exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        clock = VirtualClock()
        service = CentreService(tmp, clock=clock)
        client = TestClient(create_app(service))

        out = {}
        out["submit_green"] = client.post("/api/patients", json=GREEN).json()
        clock.advance(6.0)
        out["submit_red"] = client.post("/api/patients", json=RED).json()
        clock.advance(2.0)
        out["queue_two_waiting"] = client.get("/api/queue").json()
        response = client.post("/api/patients", json=INVALID)
        assert response.status_code == 400
        out["submit_invalid_error"] = response.json()
        out["next_patient_red"] = client.post(
            "/api/doctors/dr-a/next", json={"notes": ""}).json()
        out["queue_one_waiting"] = client.get("/api/queue").json()
        out["next_patient_empty"] = None  # filled below after draining
        clock.advance(18.0)
        out["next_patient_green"] = client.post(
            "/api/doctors/dr-a/next", json={"notes": "obs stable"}).json()
        clock.advance(9.0)
        out["next_patient_none"] = client.post(
            "/api/doctors/dr-a/next", json={"notes": "discharged"}).json()
        del out["next_patient_empty"]
        out["queue_empty"] = client.get("/api/queue").json()
        service.close()

    for name, body in out.items():
        path = FIXTURES / f"{name}.json"
        path.write_text(json.dumps(body, indent=2) + "\n")
        print(f"wrote {path.relative_to(FIXTURES.parent)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
