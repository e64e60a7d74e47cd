import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from triageq import fuzzy, triage
from triageq.errors import ValidationError


def oracle_vital_points(kind, value):
    """Independent CTS band lookup, written directly from the published table.

    Gaps between listed integer bands score as the more severe neighbour;
    readings past the table clamp to 2.
    """
    if kind == "sbp":
        if value < 71: return 2
        if value <= 80: return 2
        if value < 81: return 2       # gap (80, 81)
        if value <= 100: return 1
        if value < 101: return 1      # gap (100, 101)
        if value <= 199: return 0
        return 2                      # >199
    if kind == "hr":
        if value < 40: return 2
        if value < 41: return 2       # gap [40, 41)
        if value <= 50: return 1
        if value < 51: return 1       # gap (50, 51)
        if value <= 100: return 0
        if value < 101: return 1      # gap (100, 101)
        if value <= 110: return 1
        if value < 111: return 2      # gap (110, 111)
        if value <= 129: return 2
        return 2                      # beyond table
    if kind == "temp":
        if value < 35: return 2
        if value <= 38.4: return 0
        return 2                      # gap (38.4, 38.5] and >38.5
    if kind == "rr":
        if value < 9: return 2
        if value <= 14: return 0
        if value < 15: return 1       # gap (14, 15)
        if value <= 20: return 1
        if value < 21: return 2       # gap (20, 21)
        if value <= 29: return 2
        return 2                      # beyond table
    raise AssertionError(kind)


class TestScoreVital:
    @pytest.mark.parametrize("kind,value,expected", [
        ("sbp", 90, 1),
        ("hr", 75, 0),
        ("temp", 39.0, 2),
        ("rr", 25, 2),
        ("hr", 120, 2),
        ("sbp", 150, 0),
    ])
    def test_published_bands(self, kind, value, expected):
        assert triage.score_vital(kind, value).points == expected

    # every listed boundary, its inner neighbour, and the gap values
    BOUNDARIES = {
        "sbp": [71, 75, 80, 80.5, 81, 90, 100, 100.5, 101, 150, 199, 199.5,
                200, 300],
        "hr": [11, 30, 39, 39.9, 40, 40.5, 41, 45, 50, 50.5, 51, 75, 100,
               100.5, 101, 105, 110, 110.5, 111, 120, 129],
        "temp": [26, 30, 34.9, 35, 36.5, 38.4, 38.45, 38.5, 38.6, 39, 44],
        "rr": [2, 5, 8, 8.9, 9, 12, 14, 14.5, 15, 18, 20, 20.5, 21, 25, 29],
    }

    def test_exhaustive_boundary_suite(self):
        for kind, values in self.BOUNDARIES.items():
            for value in values:
                got = triage.score_vital(kind, value)
                assert got.points == oracle_vital_points(kind, value), \
                    f"{kind}={value}"
                assert not got.out_of_table, f"{kind}={value}"

    def test_out_of_table_clamps_with_marker(self):
        assert triage.score_vital("sbp", 60) == (2, True)
        assert triage.score_vital("sbp", 70.9) == (2, True)
        assert triage.score_vital("hr", 130) == (2, True)
        assert triage.score_vital("hr", 129.5) == (2, True)
        assert triage.score_vital("rr", 30) == (2, True)
        assert triage.score_vital("rr", 29.5) == (2, True)
        # temp has open bands on both sides: never out of table
        assert triage.score_vital("temp", 44.9) == (2, False)
        assert triage.score_vital("temp", 25.1) == (2, False)

    def test_implausible_values_rejected(self):
        for kind, value in [("sbp", 10), ("sbp", 400), ("hr", 5),
                            ("temp", 20), ("rr", 0.5), ("rr", 90)]:
            with pytest.raises(ValidationError) as err:
                triage.score_vital(kind, value)
            assert err.value.field == kind

    @given(
        kind=st.sampled_from(triage.VITAL_KINDS),
        value=st.floats(0, 500),
    )
    @settings(max_examples=400)
    def test_matches_oracle_everywhere_plausible(self, kind, value):
        lo, hi = triage.PLAUSIBLE_RANGES[kind]
        if not (lo < value < hi):
            return
        got = triage.score_vital(kind, value)
        last = triage.CTS_BANDS[kind][-1]
        first = triage.CTS_BANDS[kind][0]
        beyond = ((first.lo is not None and value < first.lo)
                  or (last.hi is not None and value > last.hi))
        assert got.points == oracle_vital_points(kind, value)
        assert got.out_of_table == beyond


class TestPainScore:
    def test_empty_map_scores_zero(self):
        assert triage.pain_score(triage.PainMap()) == 0.0

    def test_severe_chest_uses_weight(self):
        assert triage.pain_score(triage.PainMap.of(chest="severe")) == 4.0

    def test_limbs_excluded(self):
        assert triage.pain_score(triage.PainMap.of(left_arm="severe")) == 0.0
        assert triage.pain_score(triage.PainMap.of(right_leg="mild")) == 0.0

    def test_regions_sum(self):
        pain = triage.PainMap.of(head="mild", back="severe", left_leg="severe")
        assert triage.pain_score(pain) == 2.0 * 1 + 1.0 * 2

    def test_duplicate_region_rejected(self):
        with pytest.raises(ValidationError):
            triage.PainMap((triage.PainEntry("head", "mild"),
                            triage.PainEntry("head", "severe")))

    def test_unknown_region_rejected(self):
        with pytest.raises(ValidationError):
            triage.PainEntry("tail", "mild")


class TestOverrides:
    def test_pvb_upgrades_green(self):
        colour, transitions = triage.apply_overrides("green", {"pvb"})
        assert colour == "yellow"
        assert transitions == (("pvb", "green", "yellow"),)

    def test_never_downgrades(self):
        assert triage.apply_overrides("red", {"pvb"})[0] == "red"
        assert triage.apply_overrides("orange", {"pvb"})[0] == "orange"

    def test_identity_without_flags(self):
        assert triage.apply_overrides("yellow", set()) == ("yellow", ())

    @given(
        colour=st.sampled_from(triage.COLOUR_ORDER),
        flags=st.sets(st.sampled_from(["pvb", "pregnancy", "trauma-mechanism"])),
    )
    def test_idempotent_and_monotone(self, colour, flags):
        rules = (triage.OverrideRule("pvb", "yellow"),
                 triage.OverrideRule("trauma-mechanism", "orange"))
        once, _ = triage.apply_overrides(colour, flags, rules)
        twice, again = triage.apply_overrides(once, flags, rules)
        assert twice == once
        assert again == ()
        assert triage.colour_severity(once) >= triage.colour_severity(colour)


class TestThresholds:
    def test_default_bands(self, thresholds):
        assert thresholds.colour_for(0.0) == "green"
        assert thresholds.colour_for(2.99) == "green"
        assert thresholds.colour_for(3.0) == "yellow"
        assert thresholds.colour_for(4.99) == "yellow"
        assert thresholds.colour_for(5.0) == "orange"
        assert thresholds.colour_for(7.0) == "red"
        assert thresholds.colour_for(50.0) == "red"

    def test_must_be_sorted(self):
        with pytest.raises(ValueError):
            triage.ColourThresholds(green=0, yellow=5, orange=3, red=7)


def assessment(sbp=120, hr=75, temp=36.5, rr=14, avpu=0, pain=None, flags=()):
    return triage.Assessment(
        vitals=triage.VitalSet(sbp, hr, temp, rr),
        consciousness=triage.Avpu.parse(avpu),
        pain=pain if pain is not None else triage.PainMap(),
        flags=frozenset(flags),
    )


class TestTriage:
    def test_all_normal_is_green(self, triage_fis, thresholds):
        result = triage.triage(assessment(), fis=triage_fis, thresholds=thresholds)
        assert result.colour == "green"
        assert result.crisp_ts < 3.0
        assert result.vital_scores == {"sbp": 0, "hr": 0, "temp": 0, "rr": 0}

    def test_oracle_band_case(self, triage_fis, thresholds):
        # independent arithmetic: 90->1, 120->2, 36->0, 25->2 totals 5 (orange)
        total = sum(oracle_vital_points(k, v) for k, v in
                    [("sbp", 90), ("hr", 120), ("temp", 36), ("rr", 25)])
        assert total == 5
        result = triage.triage(assessment(sbp=90, hr=120, temp=36, rr=25),
                               fis=triage_fis, thresholds=thresholds)
        assert 5.0 <= result.crisp_ts < 7.0
        assert result.colour == "orange"

    def test_green_with_pvb_becomes_yellow(self, triage_fis, thresholds):
        result = triage.triage(assessment(flags=("pvb",)), fis=triage_fis,
                               thresholds=thresholds)
        assert result.base_colour == "green"
        assert result.colour == "yellow"
        assert result.applied_overrides == (("pvb", "green", "yellow"),)

    def test_deterministic(self, triage_fis, thresholds):
        a = assessment(sbp=95, hr=108, temp=37.9, rr=22,
                       pain=triage.PainMap.of(abdomen="mild"))
        first = triage.triage(a, fis=triage_fis, thresholds=thresholds)
        second = triage.triage(a, fis=triage_fis, thresholds=thresholds)
        assert first.crisp_ts == second.crisp_ts
        assert first.colour == second.colour

    def test_out_of_table_marker_propagates(self, triage_fis, thresholds):
        result = triage.triage(assessment(sbp=60, hr=140), fis=triage_fis,
                               thresholds=thresholds)
        assert set(result.out_of_table) == {"sbp", "hr"}
        assert result.vital_scores["sbp"] == 2
        assert result.vital_scores["hr"] == 2

    def test_monotone_harm_sweeps(self, triage_fis):
        # pushing one vital deeper into severe bands never drops the crisp
        # score by more than the defuzzification resolution
        base = {"sbp": 150.0, "hr": 75.0, "temp": 36.5, "rr": 12.0,
                "consciousness": 0.0, "pain": 0.0}
        sweeps = [
            ("hr", np.linspace(75, 135, 300)),
            ("hr", np.linspace(75, 30, 300)),
            ("sbp", np.linspace(150, 60, 300)),
            ("rr", np.linspace(12, 35, 300)),
            ("temp", np.linspace(36.5, 41, 300)),
            ("pain", np.linspace(0, 16, 300)),
            ("consciousness", [0.0, 1.0, 2.0, 3.0]),  # discrete AVPU levels
        ]
        for kind, values in sweeps:
            previous = None
            for v in values:
                point = dict(base)
                point[kind] = float(v)
                crisp = fuzzy.infer(triage_fis, point)
                if previous is not None:
                    assert previous - crisp <= 0.01, f"{kind} at {v}"
                previous = crisp

    def test_fis_covers_the_whole_input_space(self, triage_fis):
        rng = np.random.default_rng(3)
        for _ in range(300):
            point = {
                "sbp": float(rng.uniform(*triage.PLAUSIBLE_RANGES["sbp"])),
                "hr": float(rng.uniform(*triage.PLAUSIBLE_RANGES["hr"])),
                "temp": float(rng.uniform(*triage.PLAUSIBLE_RANGES["temp"])),
                "rr": float(rng.uniform(*triage.PLAUSIBLE_RANGES["rr"])),
                "consciousness": float(rng.uniform(0, 3)),
                "pain": float(rng.uniform(0, 16)),
            }
            crisp = fuzzy.infer(triage_fis, point)
            assert 0.0 <= crisp <= 14.0


class TestAssessmentJson:
    def test_round_trip(self):
        a = assessment(sbp=100, hr=105, temp=38.0, rr=21, avpu="voice",
                       pain=triage.PainMap.of(chest="mild", left_arm="severe"),
                       flags=("pvb",))
        again = triage.Assessment.from_dict(a.to_dict())
        assert again == a

    def test_missing_vital_field_named(self):
        with pytest.raises(ValidationError) as err:
            triage.Assessment.from_dict({"sbp": 120, "hr": 80, "temp": 36.5})
        assert err.value.field == "rr"

    def test_implausible_vital_named(self):
        with pytest.raises(ValidationError) as err:
            triage.Assessment.from_dict(
                {"sbp": 0, "hr": 80, "temp": 36.5, "rr": 14})
        assert err.value.field == "sbp"

    def test_bad_pain_entry(self):
        with pytest.raises(ValidationError) as err:
            triage.Assessment.from_dict(
                {"sbp": 120, "hr": 80, "temp": 36.5, "rr": 14,
                 "pain": [{"region": "head"}]})
        assert err.value.field == "pain"

    def test_bad_avpu(self):
        with pytest.raises(ValidationError) as err:
            triage.Assessment.from_dict(
                {"sbp": 120, "hr": 80, "temp": 36.5, "rr": 14, "avpu": "maybe"})
        assert err.value.field == "avpu"
