import numpy as np
import pytest

from equivar.errors import AmbiguousTranslation, ParseError, SessionClosed
from equivar.scenarios import builtin
from equivar.serialize import dumps
from equivar.systems import do, observe
from equivar.turing import (
    TuringSession,
    make_oracle_script,
    oracle_forecast,
    run_script,
    transcript,
)

from conftest import display_probe_cycle


@pytest.fixture
def thermostat():
    return builtin("thermostat_basic")


def test_oracle_forecaster_is_perfect_on_a_faithful_reading(thermostat):
    probes = display_probe_cycle(thermostat.machine.system)
    script = make_oracle_script(thermostat, "comfort", probes, seed=17)
    session = run_script(thermostat, script)
    assert session.mean_score() == 1.0
    v = session.verdict()
    assert v.sufficient and v.interpretable


def test_oracle_forecaster_breaks_on_a_scrambled_reading():
    # dial probes translate by identity on both sides, so only forced
    # display readings expose the scrambled map
    scrambled = builtin("thermostat_scrambled")
    probes = display_probe_cycle(scrambled.machine.system)
    script = make_oracle_script(scrambled, "comfort", probes, seed=17)
    session = run_script(scrambled, script)
    assert session.mean_score() == 0.25
    v = session.verdict()
    assert v.sufficient and not v.interpretable


def test_rounds_are_seed_deterministic(thermostat):
    # the empty probe samples from the unacted joint, so comfort stays random
    a = TuringSession(thermostat, "comfort", seed=5)
    b = TuringSession(thermostat, "comfort", seed=5)
    c = TuringSession(thermostat, "comfort", seed=6)
    truths_a = [a.play_round((), "no").truth for _ in range(8)]
    truths_b = [b.play_round((), "no").truth for _ in range(8)]
    truths_c = [c.play_round((), "no").truth for _ in range(8)]
    assert truths_a == truths_b
    assert truths_a != truths_c


def test_point_and_distribution_forecasts_score_differently(thermostat):
    sys_ = thermostat.machine.system
    session = TuringSession(thermostat, "comfort", seed=1)
    r1 = session.play_round(do(sys_, "wheel", "4"), "yes")
    assert r1.score == 1.0  # wheel 4 always lands in the comfortable band
    r2 = session.play_round(do(sys_, "wheel", "4"), {"yes": 0.5, "no": 0.5})
    assert r2.score == pytest.approx(1 - 0.25)  # Brier distance to certainty
    r3 = session.play_round(do(sys_, "wheel", "6"), "yes")
    assert r3.score == 0.0


def test_forecast_validation(thermostat):
    session = TuringSession(thermostat, "comfort", seed=0)
    probe = do(thermostat.machine.system, "wheel", "4")
    with pytest.raises(ParseError, match="domain"):
        session.play_round(probe, "maybe")
    with pytest.raises(ParseError):
        session.play_round(probe, {"yes": 0.7, "no": 0.7})
    with pytest.raises(ParseError):
        session.play_round(probe, {"yes": 1.2, "no": -0.2})
    assert session.rounds == []  # nothing was scored


def test_untranslatable_probe_is_rejected_not_scored():
    paired = builtin("thermostat_paired")
    session = TuringSession(paired, "comfort", seed=0)
    probe = observe(paired.machine.system, "display", "2")
    with pytest.raises(AmbiguousTranslation):
        session.play_round(probe, "yes")
    assert session.rounds == []


def test_closed_session_refuses_rounds(thermostat):
    session = TuringSession(thermostat, "comfort", seed=0)
    session.close()
    with pytest.raises(SessionClosed):
        session.play_round(do(thermostat.machine.system, "wheel", "4"), "yes")


def test_verdict_needs_enough_rounds(thermostat):
    session = TuringSession(thermostat, "comfort", seed=0)
    for _ in range(3):
        session.play_round(do(thermostat.machine.system, "wheel", "4"), "yes")
    v = session.verdict(min_rounds=10)
    assert v.mean_score == 1.0 and not v.sufficient and not v.interpretable
    assert session.verdict(min_rounds=3).interpretable


def test_transcript_replays_byte_identically(thermostat):
    probes = display_probe_cycle(thermostat.machine.system, n=6)
    script = make_oracle_script(thermostat, "comfort", probes, seed=9)
    script["status"] = "closed"
    first = transcript(run_script(thermostat, script))
    assert first["status"] == "closed"
    second = transcript(run_script(thermostat, first))
    assert dumps(first) == dumps(second)


def test_script_validation_errors(thermostat):
    with pytest.raises(ParseError, match="query"):
        run_script(thermostat, {"rounds": []})
    with pytest.raises(ParseError, match="rounds"):
        run_script(thermostat, {"query": "comfort"})
    with pytest.raises(ParseError, match="action"):
        run_script(thermostat, {"query": "comfort", "rounds": [{}]})


def test_oracle_forecast_is_the_translated_marginal(thermostat):
    f = oracle_forecast(thermostat, do(thermostat.machine.system, "wheel", "6"),
                        "comfort")
    assert f == {"no": 1.0, "yes": 0.0}
