"""Forecasting game that scores a translation by prediction, not inspection.

An interrogator submits actions in the machine's language. Each round the
harness applies the action to the machine, samples one outcome, translates
it into the human frame, and scores the interrogator's forecast of a chosen
query variable. A translation that commutes with inference lets a forecaster
who only knows the human model score perfectly in expectation; a broken one
shows up as losses on exactly the rounds that exercise the defect.

Replays are exact: round i draws from a generator seeded with
(session seed, i), so a transcript re-run with the same actions reproduces
the same truths byte for byte.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParseError, SessionClosed, UnknownVariable
from .models import apply_actions, marginal
from .scenarios import ScenarioFile
from .serialize import action_to_dict, compound_from_obj
from .systems import Action

TRANSCRIPT_VERSION = "turing-transcript/1"
DEFAULT_THRESHOLD = 0.9
DEFAULT_MIN_ROUNDS = 10


@dataclass(frozen=True)
class RoundResult:
    index: int
    action: tuple[Action, ...]        # as submitted, machine-side
    translated: tuple[Action, ...]    # human-side counterpart
    forecast: object                  # label or {label: prob}
    truth: str
    score: float


@dataclass(frozen=True)
class Verdict:
    rounds: int
    mean_score: float
    threshold: float
    min_rounds: int
    sufficient: bool
    interpretable: bool


def _check_forecast(forecast, domain: tuple[str, ...]):
    if isinstance(forecast, str):
        if forecast not in domain:
            raise ParseError(f"forecast: {forecast!r} not in query domain {list(domain)}")
        return forecast
    if isinstance(forecast, dict):
        total = 0.0
        for label, p in forecast.items():
            if label not in domain:
                raise ParseError(f"forecast: {label!r} not in query domain {list(domain)}")
            p = float(p)
            if p < 0:
                raise ParseError("forecast: probabilities must be nonnegative")
            total += p
        if abs(total - 1.0) > 1e-6:
            raise ParseError(f"forecast: probabilities sum to {total:.6g}, expected 1")
        return {label: float(p) for label, p in forecast.items()}
    raise ParseError("forecast: expected a label or a {label: probability} object")


def _score(forecast, truth: str, domain: tuple[str, ...]) -> float:
    if isinstance(forecast, str):
        return 1.0 if forecast == truth else 0.0
    brier = 0.0
    for label in domain:
        p = float(forecast.get(label, 0.0))
        y = 1.0 if label == truth else 0.0
        brier += (p - y) ** 2
    return 1.0 - brier / 2.0


class TuringSession:
    """Stateful scored dialogue against one scenario."""

    def __init__(self, scenario: ScenarioFile, query: str, seed: int = 0):
        self.scenario = scenario
        self.query = query
        self.seed = int(seed)
        try:
            self.query_index = scenario.human.system.index(query)
        except Exception:
            raise UnknownVariable(
                f"query {query!r} is not a variable of the human system"
            ) from None
        self.rounds: list[RoundResult] = []
        self.closed = False

    @property
    def query_domain(self) -> tuple[str, ...]:
        return self.scenario.human.system.domain(self.query_index)

    def play_round(self, actions, forecast) -> RoundResult:
        if self.closed:
            raise SessionClosed("session is closed")
        if isinstance(actions, Action):
            actions = (actions,)
        actions = tuple(actions)
        for a in actions:
            a.validate(self.scenario.machine.system)
        forecast = _check_forecast(forecast, self.query_domain)
        # translate first: an untranslatable probe is rejected, not scored
        translated = self.scenario.translation.translate_actions(actions)
        index = len(self.rounds)
        rng = np.random.default_rng((self.seed, index))
        dist = apply_actions(self.scenario.machine, actions)
        flat = np.asarray(dist.weights, dtype=np.float64).reshape(-1)
        drawn = int(rng.choice(flat.size, p=flat / flat.sum()))
        assignment = np.unravel_index(drawn, dist.weights.shape)
        target_assignment = self.scenario.translation.translate_assignment(
            tuple(int(v) for v in assignment)
        )
        truth = self.query_domain[target_assignment[self.query_index]]
        result = RoundResult(index, actions, translated, forecast, truth,
                             _score(forecast, truth, self.query_domain))
        self.rounds.append(result)
        return result

    @property
    def scores(self) -> list[float]:
        return [r.score for r in self.rounds]

    def mean_score(self) -> float:
        return float(np.mean(self.scores)) if self.rounds else 0.0

    def verdict(self, threshold: float = DEFAULT_THRESHOLD,
                min_rounds: int = DEFAULT_MIN_ROUNDS) -> Verdict:
        n = len(self.rounds)
        mean = self.mean_score()
        sufficient = n >= min_rounds
        return Verdict(n, mean, threshold, min_rounds, sufficient,
                       sufficient and mean >= threshold)

    def close(self) -> None:
        self.closed = True


def oracle_forecast(scenario: ScenarioFile, actions, query: str) -> dict:
    """Forecast of a forecaster who knows the human model and trusts the
    translation: translate the probe, run it on the human side, report the
    query marginal."""
    if isinstance(actions, Action):
        actions = (actions,)
    translated = scenario.translation.translate_actions(tuple(actions))
    qi = scenario.human.system.index(query)
    dist = apply_actions(scenario.human, translated)
    probs = marginal(dist, (qi,)).weights
    domain = scenario.human.system.domain(qi)
    return {label: float(probs[k]) for k, label in enumerate(domain)}


# -- scripts and transcripts -----------------------------------------------------


def verdict_to_dict(v: Verdict) -> dict:
    return {
        "rounds": v.rounds,
        "mean_score": v.mean_score,
        "threshold": v.threshold,
        "min_rounds": v.min_rounds,
        "sufficient": v.sufficient,
        "interpretable": v.interpretable,
    }


def transcript(session: TuringSession) -> dict:
    msys = session.scenario.machine.system
    hsys = session.scenario.human.system
    return {
        "version": TRANSCRIPT_VERSION,
        "scenario": session.scenario.name,
        "query": session.query,
        "seed": session.seed,
        "status": "closed" if session.closed else "open",
        "rounds": [
            {
                "round": r.index,
                "action": [action_to_dict(a, msys) for a in r.action],
                "translated": [action_to_dict(a, hsys) for a in r.translated],
                "forecast": r.forecast,
                "truth": r.truth,
                "score": r.score,
            }
            for r in session.rounds
        ],
        "mean_score": session.mean_score(),
        "verdict": verdict_to_dict(session.verdict()),
    }


def run_script(scenario: ScenarioFile, script: dict) -> TuringSession:
    """Run a scripted session. Accepts both script files and previously
    exported transcripts; the forecast value "oracle" is resolved against
    the human model at play time."""
    if not isinstance(script, dict):
        raise ParseError("script: expected a JSON object")
    query = script.get("query")
    if not isinstance(query, str):
        raise ParseError("script.query: expected a variable name")
    seed = script.get("seed", 0)
    if not isinstance(seed, int):
        raise ParseError("script.seed: expected an integer")
    rounds = script.get("rounds")
    if not isinstance(rounds, list):
        raise ParseError("script.rounds: expected a list")
    session = TuringSession(scenario, query, seed)
    for i, row in enumerate(rounds):
        if not isinstance(row, dict) or "action" not in row:
            raise ParseError(f"script.rounds[{i}]: missing action")
        actions = compound_from_obj(row["action"], scenario.machine.system,
                                    f"script.rounds[{i}].action")
        forecast = row.get("forecast")
        if forecast == "oracle":
            forecast = oracle_forecast(scenario, actions, query)
        session.play_round(actions, forecast)
    if script.get("status") == "closed":
        session.close()
    return session


def make_oracle_script(scenario: ScenarioFile, query: str, actions,
                       seed: int = 0) -> dict:
    msys = scenario.machine.system
    rounds = []
    for item in actions:
        compound = (item,) if isinstance(item, Action) else tuple(item)
        rounds.append({
            "action": [action_to_dict(a, msys) for a in compound],
            "forecast": "oracle",
        })
    return {"scenario": scenario.name, "query": query, "seed": seed,
            "rounds": rounds}
