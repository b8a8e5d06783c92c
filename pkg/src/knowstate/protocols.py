"""The two judge-mediated dispute protocols and their closed-form error rates.

Protocol A: Alice commits to an axis before learning anything about
Charles's claim; Charles then declares his axis and predicts the judge's
measurements along it. Alice wins when Charles's claim checks out and
her committed axis lies within ``alpha`` of his.

Protocol B: Charles keeps his axis secret. Alice names a measurement
direction and Charles wins when he predicts at least
``ceil((1/2 + delta) N)`` outcomes correctly.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Optional

import numpy as np
from scipy import integrate

from .ensemble import (AlreadyMeasuredError, BasisOnly, Ensemble, Full, KnowledgeView,
                       NoKnowledge, measure_all)
from .quantum import Axis, Direction
from .stats import binomial_tail, uniform_direction
from .strategies import (DisguisePolicy, Predictor, choose_perpendicular, disguised_predict,
                         impostor_axis_guess, predict)

_COUNT_TOL = 1e-9


def required_matches(fraction: float, n: int) -> int:
    """Smallest integer count whose fraction of ``n`` reaches ``fraction``."""
    return max(0, math.ceil(fraction * n - _COUNT_TOL))


@dataclass(frozen=True)
class ProtocolAParams:
    n: int
    alpha: float
    threshold: float = 1.0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be positive")
        if not 0.0 < self.alpha < math.pi / 2:
            raise ValueError("alpha must lie in (0, pi/2)")
        if not 0.5 < self.threshold <= 1.0:
            raise ValueError("threshold must lie in (0.5, 1]")

    @property
    def required(self) -> int:
        return required_matches(self.threshold, self.n)


@dataclass(frozen=True)
class ProtocolBParams:
    n: int
    delta: float
    charles_target_accuracy: float = 1.0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be positive")
        if not 0.0 < self.delta < 0.5:
            raise ValueError("delta must lie in (0, 0.5)")
        if not 0.5 <= self.charles_target_accuracy <= 1.0:
            raise ValueError("charles_target_accuracy must lie in [0.5, 1]")

    @property
    def required(self) -> int:
        return required_matches(0.5 + self.delta, self.n)


class EventKind(str, enum.Enum):
    ALICE_DECLARED_AXIS = "AliceDeclaredAxis"
    CHARLES_DECLARED_AXIS = "CharlesDeclaredAxis"
    CHARLES_PREDICTIONS = "CharlesPredictions"
    ALICE_CHOSE_DIRECTION = "AliceChoseDirection"
    JUDGE_MEASURED = "JudgeMeasured"
    VERDICT_ISSUED = "VerdictIssued"


_CHARLES_CLAIMS = (EventKind.CHARLES_DECLARED_AXIS, EventKind.CHARLES_PREDICTIONS)


@dataclass(frozen=True)
class Event:
    seq: int
    kind: EventKind
    payload: dict

    def to_json(self) -> str:
        return json.dumps({"seq": self.seq, "kind": self.kind.value, **self.payload},
                          sort_keys=True, separators=(",", ":"), default=_jsonable)


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


@dataclass
class Transcript:
    protocol: str
    events: list = field(default_factory=list)

    def record(self, kind: EventKind, **payload: Any) -> Event:
        ev = Event(len(self.events), kind, payload)
        self.events.append(ev)
        return ev

    def first(self, kind: EventKind) -> Event:
        for ev in self.events:
            if ev.kind is kind:
                return ev
        raise LookupError(f"no {kind.value} event in transcript")

    def kinds(self) -> list:
        return [ev.kind for ev in self.events]

    def to_lines(self) -> str:
        """One JSON object per line: seq, kind and the payload fields."""
        header = json.dumps({"protocol": self.protocol}, sort_keys=True, separators=(",", ":"))
        return "\n".join([header] + [ev.to_json() for ev in self.events]) + "\n"

    @classmethod
    def from_lines(cls, text: str) -> "Transcript":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        t = cls(json.loads(lines[0])["protocol"])
        for ln in lines[1:]:
            d = json.loads(ln)
            seq = d.pop("seq")
            kind = EventKind(d.pop("kind"))
            if seq != len(t.events):
                raise ValueError(f"out-of-order event sequence {seq}")
            t.events.append(Event(seq, kind, d))
        return t


class Winner(str, enum.Enum):
    ALICE = "AliceWins"
    CHARLES = "CharlesWins"


@dataclass(frozen=True)
class Verdict:
    winner: Winner
    match_count: int
    n: int
    axis_angle: Optional[float] = None

    @property
    def alice_wins(self) -> bool:
        return self.winner is Winner.ALICE


def _vec(d: Direction) -> list:
    return [d.x, d.y, d.z]


def _dir(v: Iterable[float]) -> Direction:
    return Direction(*[float(c) for c in v])


def _match_count(t: Transcript) -> int:
    pred = np.asarray(t.first(EventKind.CHARLES_PREDICTIONS).payload["predictions"])
    out = np.asarray(t.first(EventKind.JUDGE_MEASURED).payload["outcomes"])
    return int(np.sum(pred == out))


def check_commitment_order(t: Transcript) -> bool:
    """Alice's commitment precedes every event carrying Charles's claim."""
    kinds = t.kinds()
    alice = (EventKind.ALICE_DECLARED_AXIS if t.protocol == "a"
             else EventKind.ALICE_CHOSE_DIRECTION)
    if alice not in kinds:
        return False
    first_alice = kinds.index(alice)
    first_charles = min((i for i, k in enumerate(kinds) if k in _CHARLES_CLAIMS),
                        default=len(kinds))
    judged = kinds.index(EventKind.JUDGE_MEASURED) if EventKind.JUDGE_MEASURED in kinds else -1
    return first_alice < first_charles and judged > first_charles


def judge_protocol_a(t: Transcript, params: ProtocolAParams) -> Verdict:
    matches = _match_count(t)
    alice_axis = Axis(_dir(t.first(EventKind.ALICE_DECLARED_AXIS).payload["axis"]))
    charles_axis = Axis(_dir(t.first(EventKind.CHARLES_DECLARED_AXIS).payload["axis"]))
    angle = alice_axis.angle_to(charles_axis)
    validated = matches >= params.required
    alice_wins = validated and angle <= params.alpha
    return Verdict(Winner.ALICE if alice_wins else Winner.CHARLES, matches, params.n, angle)


def judge_protocol_b(t: Transcript, params: ProtocolBParams) -> Verdict:
    matches = _match_count(t)
    # ties at the threshold go to Charles
    charles_wins = matches >= params.required
    return Verdict(Winner.CHARLES if charles_wins else Winner.ALICE, matches, params.n)


def _check_ensemble(e: Ensemble, n: int) -> None:
    if e.consumed or e.any_measured():
        raise AlreadyMeasuredError("protocols need a fresh, unmeasured ensemble")
    if len(e) != n:
        raise ValueError(f"params expect {n} particles, ensemble has {len(e)}")


def _claimed_axis(view: KnowledgeView, rng: np.random.Generator) -> Axis:
    if isinstance(view, Full):
        return view.notebook.axis
    if isinstance(view, BasisOnly):
        return view.axis
    return impostor_axis_guess(rng)


def _finish(t: Transcript, verdict: Verdict) -> None:
    t.record(EventKind.VERDICT_ISSUED, winner=verdict.winner.value,
             match_count=verdict.match_count, n=verdict.n, axis_angle=verdict.axis_angle)


def run_protocol_a(alice: KnowledgeView, charles: KnowledgeView, e: Ensemble,
                   params: ProtocolAParams, rng: np.random.Generator
                   ) -> tuple[Verdict, Transcript]:
    _check_ensemble(e, params.n)
    t = Transcript("a")

    alice_axis = _claimed_axis(alice, rng)
    t.record(EventKind.ALICE_DECLARED_AXIS, axis=_vec(alice_axis.representative))

    meas = _claimed_axis(charles, rng).representative
    predictions = predict(Predictor(charles), meas, params.n, rng)
    t.record(EventKind.CHARLES_DECLARED_AXIS, axis=_vec(meas))
    t.record(EventKind.CHARLES_PREDICTIONS, predictions=predictions)

    outcomes = measure_all(e, meas, rng)
    t.record(EventKind.JUDGE_MEASURED, direction=_vec(meas), outcomes=outcomes)

    verdict = judge_protocol_a(t, params)
    _finish(t, verdict)
    return verdict, t


def run_protocol_b(alice: KnowledgeView, charles: KnowledgeView, e: Ensemble,
                   params: ProtocolBParams, rng: np.random.Generator,
                   direction: Optional[Direction] = None) -> tuple[Verdict, Transcript]:
    """Run protocol B. ``direction`` forces Alice's announcement (for sweeps over theta)."""
    _check_ensemble(e, params.n)
    t = Transcript("b")

    if direction is None:
        if isinstance(alice, NoKnowledge):
            direction = uniform_direction(rng)
        else:
            direction = choose_perpendicular(_claimed_axis(alice, rng), rng)
    t.record(EventKind.ALICE_CHOSE_DIRECTION, direction=_vec(direction))

    if isinstance(charles, Full):
        predictions = disguised_predict(charles.notebook, direction,
                                        DisguisePolicy(params.charles_target_accuracy),
                                        rng, n=params.n)
    else:
        predictions = predict(Predictor(charles), direction, params.n, rng)
    t.record(EventKind.CHARLES_PREDICTIONS, predictions=predictions)

    outcomes = measure_all(e, direction, rng)
    t.record(EventKind.JUDGE_MEASURED, direction=_vec(direction), outcomes=outcomes)

    verdict = judge_protocol_b(t, params)
    _finish(t, verdict)
    return verdict, t


def soundness_protocol_a(alpha: float) -> float:
    """Chance a uniformly random axis lands within ``alpha`` of a fixed axis."""
    if not 0.0 <= alpha <= math.pi / 2:
        raise ValueError("alpha must lie in [0, pi/2]")
    # 1 - cos(alpha), written to stay accurate for small alpha
    return 2.0 * math.sin(alpha / 2.0) ** 2


def charles_win_probability_b(n: int, delta: float, theta: float,
                              target_accuracy: float = 1.0) -> float:
    p = min(target_accuracy, 0.5 * (1.0 + abs(math.cos(theta))))
    return binomial_tail(n, required_matches(0.5 + delta, n), p)


def charles_win_probability_b_random(n: int, delta: float, target_accuracy: float = 1.0) -> float:
    """Protocol B win chance for Charles when Alice's direction is uniform on the sphere.

    |cos theta| is uniform on [0, 1] for a uniform direction, so this is a
    one-dimensional integral of the exact binomial tail.
    """
    k = required_matches(0.5 + delta, n)

    def tail(u: float) -> float:
        return binomial_tail(n, k, min(target_accuracy, 0.5 * (1.0 + u)))

    # the tail switches on sharply near p = k/n; give quad that breakpoint
    knee = min(1.0, max(0.0, 2.0 * k / n - 1.0))
    pts = [knee] if 0.0 < knee < 1.0 else None
    val, _ = integrate.quad(tail, 0.0, 1.0, points=pts, limit=200, epsabs=1e-12, epsrel=1e-10)
    return min(1.0, max(0.0, val))


def alice_win_probability_a(alice_kind: str, charles_kind: str, params: ProtocolAParams) -> float:
    """Closed-form win chance for Alice in protocol A on an untampered ensemble.

    Assumes a Full Charles holds the ensemble's own notebook.
    """
    if charles_kind == "full":
        validated = 1.0
    else:
        validated = binomial_tail(params.n, params.required, 0.5)
    if charles_kind == "none" or alice_kind == "none":
        close = soundness_protocol_a(params.alpha)
    else:
        close = 1.0
    return validated * close


def charles_win_probability_b_for(alice_kind: str, charles_kind: str,
                                  params: ProtocolBParams) -> float:
    """Closed-form win chance for Charles in protocol B on an untampered ensemble."""
    if charles_kind != "full":
        return binomial_tail(params.n, params.required, 0.5)
    if alice_kind == "none":
        return charles_win_probability_b_random(params.n, params.delta,
                                                params.charles_target_accuracy)
    return charles_win_probability_b(params.n, params.delta, math.pi / 2,
                                     params.charles_target_accuracy)
