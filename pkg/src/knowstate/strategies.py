"""Prediction policies for each knowledge level and their accuracy curves."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ensemble import BasisOnly, Full, KnowledgeView, NoKnowledge, Notebook, ViewKind
from .quantum import NORM_TOL, Axis, Direction
from .stats import uniform_direction

TIE_TOL = 1e-12


@dataclass(frozen=True)
class Predictor:
    view: KnowledgeView
    tie_rule: int = 1

    def __post_init__(self) -> None:
        if self.tie_rule not in (1, -1):
            raise ValueError("tie_rule must be +1 or -1")


@dataclass(frozen=True)
class DisguisePolicy:
    target_accuracy: float = 1.0

    def __post_init__(self) -> None:
        if not 0.5 <= self.target_accuracy <= 1.0:
            raise ValueError(f"target_accuracy must lie in [0.5, 1], got {self.target_accuracy!r}")


def _kind(view_or_kind) -> ViewKind:
    if isinstance(view_or_kind, (Full, BasisOnly, NoKnowledge)):
        return view_or_kind.kind
    return ViewKind(view_or_kind)


def _optimal_guesses(notebook: Notebook, meas: Direction, n: int, tie_rule: int) -> np.ndarray:
    if len(notebook) < n:
        raise ValueError(f"notebook holds {len(notebook)} entries, {n} predictions requested")
    c = notebook.axis.representative.dot(meas)
    if abs(c) <= TIE_TOL:
        # negating meas flips the orientation, so the tie guess flips too
        return np.full(n, tie_rule * meas.orientation(), dtype=np.int8)
    sign = 1 if c > 0 else -1
    return (sign * notebook.signs[:n]).astype(np.int8)


def predict(p: Predictor, meas: Direction, n: int, rng: np.random.Generator) -> np.ndarray:
    """Predicted outcomes for the first ``n`` particles measured along ``meas``.

    Full knowledge guesses ``sign(cos theta) * sign_i``; the other views
    can do no better than a fair coin.
    """
    if isinstance(p.view, Full):
        return _optimal_guesses(p.view.notebook, meas, n, p.tie_rule)
    return np.where(rng.random(n) < 0.5, 1, -1).astype(np.int8)


def expected_accuracy(view_kind, theta: float) -> float:
    """Per-particle success probability at angle ``theta`` from the preparation axis."""
    if not 0.0 <= theta <= math.pi + NORM_TOL:
        raise ValueError("theta must lie in [0, pi]")
    if _kind(view_kind) is ViewKind.FULL:
        return 0.5 * (1.0 + abs(math.cos(theta)))
    return 0.5


def expected_accuracy_random_direction(view_kind) -> float:
    # mean of (1 + |u|)/2 for u = cos(theta) uniform on [-1, 1]
    return 0.75 if _kind(view_kind) is ViewKind.FULL else 0.5


def disguise_keep_probability(optimal: float, target: float) -> float:
    """Probability ``q`` of emitting the optimal guess so accuracy = min(target, optimal)."""
    if optimal <= target or optimal <= 0.5:
        return 1.0
    return (target - (1.0 - optimal)) / (2.0 * optimal - 1.0)


def disguised_predict(notebook: Notebook, meas: Direction, policy: DisguisePolicy,
                      rng: np.random.Generator, n: int | None = None,
                      tie_rule: int = 1) -> np.ndarray:
    """Optimal guesses, each independently flipped with probability ``1 - q``."""
    n = len(notebook) if n is None else n
    guesses = _optimal_guesses(notebook, meas, n, tie_rule)
    theta = math.acos(max(-1.0, min(1.0, notebook.axis.representative.dot(meas))))
    q = disguise_keep_probability(expected_accuracy(ViewKind.FULL, theta),
                                  policy.target_accuracy)
    if q >= 1.0:
        return guesses
    flip = rng.random(n) >= q
    return np.where(flip, -guesses, guesses).astype(np.int8)


def _perpendicular_basis(d: Direction) -> tuple[np.ndarray, np.ndarray]:
    a = d.as_array()
    # cross with the coordinate axis least aligned with d
    helper = np.zeros(3)
    helper[int(np.argmin(np.abs(a)))] = 1.0
    u = np.cross(a, helper)
    u /= np.linalg.norm(u)
    v = np.cross(a, u)
    v /= np.linalg.norm(v)
    return u, v


def direction_at_angle(axis: Axis, theta: float, phi: float = 0.0) -> Direction:
    """Direction making angle ``theta`` with the axis representative."""
    u, v = _perpendicular_basis(axis.representative)
    a = axis.representative.as_array()
    w = math.sin(theta) * (math.cos(phi) * u + math.sin(phi) * v) + math.cos(theta) * a
    return Direction.from_vector(w)


def choose_perpendicular(axis: Axis, rng: np.random.Generator) -> Direction:
    """Uniform point on the great circle orthogonal to ``axis``."""
    u, v = _perpendicular_basis(axis.representative)
    phi = rng.uniform(0.0, 2.0 * math.pi)
    w = math.cos(phi) * u + math.sin(phi) * v
    # project out any residual component along the axis before normalizing
    a = axis.representative.as_array()
    w -= np.dot(w, a) * a
    return Direction.from_vector(w)


def impostor_axis_guess(rng: np.random.Generator) -> Axis:
    return Axis(uniform_direction(rng))
