"""Coin-toss ensembles, the preparation notebook and the three knowledge views."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .quantum import Axis, DensityMatrix, Direction, parse_axis


class EnsembleError(RuntimeError):
    pass


class AlreadyMeasuredError(EnsembleError):
    """A particle (or the whole ensemble) was measured before."""


class ConsumedEnsembleError(EnsembleError):
    """The ensemble was handed over to :func:`substitute`."""


@dataclass(frozen=True)
class PreparationSpec:
    axis: Axis
    count: int
    bias: float = 0.5
    seed: int = 0

    def __post_init__(self) -> None:
        if not isinstance(self.axis, Axis):
            object.__setattr__(self, "axis", parse_axis(self.axis))
        if int(self.count) != self.count or self.count < 1:
            raise ValueError(f"count must be a positive integer, got {self.count!r}")
        if not 0.0 <= self.bias <= 1.0:
            raise ValueError(f"bias must lie in [0, 1], got {self.bias!r}")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        object.__setattr__(self, "count", int(self.count))
        object.__setattr__(self, "seed", int(self.seed))


@dataclass(frozen=True, eq=False)
class Notebook:
    """Preparation record: sign of each numbered particle along ``axis``."""

    axis: Axis
    signs: np.ndarray

    def __post_init__(self) -> None:
        s = np.array(self.signs, dtype=np.int8)
        if s.ndim != 1 or not np.all((s == 1) | (s == -1)):
            raise ValueError("signs must be a 1-D sequence of +1/-1")
        s.setflags(write=False)
        object.__setattr__(self, "signs", s)

    def __len__(self) -> int:
        return len(self.signs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Notebook):
            return NotImplemented
        return self.axis == other.axis and np.array_equal(self.signs, other.signs)

    __hash__ = None


class Provenance(enum.Enum):
    ORIGINAL = "original"
    SUBSTITUTED = "substituted"


class Ensemble:
    """Sealed, numbered particles. Hidden states are only observable by measuring.

    Each particle is a +/- eigenstate of the preparation axis. Measuring a
    particle collapses it and it may not be measured again.
    """

    def __init__(self, axis: Axis, signs: np.ndarray, provenance: Provenance) -> None:
        self._axis = axis.representative.as_array()
        self._signs = np.asarray(signs, dtype=np.int8)
        self._measured = np.zeros(len(self._signs), dtype=bool)
        # collapse record: outcome per particle and index into _meas_dirs
        self._outcomes = np.zeros(len(self._signs), dtype=np.int8)
        self._meas_idx = np.full(len(self._signs), -1, dtype=np.int32)
        self._meas_dirs: list[Direction] = []
        self._consumed = False
        self.provenance = provenance

    def __len__(self) -> int:
        return len(self._signs)

    def __repr__(self) -> str:
        return (f"Ensemble(n={len(self)}, provenance={self.provenance.value}, "
                f"measured={int(self._measured.sum())})")

    @property
    def consumed(self) -> bool:
        return self._consumed

    def is_measured(self, index: int) -> bool:
        return bool(self._measured[index])

    def any_measured(self) -> bool:
        return bool(self._measured.any())

    def _check_usable(self) -> None:
        if self._consumed:
            raise ConsumedEnsembleError("ensemble was consumed by a substitution")

    def _collapse(self, idx, direction: Direction, outcomes) -> None:
        self._meas_dirs.append(direction)
        self._measured[idx] = True
        self._outcomes[idx] = outcomes
        self._meas_idx[idx] = len(self._meas_dirs) - 1


class ViewKind(str, enum.Enum):
    FULL = "full"
    BASIS_ONLY = "basis_only"
    NONE = "none"


@dataclass(frozen=True)
class Full:
    notebook: Notebook
    kind: ViewKind = field(default=ViewKind.FULL, init=False, repr=False)

    @property
    def axis(self) -> Axis:
        return self.notebook.axis


@dataclass(frozen=True)
class BasisOnly:
    axis: Axis
    kind: ViewKind = field(default=ViewKind.BASIS_ONLY, init=False, repr=False)


@dataclass(frozen=True)
class NoKnowledge:
    kind: ViewKind = field(default=ViewKind.NONE, init=False, repr=False)


KnowledgeView = Union[Full, BasisOnly, NoKnowledge]


def _rng_for(spec: PreparationSpec, rng: Optional[np.random.Generator]) -> np.random.Generator:
    return rng if rng is not None else np.random.default_rng(spec.seed)


def prepare(spec: PreparationSpec, rng: Optional[np.random.Generator] = None
            ) -> tuple[Ensemble, Notebook]:
    """Toss a coin per particle and prepare it up or down along ``spec.axis``.

    Without an explicit ``rng`` the stream is seeded from ``spec.seed``.
    """
    rng = _rng_for(spec, rng)
    signs = np.where(rng.random(spec.count) < spec.bias, 1, -1).astype(np.int8)
    nb = Notebook(spec.axis, signs)
    return Ensemble(spec.axis, signs.copy(), Provenance.ORIGINAL), nb


def ensemble_density(spec: PreparationSpec) -> DensityMatrix:
    """Single-particle marginal of the preparation."""
    d = spec.axis.representative
    w = 2.0 * spec.bias - 1.0
    return DensityMatrix((w * d.x, w * d.y, w * d.z))


def measure_particle(e: Ensemble, index: int, meas: Direction,
                     rng: np.random.Generator) -> int:
    e._check_usable()
    if not 0 <= index < len(e):
        raise IndexError(f"particle index {index} out of range for {len(e)} particles")
    if e._measured[index]:
        raise AlreadyMeasuredError(f"particle {index} was already measured")
    # Born rule (1 + s.m)/2 with s = sign * axis, same arithmetic as measure_all
    c = float(np.dot(e._axis, meas.as_array()))
    p = 0.5 * (1.0 + int(e._signs[index]) * c)
    outcome = 1 if rng.random() < p else -1
    e._collapse(index, meas, outcome)
    return outcome


def measure_all(e: Ensemble, meas: Direction, rng: np.random.Generator) -> np.ndarray:
    """Measure every particle along ``meas``; returns an int8 array of +/-1.

    Draws one uniform per particle in index order, so the result equals
    calling :func:`measure_particle` for ``i = 0..n-1`` on the same stream.
    """
    e._check_usable()
    if e._measured.any():
        raise AlreadyMeasuredError("ensemble has measured particles")
    c = float(np.dot(e._axis, meas.as_array()))
    p_plus = 0.5 * (1.0 + e._signs * c)
    outcomes = np.where(rng.random(len(e)) < p_plus, 1, -1).astype(np.int8)
    e._collapse(slice(None), meas, outcomes)
    return outcomes


def substitute(e: Ensemble, replacement: PreparationSpec,
               rng: Optional[np.random.Generator] = None) -> Ensemble:
    """Swap ``e`` for a fresh ensemble; ``e`` can no longer be used."""
    e._check_usable()
    if e._measured.any():
        raise AlreadyMeasuredError("cannot substitute a measured ensemble")
    e._consumed = True
    new, _ = prepare(replacement, rng)
    new.provenance = Provenance.SUBSTITUTED
    return new


def notebook_matches(e: Ensemble, nb: Notebook, rng: np.random.Generator) -> np.ndarray:
    """Measure all particles along the notebook axis; True where the record agrees."""
    if len(nb) != len(e):
        raise ValueError(f"notebook has {len(nb)} entries, ensemble has {len(e)}")
    outcomes = measure_all(e, nb.axis.representative, rng)
    return outcomes == nb.signs


def verify_against_notebook(e: Ensemble, nb: Notebook, rng: np.random.Generator) -> int:
    return int(notebook_matches(e, nb, rng).sum())
