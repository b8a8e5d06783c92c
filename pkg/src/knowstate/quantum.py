"""Single-qubit state algebra on the Bloch sphere.

States and density matrices are stored as Bloch vectors; the 2x2 matrix
view is derived on demand. Everything here is an immutable value except
the random generators passed into the sampling helpers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

NORM_TOL = 1e-12
EIG_TOL = 1e-12
EFFECT_SUM_TOL = 1e-10

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)


class InvalidStateError(ValueError):
    """A direction, state or density matrix violates its normalization."""


class InvalidMixtureError(ValueError):
    """Mixture weights are negative or do not sum to one."""


class InvalidMeasurementError(ValueError):
    """Effect operators are not PSD or do not sum to the identity."""


@dataclass(frozen=True)
class Direction:
    """Unit vector on the Bloch sphere."""

    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        n2 = self.x * self.x + self.y * self.y + self.z * self.z
        if not math.isfinite(n2) or abs(n2 - 1.0) > NORM_TOL:
            raise InvalidStateError(
                f"direction must be unit norm, got |v|^2 = {n2!r}")

    @classmethod
    def from_vector(cls, v: Sequence[float]) -> "Direction":
        """Normalize an arbitrary nonzero 3-vector."""
        try:
            x, y, z = (float(c) for c in v)
        except (TypeError, ValueError):
            raise InvalidStateError(f"expected a 3-vector, got {v!r}") from None
        n = math.hypot(x, y, z)
        if n == 0.0 or not math.isfinite(n):
            raise InvalidStateError("cannot normalize a zero or non-finite vector")
        return cls(x / n, y / n, z / n)

    @classmethod
    def from_angles(cls, theta: float, phi: float = 0.0) -> "Direction":
        """Polar angle ``theta`` from +z, azimuth ``phi`` from +x."""
        s = math.sin(theta)
        return cls.from_vector((s * math.cos(phi), s * math.sin(phi), math.cos(theta)))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def dot(self, other: "Direction") -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def __neg__(self) -> "Direction":
        return Direction(-self.x, -self.y, -self.z)

    def orientation(self) -> int:
        """+1 if the first nonzero component is positive, else -1."""
        for c in (self.x, self.y, self.z):
            if c != 0.0:
                return 1 if c > 0 else -1
        raise AssertionError("unreachable for a unit vector")


X = Direction(1.0, 0.0, 0.0)
Y = Direction(0.0, 1.0, 0.0)
Z = Direction(0.0, 0.0, 1.0)


@dataclass(frozen=True, init=False)
class Axis:
    """Unoriented line through the origin; ``Axis(d) == Axis(-d)``.

    The stored representative is canonical: its first nonzero component
    is positive.
    """

    representative: Direction

    def __init__(self, direction: Direction) -> None:
        if direction.orientation() < 0:
            direction = -direction
        object.__setattr__(self, "representative", direction)

    def angle_to(self, other: "Axis") -> float:
        """Angle between two axes, in [0, pi/2]."""
        c = min(1.0, abs(self.representative.dot(other.representative)))
        return math.acos(c)

    def contains(self, d: Direction, tol: float = NORM_TOL) -> bool:
        return abs(abs(self.representative.dot(d)) - 1.0) <= tol


X_AXIS = Axis(X)
Y_AXIS = Axis(Y)
Z_AXIS = Axis(Z)


def parse_axis(value) -> Axis:
    """Accept ``"x" | "y" | "z"`` or three reals (normalized)."""
    if isinstance(value, Axis):
        return value
    if isinstance(value, Direction):
        return Axis(value)
    if isinstance(value, str):
        try:
            return {"x": X_AXIS, "y": Y_AXIS, "z": Z_AXIS}[value.strip().lower()]
        except KeyError:
            raise InvalidStateError(f"unknown axis literal {value!r}") from None
    return Axis(Direction.from_vector(value))


@dataclass(frozen=True)
class QubitPureState:
    bloch: Direction

    @classmethod
    def along(cls, axis: Axis, sign: int = 1) -> "QubitPureState":
        d = axis.representative
        return cls(d if sign > 0 else -d)

    def density(self) -> "DensityMatrix":
        return DensityMatrix(self.bloch.as_array())


@dataclass(frozen=True, init=False, eq=False)
class DensityMatrix:
    """Qubit density matrix ``(I + r.sigma)/2`` held as its Bloch vector."""

    bloch: tuple

    def __init__(self, bloch: Sequence[float]) -> None:
        r = tuple(float(c) for c in bloch)
        if len(r) != 3:
            raise InvalidStateError("Bloch vector must have three components")
        n = math.sqrt(sum(c * c for c in r))
        if not math.isfinite(n) or n > 1.0 + NORM_TOL:
            raise InvalidStateError(f"Bloch vector length {n!r} exceeds 1")
        object.__setattr__(self, "bloch", r)

    @classmethod
    def maximally_mixed(cls) -> "DensityMatrix":
        return cls((0.0, 0.0, 0.0))

    @classmethod
    def from_matrix(cls, rho: np.ndarray) -> "DensityMatrix":
        rho = np.asarray(rho, dtype=complex)
        if rho.shape != (2, 2):
            raise InvalidStateError("expected a 2x2 matrix")
        if not np.allclose(rho, rho.conj().T, atol=1e-12):
            raise InvalidStateError("matrix is not Hermitian")
        tr = np.trace(rho).real
        if abs(tr - 1.0) > 1e-12:
            raise InvalidStateError(f"trace is {tr!r}, expected 1")
        r = [np.trace(rho @ s).real for s in (PAULI_X, PAULI_Y, PAULI_Z)]
        return cls(r)

    def __eq__(self, other) -> bool:
        if not isinstance(other, DensityMatrix):
            return NotImplemented
        return self.bloch == other.bloch

    def __hash__(self) -> int:
        return hash(self.bloch)

    def as_array(self) -> np.ndarray:
        return np.array(self.bloch)

    def matrix(self) -> np.ndarray:
        x, y, z = self.bloch
        return 0.5 * (IDENTITY + x * PAULI_X + y * PAULI_Y + z * PAULI_Z)

    def eigenvalues(self) -> tuple[float, float]:
        n = float(np.linalg.norm(self.bloch))
        return (0.5 * (1.0 - n), 0.5 * (1.0 + n))

    def purity(self) -> float:
        n2 = sum(c * c for c in self.bloch)
        return 0.5 * (1.0 + n2)

    def is_maximally_mixed(self, tol: float = 0.0) -> bool:
        return max(abs(c) for c in self.bloch) <= tol


class GeneralizedMeasurement:
    """POVM on one qubit: PSD effects summing to the identity."""

    def __init__(self, effects: Iterable[np.ndarray]) -> None:
        effs = [np.array(e, dtype=complex) for e in effects]
        if not effs:
            raise InvalidMeasurementError("a measurement needs at least one effect")
        total = np.zeros((2, 2), dtype=complex)
        for i, e in enumerate(effs):
            if e.shape != (2, 2):
                raise InvalidMeasurementError(f"effect {i} is not 2x2")
            if not np.allclose(e, e.conj().T, atol=EFFECT_SUM_TOL):
                raise InvalidMeasurementError(f"effect {i} is not Hermitian")
            if np.linalg.eigvalsh(e).min() < -EIG_TOL:
                raise InvalidMeasurementError(f"effect {i} is not PSD")
            total += e
        if np.abs(total - IDENTITY).max() > EFFECT_SUM_TOL:
            raise InvalidMeasurementError("effects do not sum to the identity")
        for e in effs:
            e.setflags(write=False)
        self._effects = tuple(effs)

    @property
    def effects(self) -> tuple:
        return self._effects

    def __len__(self) -> int:
        return len(self._effects)

    @classmethod
    def projective(cls, d: Direction) -> "GeneralizedMeasurement":
        p = QubitPureState(d).density().matrix()
        return cls([p, IDENTITY - p])

    @classmethod
    def random(cls, n_outcomes: int, rng: np.random.Generator) -> "GeneralizedMeasurement":
        """Random PSD effects rescaled by ``S^{-1/2}`` so they sum to I."""
        raw = []
        for _ in range(n_outcomes):
            g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
            raw.append(g @ g.conj().T)
        s = sum(raw)
        w, v = np.linalg.eigh(s)
        s_inv_half = v @ np.diag(w ** -0.5) @ v.conj().T
        effs = [s_inv_half @ a @ s_inv_half for a in raw]
        effs = [0.5 * (e + e.conj().T) for e in effs]
        # absorb rounding drift into the last effect
        effs[-1] = effs[-1] + (IDENTITY - sum(effs))
        return cls(effs)


def _clamp01(p: float) -> float:
    return 0.0 if p < 0.0 else 1.0 if p > 1.0 else p


def born_probability(state: QubitPureState, meas: Direction) -> float:
    """Probability of outcome +1 when measuring ``state`` along ``meas``."""
    return _clamp01(0.5 * (1.0 + state.bloch.dot(meas)))


def sample_outcome(state: QubitPureState, meas: Direction, rng: np.random.Generator) -> int:
    return 1 if rng.random() < born_probability(state, meas) else -1


def density_of_mixture(components: Iterable[tuple[float, QubitPureState]]) -> DensityMatrix:
    comps = list(components)
    if not comps:
        raise InvalidMixtureError("empty mixture")
    weights = [float(w) for w, _ in comps]
    if any(w < 0 for w in weights):
        raise InvalidMixtureError("negative mixture weight")
    if abs(math.fsum(weights) - 1.0) > 1e-12:
        raise InvalidMixtureError(f"weights sum to {math.fsum(weights)!r}, expected 1")
    r = [math.fsum(w * getattr(s.bloch, c) for w, (_, s) in zip(weights, comps))
         for c in "xyz"]
    return DensityMatrix(r)


def outcome_distribution(rho: DensityMatrix, meas: Direction) -> float:
    """Probability of +1 for a projective measurement along ``meas``."""
    x, y, z = rho.bloch
    return _clamp01(0.5 * (1.0 + x * meas.x + y * meas.y + z * meas.z))


def generalized_distribution(rho: DensityMatrix, m: GeneralizedMeasurement) -> list[float]:
    mat = rho.matrix()
    out = []
    for e in m.effects:
        p = float(np.trace(e @ mat).real)
        if p < -EIG_TOL:
            raise InvalidMeasurementError(f"negative outcome probability {p!r}")
        out.append(_clamp01(p))
    return out


def trace_distance(a: DensityMatrix, b: DensityMatrix) -> float:
    d = math.sqrt(sum((p - q) ** 2 for p, q in zip(a.bloch, b.bloch)))
    return min(1.0, 0.5 * d)


def direction_grid_26() -> list[Direction]:
    """Faces, edges and corners of the unit cube, normalized."""
    out = []
    for i in (-1, 0, 1):
        for j in (-1, 0, 1):
            for k in (-1, 0, 1):
                if (i, j, k) != (0, 0, 0):
                    out.append(Direction.from_vector((i, j, k)))
    return out
