"""Bloch-sphere geometry and single-qubit state algebra.

Conventions used throughout the package:

* a pure qubit state is identified by its unit Bloch vector
  r = (sin t cos f, sin t sin f, cos t) with polar angle t and azimuth f;
* the corresponding ket is (cos(t/2), e^{if} sin(t/2)), canonicalized so the
  first amplitude is real and non-negative (and the second real positive when
  the first vanishes), making ket equality testable componentwise;
* a density operator is rho = (I + r.sigma)/2 with |r| <= 1.

Batch helpers operate on float arrays of shape (n, 3) and are what the Monte
Carlo drivers use; the scalar types are the reference API.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidDirectionError, InvalidEnsembleError, InvalidStateError

ALGEBRA_TOL = 1e-12  # algebraic identities
ROUNDTRIP_TOL = 1e-10  # identities routed through transcendental functions

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)


@dataclass(frozen=True)
class BlochVector:
    """Unit vector in R^3 identifying a pure qubit state."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        n2 = self.x * self.x + self.y * self.y + self.z * self.z
        if abs(n2 - 1.0) > ALGEBRA_TOL:
            raise InvalidDirectionError(f"direction must be unit length, got |v|^2={n2!r}")

    @classmethod
    def normalized(cls, x: float, y: float, z: float) -> "BlochVector":
        """Rescale (x, y, z) to unit length."""
        n = math.sqrt(x * x + y * y + z * z)
        if n == 0.0:
            raise InvalidDirectionError("cannot normalize the zero vector")
        return cls(x / n, y / n, z / n)

    @classmethod
    def from_array(cls, a) -> "BlochVector":
        return cls(float(a[0]), float(a[1]), float(a[2]))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def antipode(self) -> "BlochVector":
        """The opposite point on the sphere; exact (componentwise negation)."""
        return BlochVector(-self.x, -self.y, -self.z)

    def dot(self, other: "BlochVector") -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z


Z_AXIS = BlochVector(0.0, 0.0, 1.0)
X_AXIS = BlochVector(1.0, 0.0, 0.0)
Y_AXIS = BlochVector(0.0, 1.0, 0.0)


@dataclass(frozen=True)
class QubitKet:
    """Normalized complex 2-vector in the fixed phase convention.

    amp0 must be real and >= 0; when amp0 vanishes, amp1 must be real and
    positive. Use from_amplitudes() to canonicalize arbitrary amplitudes.
    """

    amp0: complex
    amp1: complex

    def __post_init__(self):
        n2 = abs(self.amp0) ** 2 + abs(self.amp1) ** 2
        if abs(n2 - 1.0) > ALGEBRA_TOL:
            raise InvalidStateError(f"ket must be normalized, got norm^2={n2!r}")
        if abs(self.amp0.imag) > ALGEBRA_TOL or self.amp0.real < -ALGEBRA_TOL:
            raise InvalidStateError("phase convention: amp0 must be real and >= 0")
        if abs(self.amp0) <= ALGEBRA_TOL and (
            abs(self.amp1.imag) > ALGEBRA_TOL or self.amp1.real <= 0.0
        ):
            raise InvalidStateError("phase convention: amp1 must be real positive when amp0 = 0")

    @classmethod
    def from_amplitudes(cls, amp0: complex, amp1: complex) -> "QubitKet":
        """Normalize and rotate the global phase into the convention."""
        amp0 = complex(amp0)
        amp1 = complex(amp1)
        norm = math.sqrt(abs(amp0) ** 2 + abs(amp1) ** 2)
        if norm == 0.0:
            raise InvalidStateError("cannot normalize the zero vector")
        amp0 /= norm
        amp1 /= norm
        anchor = amp0 if abs(amp0) > ALGEBRA_TOL else amp1
        phase = anchor / abs(anchor)
        return cls(amp0 / phase, amp1 / phase)

    def as_array(self) -> np.ndarray:
        return np.array([self.amp0, self.amp1], dtype=complex)

    def inner(self, other: "QubitKet") -> complex:
        """<self|other>."""
        return self.amp0.conjugate() * other.amp0 + self.amp1.conjugate() * other.amp1

    def projector(self) -> np.ndarray:
        """|k><k| as a 2x2 complex matrix."""
        v = self.as_array()
        return np.outer(v, v.conj())


@dataclass(frozen=True)
class DensityOperator:
    """2x2 density matrix: Hermitian, unit trace, positive semidefinite."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (2, 2):
            raise InvalidStateError(f"density operator must be 2x2, got shape {m.shape}")
        if not np.allclose(m, m.conj().T, rtol=0.0, atol=ALGEBRA_TOL):
            raise InvalidStateError("density operator must be Hermitian")
        if abs(np.trace(m).real - 1.0) > ALGEBRA_TOL or abs(np.trace(m).imag) > ALGEBRA_TOL:
            raise InvalidStateError("density operator must have unit trace")
        eigs = np.linalg.eigvalsh(m)
        if eigs.min() < -ALGEBRA_TOL:
            raise InvalidStateError(f"density operator must be positive, eigenvalues {eigs}")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def bloch_vector(self) -> np.ndarray:
        """Bloch vector of the mixture; length <= 1, not necessarily unit."""
        m = self.matrix
        return np.array(
            [
                np.trace(m @ PAULI_X).real,
                np.trace(m @ PAULI_Y).real,
                np.trace(m @ PAULI_Z).real,
            ]
        )


@dataclass(frozen=True)
class EnsembleDecomposition:
    """Weighted pure states sharing one density operator."""

    members: tuple[tuple[float, BlochVector], ...]

    def __post_init__(self):
        if len(self.members) == 0:
            raise InvalidEnsembleError("ensemble must have at least one member")
        weights = [w for w, _ in self.members]
        if min(weights) < -ALGEBRA_TOL:
            raise InvalidEnsembleError(f"weights must be non-negative, got {weights}")
        total = math.fsum(weights)
        if abs(total - 1.0) > ALGEBRA_TOL:
            raise InvalidEnsembleError(f"weights must sum to 1, got {total!r}")

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for w, _ in self.members])

    @property
    def directions(self) -> np.ndarray:
        """Member directions stacked as an (n, 3) array."""
        return np.array([[d.x, d.y, d.z] for _, d in self.members])


def ket_from_bloch(v: BlochVector) -> QubitKet:
    """Ket (cos(t/2), e^{if} sin(t/2)) for the direction v.

    The half-angle amplitudes are computed from z directly, which is exact at
    both poles; the pole azimuth defaults to f = 0.
    """
    c = math.sqrt(max(0.0, (1.0 + v.z) / 2.0))
    s = math.sqrt(max(0.0, (1.0 - v.z) / 2.0))
    xy = math.hypot(v.x, v.y)
    if xy == 0.0:
        phase = 1.0 + 0.0j
    else:
        phase = complex(v.x / xy, v.y / xy)
    return QubitKet.from_amplitudes(c, phase * s)


def bloch_from_ket(k: QubitKet) -> BlochVector:
    """Bloch vector (2 Re a0* a1, 2 Im a0* a1, |a0|^2 - |a1|^2)."""
    cross = k.amp0.conjugate() * k.amp1
    return BlochVector.normalized(
        2.0 * cross.real, 2.0 * cross.imag, abs(k.amp0) ** 2 - abs(k.amp1) ** 2
    )


def density_from_mixture(ens: EnsembleDecomposition) -> DensityOperator:
    """Sum of weighted pure-state projectors.

    The Bloch vector of the result is the weight-averaged sum of the member
    Bloch vectors.
    """
    m = np.zeros((2, 2), dtype=complex)
    for weight, direction in ens.members:
        m += weight * ket_from_bloch(direction).projector()
    return DensityOperator(m)


def overlap2(a: BlochVector, b: BlochVector) -> float:
    """|<a|b>|^2 = cos^2(t/2) = (1 + a.b)/2 with t the angle between a and b."""
    return min(1.0, max(0.0, (1.0 + a.dot(b)) / 2.0))


def angle_between(a: BlochVector, b: BlochVector) -> float:
    """Angle in [0, pi] between two unit vectors."""
    return math.acos(min(1.0, max(-1.0, a.dot(b))))


def random_direction(rng: np.random.Generator) -> BlochVector:
    """One point uniform on the sphere: z uniform in [-1, 1], azimuth uniform."""
    z = rng.uniform(-1.0, 1.0)
    phi = rng.uniform(0.0, 2.0 * math.pi)
    s = math.sqrt(max(0.0, 1.0 - z * z))
    return BlochVector.normalized(s * math.cos(phi), s * math.sin(phi), z)


# ---------------------------------------------------------------------------
# batch kernels (float arrays of shape (n, 3))

def random_directions(rng: np.random.Generator, n: int) -> np.ndarray:
    """(n, 3) array of directions uniform on the sphere.

    Draw order is fixed (all z first, then all azimuths), so the output is a
    pure function of the generator state.
    """
    z = rng.uniform(-1.0, 1.0, size=n)
    phi = rng.uniform(0.0, 2.0 * math.pi, size=n)
    s = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    return np.stack([s * np.cos(phi), s * np.sin(phi), z], axis=1)


def dots(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Rowwise dot products of two (n, 3) arrays, clipped to [-1, 1]."""
    return np.clip(np.einsum("ij,ij->i", a, b), -1.0, 1.0)


def angles_between(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Rowwise angles in [0, pi] between two (n, 3) arrays."""
    return np.arccos(dots(a, b))


def orthonormal_frames(axes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Two (n, 3) arrays (e1, e2) completing each row of `axes` to a frame.

    The helper axis is x-hat except where |x| dominates, where y-hat is used;
    the choice is deterministic per row.
    """
    axes = np.asarray(axes, dtype=float)
    helper = np.zeros_like(axes)
    use_y = np.abs(axes[:, 0]) > 0.9
    helper[use_y, 1] = 1.0
    helper[~use_y, 0] = 1.0
    e1 = np.cross(axes, helper)
    e1 /= np.linalg.norm(e1, axis=1, keepdims=True)
    e2 = np.cross(axes, e1)
    return e1, e2


def directions_at_angle(axes: np.ndarray, cos_theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Unit vectors at polar angle arccos(cos_theta) and azimuth phi about each axis."""
    e1, e2 = orthonormal_frames(axes)
    t = cos_theta[:, None]
    s = np.sqrt(np.clip(1.0 - cos_theta * cos_theta, 0.0, None))[:, None]
    return t * axes + s * (np.cos(phi)[:, None] * e1 + np.sin(phi)[:, None] * e2)
