"""Triple-multiplexed phase hologram and its coupled-mode matrix.

Each of the three gratings is the interference of one basis state with its
own reference plane wave; the gratings are recorded incoherently, so the
index modulation is the plain sum of three intensity patterns.  Coupling
coefficients use the unit-modulus phases of the basis states (sqrt(d) times
the normalized amplitudes) together with

    kappa2 = beta**2 * (delta_n / n0) / (6 * (3 + sqrt(3)))
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from mubsorter.errors import InvalidSpecError
from mubsorter.hilbert import StateVector
from mubsorter.optics import OpticalConfig, PlaneWaveMode

MODE_ORDER = ("r1", "r2", "r3", "sa", "sb", "sc")

INDEX_NORMALIZATION = 6.0 * (1.0 + math.sqrt(3.0))
KAPPA_NORMALIZATION = 6.0 * (3.0 + math.sqrt(3.0))


def kappa2(config: OpticalConfig) -> float:
    """Coupling constant kappa**2 (rad^2/m^2)."""
    return config.beta**2 * config.material.contrast / KAPPA_NORMALIZATION


@dataclass(frozen=True)
class RecordedGrating:
    """One exposure: ``recorded_state`` over the signal modes against ``reference``."""

    index: int
    reference: PlaneWaveMode
    recorded_state: StateVector
    signals: tuple[PlaneWaveMode, ...]

    def __post_init__(self):
        if abs(self.recorded_state.norm() - 1.0) > 1e-12:
            raise InvalidSpecError("recorded state must be normalized")
        if self.recorded_state.dim != len(self.signals):
            raise InvalidSpecError("one signal mode is needed per state component")


def intensity_modulation(g: RecordedGrating, x, z):
    """Return 2 - |exp(i k_r.r) + sum_j c_j exp(i k_j.r)|**2 at (x, z).

    ``x`` and ``z`` broadcast against each other.
    """
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    ref = g.reference
    field = np.exp(1j * (ref.kx * x + ref.kz * z))
    for c, mode in zip(g.recorded_state.amps, g.signals):
        field = field + c * np.exp(1j * (mode.kx * x + mode.kz * z))
    return 2.0 - np.abs(field) ** 2


@dataclass(frozen=True)
class HologramSpec:
    gratings: tuple[RecordedGrating, ...]
    config: OpticalConfig
    modes: tuple[PlaneWaveMode, ...]
    mub_index: int = 0
    degenerate_kz: bool = False

    def __post_init__(self):
        refs = [g.reference.label for g in self.gratings]
        if len(set(refs)) != len(refs):
            raise InvalidSpecError(f"gratings must use distinct reference waves, got {refs}")
        if len(self.modes) != 2 * len(self.gratings):
            raise InvalidSpecError("expected one reference and one signal mode per grating")

    @property
    def recorded_states(self) -> tuple[StateVector, ...]:
        return tuple(g.recorded_state for g in self.gratings)

    @property
    def reference_modes(self) -> tuple[PlaneWaveMode, ...]:
        return self.modes[: len(self.gratings)]

    @property
    def signal_modes(self) -> tuple[PlaneWaveMode, ...]:
        return self.modes[len(self.gratings):]

    def kz_weights(self) -> tuple[np.ndarray, np.ndarray]:
        """(rho, sigma) used by the coupled-mode system."""
        if self.degenerate_kz:
            b = self.config.beta
            n = len(self.gratings)
            return np.full(n, b), np.full(n, b)
        rho = np.array([m.kz for m in self.reference_modes])
        sigma = np.array([m.kz for m in self.signal_modes])
        return rho, sigma


def index_profile(spec: HologramSpec, x, z):
    """Refractive index n(x, z) of the multiplexed emulsion."""
    total = sum(intensity_modulation(g, x, z) for g in spec.gratings)
    mat = spec.config.material
    return mat.n0 * (1.0 + mat.contrast * total / INDEX_NORMALIZATION)


@dataclass(frozen=True, eq=False)
class CouplingMatrix:
    """E'(z) = entries @ E(z) with E ordered (R1, R2, R3, Sa, Sb, Sc).

    The matrix is anti-Hermitian in the flux metric diag(rho, sigma); the
    Hermitian generator of that similarity form is cached for propagation.
    """

    entries: np.ndarray
    kappa2: float
    rho: np.ndarray
    sigma: np.ndarray
    mode_order: tuple[str, ...] = MODE_ORDER

    def __post_init__(self):
        for name in ("entries", "rho", "sigma"):
            a = np.array(getattr(self, name))
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @property
    def weights(self) -> np.ndarray:
        return np.concatenate([self.rho, self.sigma])

    @cached_property
    def generator(self) -> np.ndarray:
        """Hermitian H with D^(1/2) M D^(-1/2) = i H."""
        s = np.sqrt(self.weights)
        a = self.entries * s[:, None] / s[None, :]
        h = -1j * a
        return 0.5 * (h + h.conj().T)

    @cached_property
    def eigensystem(self) -> tuple[np.ndarray, np.ndarray]:
        return np.linalg.eigh(self.generator)

    @property
    def spectral_radius(self) -> float:
        return float(np.max(np.abs(self.eigensystem[0])))

    def flux_adjoint(self) -> "CouplingMatrix":
        """D^-1 M^dagger D, which equals -M and runs the system backwards."""
        w = self.weights
        adj = (self.entries.conj().T * w[None, :]) / w[:, None]
        return CouplingMatrix(adj, self.kappa2, self.rho, self.sigma, self.mode_order)


def coupling_coefficients(states) -> np.ndarray:
    """C[i, j] = sqrt(d) * amplitude of signal mode j in recorded state i."""
    amps = np.array([s.amps for s in states])
    return math.sqrt(amps.shape[1]) * amps


def build_coupling_matrix(spec: HologramSpec) -> CouplingMatrix:
    states = spec.recorded_states
    gram = np.array([[np.vdot(u.amps, v.amps) for v in states] for u in states])
    if not np.allclose(gram, np.eye(len(states)), atol=1e-10, rtol=0):
        raise InvalidSpecError("recorded states must be pairwise orthonormal")

    k2 = kappa2(spec.config)
    rho, sigma = spec.kz_weights()
    c = coupling_coefficients(states)
    n = len(states)
    m = np.zeros((2 * n, 2 * n), dtype=complex)
    m[:n, n:] = 1j * k2 * c.conj() / rho[:, None]
    m[n:, :n] = 1j * k2 * c.T / sigma[:, None]
    if not np.all(np.isfinite(m)):
        raise InvalidSpecError("coupling matrix is not finite")
    return CouplingMatrix(m, k2, rho, sigma)
