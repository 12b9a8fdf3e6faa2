"""Integration of the coupled-mode system E'(z) = M E(z).

Two independent routes: the exact exponential through the unitary
eigendecomposition of the flux-weighted Hermitian generator, and a
classical fixed-step RK4 integrator.  Mode amplitudes are plain complex
arrays whose last axis is ordered (R1, R2, R3, Sa, Sb, Sc).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from mubsorter.errors import NumericalError, UndefinedProbabilityError
from mubsorter.hilbert import StateVector
from mubsorter.hologram import CouplingMatrix


@dataclass(frozen=True, eq=False)
class Trajectory:
    z: np.ndarray  # (n,)
    amplitudes: np.ndarray  # (n, 6)
    probabilities: np.ndarray  # (n, 6)
    label: str = ""

    @property
    def reference_probabilities(self) -> np.ndarray:
        n = self.amplitudes.shape[-1] // 2
        return self.probabilities[:, :n]


def initial_amplitudes(state: StateVector, reference_amps=None) -> np.ndarray:
    """Readout vector: reference modes dark, signal modes carry ``state``.

    ``reference_amps`` overrides the dark reference modes (e.g. ``(1, 1, 1)``).
    """
    n = state.dim
    refs = np.zeros(n, dtype=complex)
    if reference_amps is not None:
        refs[:] = np.asarray(reference_amps, dtype=complex)
    return np.concatenate([refs, state.amps])


def flux(amps, rho, sigma):
    """z-directed power sum(rho |R|^2) + sum(sigma |S|^2); broadcasts over leading axes."""
    w = np.concatenate([np.asarray(rho, float), np.asarray(sigma, float)])
    return np.sum(w * np.abs(amps) ** 2, axis=-1)


def probabilities(amps, rho, sigma) -> np.ndarray:
    """Flux fractions carried by each mode."""
    w = np.concatenate([np.asarray(rho, float), np.asarray(sigma, float)])
    p = w * np.abs(amps) ** 2
    total = np.sum(p, axis=-1, keepdims=True)
    if np.any(total <= 0):
        raise UndefinedProbabilityError("field carries zero flux")
    return p / total


def _check_finite(matrix: CouplingMatrix):
    if not np.all(np.isfinite(matrix.entries)):
        raise NumericalError("coupling matrix has non-finite entries")


def transfer_matrix(matrix: CouplingMatrix, z) -> np.ndarray:
    """exp(M z) for scalar z, or a stack of them for an array of depths."""
    _check_finite(matrix)
    zs = np.asarray(z, dtype=float)
    w = matrix.weights
    if np.any(w <= 0):
        # no flux metric to symmetrize with
        out = np.array([scipy.linalg.expm(matrix.entries * zi) for zi in zs.reshape(-1)])
        return out.reshape(zs.shape + matrix.entries.shape)
    lam, v = matrix.eigensystem
    s = np.sqrt(w)
    phase = np.exp(1j * zs[..., None] * lam)  # (..., 6)
    u = (v * phase[..., None, :]) @ v.conj().T  # D^1/2 exp(Mz) D^-1/2
    t = u * (1.0 / s)[:, None] * s[None, :]
    t[zs == 0] = np.eye(len(w))
    return t


def propagate_expm(matrix: CouplingMatrix, initial, z):
    """Amplitudes at depth ``z`` (scalar or array of depths) from the exact exponential."""
    if np.any(np.asarray(z) < 0):
        raise ValueError("depth must be >= 0")
    t = transfer_matrix(matrix, z)
    return t @ np.asarray(initial, dtype=complex)


def default_step(matrix: CouplingMatrix) -> float:
    """RK4 step giving at least 100 steps per quarter period of the fastest mode."""
    omega = matrix.spectral_radius
    if omega == 0:
        return math.inf
    return math.pi / (200.0 * omega)


def propagate_rk4(matrix: CouplingMatrix, initial, z: float, step: float | None = None) -> Trajectory:
    """Fixed-step RK4 from 0 to ``z``.

    The step is shrunk so that an integer number of steps lands exactly on
    ``z``.  ``initial`` may carry leading batch axes.
    """
    _check_finite(matrix)
    if step is None:
        step = min(default_step(matrix), z) if z > 0 else 1.0
    if not step > 0:
        raise ValueError(f"step must be > 0, got {step}")
    if z < 0:
        raise ValueError("depth must be >= 0")
    n = max(1, math.ceil(z / step - 1e-9)) if z > 0 else 0
    h = z / n if n else 0.0
    mt = matrix.entries.T
    y = np.array(initial, dtype=complex)
    ys = np.empty((n + 1,) + y.shape, dtype=complex)
    ys[0] = y
    for k in range(n):
        k1 = y @ mt
        k2 = (y + 0.5 * h * k1) @ mt
        k3 = (y + 0.5 * h * k2) @ mt
        k4 = (y + h * k3) @ mt
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        ys[k + 1] = y
    zs = h * np.arange(n + 1)
    if n:
        zs[-1] = z
    if ys.ndim > 2:
        ys = np.moveaxis(ys, 0, -2)  # batch axes first: (..., n+1, 6)
    return Trajectory(zs, ys, probabilities(ys, matrix.rho, matrix.sigma))
