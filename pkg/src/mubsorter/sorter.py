"""Experiment driver: build a sorter for one basis, find its operating depth,
tabulate crosstalk for every basis state and produce depth curves."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from mubsorter.errors import NumericalError
from mubsorter.hilbert import MubTable, build_mub_table
from mubsorter.hologram import (
    CouplingMatrix,
    HologramSpec,
    RecordedGrating,
    build_coupling_matrix,
)
from mubsorter.optics import OpticalConfig, make_modes
from mubsorter.propagate import (
    Trajectory,
    initial_amplitudes,
    probabilities,
    propagate_expm,
)

DEFAULT_REFERENCE_TILTS = (2000.0, 3000.0, 4000.0)
DEFAULT_SIGNAL_TILTS = (1.0, 2.0, 3.0)

_SCAN_POINTS = 801


@dataclass(frozen=True)
class SorterConfig:
    optical: OpticalConfig = field(default_factory=OpticalConfig)
    mub_index: int = 4
    reference_tilts: tuple[float, ...] = DEFAULT_REFERENCE_TILTS
    signal_tilts: tuple[float, ...] = DEFAULT_SIGNAL_TILTS
    degenerate_kz: bool = False


def build_sorter(config: SorterConfig, mubs: MubTable | None = None) -> HologramSpec:
    """Record state i of basis ``mub_index`` against reference wave r_i."""
    mubs = mubs or build_mub_table(3)
    states = mubs.basis(config.mub_index)
    modes = make_modes(config.reference_tilts, config.signal_tilts, config.optical)
    n = len(states)
    gratings = tuple(
        RecordedGrating(i + 1, modes[i], states[i], modes[n:]) for i in range(n)
    )
    return HologramSpec(gratings, config.optical, modes, config.mub_index, config.degenerate_kz)


def analytic_zmax(spec: HologramSpec) -> float:
    """pi*beta / (2*sqrt(3)*kappa2), exact when all kz equal beta."""
    m = build_coupling_matrix(spec)
    if m.kappa2 == 0:
        raise NumericalError("no index modulation, so no diffraction maximum")
    return math.pi * spec.config.beta / (2.0 * math.sqrt(3.0) * m.kappa2)


@dataclass(frozen=True)
class ZmaxResult:
    per_state: tuple[float, ...]
    common: float
    efficiency_at_common: tuple[float, ...]


def _matched_initials(spec: HologramSpec) -> np.ndarray:
    return np.array([initial_amplitudes(s) for s in spec.recorded_states])


def _matched_efficiency(m: CouplingMatrix, initials: np.ndarray, z) -> np.ndarray:
    """Efficiency of recorded state i into r_i; shape z.shape + (n,)."""
    amps = propagate_expm(m, initials.T, z)  # (..., 6, n)
    p = probabilities(np.swapaxes(amps, -1, -2), m.rho, m.sigma)  # (..., n, 6)
    n = initials.shape[0]
    return p[..., np.arange(n), np.arange(n)]


def _matched_slope(m: CouplingMatrix, initial: np.ndarray, i: int, z: float) -> float:
    """d/dz of the flux fraction into reference i."""
    e = propagate_expm(m, initial, z)
    de = m.entries @ e
    w = m.weights
    return 2.0 * w[i] * float(np.real(np.conj(e[i]) * de[i])) / float(np.sum(w * np.abs(e) ** 2))


def _golden_max(f, zs: np.ndarray, k: int) -> float:
    lo, hi = zs[max(k - 1, 0)], zs[min(k + 1, len(zs) - 1)]
    res = optimize.minimize_scalar(
        lambda t: -f(t), bracket=(lo, zs[k], hi), method="golden", options={"xtol": 1e-12}
    )
    return float(res.x) if lo <= res.x <= hi else float(zs[k])


def find_zmax(spec: HologramSpec) -> ZmaxResult:
    """Depths of maximum diffraction efficiency for each recorded state.

    A coarse scan over (0, 2*z_analytic] brackets each maximum; golden-section
    search refines it and a root of the efficiency slope polishes it.  The
    common depth maximizes the smallest matched efficiency.
    """
    m = build_coupling_matrix(spec)
    z_hi = 2.0 * analytic_zmax(spec)
    zs = np.linspace(0.0, z_hi, _SCAN_POINTS)[1:]
    initials = _matched_initials(spec)
    eff = _matched_efficiency(m, initials, zs)  # (N, n)

    per_state = []
    for i in range(initials.shape[0]):
        k = int(np.argmax(eff[:, i]))
        if k == 0 or k == len(zs) - 1:
            raise NumericalError(f"no interior efficiency maximum for state {i + 1} in (0, {z_hi:.4g}] m")
        zi = _golden_max(lambda t, i=i: _matched_efficiency(m, initials, t)[i], zs, k)
        lo, hi = zs[k - 1], zs[k + 1]
        g = lambda t, i=i: _matched_slope(m, initials[i], i, t)  # noqa: E731
        if g(lo) > 0 > g(hi):
            zi = optimize.brentq(g, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        per_state.append(float(zi))

    worst = eff.min(axis=1)
    k = int(np.argmax(worst))
    if k == 0 or k == len(zs) - 1:
        raise NumericalError("no interior maximum of the common efficiency")
    common = _golden_max(lambda t: _matched_efficiency(m, initials, t).min(), zs, k)
    # a common optimum sitting on one state's own peak is located more
    # precisely by that state's polished depth
    best = _matched_efficiency(m, initials, common).min()
    for zi in per_state:
        if zs[k - 1] <= zi <= zs[k + 1]:
            cand = _matched_efficiency(m, initials, zi).min()
            if cand >= best:
                common, best = zi, cand
    return ZmaxResult(
        tuple(per_state),
        float(common),
        tuple(float(e) for e in _matched_efficiency(m, initials, common)),
    )


@dataclass(frozen=True)
class CrosstalkRow:
    state: str
    reference: tuple[float, ...]
    residual: float

    @property
    def total(self) -> float:
        return sum(self.reference) + self.residual


@dataclass(frozen=True)
class CrosstalkTable:
    z_eval: float
    rows: tuple[CrosstalkRow, ...]
    mub_index: int = 0

    @property
    def labels(self) -> list[str]:
        return [r.state for r in self.rows]

    def matrix(self) -> np.ndarray:
        """(n_states, n_refs) reference probabilities."""
        return np.array([r.reference for r in self.rows])

    def row(self, label: str) -> CrosstalkRow:
        for r in self.rows:
            if r.state == label:
                return r
        raise KeyError(label)


def crosstalk_table(
    spec: HologramSpec, mubs: MubTable, z: float, reference_amps=None
) -> CrosstalkTable:
    """Reference-direction probabilities at depth ``z`` for every basis state."""
    if z < 0:
        raise ValueError("depth must be >= 0")
    m = build_coupling_matrix(spec)
    n = len(spec.gratings)
    rows = []
    for _, _, s in mubs.all_states():
        e = propagate_expm(m, initial_amplitudes(s, reference_amps), z)
        p = probabilities(e, m.rho, m.sigma)
        rows.append(CrosstalkRow(s.label, tuple(float(v) for v in p[:n]), float(p[n:].sum())))
    return CrosstalkTable(float(z), tuple(rows), spec.mub_index)


def figure2_dataset(
    spec: HologramSpec, mubs: MubTable, z_stop: float, samples: int, reference_amps=None
) -> list[Trajectory]:
    """One depth trajectory per basis state on a uniform grid over [0, z_stop]."""
    if samples < 2:
        raise ValueError("need at least 2 samples")
    m = build_coupling_matrix(spec)
    zs = np.linspace(0.0, z_stop, samples)
    t = propagate_expm(m, np.eye(m.entries.shape[0]), zs)  # transfer stack
    out = []
    for _, _, s in mubs.all_states():
        amps = t @ initial_amplitudes(s, reference_amps)
        out.append(Trajectory(zs, amps, probabilities(amps, m.rho, m.sigma), s.label))
    return out


def reconstruct_field(spec: HologramSpec, amps, x, z):
    """E_y(x, z) = sum_k amp_k exp(i (kx_k x + kz_k z)) over the primary modes."""
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    field_ = np.zeros(np.broadcast(x, z).shape, dtype=complex)
    for a, mode in zip(np.asarray(amps, dtype=complex), spec.modes):
        field_ = field_ + a * np.exp(1j * (mode.kx * x + mode.kz * z))
    return field_
