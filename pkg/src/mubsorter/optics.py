"""Plane-wave geometry inside the holographic emulsion.

Tilts are counted in waves across the aperture D, so one wave of tilt is a
transverse wavenumber of 2*pi/D.  All propagation constants are evaluated
in the glass, with beta = 2*pi*n0/lambda.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from mubsorter.errors import DegenerateGeometryError, EvanescentModeError

PTR_N0 = 1.4865
PTR_DELTA_N = 0.0005
PTR_WAVELENGTH = 1085e-9

REFERENCE_MODE_LABELS = ("r1", "r2", "r3")
SIGNAL_MODE_LABELS = ("a", "b", "c")


@dataclass(frozen=True)
class Material:
    n0: float = PTR_N0
    delta_n: float = PTR_DELTA_N

    def __post_init__(self):
        if not (math.isfinite(self.n0) and self.n0 >= 1):
            raise ValueError(f"bulk index n0 must be >= 1, got {self.n0}")
        if not (math.isfinite(self.delta_n) and self.delta_n >= 0):
            raise ValueError(f"index modulation must be >= 0, got {self.delta_n}")
        if self.delta_n >= self.n0:
            raise ValueError("index modulation must be much smaller than n0")
        if self.contrast > 0.01:
            warnings.warn(
                f"delta_n/n0 = {self.contrast:.3g} is outside the weak-coupling regime",
                stacklevel=2,
            )

    @property
    def contrast(self) -> float:
        """Relative modulation depth delta_n / n0."""
        return self.delta_n / self.n0


@dataclass(frozen=True)
class OpticalConfig:
    """Material plus wavelength, aperture and emulsion thickness (SI units)."""

    material: Material = Material()
    wavelength: float = PTR_WAVELENGTH
    aperture: float = 1e-2
    emulsion_length: float = 1e-2

    def __post_init__(self):
        for name in ("wavelength", "aperture", "emulsion_length"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be a positive length, got {v}")

    @property
    def beta(self) -> float:
        return 2.0 * math.pi * self.material.n0 / self.wavelength

    @property
    def tilt_unit(self) -> float:
        """Transverse wavenumber of one wave of tilt across the aperture."""
        return 2.0 * math.pi / self.aperture


def beta(config: OpticalConfig) -> float:
    """In-medium wavenumber 2*pi*n0/lambda (rad/m)."""
    return config.beta


class FourMomentum(NamedTuple):
    pt: float
    px: float
    py: float
    pz: float


def four_momentum(q: float, config: OpticalConfig) -> FourMomentum:
    """Momentum of a photon with ``q`` waves of tilt, in units of hbar rad/m (c = 1)."""
    b = config.beta
    px = q * config.tilt_unit
    if abs(px) >= b:
        raise EvanescentModeError(f"{q} waves of tilt is evanescent (|kx| = {abs(px):.6g} >= beta)")
    # sqrt((b - px)(b + px)) keeps full relative precision for small tilts
    pz = math.sqrt((b - px) * (b + px))
    return FourMomentum(b, px, 0.0, pz)


@dataclass(frozen=True)
class PlaneWaveMode:
    label: str
    tilt_waves: float
    kx: float
    kz: float


def plane_wave(label: str, q: float, config: OpticalConfig) -> PlaneWaveMode:
    p = four_momentum(q, config)
    return PlaneWaveMode(label, float(q), p.px, p.pz)


def make_modes(
    reference_tilts: Sequence[float],
    signal_tilts: Sequence[float],
    config: OpticalConfig,
) -> tuple[PlaneWaveMode, ...]:
    """The six primary modes in the order r1, r2, r3, a, b, c."""
    refs = [float(t) for t in reference_tilts]
    sigs = [float(t) for t in signal_tilts]
    if len(refs) != 3 or len(sigs) != 3:
        raise ValueError("need exactly 3 reference and 3 signal tilts")
    tilts = refs + sigs
    if len(set(tilts)) != len(tilts):
        raise DegenerateGeometryError(f"mode tilts must be distinct, got {tilts}")
    if min(abs(t) for t in refs) < 10 * max(abs(t) for t in sigs):
        warnings.warn(
            "reference tilts are not well separated from the signal tilts "
            "(min reference < 10 x max signal)",
            stacklevel=2,
        )
    labels = REFERENCE_MODE_LABELS + SIGNAL_MODE_LABELS
    return tuple(plane_wave(lab, q, config) for lab, q in zip(labels, tilts))
