"""Qudit states over the planewave basis and the mutually unbiased bases.

States are stored normalized.  For d = 3 the four bases are the
cube-root-of-unity table (MUB1 = {|a>, |b>, |c>}); for other odd primes
the standard quadratic construction is used.
"""

from __future__ import annotations

from dataclasses import dataclass
from string import ascii_lowercase

import numpy as np

from mubsorter.errors import (
    DimensionMismatchError,
    InvalidDimensionError,
    UnsupportedDimensionError,
)

# Integer phase exponents p such that the unnormalized component is z**p,
# z = exp(2*pi*i/3).  Rows are the a, b, c states of MUB2..MUB4.
_D3_PHASES = {
    2: ((0, 0, 0), (0, 1, 2), (0, 2, 1)),
    3: ((0, 0, 1), (0, 1, 0), (0, 2, 2)),
    4: ((0, 0, 2), (0, 1, 1), (0, 2, 0)),
}

REFERENCE_LABELS = ("r1", "r2", "r3")


def omega(d: int, power: int) -> complex:
    """Return exp(2*pi*i*power/d), reducing ``power`` mod ``d`` first."""
    if d < 2:
        raise InvalidDimensionError(f"dimension must be >= 2, got {d}")
    p = int(power) % d
    if p == 0:
        return 1 + 0j
    if 2 * p == d:
        return -1 + 0j
    angle = 2.0 * np.pi * p / d
    return complex(np.cos(angle), np.sin(angle))


@dataclass(frozen=True, eq=False)
class StateVector:
    """A normalized pure state given by its amplitudes over |a>, |b>, |c>, ..."""

    amps: np.ndarray
    label: str = ""

    def __post_init__(self):
        amps = np.array(self.amps, dtype=complex).reshape(-1)
        if amps.size == 0:
            raise InvalidDimensionError("a state needs at least one amplitude")
        if not np.all(np.isfinite(amps)):
            raise ValueError("state amplitudes must be finite")
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    @property
    def dim(self) -> int:
        return self.amps.size

    @classmethod
    def from_amplitudes(cls, amps, label: str = "") -> "StateVector":
        """Build a state from arbitrary (nonzero) amplitudes, normalizing them."""
        a = np.asarray(amps, dtype=complex).reshape(-1)
        norm = np.linalg.norm(a)
        if norm == 0:
            raise ValueError("cannot normalize the zero vector")
        return cls(a / norm, label)

    @classmethod
    def basis(cls, d: int, k: int, label: str = "") -> "StateVector":
        a = np.zeros(d, dtype=complex)
        a[k] = 1.0
        return cls(a, label)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def __repr__(self):
        return f"StateVector({self.label!r}, {np.array2string(self.amps, precision=4)})"


def inner(u: StateVector, v: StateVector) -> complex:
    """Return <u|v> = sum(conj(u_j) * v_j)."""
    if u.dim != v.dim:
        raise DimensionMismatchError(f"dimension mismatch: {u.dim} vs {v.dim}")
    return complex(np.vdot(u.amps, v.amps))


def _is_odd_prime(d: int) -> bool:
    if d < 3 or d % 2 == 0:
        return False
    return all(d % f for f in range(3, int(d**0.5) + 1, 2))


def _state_labels(d: int) -> list[str]:
    if d <= len(ascii_lowercase):
        return list(ascii_lowercase[:d])
    return [f"s{m}_" for m in range(d)]


@dataclass(frozen=True)
class MubTable:
    """The d + 1 mutually unbiased bases, indexed 1..d+1.

    ``phases[j][m]`` holds the integer exponents of the unnormalized state m
    of basis j + 2 (basis 1 is the computational basis and has none).
    """

    dim: int
    bases: tuple[tuple[StateVector, ...], ...]
    phases: tuple[tuple[tuple[int, ...], ...], ...]

    @property
    def n_bases(self) -> int:
        return len(self.bases)

    def basis(self, index: int) -> tuple[StateVector, ...]:
        """Basis ``index`` (1-based, as in MUB1..MUB4)."""
        if not 1 <= index <= self.n_bases:
            raise IndexError(f"basis index must be in 1..{self.n_bases}, got {index}")
        return self.bases[index - 1]

    def state(self, index: int, m: int) -> StateVector:
        return self.basis(index)[m]

    def find(self, label: str) -> tuple[int, int, StateVector]:
        """Look a state up by label ("a", "b4", ...)."""
        for j, m, s in self.all_states():
            if s.label == label:
                return j, m, s
        raise KeyError(label)

    def all_states(self) -> list[tuple[int, int, StateVector]]:
        """Every state as (basis index, row, state), basis-major."""
        return [
            (j + 1, m, s) for j, basis in enumerate(self.bases) for m, s in enumerate(basis)
        ]

    def labels(self) -> list[str]:
        return [s.label for _, _, s in self.all_states()]

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "bases": [
                {
                    "index": j + 1,
                    "states": [
                        {
                            "label": s.label,
                            "re": [float(x) for x in s.amps.real],
                            "im": [float(x) for x in s.amps.imag],
                        }
                        for s in basis
                    ],
                }
                for j, basis in enumerate(self.bases)
            ],
        }


def _phase_state(d: int, exponents, label: str) -> StateVector:
    amps = np.array([omega(d, p) for p in exponents]) / np.sqrt(d)
    return StateVector(amps, label)


def quadratic_phases(d: int) -> list[list[tuple[int, ...]]]:
    """Exponents j*k**2 + m*k (mod d) for the d non-computational bases."""
    ks = range(d)
    return [[tuple((j * k * k + m * k) % d for k in ks) for m in range(d)] for j in range(d)]


def build_mub_table(d: int = 3) -> MubTable:
    """Construct the complete set of d + 1 MUBs.

    d = 3 reproduces the cube-root-of-unity table row for row; other odd
    primes use the quadratic construction with the computational basis first.
    """
    if d == 3:
        phases = [_D3_PHASES[j] for j in (2, 3, 4)]
    elif _is_odd_prime(d):
        phases = quadratic_phases(d)
    else:
        raise UnsupportedDimensionError(f"no MUB construction for d={d}; need an odd prime")

    letters = _state_labels(d)
    bases = [tuple(StateVector.basis(d, k, letters[k]) for k in range(d))]
    for j, rows in enumerate(phases, start=2):
        bases.append(tuple(_phase_state(d, p, f"{letters[m]}{j}") for m, p in enumerate(rows)))
    return MubTable(
        dim=d,
        bases=tuple(bases),
        phases=tuple(tuple(tuple(r) for r in rows) for rows in phases),
    )


@dataclass(frozen=True)
class Projector:
    """Sum over i of |r_i><recorded_i| for the states of one basis."""

    mub_index: int
    recorded: tuple[StateVector, ...]
    reference_labels: tuple[str, ...] = REFERENCE_LABELS


def projector(table: MubTable, mub_index: int) -> Projector:
    states = table.basis(mub_index)
    labels = tuple(f"r{i + 1}" for i in range(len(states)))
    return Projector(mub_index, states, labels)


def apply_projector(p: Projector, state: StateVector) -> np.ndarray:
    """Amplitudes <r_i|P|state> = <recorded_i|state> onto each reference wave."""
    return np.array([inner(r, state) for r in p.recorded], dtype=complex)
