"""Twelve-state QKD figures of merit derived from sorter crosstalk.

Only Bob's measurement is imperfect: Alice prepares ideal basis states and
the channel is lossless.  A detection in the wrong reference direction and a
photon left in the signal modes both count as symbol errors.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from mubsorter.hilbert import MubTable, apply_projector, build_mub_table, projector
from mubsorter.sorter import CrosstalkRow, CrosstalkTable

_ROW_SUM_TOL = 1e-6


@dataclass(frozen=True)
class QkdMetrics:
    sift_fraction: float
    symbol_error_rate: float
    per_basis_ser: tuple[float, ...]
    n_symbols: int | None = None
    n_sifted: int | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def _check_probs(basis_probs, n_bases: int) -> np.ndarray:
    p = np.asarray(basis_probs, dtype=float)
    if p.shape != (n_bases,) or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
        raise ValueError(f"basis_probs must be {n_bases} non-negative numbers summing to 1")
    return p


def matched_blocks(tables: Sequence[CrosstalkTable], mubs: MubTable | None = None) -> list[np.ndarray]:
    """Per sorter, the (n, n + 1) outcome probabilities of its own basis states.

    Rows follow the table's row order; columns are r1..rn then the residual.
    The k-th matched row counts as correct in column k.
    """
    mubs = mubs or build_mub_table(3)
    if len(tables) != mubs.n_bases:
        raise ValueError(f"expected {mubs.n_bases} tables, got {len(tables)}")
    blocks = []
    for b, table in enumerate(tables, start=1):
        own = {s.label for s in mubs.basis(b)}
        rows = [r for r in table.rows if r.state in own]
        if len(rows) != mubs.dim:
            raise ValueError(f"table {b} does not contain the {mubs.dim} states of basis {b}")
        block = np.array([list(r.reference) + [r.residual] for r in rows], dtype=float)
        if block.shape[1] != mubs.dim + 1:
            raise ValueError(f"table {b} must have {mubs.dim} reference columns")
        if np.any(block < -_ROW_SUM_TOL) or np.any(np.abs(block.sum(axis=1) - 1) > _ROW_SUM_TOL):
            raise ValueError(f"table {b} rows are not probability distributions")
        blocks.append(np.clip(block, 0.0, 1.0))
    return blocks


def qkd_metrics(
    tables: Sequence[CrosstalkTable], basis_probs=None, mubs: MubTable | None = None
) -> QkdMetrics:
    """Analytic sift fraction and symbol error rates.

    Alice and Bob pick bases independently from ``basis_probs`` (uniform by
    default); the sifted error rate weights basis b by basis_probs[b]**2.
    """
    blocks = matched_blocks(tables, mubs)
    p = _check_probs(np.full(len(blocks), 1 / len(blocks)) if basis_probs is None else basis_probs, len(blocks))
    ser = np.array([1.0 - np.trace(b[:, :-1]) / b.shape[0] for b in blocks])
    sift = float(np.sum(p**2))
    overall = float(np.sum(p**2 * ser) / sift) if sift > 0 else 0.0
    return QkdMetrics(sift, overall, tuple(float(s) for s in ser))


def simulate_exchange(
    tables: Sequence[CrosstalkTable],
    basis_probs=None,
    n_symbols: int = 100_000,
    seed: int = 0,
    mubs: MubTable | None = None,
) -> QkdMetrics:
    """Monte Carlo estimate of :func:`qkd_metrics` from ``n_symbols`` photons."""
    if n_symbols < 1:
        raise ValueError("n_symbols must be >= 1")
    blocks = matched_blocks(tables, mubs)
    nb = len(blocks)
    d = blocks[0].shape[0]
    p = _check_probs(np.full(nb, 1 / nb) if basis_probs is None else basis_probs, nb)

    rng = np.random.default_rng(seed)
    alice = rng.choice(nb, size=n_symbols, p=p)
    bob = rng.choice(nb, size=n_symbols, p=p)
    symbol = rng.integers(0, d, size=n_symbols)
    u = rng.random(n_symbols)

    sifted = alice == bob
    cdf = np.cumsum(np.stack(blocks), axis=-1)  # (nb, d, d + 1)
    cdf[..., -1] = 1.0
    rows = cdf[bob[sifted], symbol[sifted]]
    outcome = np.sum(u[sifted, None] >= rows, axis=-1)
    wrong = outcome != symbol[sifted]

    basis = bob[sifted]
    per_basis = []
    for b in range(nb):
        sel = basis == b
        per_basis.append(float(wrong[sel].mean()) if sel.any() else 0.0)
    n_sifted = int(sifted.sum())
    return QkdMetrics(
        n_sifted / n_symbols,
        float(wrong.mean()) if n_sifted else 0.0,
        tuple(per_basis),
        n_symbols=n_symbols,
        n_sifted=n_sifted,
    )


def uniform_table(mub_index: int, mubs: MubTable | None = None) -> CrosstalkTable:
    """A sorter that sends every state to each reference with probability 1/d."""
    mubs = mubs or build_mub_table(3)
    d = mubs.dim
    rows = tuple(CrosstalkRow(s.label, (1.0 / d,) * d, 0.0) for _, _, s in mubs.all_states())
    return CrosstalkTable(0.0, rows, mub_index)


def projector_table(mub_index: int, mubs: MubTable | None = None) -> CrosstalkTable:
    """Crosstalk of the ideal projector for basis ``mub_index``."""
    mubs = mubs or build_mub_table(3)
    proj = projector(mubs, mub_index)
    rows = []
    for _, _, s in mubs.all_states():
        a = np.abs(apply_projector(proj, s)) ** 2
        rows.append(CrosstalkRow(s.label, tuple(float(v) for v in a), float(max(0.0, 1 - a.sum()))))
    return CrosstalkTable(0.0, tuple(rows), mub_index)
