import math

import numpy as np
import pytest

from mubsorter.qkd import (
    QkdMetrics,
    projector_table,
    qkd_metrics,
    simulate_exchange,
    uniform_table,
)
from mubsorter.sorter import CrosstalkRow, CrosstalkTable, SorterConfig, build_sorter, crosstalk_table, find_zmax


@pytest.fixture(scope="module")
def ideal():
    return [projector_table(b) for b in range(1, 5)]


@pytest.fixture(scope="module")
def uniform():
    return [uniform_table(b) for b in range(1, 5)]


@pytest.fixture(scope="module")
def simulated(mubs, ptr_optics):
    tables = []
    for b in range(1, 5):
        spec = build_sorter(SorterConfig(ptr_optics, mub_index=b), mubs)
        tables.append(crosstalk_table(spec, mubs, find_zmax(spec).common))
    return tables


def test_ideal_tables(ideal):
    m = qkd_metrics(ideal)
    assert m.symbol_error_rate == pytest.approx(0, abs=1e-15)
    assert m.per_basis_ser == pytest.approx((0, 0, 0, 0), abs=1e-15)


def test_uniform_tables(uniform):
    m = qkd_metrics(uniform)
    assert m.symbol_error_rate == pytest.approx(2 / 3, abs=1e-15)


def test_sift_fraction(ideal):
    assert qkd_metrics(ideal).sift_fraction == 0.25
    skew = qkd_metrics(ideal, basis_probs=(0.7, 0.1, 0.1, 0.1))
    assert skew.sift_fraction == pytest.approx(0.49 + 3 * 0.01, abs=1e-15)


def test_weighted_error_rate(simulated):
    p = np.array([0.4, 0.3, 0.2, 0.1])
    m = qkd_metrics(simulated, basis_probs=p)
    w = p**2 / np.sum(p**2)
    assert m.symbol_error_rate == pytest.approx(float(np.dot(w, m.per_basis_ser)), rel=1e-12)
    assert all(0 <= s <= 1 for s in m.per_basis_ser)


def test_simulated_sorters_have_small_error(simulated):
    m = qkd_metrics(simulated)
    assert 0 < m.symbol_error_rate < 1e-3


def test_permutation_invariance(simulated):
    perm = [2, 0, 1]
    t = simulated[3]
    own = {"a4", "b4", "c4"}
    matched = [r for r in t.rows if r.state in own]
    others = [r for r in t.rows if r.state not in own]
    # relabel states: row k moves to position perm[k], columns follow
    relabeled = [None] * 3
    for k, r in enumerate(matched):
        ref = [0.0] * 3
        for c in range(3):
            ref[perm[c]] = r.reference[c]
        relabeled[perm[k]] = CrosstalkRow(r.state, tuple(ref), r.residual)
    rows = list(reversed(others)) + relabeled
    tp = CrosstalkTable(t.z_eval, tuple(rows), t.mub_index)
    a = qkd_metrics(simulated)
    b = qkd_metrics(simulated[:3] + [tp])
    assert b.symbol_error_rate == pytest.approx(a.symbol_error_rate, abs=1e-15)


@pytest.mark.parametrize(
    "bad",
    [
        lambda t: t[:3],
        lambda t: [CrosstalkTable(0, t[0].rows[1:], 1)] + t[1:],
        lambda t: [CrosstalkTable(0, tuple(CrosstalkRow(r.state, r.reference, 0.5) for r in t[0].rows), 1)] + t[1:],
        lambda t: [CrosstalkTable(0, tuple(CrosstalkRow(r.state, r.reference[:2], r.residual) for r in t[0].rows), 1)] + t[1:],
    ],
)
def test_malformed_tables(ideal, bad):
    with pytest.raises(ValueError):
        qkd_metrics(bad(list(ideal)))


def test_bad_basis_probs(ideal):
    with pytest.raises(ValueError):
        qkd_metrics(ideal, basis_probs=(0.5, 0.5, 0.5, 0.5))


def test_monte_carlo_ideal(ideal):
    m = simulate_exchange(ideal, n_symbols=10**6, seed=1)
    assert m.symbol_error_rate < 1e-5
    assert m.n_symbols == 10**6


def test_monte_carlo_uniform(uniform):
    m = simulate_exchange(uniform, n_symbols=10**6, seed=2)
    n = m.n_sifted
    sigma = math.sqrt((2 / 3) * (1 / 3) / n)
    assert abs(m.symbol_error_rate - 2 / 3) < 3 * sigma
    sift_sigma = math.sqrt(0.25 * 0.75 / 10**6)
    assert abs(m.sift_fraction - 0.25) < 5 * sift_sigma


def test_monte_carlo_matches_analytic(simulated):
    a = qkd_metrics(simulated)
    m = simulate_exchange(simulated, n_symbols=10**6, seed=11)
    sigma = math.sqrt(a.symbol_error_rate * (1 - a.symbol_error_rate) / m.n_sifted)
    assert abs(m.symbol_error_rate - a.symbol_error_rate) < 5 * sigma


def test_monte_carlo_deterministic(simulated):
    a = simulate_exchange(simulated, n_symbols=200_000, seed=5)
    b = simulate_exchange(simulated, n_symbols=200_000, seed=5)
    assert a == b
    assert isinstance(a, QkdMetrics)
    c = simulate_exchange(simulated, n_symbols=200_000, seed=6)
    assert c.n_sifted != a.n_sifted or c.symbol_error_rate != a.symbol_error_rate


def test_monte_carlo_rejects_empty(ideal):
    with pytest.raises(ValueError):
        simulate_exchange(ideal, n_symbols=0)
