import math

import numpy as np
import pytest

from mubsorter.errors import NumericalError
from mubsorter.hilbert import apply_projector, projector
from mubsorter.hologram import HologramSpec, RecordedGrating, build_coupling_matrix
from mubsorter.optics import Material, OpticalConfig
from mubsorter.propagate import initial_amplitudes
from mubsorter.sorter import (
    SorterConfig,
    _matched_efficiency,
    _matched_initials,
    analytic_zmax,
    build_sorter,
    crosstalk_table,
    figure2_dataset,
    find_zmax,
    reconstruct_field,
)


def closed_form_zmax(n0, dn, lam):
    b = 2 * math.pi * n0 / lam
    k2 = b**2 * (dn / n0) / (6 * (3 + math.sqrt(3)))
    return math.pi * b / (2 * math.sqrt(3) * k2)


def test_build_sorter_records_basis(mubs, ptr_optics):
    spec = build_sorter(SorterConfig(ptr_optics, mub_index=4), mubs)
    assert [s.label for s in spec.recorded_states] == ["a4", "b4", "c4"]
    assert [g.reference.label for g in spec.gratings] == ["r1", "r2", "r3"]
    for j in range(1, 5):
        states = build_sorter(SorterConfig(ptr_optics, mub_index=j), mubs).recorded_states
        gram = np.array([[np.vdot(u.amps, v.amps) for v in states] for u in states])
        np.testing.assert_allclose(gram, np.eye(3), atol=1e-12)
    spec1 = build_sorter(SorterConfig(ptr_optics, mub_index=1), mubs)
    assert [s.label for s in spec1.recorded_states] == ["a", "b", "c"]


def test_zmax_degenerate_matches_closed_form(degenerate_zmax, degenerate_spec):
    oracle = closed_form_zmax(1.4865, 0.0005, 1085e-9)
    assert oracle == pytest.approx(8.894e-3, rel=1e-3)
    assert analytic_zmax(degenerate_spec) == pytest.approx(oracle, rel=1e-13)
    zs = degenerate_zmax.per_state
    assert max(zs) - min(zs) <= 1e-9 * oracle
    for z in zs:
        assert z == pytest.approx(oracle, rel=1e-9)
    assert degenerate_zmax.common == pytest.approx(oracle, rel=1e-9)
    assert min(degenerate_zmax.efficiency_at_common) >= 1 - 1e-12


def test_zmax_default_geometry(default_zmax):
    assert abs(default_zmax.common - 8.5e-3) <= 0.15 * 8.5e-3
    assert len(set(default_zmax.per_state)) == 3  # each curve has its own peak
    assert all(z > 0 for z in default_zmax.per_state)
    assert all(0 <= e <= 1 for e in default_zmax.efficiency_at_common)
    assert min(default_zmax.per_state) <= default_zmax.common <= max(default_zmax.per_state)


def test_zmax_default_common_is_max_min(default_spec, default_zmax):
    m = build_coupling_matrix(default_spec)
    init = _matched_initials(default_spec)
    zs = np.linspace(0.95, 1.05, 2001) * default_zmax.common
    worst = _matched_efficiency(m, init, zs).min(axis=1)
    assert min(default_zmax.efficiency_at_common) >= worst.max() - 1e-12


@pytest.mark.parametrize("degenerate", [True, False])
def test_zmax_halves_when_delta_n_doubles(degenerate):
    r1 = find_zmax(build_sorter(SorterConfig(OpticalConfig(Material(1.4865, 0.0005)), degenerate_kz=degenerate)))
    r2 = find_zmax(build_sorter(SorterConfig(OpticalConfig(Material(1.4865, 0.0010)), degenerate_kz=degenerate)))
    assert r2.common == pytest.approx(r1.common / 2, rel=1e-3)


def test_zmax_without_modulation_fails():
    spec = build_sorter(SorterConfig(OpticalConfig(Material(1.4865, 0.0))))
    with pytest.raises(NumericalError):
        find_zmax(spec)


def test_crosstalk_matched_rows(mubs, degenerate_spec, degenerate_zmax, default_spec, default_zmax):
    for spec, zr, gate in ((degenerate_spec, degenerate_zmax, 0.999), (default_spec, default_zmax, 0.95)):
        t = crosstalk_table(spec, mubs, zr.common)
        for i, label in enumerate(("a4", "b4", "c4")):
            assert t.row(label).reference[i] >= gate


def test_crosstalk_unmatched_thirds(mubs, degenerate_spec, degenerate_zmax):
    t = crosstalk_table(degenerate_spec, mubs, degenerate_zmax.common)
    for row in t.rows:
        if row.state not in ("a4", "b4", "c4"):
            np.testing.assert_allclose(row.reference, 1 / 3, atol=1e-9)
            assert row.residual < 1e-9


def test_crosstalk_at_zero_depth(mubs, default_spec):
    t = crosstalk_table(default_spec, mubs, 0.0)
    assert np.all(t.matrix() == 0)
    assert all(r.residual == pytest.approx(1, abs=1e-15) for r in t.rows)
    assert len(t.rows) == 12


@pytest.mark.parametrize("z", [0.0, 1e-3, 4.4e-3, 8.77e-3, 1.5e-2])
def test_crosstalk_rows_are_distributions(mubs, default_spec, z):
    t = crosstalk_table(default_spec, mubs, z)
    for r in t.rows:
        assert abs(r.total - 1) < 1e-9
        assert all(0 <= p <= 1 for p in (*r.reference, r.residual))


def test_projector_consistency_all_bases(mubs, ptr_optics):
    for j in range(1, 5):
        spec = build_sorter(SorterConfig(ptr_optics, mub_index=j, degenerate_kz=True), mubs)
        t = crosstalk_table(spec, mubs, find_zmax(spec).common)
        proj = projector(mubs, j)
        ideal = np.array([np.abs(apply_projector(proj, s)) ** 2 for _, _, s in mubs.all_states()])
        np.testing.assert_allclose(t.matrix(), ideal, atol=1e-6, rtol=0)


def test_identity_sorter_is_pure_router(mubs, ptr_optics):
    spec = build_sorter(SorterConfig(ptr_optics, mub_index=1, degenerate_kz=True), mubs)
    t = crosstalk_table(spec, mubs, find_zmax(spec).common)
    np.testing.assert_allclose(t.matrix()[:3], np.eye(3), atol=1e-9)


def test_relabeling_equivariance(mubs, default_spec, default_zmax):
    perm = (2, 0, 1)
    g = default_spec.gratings
    refs = default_spec.modes[:3]
    # recorded states move together with their reference assignment: swap the
    # reference kz values too, so only the labels change
    modes_p = tuple(
        type(m)(refs[k].label, refs[perm[k]].tilt_waves, refs[perm[k]].kx, refs[perm[k]].kz)
        for k, m in enumerate(refs)
    ) + default_spec.modes[3:]
    permuted = tuple(
        RecordedGrating(k + 1, modes_p[k], g[perm[k]].recorded_state, g[perm[k]].signals) for k in range(3)
    )
    spec_p = HologramSpec(permuted, default_spec.config, modes_p, 4)
    z = default_zmax.common
    t = crosstalk_table(default_spec, mubs, z).matrix()
    tp = crosstalk_table(spec_p, mubs, z).matrix()
    np.testing.assert_allclose(tp, t[:, list(perm)], atol=1e-12)


def test_figure2_dataset(mubs, default_spec, default_zmax, degenerate_spec, degenerate_zmax):
    trajs = figure2_dataset(default_spec, mubs, default_zmax.common, 101)
    assert len(trajs) == 12
    for t in trajs:
        assert t.z[0] == 0 and t.z[-1] == default_zmax.common
        assert np.all(t.reference_probabilities[0] == 0)
        np.testing.assert_allclose(t.probabilities.sum(axis=1), 1, atol=1e-9)
    for i, label in enumerate(("a4", "b4", "c4")):
        t = next(t for t in trajs if t.label == label)
        zs = t.z <= default_zmax.per_state[i]
        assert np.all(np.diff(t.reference_probabilities[zs, i]) > 0)

    trajs = figure2_dataset(degenerate_spec, mubs, 2 * degenerate_zmax.common, 64)
    for t in trajs:
        if t.label in ("a4", "b4", "c4"):
            continue
        p = t.reference_probabilities
        np.testing.assert_allclose(p, np.repeat(p[:, :1], 3, axis=1), atol=1e-12)
        # each third follows sin^2 of the two-level problem
        b = degenerate_spec.config.beta
        omega = math.sqrt(3) * build_coupling_matrix(degenerate_spec).kappa2 / b
        np.testing.assert_allclose(p[:, 0], np.sin(omega * t.z) ** 2 / 3, atol=1e-12)


def test_figure2_needs_two_samples(mubs, default_spec):
    with pytest.raises(ValueError):
        figure2_dataset(default_spec, mubs, 1e-3, 1)


def test_reconstruct_field(default_spec):
    e1 = np.zeros(6, complex)
    e1[0] = 1
    assert reconstruct_field(default_spec, e1, 0.0, 0.0) == 1
    rng = np.random.default_rng(3)
    u = rng.normal(size=6) + 1j * rng.normal(size=6)
    v = rng.normal(size=6) + 1j * rng.normal(size=6)
    al, be = 0.3 - 1.1j, 2.0 + 0.5j
    x = np.linspace(0, 1e-2, 33)
    np.testing.assert_allclose(
        reconstruct_field(default_spec, al * u + be * v, x, 2e-3),
        al * reconstruct_field(default_spec, u, x, 2e-3) + be * reconstruct_field(default_spec, v, x, 2e-3),
        atol=1e-12,
    )


def test_field_power_parseval(default_spec, mubs):
    amps = initial_amplitudes(mubs.find("b2")[2]) + 0.4j * np.array([1, 0.5, 0.2, 0, 0, 0])
    n = 16384
    x = np.arange(n) * 1e-2 / n
    for z in (0.0, 5e-3):
        power = np.mean(np.abs(reconstruct_field(default_spec, amps, x, z)) ** 2)
        assert power == pytest.approx(np.sum(np.abs(amps) ** 2), rel=1e-12)
