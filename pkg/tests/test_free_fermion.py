"""Quadratic-fermion oracle: absolute energies, BdG symmetry, dispersion."""

import json

import jsonschema
import numpy as np
import pytest

from isingmqt import (
    SPLITTING_RECORD_SCHEMA,
    ChainSpec,
    ParitySector,
    bdg_matrix,
    bogoliubov_sector_oracle,
    dispersion,
    quantized_momenta,
    quasiparticle_energies,
    sector_ground_energy,
    single_particle_energy,
    tunneling_splitting_ed,
)

from conftest import reference_sector_energies


# ------------------------------------------------- absolute sector energies

@pytest.mark.parametrize("boundary", ["periodic", "open"])
@pytest.mark.parametrize("hx", [0.0, 0.1, 0.3, 0.7, 1.3])
@pytest.mark.parametrize("n", [2, 3, 4, 5, 6, 8])
def test_sector_energies_match_dense_ed(n, hx, boundary):
    # absolute energies, not differences: no offset convention survives this
    for sector in (ParitySector.EVEN, ParitySector.ODD):
        got = sector_ground_energy(ChainSpec(n, 1.0, hx, boundary=boundary), sector)
        ref = reference_sector_energies(n, 1.0, hx, boundary, int(sector))[0]
        assert got == pytest.approx(ref, abs=1e-11), (n, hx, boundary, sector)


@pytest.mark.parametrize("boundary", ["periodic", "open"])
@pytest.mark.parametrize("n,hx", [(4, 0.1), (6, 0.3), (8, 0.2)])
def test_oracle_splitting_matches_ed(n, hx, boundary):
    spec = ChainSpec(n, 1.0, hx, boundary=boundary)
    ff = bogoliubov_sector_oracle(spec)
    ed = tunneling_splitting_ed(spec)
    assert ff.method == "free_fermion"
    if ed.delta_e >= 1e-5:
        assert ff.delta_e == pytest.approx(ed.delta_e, rel=1e-8)
    else:
        assert ff.delta_e == pytest.approx(ed.delta_e, abs=1e-13)
    assert ff.lower_sector == ed.lower_sector
    assert ff.gap == pytest.approx(ed.gap, rel=1e-8)


def test_oracle_record_schema():
    rec = bogoliubov_sector_oracle(ChainSpec(6, 1.0, 0.2))
    jsonschema.validate(json.loads(rec.to_json()), SPLITTING_RECORD_SCHEMA)


def test_oracle_scales_beyond_ed():
    # 40 sites is far past any dense or Lanczos cap; the oracle is O(N^3)
    rec = bogoliubov_sector_oracle(ChainSpec(40, 1.0, 0.3))
    assert rec.delta_e >= 0.0
    assert np.isfinite(rec.e_even) and np.isfinite(rec.e_odd)


def test_zero_mode_flag_at_criticality():
    # even ring at hx = J: the periodic sector holds an exact zero mode
    rec = bogoliubov_sector_oracle(ChainSpec(6, 1.0, 1.0))
    assert "zero_mode" in rec.flags


# -------------------------------------------------------------- BdG algebra

@pytest.mark.parametrize("boundary", ["periodic", "open"])
def test_bdg_spectrum_is_symmetric(boundary, rng):
    for _ in range(3):
        n = int(rng.integers(2, 11))
        hx = float(rng.uniform(0.0, 1.5))
        spec = ChainSpec(n, 1.0, hx, boundary=boundary)
        for sector in (ParitySector.EVEN, ParitySector.ODD):
            m = bdg_matrix(spec, sector)
            assert m.shape == (2 * n, 2 * n)
            w = np.sort(np.linalg.eigvalsh(m))
            assert np.allclose(w + w[::-1], 0.0, atol=1e-10)


def test_quasiparticles_are_positive_bdg_branch():
    spec = ChainSpec(7, 1.0, 0.45)
    for sector in (ParitySector.EVEN, ParitySector.ODD):
        sigma = quasiparticle_energies(spec, sector)
        assert np.all(sigma >= -1e-12)
        assert np.all(np.diff(sigma) >= 0)
        w = np.sort(np.linalg.eigvalsh(bdg_matrix(spec, sector)))
        assert np.allclose(sigma, w[spec.n_sites:], atol=1e-10)


def test_quasiparticles_match_dispersion_at_quantized_momenta():
    n, hx = 8, 0.2
    spec = ChainSpec(n, 1.0, hx)
    for sector in (ParitySector.EVEN, ParitySector.ODD):
        sigma = quasiparticle_energies(spec, sector)
        ek = np.sort(single_particle_energy(1.0, hx, quantized_momenta(n, sector)))
        assert np.allclose(sigma, ek, atol=1e-10)


# --------------------------------------------------------------- dispersion

def test_flat_band_at_zero_field():
    curve = dispersion(ChainSpec(4, 1.0, 0.0))
    assert np.max(np.abs(curve.energies - 2.0)) < 1e-15
    assert curve.gap_numeric == pytest.approx(2.0, abs=1e-15)


@pytest.mark.parametrize("hx", [0.1, 0.3, 0.5, 0.7, 0.9])
def test_grid_gap_equals_band_minimum(hx):
    curve = dispersion(ChainSpec(4, 1.0, hx))
    assert curve.gap_numeric == pytest.approx(2.0 * (1.0 - hx), abs=1e-12)
    assert curve.gap_paper_formula == pytest.approx(2.0 * np.sqrt(1.0 - hx), rel=1e-15)
    assert curve.flags == ()


def test_formula_gap_absent_past_crossing():
    curve = dispersion(ChainSpec(4, 1.0, 1.2))
    assert curve.gap_paper_formula is None
    assert "formula_gap_undefined" in curve.flags
    assert curve.gap_numeric == pytest.approx(0.4, abs=1e-9)  # 2|J - hx|


def test_dispersion_csv_carries_both_gaps():
    text = dispersion(ChainSpec(4, 1.0, 0.36)).to_csv()
    assert "# gap_numeric = " in text
    assert "# gap_paper_formula = " in text
    assert text.splitlines()[3] == "k,energy"
    text = dispersion(ChainSpec(4, 1.0, 1.5)).to_csv()
    assert "absent" in text and "formula_gap_undefined" in text


def test_dispersion_grid_validation():
    spec = ChainSpec(4, 1.0, 0.3)
    with pytest.raises(ValueError):
        dispersion(spec, momenta=np.array([0.0, 4.0]))
    with pytest.raises(ValueError):
        dispersion(spec, momenta=np.array([]))
    with pytest.raises(ValueError):
        dispersion(spec, n_points=1)
    custom = dispersion(spec, momenta=np.array([-1.0, 0.0, np.pi]))
    assert custom.momenta.size == 3


def test_default_grid_covers_zone_and_hits_pi():
    curve = dispersion(ChainSpec(4, 1.0, 0.3), n_points=64)
    assert curve.momenta.size == 64
    assert curve.momenta[-1] == pytest.approx(np.pi, abs=1e-15)
    assert curve.momenta[0] > -np.pi  # the zone is half open


def test_single_particle_energy_endpoints():
    assert single_particle_energy(1.0, 0.25, 0.0) == pytest.approx(2.5)
    assert single_particle_energy(1.0, 0.25, np.pi) == pytest.approx(1.5)


def test_quantized_momenta_sets():
    even = quantized_momenta(4, ParitySector.EVEN)
    odd = quantized_momenta(4, ParitySector.ODD)
    assert np.allclose(even, [-3 * np.pi / 4, -np.pi / 4, np.pi / 4, 3 * np.pi / 4])
    assert np.allclose(odd, [-np.pi / 2, 0.0, np.pi / 2, np.pi])
    for ks in (even, odd):
        assert ks.size == 4
        assert np.all(ks > -np.pi) and np.all(ks <= np.pi)
    with pytest.raises(ValueError):
        quantized_momenta(1, ParitySector.EVEN)
