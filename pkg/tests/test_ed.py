"""Sector eigensolvers, splitting records, and solver cross-checks.

Frozen numbers in this file were produced by an independent dense
implementation (explicit kron Hamiltonian, longdouble Rayleigh
refinement) and are compared at tolerances that the float64 pipeline
must meet, not at whatever it happens to produce.
"""

import json

import jsonschema
import numpy as np
import pytest
import scipy.sparse.linalg as spla

from isingmqt import (
    SPLITTING_RECORD_SCHEMA,
    Boundary,
    CapacityError,
    ChainSpec,
    ConvergenceError,
    ParitySector,
    low_spectrum,
    sector_ground,
    tunneling_splitting_ed,
)
from isingmqt.ed import (
    AUTO_DENSE_MAX_DIM,
    DENSE_MAX_SITES,
    LANCZOS_MAX_SITES,
    _get_kernel,
    _lanczos_lowest,
    _SectorOperator,
    rayleigh_refine,
)

from conftest import reference_sector_energies


# ------------------------------------------------------------ exact anchors

def test_two_site_open_chain_exact():
    spec = ChainSpec(2, 1.0, 0.3, boundary="open")
    rec = tunneling_splitting_ed(spec)
    assert abs(rec.e_even - (-np.sqrt(1.36))) < 1e-14
    assert abs(rec.e_odd - (-1.0)) < 1e-14
    assert abs(rec.delta_e - (np.sqrt(1.36) - 1.0)) < 1e-14
    assert rec.lower_sector == int(ParitySector.EVEN)
    assert rec.method == "dense"


def test_frozen_splitting_n6():
    # anchor from a 40-digit mpmath eigensolve of the same sector matrices
    rec = tunneling_splitting_ed(ChainSpec(6, 1.0, 0.1))
    assert rec.delta_e == pytest.approx(4.90249962185266e-07, rel=1e-9)


def test_frozen_splitting_and_gap_n8():
    rec = tunneling_splitting_ed(ChainSpec(8, 1.0, 0.2))
    assert rec.delta_e == pytest.approx(1.05447037923762921e-06, rel=1e-8)
    # gap above the ground pair: two cheapest ring excitations, not 2(J - hx)
    assert rec.gap == pytest.approx(3.2752360207972355, rel=1e-12)


@pytest.mark.parametrize("boundary", ["periodic", "open"])
@pytest.mark.parametrize("n,hx", [(3, 0.2), (4, 0.45), (5, 0.3), (6, 0.15)])
def test_sector_grounds_match_reference(n, hx, boundary):
    spec = ChainSpec(n, 1.0, hx, boundary=boundary)
    for sector in (ParitySector.EVEN, ParitySector.ODD):
        e, state = sector_ground(spec, sector)
        ref = reference_sector_energies(n, 1.0, hx, boundary, int(sector))[0]
        assert e == pytest.approx(ref, abs=1e-12)
        assert state.sector is sector
        assert abs(state.norm() - 1.0) < 1e-12


def test_ground_vector_solves_eigenproblem(rng):
    spec = ChainSpec(7, 1.0, 0.35)
    e, state = sector_ground(spec, ParitySector.EVEN)
    op = _SectorOperator(spec, ParitySector.EVEN)
    res = op.matvec(state.amplitudes.real) - e * state.amplitudes.real
    assert np.linalg.norm(res) < 1e-9


# ----------------------------------------------------------- field-free path

def test_zero_field_is_diagonal():
    rec = tunneling_splitting_ed(ChainSpec(4, 1.0, 0.0))
    assert rec.delta_e == 0.0
    assert rec.e_even == -4.0 and rec.e_odd == -4.0
    assert rec.flags == ("diagonal",)
    assert "precision_limited" not in rec.flags
    assert rec.gap == 4.0  # one flipped spin on a ring breaks two bonds


def test_zero_field_open_gap():
    rec = tunneling_splitting_ed(ChainSpec(4, 1.0, 0.0, boundary="open"))
    assert rec.gap == 2.0  # an edge flip breaks a single bond


# ------------------------------------------------------------- method choice

def test_dense_and_lanczos_agree():
    spec = ChainSpec(10, 1.0, 0.25)
    dense = tunneling_splitting_ed(spec, method="dense")
    lanc = tunneling_splitting_ed(spec, method="lanczos")
    assert dense.method == "dense" and lanc.method == "lanczos"
    assert lanc.e_even == pytest.approx(dense.e_even, abs=1e-11)
    assert lanc.e_odd == pytest.approx(dense.e_odd, abs=1e-11)
    assert lanc.delta_e == pytest.approx(dense.delta_e, abs=1e-13)
    assert lanc.gap == pytest.approx(dense.gap, rel=1e-9)


def test_auto_switches_on_sector_dimension():
    assert tunneling_splitting_ed(ChainSpec(8, 1.0, 0.3)).method == "dense"
    rec = tunneling_splitting_ed(ChainSpec(12, 1.0, 0.3))
    assert rec.method == "lanczos"
    assert (1 << 11) > AUTO_DENSE_MAX_DIM  # the switch this test pins down


def test_lanczos_against_scipy_eigsh():
    spec = ChainSpec(12, 1.0, 0.4)
    op = _SectorOperator(spec, ParitySector.EVEN)
    lin = spla.LinearOperator((op.dim, op.dim), matvec=op.matvec, dtype=np.float64)
    ref = spla.eigsh(lin, k=2, which="SA", tol=1e-12)[0]
    got, _ = _lanczos_lowest(op, k=2)
    assert got[0] == pytest.approx(ref[0], abs=1e-9)
    assert got[1] == pytest.approx(ref[1], abs=1e-8)


def test_lanczos_convergence_error_carries_diagnostics():
    op = _SectorOperator(ChainSpec(10, 1.0, 0.5), ParitySector.EVEN)
    with pytest.raises(ConvergenceError) as err:
        _lanczos_lowest(op, k=2, max_iter=3)
    assert err.value.iterations == 3
    assert err.value.residual > 0


def test_capacity_limits():
    with pytest.raises(CapacityError):
        tunneling_splitting_ed(ChainSpec(DENSE_MAX_SITES + 1, 1.0, 0.1),
                               method="dense")
    with pytest.raises(CapacityError):
        tunneling_splitting_ed(ChainSpec(LANCZOS_MAX_SITES + 1, 1.0, 0.1),
                               method="lanczos")
    with pytest.raises(ValueError):
        tunneling_splitting_ed(ChainSpec(4, 1.0, 0.1), method="magic")


# -------------------------------------------------------------- low_spectrum

def test_low_spectrum_zero_field_ordering():
    # degenerate pairs: ties resolve even-before-odd, deterministically
    levels = low_spectrum(ChainSpec(2, 1.0, 0.0, boundary="open"), k=4)
    got = [(lv.energy, lv.sector) for lv in levels]
    assert got == [(-1.0, ParitySector.EVEN), (-1.0, ParitySector.ODD),
                   (1.0, ParitySector.EVEN), (1.0, ParitySector.ODD)]


def test_low_spectrum_is_sorted_and_complete():
    spec = ChainSpec(5, 1.0, 0.6)
    levels = low_spectrum(spec, k=8)
    energies = [lv.energy for lv in levels]
    assert energies == sorted(energies)
    both = np.sort(np.concatenate([
        reference_sector_energies(5, 1.0, 0.6, "periodic", +1),
        reference_sector_energies(5, 1.0, 0.6, "periodic", -1),
    ]))
    assert np.allclose(energies, both[:8], atol=1e-10)


def test_low_spectrum_k_validation():
    with pytest.raises(ValueError):
        low_spectrum(ChainSpec(4, 1.0, 0.2), k=0)


def test_sector_completeness_full_spectrum():
    # both sector spectra together = full-basis spectrum, eigenvalue by eigenvalue
    for boundary in ("periodic", "open"):
        spec = ChainSpec(6, 1.0, 0.7, boundary=boundary)
        full = np.sort(np.concatenate([
            reference_sector_energies(6, 1.0, 0.7, boundary, +1),
            reference_sector_energies(6, 1.0, 0.7, boundary, -1),
        ]))
        levels = low_spectrum(spec, k=64)
        assert np.allclose([lv.energy for lv in levels], full, atol=1e-10)


# ------------------------------------------------------------------- records

def test_record_roundtrip_and_schema():
    rec = tunneling_splitting_ed(ChainSpec(4, 1.0, 0.2, boundary="open"))
    doc = json.loads(rec.to_json())
    jsonschema.validate(doc, SPLITTING_RECORD_SCHEMA)
    assert doc["n"] == 4 and doc["boundary"] == "open"
    assert doc["method"] == "dense"
    assert doc["delta_e"] == rec.delta_e


def test_splitting_positive_and_below_gap():
    for n in (4, 6, 8):
        rec = tunneling_splitting_ed(ChainSpec(n, 1.0, 0.2))
        assert 0 < rec.delta_e < rec.gap


def test_precision_flag_on_vanishing_splittings():
    # N=10, hx=0.05: the true splitting (~4e-17) sits far below 100 eps |E0|,
    # so whatever the solver reports is rounding noise and must be flagged
    rec = tunneling_splitting_ed(ChainSpec(10, 1.0, 0.05))
    assert "precision_limited" in rec.flags
    clean = tunneling_splitting_ed(ChainSpec(4, 1.0, 0.3))
    assert "precision_limited" not in clean.flags


def test_nonperturbative_warning():
    with pytest.warns(UserWarning):
        rec = tunneling_splitting_ed(ChainSpec(4, 1.0, 1.5))
    assert rec.delta_e > 0


def test_lower_sector_alternates_with_size():
    # even chains put the even sector lower, odd chains the odd sector
    for n in (3, 4, 5, 6):
        rec = tunneling_splitting_ed(ChainSpec(n, 1.0, 0.2))
        expect = ParitySector.EVEN if n % 2 == 0 else ParitySector.ODD
        assert rec.lower_sector == int(expect), f"n={n}"


# ------------------------------------------------------------ numeric guts

def test_rayleigh_refinement_matches_mpmath():
    # 40-digit truth: -6.015009643654401254919; float64 eigh alone sits
    # a few e-15 away, the longdouble quotient must land within 2e-15
    spec = ChainSpec(6, 1.0, 0.1)
    op = _SectorOperator(spec, ParitySector.EVEN)
    w, v = np.linalg.eigh(op.to_dense())
    refined = float(rayleigh_refine(spec, ParitySector.EVEN, v[:, 0]))
    assert abs(refined - (-6.015009643654401)) < 2e-15


def test_rayleigh_refine_shape_check():
    with pytest.raises(ValueError):
        rayleigh_refine(ChainSpec(4, 1.0, 0.1), ParitySector.EVEN, np.ones(7))


def test_compiled_kernel_matches_csr(rng):
    # the large-dimension matvec path, exercised at small dimension
    spec = ChainSpec(10, 1.0, 0.37)
    for sector in (ParitySector.EVEN, ParitySector.ODD):
        op = _SectorOperator(spec, sector)
        kernel = _get_kernel()
        v = rng.standard_normal(op.dim)
        out = np.empty_like(v)
        kernel(op.diag, v, out, spec.n_sites - 1, spec.field_hx,
               float(int(sector)) * spec.field_hx)
        assert np.allclose(out, op.matvec(v), atol=1e-13)
