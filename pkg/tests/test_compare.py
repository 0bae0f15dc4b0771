import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qtwistor.compare import (compare_report, difference_tensor, eq5_residual, eq7_rhs, eq8_rhs, eq8_rhs_printed,
                              i1_coincidence_defect, i2_coincidence_defect, split_difference, split_tensor,
                              torsion02_defect, tr1_residual)
from qtwistor.connect import levi_civita
from qtwistor.errors import NotQuaternionicPair
from qtwistor.quat import flat_matrices, project_02
from qtwistor.scene import load_preset

from corpus import QuaternionicFamily, commuting_part, sample_points


def constant_quaternionic_S(rng, n, s=None):
    Js = flat_matrices(n)
    S0 = np.stack([commuting_part(rng.standard_normal((n, n)), Js) for _ in range(n)], axis=1)
    s = rng.standard_normal((3, n)) if s is None else s
    return S0 + np.einsum("ai,akj->kij", s, Js), S0, s


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31 - 1), st.sampled_from([4, 8]))
def test_split_recovers_parts(seed, n):
    rng = np.random.default_rng(seed)
    S, S0, s = constant_quaternionic_S(rng, n)
    sp = split_tensor(S, flat_matrices(n))
    np.testing.assert_allclose(sp.S0, S0, atol=1e-12)
    np.testing.assert_allclose(sp.s, s, atol=1e-12)
    np.testing.assert_allclose(sp.reassemble(flat_matrices(n)), S, atol=1e-12)


def test_split_rejects_non_quaternionic_tensor():
    with pytest.raises(NotQuaternionicPair):
        split_tensor(np.random.default_rng(0).standard_normal((4, 4, 4)), flat_matrices(4))


def test_torsion_identity():
    fam = QuaternionicFamily(8, "generic", 2)
    c0, c1 = fam.pair()
    for p in sample_points(8, 3, 0):
        assert tr1_residual(c0, c1, p) < 1e-14
    sc = load_preset("non-asd4", count=2)
    rng = np.random.default_rng(1)
    other = sc.connection.plus(rng.standard_normal((4, 4, 4)))
    assert tr1_residual(sc.connection, other, sc.points[0]) < 1e-13


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31 - 1), st.sampled_from([4, 8]))
def test_eq7_is_minus_four_projection_difference(seed, n):
    rng = np.random.default_rng(seed)
    S = rng.standard_normal((n, n, n))
    for J in flat_matrices(n):
        dT = S - S.transpose(0, 2, 1)
        np.testing.assert_allclose(eq7_rhs(S, J), -4 * project_02(dT, J), atol=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31 - 1), st.sampled_from([4, 8]))
def test_eq8_expansion_matches_eq7(seed, n):
    rng = np.random.default_rng(seed)
    S, _, s = constant_quaternionic_S(rng, n)
    Js = flat_matrices(n)
    np.testing.assert_allclose(eq8_rhs(s, Js), eq7_rhs(S, Js[2]), atol=1e-12)


def test_printed_eq8_signs_disagree():
    rng = np.random.default_rng(0)
    S, _, s = constant_quaternionic_S(rng, 4)
    Js = flat_matrices(4)
    assert np.abs(eq8_rhs_printed(s, Js) - eq7_rhs(S, Js[2])).max() > 1.0


def test_prop25_family_coincides():
    fam = QuaternionicFamily(8, "prop25", 0)
    c0, c1 = fam.pair()
    H = fam.basis()
    pts = sample_points(8, 4, 0)
    assert i1_coincidence_defect(c0, c1, H, pts) < 1e-12
    assert max(torsion02_defect(c0, c1, H, p) for p in pts) < 1e-12
    assert i2_coincidence_defect(c0, c1, H, pts) > 1e-3
    for p in pts:
        assert eq5_residual(difference_tensor(c0, c1, p), H.at(p)) < 1e-12


def test_single_s_family_differs():
    fam = QuaternionicFamily(4, "single", 5)
    c0, c1 = fam.pair()
    H = fam.basis()
    pts = sample_points(4, 3, 5)
    assert i1_coincidence_defect(c0, c1, H, pts) > 1e-3
    assert max(torsion02_defect(c0, c1, H, p) for p in pts) > 1e-3


def test_zero_s_family_gives_equal_I2():
    fam = QuaternionicFamily(8, "zero-s", 3)
    c0, c1 = fam.pair()
    assert i2_coincidence_defect(c0, c1, fam.basis(), sample_points(8, 3, 3)) < 1e-14


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31 - 1), st.sampled_from(["prop25", "generic", "single", "zero-s"]))
def test_three_i1_criteria_agree(seed, kind):
    n = 4 if seed % 2 else 8
    fam = QuaternionicFamily(n, kind, seed)
    c0, c1 = fam.pair()
    rep = compare_report(c0, c1, fam.basis(), sample_points(n, 2, seed), tol=1e-9)
    assert rep["I1 criteria agree"].passed
    assert rep["difference tensor splitting"].passed
    assert rep["torsion difference identity"].passed


def test_split_against_rotated_basis():
    # same Q in a rotated basis: s'^b(J'_b X) = -sigma(X) for every b
    sc = load_preset("rotated-basis8", count=2)
    fam = QuaternionicFamily(8, "prop25", 1)
    c0, c1 = fam.pair()
    for p in sc.points:
        sp = split_difference(c0, c1, sc.basis, p)
        assert sp.commuting_residual < 1e-12
    assert i1_coincidence_defect(c0, c1, sc.basis, sc.points) < 1e-12


def test_compare_report_on_preset():
    sc = load_preset("flat4", count=3)
    rep = compare_report(sc.connection, sc.other_connection, sc.basis, sc.points)
    tags = {c.tag: c.passed for c in rep.checks}
    assert tags["Prop-2.5-ii"] and tags["Cor-t2.7-ii"] and tags["eq5"] and not tags["Cor-t2.72"]


def test_levi_civita_versus_itself():
    sc = load_preset("conformal4", count=2)
    lc = levi_civita(sc.metric)
    assert i2_coincidence_defect(lc, sc.connection, sc.basis, sc.points) < 1e-14
