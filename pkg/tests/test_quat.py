import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qtwistor import jets
from qtwistor.calculus import Chart, Field, nijenhuis
from qtwistor.errors import DimensionError, NotComplexStructure
from qtwistor.quat import (AdmissibleBasis, basis_residual, flat_matrices, nijenhuis_triple,
                           oproiu_diagnostics, oproiu_defect, project_02, verify_basis)
from qtwistor.scene import load_preset


def random_complex_structure(rng, n):
    A = np.eye(n) + 0.3 * rng.standard_normal((n, n)) / np.sqrt(n)  # keeps J well conditioned
    return A @ flat_matrices(n)[0] @ np.linalg.inv(A)


def perturbed_basis(n, seed, scale=0.3):
    """J'_a = P(x) J_a P(x)^-1: admissible but in general not integrable."""
    rng = np.random.default_rng(seed)
    K1, K2 = scale * rng.standard_normal((2, n, n, n))
    J0 = flat_matrices(n)

    def fn(p, k):
        x = jets.Jet.variables(p, k)
        P = jets.Jet.constant(np.eye(n), n, k) + jets.einsum("klm,m->kl", K1, jets.sin(x)) \
            + jets.einsum("klm,m->kl", K2, x * x)
        Pi = jets.inv(P)
        return jets.stack([P @ jets.einsum("kl,lm->km", J0[a], Pi) for a in range(3)])

    return AdmissibleBasis(Field(Chart.standard(n), (3, n, n), fn))


@pytest.mark.parametrize("n", [4, 8, 12])
def test_flat_matrices_are_quaternionic(n):
    Js = flat_matrices(n)
    assert basis_residual(Js) == 0
    for J in Js:
        np.testing.assert_array_equal(J.T, -J)


def test_flat_block_action():
    J1, J2, J3 = flat_matrices(4)
    e = np.eye(4)
    np.testing.assert_array_equal(J1 @ e[0], e[1])
    np.testing.assert_array_equal(J1 @ e[2], e[3])
    np.testing.assert_array_equal(J2 @ e[0], e[2])
    np.testing.assert_array_equal(J2 @ e[3], e[1])
    np.testing.assert_array_equal(J3 @ e[0], e[3])


def test_dimension_not_multiple_of_four():
    with pytest.raises(DimensionError):
        flat_matrices(6)


def test_verify_basis_flags_bad_triple():
    ch = Chart.standard(4)
    J1, J2, _ = flat_matrices(4)
    bad = AdmissibleBasis(Field.constant(ch, np.stack([J1, J2, J1])))
    rep = verify_basis(bad, [np.zeros(4)])
    assert not rep.passed and rep.checks[0].tag == "admissible"
    assert verify_basis(perturbed_basis(4, 0), [np.full(4, 0.2)]).passed


def test_rotated_basis_is_admissible():
    sc = load_preset("rotated-basis8", count=3)
    assert verify_basis(sc.basis, sc.points, 1e-12).passed


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1), st.sampled_from([4, 8]))
def test_projection_idempotent_and_type(seed, n):
    rng = np.random.default_rng(seed)
    J = random_complex_structure(rng, n)
    B = rng.standard_normal((n, n, n))
    B = B - B.transpose(0, 2, 1)
    P = project_02(B, J)
    np.testing.assert_allclose(project_02(P, J), P, atol=1e-12 * max(1, np.abs(P).max()))
    # B(JX, Y) = -J B(X, Y)
    np.testing.assert_allclose(np.einsum("kaj,ai->kij", P, J), -np.einsum("kl,lij->kij", J, P),
                               atol=1e-10 * max(1, np.abs(P).max()))
    # what is removed has no (0,2) part
    assert np.abs(project_02(B - P, J)).max() < 1e-10 * max(1, np.abs(B).max())


def test_projection_fixes_nijenhuis_tensor():
    H = perturbed_basis(4, 3)
    p = np.array([0.2, -0.1, 0.4, 0.3])
    for a in range(3):
        N = nijenhuis(H[a], p)
        assert np.abs(N).max() > 1e-3
        np.testing.assert_allclose(project_02(N, H.at(p)[a]), N, atol=1e-10)


def test_projection_requires_complex_structure():
    with pytest.raises(NotComplexStructure):
        project_02(np.zeros((4, 4, 4)), np.eye(4))


def test_span_condition_on_integrable_structures():
    for name in ("flat8", "rotated-basis8"):
        sc = load_preset(name, count=3)
        for p in sc.points:
            assert oproiu_defect(sc.basis, p) <= 1e-10


def test_span_condition_fails_for_generic_perturbation():
    H = perturbed_basis(8, 1)
    p = np.full(8, 0.25)
    diag = oproiu_diagnostics(H, p)
    assert diag["six"] > 1e-3
    # the eight-vector span already fills R^8 and cannot discriminate
    assert diag["eight"] < 1e-8


def test_span_condition_trivial_in_dimension_four():
    H = perturbed_basis(4, 2)
    assert oproiu_defect(H, np.full(4, 0.1)) < 1e-10


def test_nijenhuis_triple_shape():
    H = perturbed_basis(4, 0)
    assert nijenhuis_triple(H, np.zeros(4)).shape == (3, 4, 4, 4)
