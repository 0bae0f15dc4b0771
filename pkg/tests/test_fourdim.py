import numpy as np
import pytest

from qtwistor.calculus import Chart
from qtwistor.connect import MetricField
from qtwistor.errors import DimensionError
from qtwistor.fourdim import (asd_defect_via_ricci, asd_report, basis_from_metric, orthonormal_frame,
                              selfdual_traceless_block, weyl_minus_norm, weyl_plus)
from qtwistor.quat import flat_matrices, verify_basis
from qtwistor.scene import conformal_factor, conformal_metric_entries, load_preset

CH = Chart.standard(4)
P = np.array([0.1, 0.2, -0.3, 0.4])


def gibbons_hawking(swap=False):
    """Half-flat metric V^-1 (dt + x2 dz)^2 + V (dx^2 + dy^2 + dz^2) with V = 2 + x."""
    V = "(2+x1)"
    g = [[f"1/{V}", "0", "0", f"x2/{V}"], ["0", V, "0", "0"], ["0", "0", V, "0"],
         [f"x2/{V}", "0", "0", f"{V}+x2^2/{V}"]]
    if swap:  # exchange coordinates 0 and 1: reverses orientation
        perm = [1, 0, 2, 3]
        g = [[g[perm[i]][perm[j]].replace("x1", "XX").replace("x0", "x1").replace("XX", "x0")
              for j in range(4)] for i in range(4)]
    return MetricField.from_exprs(CH, g)


def test_gibbons_hawking_fixes_orientation():
    g = gibbons_hawking()
    assert weyl_plus(g, P)[1] > 0.1
    assert weyl_minus_norm(g, P) < 1e-12
    assert asd_defect_via_ricci(g, [P]) > 0.1
    gs = gibbons_hawking(swap=True)
    q = P[[1, 0, 2, 3]]
    assert weyl_plus(gs, q)[1] < 1e-12
    assert weyl_minus_norm(gs, q) > 0.1
    assert asd_defect_via_ricci(gs, [q]) < 1e-12


@pytest.mark.parametrize("seed", [11, 12, 13])
def test_conformally_flat_has_no_weyl_curvature(seed):
    g = MetricField.from_exprs(CH, conformal_metric_entries(conformal_factor(seed)))
    assert weyl_plus(g, P)[1] < 1e-12
    assert weyl_minus_norm(g, P) < 1e-12
    assert asd_defect_via_ricci(g, [P]) < 1e-12


def test_metric_adapted_basis():
    sc = load_preset("non-asd4", count=3)
    H = basis_from_metric(sc.metric)
    assert verify_basis(H, sc.points, 1e-12).passed
    for p in sc.points:
        G = sc.metric.at(p)
        E = orthonormal_frame(sc.metric, p)
        np.testing.assert_allclose(E.T @ G @ E, np.eye(4), atol=1e-13)
        for a, J in enumerate(H.at(p)):
            np.testing.assert_allclose(J.T @ G @ J, G, atol=1e-13)
            # fundamental form in the orthonormal frame is the flat self-dual one
            np.testing.assert_allclose(E.T @ G @ J @ E, flat_matrices(4)[a], atol=1e-13)


def test_traceless_block_norm_matches_projection():
    for g in (gibbons_hawking(), load_preset("non-asd4").metric):
        assert weyl_plus(g, P)[1] == pytest.approx(np.linalg.norm(selfdual_traceless_block(g, P)), rel=1e-10)


def test_asd_report_verdicts():
    sc = load_preset("non-asd4", count=4)
    rep = asd_report(sc.metric, sc.points)
    assert rep.info["asd"] is False
    assert rep["self-dual Weyl curvature"].residual > 1e-3
    assert rep["Ricci-form relation (Levi-Civita)"].residual > 1e-3
    assert rep["Weyl oracle and Ricci criterion agree"].passed


def test_dimension_guard():
    with pytest.raises(DimensionError):
        asd_report(load_preset("flat8").metric, [np.zeros(8)])
