"""Four-dimensional specifics: metric-adapted basis, self-dual Weyl curvature, ASD via Ricci forms.

Orientation follows the coordinate order.  The Hodge star on an oriented
orthonormal coframe sends e0^e1 to e2^e3, and the fundamental forms
g(J_a ., .) of the basis built here are e01 + e23, e02 + e31, e03 + e12,
all self-dual.
"""

from __future__ import annotations

import numpy as np

from . import jets
from .calculus import Field
from .connect import curvature, levi_civita
from .errors import DimensionError, DomainError, SingularMetric
from .quat import AdmissibleBasis, flat_matrices
from .report import CheckReport
from .twistor import idric_values

PAIRS = ((0, 1), (0, 2), (0, 3), (2, 3), (3, 1), (1, 2))
STAR = np.block([[np.zeros((3, 3)), np.eye(3)], [np.eye(3), np.zeros((3, 3))]])


def _require_dim4(g):
    if g.chart.dimension != 4:
        raise DimensionError(f"needs a 4-dimensional chart, got {g.chart.dimension}")


def frame_jet(G):
    """Gram-Schmidt frame E[:, k] of the coordinate fields for the metric jet ``G``."""
    n = G.shape[0]
    cols = []
    for k in range(n):
        v = _unit(n, k, G)
        for e in cols:
            v = v - _inner(G, v, e) * e
        nv = _inner(G, v, v)
        if nv.value <= 0:
            raise SingularMetric("metric is not positive definite")
        cols.append(v * jets.reciprocal(jets.sqrt(nv)))
    return jets.stack(cols, axis=1)


def _unit(n, k, like):
    e = np.zeros(n)
    e[k] = 1.0
    return jets.Jet.constant(e, like.nvars, like.order)


def _inner(G, v, w):
    return jets.einsum("i,i->", jets.einsum("ij,j->i", G, w), v)


def orthonormal_frame(g, p):
    return frame_jet(g.jet(p, 0)).value


def basis_from_metric(g):
    """Admissible basis J_a = E J0_a E^-1 from the oriented Gram-Schmidt frame E."""
    _require_dim4(g)
    J0 = flat_matrices(4)
    chart = g.chart

    def fn(p, k):
        G = g.jet(p, k)
        try:
            E = frame_jet(G)
        except DomainError:
            raise SingularMetric("metric is not positive definite") from None
        Einv = jets.einsum("ji,jk->ik", E, G)  # E^T G
        return jets.stack([E @ jets.einsum("kl,lm->km", J0[a], Einv) for a in range(3)])

    return AdmissibleBasis(Field(chart, (3, 4, 4), fn, g.field.max_order))


def riemann_frame(g, p):
    """Rm[a, b, c, d] = <R(e_a, e_b) e_d, e_c> in the orthonormal frame."""
    _require_dim4(g)
    R = curvature(levi_civita(g), p)
    E = orthonormal_frame(g, p)
    G = g.at(p)
    low = np.einsum("lkij,lm->mkij", R, G)  # <R(e_i,e_j)e_k, e_m>
    return np.einsum("mkij,ia,jb,mc,kd->abcd", low, E, E, E, E)


def weyl_frame(g, p):
    Rm = riemann_frame(g, p)
    d = np.eye(4)
    Ric = np.einsum("abad->bd", Rm)
    s = np.trace(Ric)
    kul = (np.einsum("ac,bd->abcd", Ric, d) - np.einsum("ad,bc->abcd", Ric, d)
           + np.einsum("bd,ac->abcd", Ric, d) - np.einsum("bc,ad->abcd", Ric, d))
    dd = np.einsum("ac,bd->abcd", d, d) - np.einsum("ad,bc->abcd", d, d)
    return Rm - 0.5 * kul + (s / 6.0) * dd, Ric, s


def two_form_operator(W):
    """6x6 matrix M[p, q] = W(pair_p, pair_q) in the basis of PAIRS."""
    M = np.empty((6, 6))
    for i, (a, b) in enumerate(PAIRS):
        for j, (c, d) in enumerate(PAIRS):
            M[i, j] = W[a, b, c, d]
    return M


def weyl_parts(g, p):
    """(W+, W-) as 6x6 operators."""
    W, _, _ = weyl_frame(g, p)
    M = two_form_operator(W)
    Pp = 0.5 * (np.eye(6) + STAR)
    Pm = 0.5 * (np.eye(6) - STAR)
    return Pp @ M @ Pp, Pm @ M @ Pm


def weyl_plus(g, p):
    """(W+ operator, Frobenius norm)."""
    Wp, _ = weyl_parts(g, p)
    return Wp, float(np.linalg.norm(Wp))


def weyl_minus_norm(g, p):
    return float(np.linalg.norm(weyl_parts(g, p)[1]))


def selfdual_traceless_block(g, p):
    """Traceless part of the Lambda+ block of the curvature operator (equals W+ there)."""
    Rm = riemann_frame(g, p)
    M = two_form_operator(Rm)
    U = np.vstack([np.eye(3), np.eye(3)]) / np.sqrt(2)  # Lambda+ orthonormal basis
    B = U.T @ M @ U
    return B - np.trace(B) / 3 * np.eye(3)


def asd_defect_at(g, p, H=None):
    H = basis_from_metric(g) if H is None else H
    from .connect import ricci_forms
    rho = ricci_forms(levi_civita(g), H, p, "trace")
    return float(np.abs(idric_values(rho, H.at(p))).max())


def asd_defect_via_ricci(g, points):
    _require_dim4(g)
    H = basis_from_metric(g)
    return max((asd_defect_at(g, p, H) for p in points), default=0.0)


def asd_report(g, points, tol=1e-6):
    _require_dim4(g)
    pts = [np.asarray(p, dtype=float) for p in points]
    H = basis_from_metric(g)
    wp = max((weyl_plus(g, p)[1] for p in pts), default=0.0)
    idr = max((asd_defect_at(g, p, H) for p in pts), default=0.0)
    rep = CheckReport()
    rep.add("self-dual Weyl curvature", "weyl-plus", wp, tol, pts)
    rep.add("Ricci-form relation (Levi-Civita)", "Thm-four-ii", idr, tol, pts)
    agree = (wp <= tol) == (idr <= tol)
    rep.add("Weyl oracle and Ricci criterion agree", "equivalence", 0.0 if agree else 1.0, 0.5, pts,
            weyl_plus=wp, idric=idr)
    rep.info["asd"] = bool(wp <= tol)
    return rep
