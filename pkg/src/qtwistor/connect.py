"""Linear connections on a chart and their quaternionic invariants.

Christoffel symbols are stored as ``G[k, i, j]`` with
``nabla_{e_i} e_j = G[k, i, j] e_k``.  Curvature is ``R[l, k, i, j]``, the
l-th component of ``R(e_i, e_j) e_k``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jets
from .calculus import Field, d_oneform_jet, wedge_jet
from .errors import DomainError, NotQuaternionic, NotSkew, SingularMetric
from .quat import CYCLIC
from .report import CheckReport


# -- metrics ----------------------------------------------------------------

@dataclass
class MetricField:
    field: Field

    def __post_init__(self):
        n = self.field.chart.dimension
        if self.field.shape != (n, n):
            raise ValueError(f"metric must have shape ({n}, {n}), got {self.field.shape}")

    @classmethod
    def from_exprs(cls, chart, entries):
        return cls(Field.from_exprs(chart, entries))

    @classmethod
    def euclidean(cls, chart):
        return cls(Field.constant(chart, np.eye(chart.dimension)))

    @property
    def chart(self):
        return self.field.chart

    def at(self, p):
        return self.field.at(p)

    def jet(self, p, order):
        return self.field.jet(p, order)

    def check(self, p, tol=1e-12):
        g = self.at(p)
        if np.abs(g - g.T).max() > tol:
            raise SingularMetric(f"metric is not symmetric at {list(map(float, p))}")
        try:
            np.linalg.cholesky(g)
        except np.linalg.LinAlgError:
            raise SingularMetric(f"metric is not positive definite at {list(map(float, p))}") from None
        return g


def metric_report(g, points, tol=1e-12):
    rep = CheckReport()
    worst = 0.0
    for p in points:
        G = g.at(p)
        worst = max(worst, np.abs(G - G.T).max())
        if np.linalg.eigvalsh(0.5 * (G + G.T)).min() <= 0:
            worst = np.inf
    rep.add("metric symmetric positive definite", "metric", worst, tol, points)
    return rep


# -- connections ------------------------------------------------------------

class Connection:
    """Christoffel-symbol field ``G[k, i, j]`` over a chart."""

    def __init__(self, field, label="connection"):
        n = field.chart.dimension
        if field.shape != (n, n, n):
            raise ValueError(f"Christoffel field must have shape {(n, n, n)}, got {field.shape}")
        self.field = field
        self.label = label

    @property
    def chart(self):
        return self.field.chart

    @property
    def dimension(self):
        return self.field.chart.dimension

    @property
    def max_order(self):
        return self.field.max_order

    def jet(self, p, order):
        return self.field.jet(p, order)

    def christoffel(self, p):
        return self.field.at(p)

    @classmethod
    def flat(cls, chart):
        n = chart.dimension
        return cls(Field.constant(chart, np.zeros((n, n, n))), "flat")

    @classmethod
    def from_exprs(cls, chart, entries, label="explicit"):
        return cls(Field.from_exprs(chart, entries), label)

    def plus(self, S, label=None):
        """The connection nabla + S, with ``S[k, i, j]`` = k-th component of S_{e_i} e_j."""
        base = self
        if isinstance(S, Field):
            fn = lambda p, k: base.jet(p, k) + S.jet(p, k)  # noqa: E731
            mo = min(base.max_order, S.max_order)
        else:
            S = np.asarray(S, dtype=float)
            fn = lambda p, k: base.jet(p, k) + S  # noqa: E731
            mo = base.max_order
        return Connection(Field(self.chart, self.field.shape, fn, mo), label or f"{self.label}+S")


def _christoffel_jet(G, dG, order):
    """Levi-Civita symbols from a metric jet ``G`` and its derivative jet ``dG``."""
    # dG[j, l, i] = d_i g_jl
    # low[l, i, j] = 1/2 (d_i g_jl + d_j g_il - d_l g_ij)
    low = 0.5 * (dG.transpose(1, 2, 0) + dG.transpose(1, 0, 2) - dG.transpose(2, 0, 1))
    try:
        Ginv = jets.inv(G.truncate(order))
    except DomainError:
        raise SingularMetric("metric is singular at an evaluation point") from None
    return jets.einsum("kl,lij->kij", Ginv, low)


def levi_civita(g):
    chart = g.chart
    n = chart.dimension

    def fn(p, k):
        G = g.jet(p, k + 1)
        return _christoffel_jet(G, G.d(), k)

    return Connection(Field(chart, (n, n, n), fn, g.field.max_order - 1), "levi-civita")


def skew_residual(T):
    T = np.asarray(T, dtype=float)
    return max(np.abs(T + T.transpose(1, 0, 2)).max(),
               np.abs(T + T.transpose(0, 2, 1)).max(),
               np.abs(T + T.transpose(2, 1, 0)).max())


def with_skew_torsion(g, T, tol=1e-12):
    """Metric connection with torsion 3-form ``T[i, j, k] = g(T(e_i, e_j), e_k)``.

    ``T`` is a Field or a constant array.
    """
    chart = g.chart
    n = chart.dimension
    if not isinstance(T, Field):
        T = Field.constant(chart, T)
    lc = levi_civita(g)

    def fn(p, k):
        Tj = T.jet(p, k)
        r = skew_residual(Tj.value)
        if r > tol:
            raise NotSkew(f"torsion 3-form fails antisymmetry by {r:.3e}")
        Ginv = jets.inv(g.jet(p, k))
        # extra[k, i, j] = 1/2 g^{kl} T_{lij}
        return lc.jet(p, k) + 0.5 * jets.einsum("kl,lij->kij", Ginv, Tj)

    return Connection(Field(chart, (n, n, n), fn, min(lc.max_order, T.max_order)), "skew-torsion")


# -- tensors ----------------------------------------------------------------

def torsion(conn, p):
    G = conn.christoffel(p)
    return G - G.transpose(0, 2, 1)


def curvature_jet(Gj):
    """R[l, k, i, j] = d_i G^l_jk - d_j G^l_ik + G^l_im G^m_jk - G^l_jm G^m_ik."""
    dG = Gj.d()  # dG[l, j, k, i] = d_i G^l_jk
    order = dG.order
    G = Gj.truncate(order)
    a = dG.transpose(0, 2, 3, 1)  # [l, k, i, j] = d_i G^l_jk
    quad = jets.einsum("lim,mjk->lkij", G, G)
    t = a + quad
    return t - t.transpose(0, 1, 3, 2)


def curvature(conn, p):
    return curvature_jet(conn.jet(p, 1)).value


def metricity_residual(conn, g, p):
    """max |(nabla_i g)_jk| at ``p``."""
    G = conn.jet(p, 0).value
    gj = g.jet(p, 1)
    dg = gj.parts[1]  # dg[j, k, i]
    g0 = gj.value
    ng = (dg.transpose(2, 0, 1) - np.einsum("lij,lk->ijk", G, g0) - np.einsum("lik,jl->ijk", G, g0))
    return float(np.abs(ng).max())


def covariant_endo_jet(Gj, Jj):
    """(nabla_i J)^k_j as jet ``D[i, k, j]``; ``Jj`` must carry one more order than the result."""
    dJ = Jj.d()  # dJ[k, j, i]
    order = dJ.order
    G = Gj.truncate(order)
    J = Jj.truncate(order)
    return (dJ.transpose(2, 0, 1) + jets.einsum("kil,lj->ikj", G, J)
            - jets.einsum("lij,kl->ikj", G, J))


def _basis_cov(conn, H, p, order):
    """Jets of nabla J_a as ``D[a, i, k, j]`` at ``order``."""
    Gj = conn.jet(p, order)
    Hj = H.jet(p, order + 1)
    return jets.stack([covariant_endo_jet(Gj, Hj[a]) for a in range(3)]), Hj.truncate(order)


def _omega_from(D, Hj, n4):
    """omega[c, i] = -(1/4n) tr(J_b nabla_i J_a) for cyclic (a, b, c)."""
    out = []
    for c in range(3):
        a, b = (c + 1) % 3, (c + 2) % 3
        out.append(jets.einsum("kl,ilk->i", Hj[b], D[a]) * (-1.0 / n4))
    return jets.stack(out)


def sp1_forms_jet(conn, H, p, order=0):
    D, Hj = _basis_cov(conn, H, p, order)
    return _omega_from(D, Hj, H.dimension)


def extract_sp1_forms(conn, H, p):
    """(omega_1, omega_2, omega_3) at ``p`` as a (3, n) array."""
    return sp1_forms_jet(conn, H, p, 0).value


def quaternionic_residual(conn, H, p):
    """max over i and cyclic (a, b, c) of |nabla_i J_a + w_b(e_i) J_c - w_c(e_i) J_b|."""
    D, Hj = _basis_cov(conn, H, p, 0)
    D, J = D.value, Hj.value
    w = _omega_from(jets.Jet([D], 1), jets.Jet([J], 1), H.dimension).value
    worst = 0.0
    for a, b, c in CYCLIC:
        r = D[a] + w[b][:, None, None] * J[c] - w[c][:, None, None] * J[b]
        worst = max(worst, float(np.abs(r).max()))
    return worst


def check_quaternionic(conn, H, points, tol=1e-8):
    rep = CheckReport()
    worst = max((quaternionic_residual(conn, H, p) for p in points), default=0.0)
    rep.add("connection preserves Q", "zzv", worst, tol, points)
    return rep


def _require_quaternionic(conn, H, p, tol):
    r = quaternionic_residual(conn, H, p)
    if r > tol:
        raise NotQuaternionic(f"connection does not preserve Q at {list(map(float, p))} "
                              f"(residual {r:.3e})")


def sp1_curvature_jet(conn, H, p, order=0):
    """A_a = d w_a + w_b ^ w_c as a (3, n, n) jet."""
    w = sp1_forms_jet(conn, H, p, order + 1)
    dw = [d_oneform_jet(w[a]) for a in range(3)]
    wt = w.truncate(order)
    return jets.stack([dw[a] + wedge_jet(wt[(a + 1) % 3], wt[(a + 2) % 3]) for a in range(3)])


def sp1_curvature(conn, H, p):
    return sp1_curvature_jet(conn, H, p, 0).value


def ricci_trace(R, Js):
    """rho_a(X, Y) = -1/2 tr(J_a R(X, Y)) from arrays ``R[l, k, i, j]``, ``Js[a, k, l]``."""
    return -0.5 * np.einsum("akl,lkij->aij", Js, R)


def ricci_forms(conn, H, p, method="trace", tol=1e-6):
    """Ricci 2-forms as a (3, n, n) array.

    ``method="trace"`` uses the curvature trace; ``"structure-forms"`` uses
    n (d w_a + w_b ^ w_c) with n the quaternionic dimension, and requires a
    quaternionic connection.
    """
    if method == "trace":
        return ricci_trace(curvature(conn, p), H.at(p))
    if method == "structure-forms":
        _require_quaternionic(conn, H, p, tol)
        return H.quaternionic_dimension * sp1_curvature(conn, H, p)
    raise ValueError(f"unknown Ricci-form method {method!r}")


def rel1_residual(conn, H, p):
    """max |[R(X,Y), J_a] + A_b(X,Y) J_c - A_c(X,Y) J_b| over coordinate pairs."""
    R = curvature(conn, p)
    J = H.at(p)
    A = sp1_curvature(conn, H, p)
    worst = 0.0
    for a, b, c in CYCLIC:
        comm = np.einsum("lkij,km->lmij", R, J[a]) - np.einsum("lm,mkij->lkij", J[a], R)
        r = comm + np.einsum("ij,lk->lkij", A[b], J[c]) - np.einsum("ij,lk->lkij", A[c], J[b])
        worst = max(worst, float(np.abs(r).max()))
    return worst


def split_curvature(conn, H, p, tol=1e-6):
    """(R', rho) with R'(X,Y) = R(X,Y) - 1/(2n) sum_a rho_a(X,Y) J_a."""
    _require_quaternionic(conn, H, p, tol)
    R = curvature(conn, p)
    J = H.at(p)
    rho = ricci_trace(R, J)
    Rp = R - np.einsum("aij,alk->lkij", rho, J) / (2 * H.quaternionic_dimension)
    return Rp, rho


def commutator_residual(Rp, Js):
    """max over a of |[R'(X,Y), J_a]|."""
    out = 0.0
    for a in range(3):
        comm = np.einsum("lkij,km->lmij", Rp, Js[a]) - np.einsum("lm,mkij->lkij", Js[a], Rp)
        out = max(out, float(np.abs(comm).max()))
    return out


def connection_report(conn, H, points, tol=1e-8, curvature_tol=1e-6):
    """Quaternionic check plus Ricci-form cross-check, (rel1) and the curvature split."""
    rep = check_quaternionic(conn, H, points, tol)
    if not rep.passed:
        return rep
    ctol = max(tol, curvature_tol)
    cross = rel = comm = 0.0
    for p in points:
        rt = ricci_forms(conn, H, p, "trace")
        rs = ricci_forms(conn, H, p, "structure-forms", tol=ctol)
        cross = max(cross, float(np.abs(rt - rs).max()))
        rel = max(rel, rel1_residual(conn, H, p))
        Rp, _ = split_curvature(conn, H, p, tol=ctol)
        Js = H.at(p)
        trace = float(np.abs(np.einsum("akl,lkij->aij", Js, Rp)).max())
        comm = max(comm, commutator_residual(Rp, Js), trace)
    rep.add("Ricci forms: trace vs structure forms", "ricci-cross", cross, ctol, points)
    rep.add("curvature commutator relation", "rel1", rel, ctol, points)
    rep.add("curvature split commutes with Q", "prop-p1", comm, ctol, points)
    return rep
