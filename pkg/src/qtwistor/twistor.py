"""Twistor chart Z = U x S^2 and the almost complex structures I_1, I_2.

Fiber points are unit vectors ``a`` standing for J = a_1 J_1 + a_2 J_2 + a_3 J_3.
A vertical tangent vector is ``w`` in R^3 with w . a = 0 (the element
w_1 J_1 + w_2 J_2 + w_3 J_3 of V_J).  Two stereographic patches cover S^2:

* ``north``: a = (2u, 2v, 1 - u^2 - v^2) / (1 + u^2 + v^2), misses a = (0, 0, -1);
* ``south``: a = (2u, -2v, u^2 + v^2 - 1) / (1 + u^2 + v^2), misses a = (0, 0, 1).

Both satisfy a x d_u a = d_v a, so d_u -> d_v under I_1 in either patch.
"""

from __future__ import annotations

import numpy as np

from . import jets
from .calculus import Chart, Field, nijenhuis_from_jet
from .connect import (_require_quaternionic, sp1_curvature, sp1_forms_jet, torsion)
from .jets import Jet
from .quat import CYCLIC, project_02
from .report import CheckReport

PATCHES = ("north", "south")
_EPS = np.zeros((3, 3, 3))
for _i, _j, _k in CYCLIC:
    _EPS[_i, _j, _k] = 1.0
    _EPS[_i, _k, _j] = -1.0


def _sign(patch):
    if patch not in PATCHES:
        raise ValueError(f"unknown patch {patch!r}")
    return 1.0 if patch == "north" else -1.0


def sphere_from_uv(u, v, patch="north"):
    s = _sign(patch)
    r2 = u * u + v * v
    return np.array([2 * u, s * 2 * v, s * (1 - r2)]) / (1 + r2)


def uv_from_sphere(a, patch="north"):
    a = np.asarray(a, dtype=float)
    if patch == "north":
        if a[2] <= -1 + 1e-12:
            raise ValueError("the north patch does not contain (0, 0, -1)")
        return np.array([a[0], a[1]]) / (1 + a[2])
    if a[2] >= 1 - 1e-12:
        raise ValueError("the south patch does not contain (0, 0, 1)")
    return np.array([a[0], -a[1]]) / (1 - a[2])


def sphere_jet(u, v, patch="north"):
    """Unit vector a(u, v) as a (3,) jet from scalar jets ``u``, ``v``."""
    s = _sign(patch)
    r2 = u * u + v * v
    den = jets.reciprocal(r2 + 1.0)
    return jets.stack([2.0 * u * den, (2.0 * s) * v * den, s * (1.0 - r2) * den])


def sphere_jacobian(u, v, patch="north"):
    """(3, 2) matrix [d_u a, d_v a]."""
    x = Jet.variables(np.array([u, v], dtype=float), 1)
    return sphere_jet(x[0], x[1], patch).grad


def uv_tangent_from_w(u, v, w, patch="north"):
    """(du, dv) of the vertical vector ``w`` at fiber coordinates (u, v)."""
    Da = sphere_jacobian(u, v, patch)
    return np.linalg.solve(Da.T @ Da, Da.T @ np.asarray(w, dtype=float))


def cross_matrix(a):
    """[a]_x with [a]_x w = a x w."""
    return np.einsum("stu,t->su", _EPS, a)


def rotation_to(a):
    """Rodrigues rotation R with R (0,0,1) = a (a != (0,0,-1))."""
    a = np.asarray(a, dtype=float)
    if a[2] <= -1 + 1e-12:
        raise ValueError("rotation to the south pole is handled by the south patch")
    k = np.array([-a[1], a[0], 0.0])
    K = cross_matrix(k)
    return np.eye(3) + K + K @ K / (1 + a[2])


def rotated_triple(Js, a):
    """Admissible basis (J'_1, J'_2, J'_3 = J) at the fiber point ``a``."""
    R = rotation_to(a)
    return np.einsum("sb,skl->bkl", R, Js), R


class TwistorStructure:
    """I_1 (``which=1``) or I_2 (``which=2``) of a quaternionic connection on one patch."""

    def __init__(self, conn, H, which=1, patch="north"):
        if which not in (1, 2):
            raise ValueError("which must be 1 or 2")
        if conn.chart != H.chart:
            raise ValueError("connection and basis live on different charts")
        self.conn = conn
        self.H = H
        self.which = which
        self.patch = patch
        self.sign = 1.0 if which == 1 else -1.0
        self.base = conn.chart
        names = list(self.base.names)
        fu, fv = "u", "v"
        while fu in names or fv in names:
            fu, fv = fu + "_", fv + "_"
        self.chart = Chart(tuple(names) + (fu, fv))
        self.n = self.base.dimension
        mo = min(conn.max_order, H.field.max_order - 1)
        self.field = Field(self.chart, (self.n + 2,) * 2, self._I_jet, mo)

    # -- local pieces ---------------------------------------------------------
    def _pieces(self, P, order):
        """Jets over the Z chart: a, Da (3, 2), Js, L (2, n), F (2, 2)."""
        n = self.n
        P = np.asarray(P, dtype=float)
        x, uv = P[:n], P[n:]
        z = Jet.variables(P, order + 1)
        a_hi = sphere_jet(z[n], z[n + 1], self.patch)
        Da = a_hi.d()[:, n:n + 2]
        a = a_hi.truncate(order)
        Js = self.H.jet(x, order).pad(2)
        w = sp1_forms_jet(self.conn, self.H, x, order).pad(2)  # (3, n)
        cr = jets.einsum("stu,t->su", _EPS, a)
        W = cr @ w  # lift fibers of d_i as vertical R^3 vectors
        DaT = Da.transpose(1, 0)
        Ginv = jets.inv(DaT @ Da)
        proj = Ginv @ DaT  # (2, 3): R^3 vertical -> (du, dv)
        L = proj @ W
        F = (proj @ (cr @ Da)) * self.sign
        return a, Da, Js, L, F, uv

    def _I_jet(self, P, order):
        a, Da, Js, L, F, _ = self._pieces(P, order)
        J = jets.einsum("s,skl->kl", a, Js)
        n = self.n
        zeros = Jet.constant(np.zeros((n, 2)), n + 2, order)
        return jets.block([[J, zeros], [L @ J - F @ L, F]])

    # -- public API -----------------------------------------------------------
    def fiber_point(self, P):
        P = np.asarray(P, dtype=float)
        return sphere_from_uv(P[self.n], P[self.n + 1], self.patch)

    def at(self, P):
        return self.field.at(P)

    def frame(self, P):
        """Values (a, Da, L) at ``P``."""
        a, Da, _, L, _, _ = self._pieces(P, 0)
        return a.value, Da.value, L.value

    def lift(self, P, X):
        """Coordinates of the horizontal lift of the base vector ``X``."""
        _, _, L = self.frame(P)
        X = np.asarray(X, dtype=float)
        return np.concatenate([X, L @ X])

    def vertical(self, P, w):
        a, Da, _ = self.frame(P)
        w = np.asarray(w, dtype=float)
        if abs(w @ a) > 1e-10 * max(1.0, np.linalg.norm(w)):
            raise ValueError("vertical vector must be orthogonal to the fiber point")
        return np.concatenate([np.zeros(self.n), np.linalg.solve(Da.T @ Da, Da.T @ w)])

    def decompose(self, P, V):
        """(base part Y, vertical R^3 vector w) with V = Y^h + vertical(w)."""
        _, Da, L = self.frame(P)
        V = np.asarray(V, dtype=float)
        Y = V[: self.n]
        return Y, Da @ (V[self.n:] - L @ Y)

    def nijenhuis(self, P):
        return nijenhuis_from_jet(self.field.jet(np.asarray(P, dtype=float), 1))


def build_I(conn, H, which=1, patch="north", points=(), tol=1e-8):
    """The structure I_which as a :class:`TwistorStructure`; points are checked for Q-preservation."""
    for p in points:
        _require_quaternionic(conn, H, p, tol)
    return TwistorStructure(conn, H, which, patch)


def twistor_nijenhuis(conn, H, which, P, patch="north"):
    return TwistorStructure(conn, H, which, patch).nijenhuis(P)


def horizontal_lift_direct(conn, H, Y, x, a):
    """Fiber part -sum_s a_s nabla_Y J_s as an endomorphism (validation path)."""
    from .connect import _basis_cov
    D, _ = _basis_cov(conn, H, x, 0)
    return -np.einsum("s,i,sikj->kj", a, Y, D.value)


def horizontal_lift(conn, H, Y, P, patch="north", tol=1e-8):
    """(base part, (du, dv)) of the horizontal lift of ``Y`` at the twistor point ``P``."""
    n = conn.chart.dimension
    _require_quaternionic(conn, H, np.asarray(P)[:n], tol)
    V = TwistorStructure(conn, H, 1, patch).lift(P, Y)
    return V[:n], V[n:]


# -- predicted Nijenhuis components -------------------------------------------

def _bil(B, X, Y):
    return np.einsum("...ij,i,j->...", B, X, Y)


def predicted_horizontal(T, J, X, Y):
    """-(T(JX,JY) - T(X,Y) - J T(JX,Y) - J T(X,JY)) = 4 (T)^{0,2}_J(X, Y)."""
    JX, JY = J @ X, J @ Y
    return -(_bil(T, JX, JY) - _bil(T, X, Y) - J @ _bil(T, JX, Y) - J @ _bil(T, X, JY))


def predicted_vertical(A, a, J, X, Y, which=1):
    """Vertical R^3 part for (X^h, Y^h), from A = d w + w_b ^ w_c (shape (3, n, n))."""
    JX, JY = J @ X, J @ Y
    inv = _bil(A, JX, JY) - _bil(A, X, Y)
    mix = _bil(A, JX, Y) + _bil(A, X, JY)
    mix_t = mix - (mix @ a) * a
    return np.cross(a, inv) + (1.0 if which == 1 else -1.0) * mix_t


def predicted_mixed(Js, a, w, X, which=2):
    """Base part of IN(vertical w, X^h): zero for I_1, -2 (a x w).J X for I_2."""
    if which == 1:
        return np.zeros_like(X)
    Jw = np.einsum("s,skl->kl", np.cross(a, w), Js)
    return -2.0 * Jw @ X


def predicted_nijenhuis(conn, H, P, X, Y, which=1, tol=1e-6):
    """(horizontal part, vertical R^3 part, vertical components along J'_1, J'_2) for (X^h, Y^h)."""
    n = conn.chart.dimension
    P = np.asarray(P, dtype=float)
    x = P[:n]
    _require_quaternionic(conn, H, x, tol)
    st = TwistorStructure(conn, H, which)
    a = st.fiber_point(P)
    Js = H.at(x)
    J = np.einsum("s,skl->kl", a, Js)
    hor = predicted_horizontal(torsion(conn, x), J, X, Y)
    vert = predicted_vertical(sp1_curvature(conn, H, x), a, J, X, Y, which)
    _, R = rotated_triple(Js, a)
    return hor, vert, (R.T @ vert)[:2]


def rotated_ricci_pattern(A, Js, a, X, Y):
    """Vertical components (m1, m2) along (J'_1, J'_2) written with the rotated forms A'."""
    Jr, R = rotated_triple(Js, a)
    Ar = np.einsum("sb,sij->bij", R, A)
    J = Jr[2]
    JX, JY = J @ X, J @ Y
    A1, A2 = Ar[0], Ar[1]
    m1 = -_bil(A2, JX, JY) + _bil(A2, X, Y) + _bil(A1, JX, Y) + _bil(A1, X, JY)
    m2 = _bil(A1, JX, JY) - _bil(A1, X, Y) + _bil(A2, JX, Y) + _bil(A2, X, JY)
    return np.array([m1, m2])


def numeric_pair(st, P, U, V):
    """Decomposed numeric IN(U, V) at ``P``: (base part, vertical R^3 part)."""
    N = st.nijenhuis(P)
    return st.decompose(P, np.einsum("kij,i,j->k", N, U, V))


def pattern_norm(Y, w):
    return float(np.sqrt(np.dot(Y, Y) + np.dot(w, w)))


# -- verdicts -------------------------------------------------------------------

def ltor_residual(conn, H, p):
    T = torsion(conn, p)
    Js = H.at(p)
    return max(float(np.abs(project_02(T, Js[a])).max()) for a in range(3))


def idric_values(rho, Js):
    """rho_a(J_cX,J_cY) - rho_a(X,Y) + rho_b(J_cX,Y) + rho_b(X,J_cY) for cyclic (a, b, c)."""
    out = []
    for a, b, c in CYCLIC:
        J = Js[c]
        r = (J.T @ rho[a] @ J - rho[a] + J.T @ rho[b] + rho[b] @ J)
        out.append(r)
    return np.stack(out)


def idric_residual(conn, H, p):
    from .connect import ricci_forms
    return float(np.abs(idric_values(ricci_forms(conn, H, p, "trace"), H.at(p))).max())


def integrability_verdict(conn, H, points, tol=1e-8, curvature_tol=1e-6):
    rep = CheckReport()
    pts = [np.asarray(p, dtype=float) for p in points]
    for p in pts:
        _require_quaternionic(conn, H, p, max(tol, 1e-8))
    ctol = max(tol, curvature_tol)
    lt = max((ltor_residual(conn, H, p) for p in pts), default=0.0)
    idr = max((idric_residual(conn, H, p) for p in pts), default=0.0)
    rep.add("(0,2) torsion parts vanish", "ltor", lt, tol, pts)
    rep.add("Ricci-form relation", "idric", idr, ctol, pts)
    if H.quaternionic_dimension >= 2:
        bad = lt <= tol and idr > ctol
        rep.add("torsion condition forces Ricci relation", "Cor-cur", 1.0 if bad else 0.0, 0.5, pts,
                flag="CONTRADICTION" if bad else "consistent")
    rep.info["integrable"] = bool(lt <= tol and idr <= ctol)
    return rep


def twistor_points(base_points, per_point=1, seed=0, box=1.0):
    """Twistor points (x, u, v) with seeded fiber coordinates in [-box, box]^2."""
    rng = np.random.default_rng(seed)
    out = []
    for x in base_points:
        for _ in range(per_point):
            out.append(np.concatenate([np.asarray(x, dtype=float), rng.uniform(-box, box, 2)]))
    return out


def transition_jacobian(uv):
    """d(u_s, v_s) / d(u_n, v_n) for the north-to-south change of fiber coordinates."""
    u, v = uv
    r2 = u * u + v * v
    # (u_s, v_s) = (u, -v) / r2
    return np.array([[(r2 - 2 * u * u), -2 * u * v], [2 * u * v, -(r2 - 2 * v * v)]]) / r2 ** 2


def patch_overlap_residual(conn, H, which, P):
    """|I_south - Phi I_north Phi^-1| at a point covered by both patches."""
    n = conn.chart.dimension
    P = np.asarray(P, dtype=float)
    north = TwistorStructure(conn, H, which, "north")
    south = TwistorStructure(conn, H, which, "south")
    a = north.fiber_point(P)
    Ps = np.concatenate([P[:n], uv_from_sphere(a, "south")])
    Phi = np.eye(n + 2)
    Phi[n:, n:] = transition_jacobian(P[n:])
    In = Phi @ north.at(P) @ np.linalg.inv(Phi)
    return float(np.abs(south.at(Ps) - In).max())


def i1_fields_difference(conn, other, H, points, patch="north"):
    """Entrywise max |I_1(conn) - I_1(other)| over twistor points."""
    A = TwistorStructure(conn, H, 1, patch)
    B = TwistorStructure(other, H, 1, patch)
    return max((float(np.abs(A.at(P) - B.at(P)).max()) for P in points), default=0.0)


def square_residual(st, points):
    m = st.n + 2
    return max((float(np.abs(st.at(P) @ st.at(P) + np.eye(m)).max()) for P in points), default=0.0)


def _unit(rng, n):
    v = rng.standard_normal(n)
    return v / np.linalg.norm(v)


def _tangent_unit(rng, a):
    w = rng.standard_normal(3)
    w -= (w @ a) * a
    return w / np.linalg.norm(w)


def n33_fit(conn, H, twistor_pts, seed=0):
    """Fit IN_2(W, X^h) against -2 ((a x w).J X)^h with one constant.

    Returns ``constant`` (least squares over all samples), ``proportionality``
    (max relative deviation from constant * pattern, vertical leftovers included)
    and ``min_ratio`` (min |IN_2(W, X^h)| / (|w| |X|)).
    """
    rng = np.random.default_rng(seed)
    n = conn.chart.dimension
    st = TwistorStructure(conn, H, 2)
    pairs = []
    for P in twistor_pts:
        a = st.fiber_point(P)
        w, X = _tangent_unit(rng, a), _unit(rng, n)
        Y, wv = numeric_pair(st, P, st.vertical(P, w), st.lift(P, X))
        pat = predicted_mixed(H.at(P[:n]), a, w, X, 2)
        pairs.append((np.concatenate([Y, wv]), np.concatenate([pat, np.zeros(3)])))
    num = sum(float(v @ q) for v, q in pairs)
    den = sum(float(q @ q) for _, q in pairs)
    c = num / den if den > 0 else 0.0
    prop = max((float(np.linalg.norm(v - c * q) / np.linalg.norm(q)) for v, q in pairs), default=0.0)
    ratio = min((float(np.linalg.norm(v)) for v, _ in pairs), default=0.0)
    return {"constant": c, "proportionality": prop, "min_ratio": ratio}


def n1n2_residual(conn, H, twistor_pts, seed=0):
    """max |numeric IN_1(X^h, Y^h) - predicted| (base and vertical parts) over samples."""
    rng = np.random.default_rng(seed)
    n = conn.chart.dimension
    st = TwistorStructure(conn, H, 1)
    worst = 0.0
    for P in twistor_pts:
        X, Y = _unit(rng, n), _unit(rng, n)
        hor, vert = numeric_pair(st, P, st.lift(P, X), st.lift(P, Y))
        ph, pv, _ = predicted_nijenhuis(conn, H, P, X, Y, 1)
        worst = max(worst, float(np.abs(hor - ph).max()), float(np.abs(vert - pv).max()))
    return worst


def twistor_report(conn, H, points, tol=1e-8, seed=0, nijenhuis_tol=1e-7, curvature_tol=1e-6):
    """Everything about I_1 and I_2 at seeded twistor points above ``points``."""
    pts = [np.asarray(p, dtype=float) for p in points]
    from .connect import check_quaternionic
    rep = check_quaternionic(conn, H, pts, tol)
    if not rep.passed:
        rep.info["integrable"] = None
        return rep
    zp = twistor_points(pts, 1, seed)
    ntol = max(tol, nijenhuis_tol)
    st1, st2 = TwistorStructure(conn, H, 1), TwistorStructure(conn, H, 2)
    rep.add("I1 and I2 square to -id", "I-square",
            max(square_residual(st1, zp), square_residual(st2, zp)), tol, zp)
    over = [P for P in zp if np.hypot(P[-2], P[-1]) > 0.05]
    rep.add("north and south patches agree", "patch-overlap",
            max((patch_overlap_residual(conn, H, w, P) for w in (1, 2) for P in over), default=0.0),
            ntol, over)
    n1 = max(float(np.abs(st1.nijenhuis(P)).max()) for P in zp)
    rep.add("I1 Nijenhuis tensor vanishes", "I1-nijenhuis", n1, ntol, zp)
    rep.add("I1 Nijenhuis matches torsion/curvature prediction", "n1-n2",
            n1n2_residual(conn, H, zp, seed), ntol, zp)
    fit = n33_fit(conn, H, zp, seed)
    rep.add("I2 Nijenhuis follows the mixed pattern", "n33", fit["proportionality"], ntol, zp,
            constant=fit["constant"], min_ratio=fit["min_ratio"])
    rep.add("I2 is never integrable", "n33", max(0.0, 0.1 - fit["min_ratio"]), 0.0, zp,
            min_ratio=fit["min_ratio"])
    verdict = integrability_verdict(conn, H, pts, tol, curvature_tol)
    rep.extend(verdict)
    agree = (n1 <= ntol) == verdict.info["integrable"]
    rep.add("Nijenhuis and torsion/Ricci verdicts agree", "equivalence", 0.0 if agree else 1.0, 0.5, pts,
            nijenhuis=n1, integrable=verdict.info["integrable"])
    rep.info["n33_constant"] = fit["constant"]
    rep.info["I2_integrable"] = False
    return rep


__all__ = [
    "PATCHES", "sphere_from_uv", "uv_from_sphere", "uv_tangent_from_w", "sphere_jacobian",
    "rotation_to", "rotated_triple", "TwistorStructure", "build_I", "twistor_nijenhuis",
    "horizontal_lift", "horizontal_lift_direct", "predicted_nijenhuis", "predicted_horizontal",
    "predicted_vertical", "predicted_mixed", "rotated_ricci_pattern", "numeric_pair",
    "ltor_residual", "idric_values", "idric_residual", "integrability_verdict", "twistor_points",
    "patch_overlap_residual", "i1_fields_difference", "square_residual", "n33_fit", "n1n2_residual", "twistor_report",
]
