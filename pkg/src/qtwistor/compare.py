"""Comparing two quaternionic connections through their difference tensor."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .connect import torsion
from .errors import NotQuaternionicPair
from .quat import project_02
from .report import CheckReport


@dataclass
class DifferenceSplit:
    """S_X = S0_X + sum_i s[i](X) J_i at one point.

    ``S0[k, i, j]`` uses the difference-tensor layout and ``s`` has shape (3, n).
    """

    S0: np.ndarray
    s: np.ndarray
    commuting_residual: float

    def reassemble(self, Js):
        return self.S0 + np.einsum("ai,akj->kij", self.s, Js)


def difference_tensor(conn, other, p):
    """``S[k, i, j]`` of S = other - conn at ``p``."""
    return other.christoffel(p) - conn.christoffel(p)


def split_tensor(S, Js, tol=1e-8):
    n4 = S.shape[0]
    # s^a(e_i) = -1/(4n) tr(J_a S_{e_i})
    s = -np.einsum("akl,lik->ai", Js, S) / n4
    S0 = S - np.einsum("ai,akj->kij", s, Js)
    res = 0.0
    for a in range(3):
        comm = np.einsum("kil,lj->kij", S0, Js[a]) - np.einsum("kl,lij->kij", Js[a], S0)
        res = max(res, float(np.abs(comm).max()))
    if res > tol:
        raise NotQuaternionicPair(f"difference tensor leaves gl(n,H) + sp(1) (residual {res:.3e})")
    return DifferenceSplit(S0, s, res)


def split_difference(conn, other, H, p, tol=1e-8):
    return split_tensor(difference_tensor(conn, other, p), H.at(p), tol)


def _unit_samples(n, count, seed):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((count, n))
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    return np.vstack([np.eye(n), X])


def i1_pointwise(split, Js, samples):
    """max over X of |s1(J1X) - s2(J2X)| and |s2(J2X) - s3(J3X)|."""
    v = np.stack([np.einsum("i,ij,tj->t", split.s[a], Js[a], samples) for a in range(3)])
    return float(max(np.abs(v[0] - v[1]).max(), np.abs(v[1] - v[2]).max()))


def i1_coincidence_defect(conn, other, H, points, trials=8, seed=0, tol=1e-8):
    samples = _unit_samples(H.dimension, trials, seed)
    return max((i1_pointwise(split_difference(conn, other, H, p, tol), H.at(p), samples)
                for p in points), default=0.0)


def i2_coincidence_defect(conn, other, H, points, tol=1e-8):
    return max((float(np.abs(split_difference(conn, other, H, p, tol).s).max()) for p in points),
               default=0.0)


def torsion02_defect_at(T, Tp, Js):
    return max(float(np.abs(project_02(Tp, Js[a]) - project_02(T, Js[a])).max()) for a in range(3))


def torsion02_defect(conn, other, H, p):
    return torsion02_defect_at(torsion(conn, p), torsion(other, p), H.at(p))


def tr1_residual(conn, other, p):
    """max |T'(X,Y) - T(X,Y) - S_X Y + S_Y X| over coordinate pairs."""
    S = difference_tensor(conn, other, p)
    return float(np.abs(torsion(other, p) - torsion(conn, p) - (S - S.transpose(0, 2, 1))).max())


def _S_of(S, X):
    # endomorphism S_X
    return np.einsum("kij,i->kj", S, X)


def eq5_residual(S, Js, count=8, seed=0):
    """max |J[S_Y, J] - [S_JY, J]| over random fiber points J and unit Y."""
    rng = np.random.default_rng(seed)
    n = S.shape[0]
    worst = 0.0
    for _ in range(count):
        a = rng.standard_normal(3)
        a /= np.linalg.norm(a)
        J = np.einsum("s,skl->kl", a, Js)
        Y = rng.standard_normal(n)
        Y /= np.linalg.norm(Y)
        SY, SJY = _S_of(S, Y), _S_of(S, J @ Y)
        r = J @ (SY @ J - J @ SY) - (SJY @ J - J @ SJY)
        worst = max(worst, float(np.abs(r).max()))
    return worst


def eq7_rhs(S, J):
    """[S_JX, J]Y - J[S_X, J]Y - [S_JY, J]X + J[S_Y, J]X as a tensor ``[k, x, y]``."""
    # C[x] = [S_{e_x}, J]
    C = np.einsum("kxl,lj->xkj", S, J) - np.einsum("kl,lxj->xkj", J, S)
    CJ = np.einsum("xa,akj->xkj", J.T, C)  # [S_{J e_x}, J]
    JC = np.einsum("kl,xlj->xkj", J, C)
    first = (CJ - JC).transpose(1, 0, 2)  # [k, x, y], acting on Y = e_y
    return first - first.transpose(0, 2, 1)


def eq8_rhs(s, Js):
    """The J_3 instance of :func:`eq7_rhs` expanded through s^1, s^2 (tensor ``[k, x, y]``).

    -2 (s1(J3X) + s2(X)) J2Y - 2 (s1(X) - s2(J3X)) J1Y, antisymmetrized in (X, Y).
    """
    J1, J2, J3 = Js
    s1, s2 = s[0], s[1]
    c2 = s1 @ J3 + s2
    c1 = s1 - s2 @ J3
    out = -2.0 * (np.einsum("x,ky->kxy", c2, J2) + np.einsum("x,ky->kxy", c1, J1))
    return out - out.transpose(0, 2, 1)


def eq8_rhs_printed(s, Js):
    """Variant with (s1(J3X) - s2(X)) and (s1(X) + s2(J3X)) and no factor -2; it does not match :func:`eq7_rhs`."""
    J1, J2, J3 = Js
    s1, s2 = s[0], s[1]
    c2 = s1 @ J3 - s2
    c1 = s1 + s2 @ J3
    out = np.einsum("x,ky->kxy", c2, J2) - np.einsum("x,ky->kxy", c1, J1)
    return out - out.transpose(0, 2, 1)


def compare_report(conn, other, H, points, tol=1e-8, trials=8, seed=0):
    rep = CheckReport()
    pts = list(points)
    splits = [split_difference(conn, other, H, p, tol) for p in pts]
    recon = max(float(np.abs(sp.reassemble(H.at(p)) - difference_tensor(conn, other, p)).max())
                for sp, p in zip(splits, pts))
    comm = max(sp.commuting_residual for sp in splits)
    rep.add("difference tensor splitting", "split-eq0", max(recon, comm), tol, pts)
    rep.add("torsion difference identity", "tr1", max(tr1_residual(conn, other, p) for p in pts), tol, pts)
    samples = _unit_samples(H.dimension, trials, seed)
    i1 = max(i1_pointwise(sp, H.at(p), samples) for sp, p in zip(splits, pts))
    i2 = max(float(np.abs(sp.s).max()) for sp in splits)
    t02 = max(torsion02_defect(conn, other, H, p) for p in pts)
    e5 = max(eq5_residual(difference_tensor(conn, other, p), H.at(p), trials, seed) for p in pts)
    rep.add("I1 structures coincide", "Prop-2.5-ii", i1, tol, pts)
    rep.add("I2 structures coincide", "Cor-t2.72", i2, tol, pts)
    rep.add("(0,2) torsion parts agree", "Cor-t2.7-ii", t02, tol, pts)
    rep.add("commutator form of I1 coincidence", "eq5", e5, tol, pts)
    agree = (i1 <= tol) == (t02 <= tol) == (e5 <= tol)
    rep.add("I1 criteria agree", "equivalence", 0.0 if agree else 1.0, 0.5, pts,
            i1=i1, torsion02=t02, eq5=e5)
    return rep
