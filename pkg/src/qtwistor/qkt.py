"""Quaternionic Kaehler with torsion: torsion type conditions and the twistor coincidence check."""

from __future__ import annotations

import itertools

import numpy as np

from .compare import i1_coincidence_defect
from .connect import metricity_residual, quaternionic_residual, skew_residual, torsion
from .errors import InputsNotQKT, InputsNotTorsionFree
from .report import CheckReport
from .twistor import i1_fields_difference, ltor_residual


def lower_torsion(conn, g, p):
    """T[i, j, k] = g(T(e_i, e_j), e_k)."""
    return np.einsum("lij,lk->ijk", torsion(conn, p), g.at(p))


def type_residual(T, Js):
    """max |T(X,Y,Z) - T(JX,JY,Z) - T(JX,Y,JZ) - T(X,JY,JZ)| over J_1, J_2, J_3 and coordinate triples."""
    T = np.asarray(T, dtype=float)
    worst = 0.0
    for J in Js:
        r = T - (np.einsum("abk,ai,bj->ijk", T, J, J) + np.einsum("ajc,ai,ck->ijk", T, J, J)
                 + np.einsum("ibc,bj,ck->ijk", T, J, J))
        worst = max(worst, float(np.abs(r).max()))
    return worst


def check_qkt_torsion(Js_at, T_at, points, tol=1e-10):
    """Skewness and type residuals of a 3-form.

    ``Js_at(p)`` and ``T_at(p)`` return the basis and the lowered torsion at ``p``.
    """
    pts = [np.asarray(p, dtype=float) for p in points]
    skew = max((skew_residual(T_at(p)) for p in pts), default=0.0)
    typ = max((type_residual(T_at(p), Js_at(p)) for p in pts), default=0.0)
    rep = CheckReport()
    rep.add("torsion totally skew", "qkt-skew", skew, tol, pts)
    rep.add("torsion type (1,2)+(2,1)", "qkt-type", typ, tol, pts)
    return rep


def three_form_basis(n):
    """Orthogonal basis of constant 3-forms e^{ijk}, i < j < k, as (n, n, n) arrays."""
    out = []
    for t in itertools.combinations(range(n), 3):
        T = np.zeros((n, n, n))
        for perm in itertools.permutations(range(3)):
            sign = np.linalg.det(np.eye(3)[list(perm)])
            T[tuple(t[q] for q in perm)] = sign
        out.append(T)
    return out


def _type_rows(T, Js):
    rows = []
    for J in Js:
        r = T - (np.einsum("abk,ai,bj->ijk", T, J, J) + np.einsum("ajc,ai,ck->ijk", T, J, J)
                 + np.einsum("ibc,bj,ck->ijk", T, J, J))
        rows.append(r.ravel())
    return np.concatenate(rows)


def _quaternionic_rows(T, Js, G):
    # S_{e_i} = 1/2 g^{-1} T_i must lie in gl(n,H) + sp(1)
    n = T.shape[0]
    Ginv = np.linalg.inv(G)
    rows = []
    for i in range(n):
        A = 0.5 * Ginv @ T[:, i, :]  # A[k, j] = 1/2 g^{kl} T_{lij}
        P = 0.25 * (A - sum(J @ A @ J for J in Js))
        s = [-np.trace(J @ A) / n for J in Js]
        rows.append((A - P - sum(si * J for si, J in zip(s, Js))).ravel())
    return np.concatenate(rows)


def kernel_search(Js, G=None, quaternionic=False, tol=1e-10):
    """Constant 3-forms in the kernel of the type condition (optionally also Q-preserving).

    Returns a list of orthonormal (n, n, n) kernel vectors.
    """
    Js = np.asarray(Js, dtype=float)
    n = Js.shape[-1]
    G = np.eye(n) if G is None else G
    basis = three_form_basis(n)
    cols = []
    for T in basis:
        row = _type_rows(T, Js)
        if quaternionic:
            row = np.concatenate([row, _quaternionic_rows(T, Js, G)])
        cols.append(row)
    M = np.stack(cols, axis=1)
    _, sv, Vt = np.linalg.svd(M, full_matrices=True)
    rank = int((sv > tol * max(1.0, sv.max())).sum())
    kernel = Vt[rank:]
    return [np.einsum("c,cijk->ijk", v, np.array(basis)) / np.sqrt(6) for v in kernel]


def qkt_candidates(g, H, p, tol=1e-10):
    """Kernel 3-forms at ``p`` with a verdict on whether d + T/2 preserves Q there.

    Returns a list of dicts with keys ``T``, ``type_residual``, ``accepted``, ``reason``.
    """
    from .connect import with_skew_torsion
    Js = H.at(p)
    out = []
    for T in kernel_search(Js, g.at(p), tol=tol):
        conn = with_skew_torsion(g, T)
        q = quaternionic_residual(conn, H, p)
        ok = q <= 1e-8
        out.append({"T": T, "type_residual": type_residual(T, Js), "accepted": ok,
                    "reason": "accepted" if ok else f"d + T/2 does not preserve Q (residual {q:.2e})"})
    return out


def theorem_qkt_check(connT, conn0, g, H, points, twistor_pts=(), tol=1e-8, strict=False):
    """QKT versus torsion-free I_1 coincidence.

    With ``strict`` the precondition failures raise; otherwise they are
    reported under the NOT-QKT tag and the coincidence is not asserted.
    """
    pts = [np.asarray(p, dtype=float) for p in points]
    rep = CheckReport()
    qT = max(quaternionic_residual(connT, H, p) for p in pts)
    mT = max(metricity_residual(connT, g, p) for p in pts)
    tq = check_qkt_torsion(H.at, lambda p: lower_torsion(connT, g, p), pts, tol)
    q0 = max(quaternionic_residual(conn0, H, p) for p in pts)
    t0 = max(float(np.abs(torsion(conn0, p)).max()) for p in pts)
    pre_qkt = max(qT, mT, *(c.residual for c in tq.checks))
    pre_tf = max(q0, t0)
    rep.add("QKT inputs valid", "NOT-QKT", pre_qkt, tol, pts, quaternionic=qT, metricity=mT)
    rep.add("torsion-free inputs valid", "NOT-QKT", pre_tf, tol, pts, quaternionic=q0, torsion=t0)
    if pre_qkt > tol:
        if strict:
            raise InputsNotQKT(f"connection is not QKT (residual {pre_qkt:.3e})")
        rep.info["verdict"] = "NOT-QKT"
        return rep
    if pre_tf > tol:
        if strict:
            raise InputsNotTorsionFree(f"reference connection is not torsion-free quaternionic ({pre_tf:.3e})")
        rep.info["verdict"] = "NOT-QKT"
        return rep
    rep.extend(tq)
    rep.add("(0,2) torsion of the QKT connection", "ltor",
            max(ltor_residual(connT, H, p) for p in pts), tol, pts)
    rep.add("I1 structures coincide", "Prop-2.5-ii", i1_coincidence_defect(conn0, connT, H, pts), tol, pts)
    if twistor_pts:
        rep.add("I1 fields agree entrywise", "Thm-qkt",
                i1_fields_difference(connT, conn0, H, twistor_pts), tol, twistor_pts)
    rep.info["verdict"] = "coincide" if rep.passed else "differ"
    return rep
