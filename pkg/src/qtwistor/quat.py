"""Admissible bases, the (0,2)_J projection and the span test for quaternionic structures."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jets
from .calculus import Field, nijenhuis_from_jet
from .errors import DegenerateSample, DimensionError, NotComplexStructure
from .report import CheckReport

CYCLIC = ((0, 1, 2), (1, 2, 0), (2, 0, 1))


def _flat_block():
    J1 = np.zeros((4, 4))
    J2 = np.zeros((4, 4))
    # J[k, i] = k-th component of J e_i
    J1[1, 0], J1[0, 1], J1[3, 2], J1[2, 3] = 1, -1, 1, -1
    J2[2, 0], J2[0, 2], J2[1, 3], J2[3, 1] = 1, -1, 1, -1
    return np.stack([J1, J2, J1 @ J2])


def flat_matrices(dim):
    """Constant admissible triple on R^dim, the 4x4 block repeated along the diagonal."""
    if dim % 4:
        raise DimensionError(f"dimension {dim} is not a multiple of 4")
    block = _flat_block()
    out = np.zeros((3, dim, dim))
    for b in range(dim // 4):
        s = slice(4 * b, 4 * b + 4)
        out[:, s, s] = block
    return out


@dataclass
class AdmissibleBasis:
    """Three endomorphism fields over one chart, bundled as a (3, n, n) field."""

    field: Field

    def __post_init__(self):
        n = self.field.chart.dimension
        if self.field.shape != (3, n, n):
            raise ValueError(f"basis field must have shape (3, {n}, {n}), got {self.field.shape}")

    @classmethod
    def from_fields(cls, J1, J2, J3):
        chart = J1.chart
        if not (J1.chart == J2.chart == J3.chart):
            raise ValueError("basis fields live on different charts")
        n = chart.dimension
        mo = min(J1.max_order, J2.max_order, J3.max_order)
        return cls(Field(chart, (3, n, n),
                         lambda p, k: jets.stack([J1.jet(p, k), J2.jet(p, k), J3.jet(p, k)]), mo))

    @classmethod
    def flat(cls, chart):
        return cls(Field.constant(chart, flat_matrices(chart.dimension)))

    @property
    def chart(self):
        return self.field.chart

    @property
    def dimension(self):
        return self.field.chart.dimension

    @property
    def quaternionic_dimension(self):
        return self.dimension // 4

    def at(self, p):
        return self.field.at(p)

    def jet(self, p, order=1):
        return self.field.jet(p, order)

    def __getitem__(self, a):
        return self.field[a]

    def rotated(self, R):
        """Basis J'_b = sum_s R[s, b] J_s for a (3, 3) rotation field ``R`` on the same chart."""
        base = self.field
        return AdmissibleBasis(Field(
            base.chart, base.shape,
            lambda p, k: jets.einsum("sb,sij->bij", R.jet(p, k), base.jet(p, k)),
            min(base.max_order, R.max_order)))


def basis_residual(Js):
    """Largest Frobenius residual of the quaternion identities for a (3, n, n) array."""
    Js = np.asarray(Js, dtype=float)
    eye = np.eye(Js.shape[-1])
    res = [np.linalg.norm(Js[a] @ Js[a] + eye) for a in range(3)]
    res.append(np.linalg.norm(Js[0] @ Js[1] - Js[2]))
    res.append(np.linalg.norm(Js[1] @ Js[0] + Js[2]))
    return max(res)


def verify_basis(H, points, tol=1e-8):
    if H.dimension % 4:
        raise DimensionError(f"chart dimension {H.dimension} is not a multiple of 4")
    points = [np.asarray(p, dtype=float) for p in points]
    worst = max((basis_residual(H.at(p)) for p in points), default=0.0)
    rep = CheckReport()
    rep.add("quaternion identities", "admissible", worst, tol, points)
    return rep


def _check_complex(J, tol):
    J = np.asarray(J, dtype=float)
    r = np.linalg.norm(J @ J + np.eye(J.shape[0]))
    if r > tol:
        raise NotComplexStructure(f"J^2 + id has norm {r:.3e} > {tol:.1e}")
    return J


def project_02(B, J, tol=1e-8):
    """(0,2)_J part of ``B[k, i, j]``: the component with B(JX, Y) = -J B(X, Y).

    Computed as 1/4 (B(X,Y) - B(JX,JY) + J B(JX,Y) + J B(X,JY)); the
    opposite overall sign would give minus the projection.
    """
    J = _check_complex(J, tol)
    B = np.asarray(B, dtype=float)
    BJJ = np.einsum("kab,ai,bj->kij", B, J, J)
    BJ_ = np.einsum("kaj,ai->kij", B, J)
    B_J = np.einsum("kib,bj->kij", B, J)
    return 0.25 * (B - BJJ + np.einsum("kl,lij->kij", J, BJ_ + B_J))


def projection_02_norm(B, J, tol=1e-8):
    return float(np.linalg.norm(project_02(B, J, tol)))


def nijenhuis_triple(H, p):
    """(3, n, n, n) array of the Nijenhuis tensors of J_1, J_2, J_3 at ``p``."""
    Hj = H.jet(p, 1)
    return np.stack([nijenhuis_from_jet(Hj[a]) for a in range(3)])


def _span_distance(v, vecs):
    nv = np.linalg.norm(v)
    if nv <= 1e-10:
        return 0.0
    A = np.stack(vecs, axis=1)
    coef, *_ = np.linalg.lstsq(A, v, rcond=None)
    return float(np.linalg.norm(v - A @ coef) / nv)


def oproiu_diagnostics(H, p, trials=8, seed=0):
    """Span defects of (N_1 + N_2 + N_3)(X, Y) at ``p``.

    Returns a dict with ``six`` (span of J_a X, J_a Y) and ``eight``
    (the same span plus X and Y), both maxima over unit random samples.
    """
    Js = H.at(p)
    n = H.dimension
    Nsum = nijenhuis_triple(H, p).sum(axis=0)
    rng = np.random.default_rng(seed)
    six, eight, used = 0.0, 0.0, 0
    full = min(6, n)
    for _ in range(trials):
        X, Y = rng.standard_normal(n), rng.standard_normal(n)
        X /= np.linalg.norm(X)
        Y /= np.linalg.norm(Y)
        vecs = [Js[a] @ X for a in range(3)] + [Js[a] @ Y for a in range(3)]
        if np.linalg.matrix_rank(np.stack(vecs, axis=1), tol=1e-8) < full:
            continue
        used += 1
        v = np.einsum("kij,i,j->k", Nsum, X, Y)
        six = max(six, _span_distance(v, vecs))
        eight = max(eight, _span_distance(v, vecs + [X, Y]))
    if used == 0:
        raise DegenerateSample(f"span rank collapsed in all {trials} trials at {list(p)}")
    return {"six": six, "eight": eight, "trials": used}


def oproiu_defect(H, p, trials=8, seed=0):
    """Relative distance of N_1+N_2+N_3 from span{J_a X, J_a Y}; 0 when the span test holds."""
    return oproiu_diagnostics(H, p, trials, seed)["six"]
