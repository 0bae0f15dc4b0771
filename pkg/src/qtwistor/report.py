"""Named residual checks with tolerances and verdicts."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

# criterion tag -> one-line description (each tag names exactly one criterion)
CRITERIA = {
    "admissible": "J_a^2 = -id and J1 J2 = J3 = -J2 J1",
    "metric": "metric symmetric and positive definite",
    "zzv": "connection preserves Q: nabla J_a = -w_b J_c + w_c J_b",
    "ricci-cross": "Ricci forms by trace agree with n (dw_a + w_b ^ w_c)",
    "rel1": "[R, J_a] = -A_b J_c + A_c J_b with A_a = dw_a + w_b ^ w_c",
    "prop-p1": "gl(n,H) part of the curvature commutes with every J_a",
    "split-eq0": "difference tensor splits into a commuting part plus s^i J_i",
    "tr1": "torsion difference equals S_X Y - S_Y X",
    "Prop-2.5-ii": "s1(J1 X) = s2(J2 X) = s3(J3 X)",
    "Cor-t2.72": "s1 = s2 = s3 = 0",
    "Cor-t2.7-ii": "(0,2)_J parts of both torsions agree for J1, J2, J3",
    "eq5": "J[S_Y, J] = [S_JY, J] at sampled fiber points",
    "equivalence": "two criteria give the same verdict",
    "ltor": "(0,2)_J part of the torsion vanishes for J1, J2, J3",
    "idric": "rho_a(J_c X, J_c Y) - rho_a(X, Y) + rho_b(J_c X, Y) + rho_b(X, J_c Y) = 0",
    "Cor-cur": "for n >= 2 ltor implies idric",
    "I1-nijenhuis": "Nijenhuis tensor of I1 on the twistor chart vanishes",
    "I-square": "I_i^2 = -id on the twistor chart",
    "patch-overlap": "north and south stereographic patches give the same I_i",
    "n1-n2": "I1 Nijenhuis on horizontal lifts matches the torsion/Ricci prediction",
    "n33": "I2 Nijenhuis on (vertical, horizontal) pairs is -2 (J W X)^h, never zero",
    "Thm-four-ii": "idric for the Levi-Civita Ricci forms in dimension 4",
    "weyl-plus": "self-dual Weyl curvature vanishes",
    "pq": "N1 + N2 + N3 (X, Y) lies in span{J_a X, J_a Y}",
    "qkt-skew": "torsion 3-form is totally skew",
    "qkt-type": "T(X,Y,Z) = T(JX,JY,Z) + T(JX,Y,JZ) + T(X,JY,JZ) for each J_a",
    "NOT-QKT": "inputs satisfy the QKT / torsion-free preconditions",
    "Thm-qkt": "I1 of the QKT connection coincides with I1 of the torsion-free one",
}


@dataclass
class Check:
    name: str
    tag: str
    residual: float
    tolerance: float
    points: list = field(default_factory=list)
    detail: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.tag not in CRITERIA:
            raise ValueError(f"undocumented criterion tag {self.tag!r}")
        self.residual = float(self.residual)
        self.tolerance = float(self.tolerance)

    @property
    def passed(self):
        return bool(self.residual <= self.tolerance)

    def to_dict(self):
        return {
            "name": self.name,
            "tag": self.tag,
            "residual": self.residual,
            "tolerance": self.tolerance,
            "verdict": "pass" if self.passed else "fail",
            "points": [[float(x) for x in p] for p in self.points],
            "detail": _plain(self.detail),
        }


@dataclass
class CheckReport:
    checks: list = field(default_factory=list)
    info: dict = field(default_factory=dict)

    def add(self, name, tag, residual, tolerance, points=(), **detail):
        c = Check(name, tag, residual, tolerance, [list(map(float, p)) for p in points], detail)
        self.checks.append(c)
        return c

    def extend(self, other):
        self.checks.extend(other.checks)
        self.info.update(other.info)
        return self

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def __getitem__(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self):
        return {
            "checks": [c.to_dict() for c in self.checks],
            "all_passed": self.passed,
            "info": _plain(self.info),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_text(self):
        lines = []
        for c in self.checks:
            mark = "PASS" if c.passed else "FAIL"
            lines.append(f"{mark}  {c.name:<40} [{c.tag}]  residual={c.residual:.3e}  tol={c.tolerance:.1e}")
        lines.append("all checks passed" if self.passed else "some checks FAILED")
        return "\n".join(lines)


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj
