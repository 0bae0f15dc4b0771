"""Scene documents (JSON, ``"schema": 1``) and the preset library.

A scene names a chart, a metric, an admissible basis, one or more
connections and the sample points.  Every expression string is parsed
against the declared coordinates; errors carry the key path of the
offending entry.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .calculus import Chart, ExprField, Field
from .connect import Connection, MetricField, levi_civita, with_skew_torsion
from .errors import ExprSyntaxError, SceneError, UnknownSymbolError
from .expr import Const, parse_expression
from .fourdim import basis_from_metric
from .quat import AdmissibleBasis, flat_matrices

SCHEMA = 1
PRESETS = ("flat4", "flat8", "conformal4", "non-asd4", "rotated-basis8")


@dataclass
class Scene:
    name: str
    chart: Chart
    metric: MetricField
    basis: AdmissibleBasis
    connection: Connection
    points: list
    other_connection: Connection | None = None
    torsion_free_connection: Connection | None = None
    torsion_form: Field | None = None
    source: dict = field(default_factory=dict)

    @property
    def dimension(self):
        return self.chart.dimension


# -- parsing helpers -----------------------------------------------------------

def _expr(text, chart, where):
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        text = repr(float(text))
    if not isinstance(text, str):
        raise SceneError(where, f"expected an expression string, got {type(text).__name__}")
    try:
        return parse_expression(text, chart.names)
    except (ExprSyntaxError, UnknownSymbolError) as exc:
        raise SceneError(where, str(exc)) from None


def _matrix_field(entries, chart, shape, where):
    arr = np.empty(shape, dtype=object)

    def walk(e, idx, path):
        depth = len(idx)
        if depth == len(shape):
            arr[idx] = _expr(e, chart, path)
            return
        if not isinstance(e, list) or len(e) != shape[depth]:
            raise SceneError(path, f"expected a list of length {shape[depth]}")
        for i, sub in enumerate(e):
            walk(sub, idx + (i,), f"{path}[{i}]")

    walk(entries, (), where)
    return ExprField(chart, arr)


def _sparse_field(components, chart, rank, where, antisymmetric=False):
    """Field of shape (n,)*rank from {"i,j,k": expr}; missing entries are zero."""
    n = chart.dimension
    if not isinstance(components, dict):
        raise SceneError(where, "expected an object mapping 'i,j,k' to expressions")
    arr = np.empty((n,) * rank, dtype=object)
    arr[...] = Const(0.0)
    for key, text in sorted(components.items()):
        path = f"{where}.{key}"
        try:
            idx = tuple(int(t) for t in key.split(","))
        except ValueError:
            raise SceneError(path, "index key must be comma-separated integers") from None
        if len(idx) != rank or not all(0 <= i < n for i in idx):
            raise SceneError(path, f"index key must have {rank} entries in 0..{n - 1}")
        e = _expr(text, chart, path)
        if antisymmetric:
            if len(set(idx)) < rank:
                raise SceneError(path, "antisymmetric components need distinct indices")
            for perm, sign in _perms(rank):
                j = tuple(idx[q] for q in perm)
                arr[j] = e if sign > 0 else -e
        else:
            arr[idx] = e
    return ExprField(chart, arr)


def _perms(rank):
    out = []
    for perm in itertools.permutations(range(rank)):
        inv = sum(1 for i in range(rank) for j in range(i + 1, rank) if perm[i] > perm[j])
        out.append((perm, -1 if inv % 2 else 1))
    return out


def _connection(desc, chart, metric, where):
    if not isinstance(desc, dict) or "type" not in desc:
        raise SceneError(where, "expected an object with a 'type' key")
    kind = desc["type"]
    n = chart.dimension
    if kind == "levi-civita":
        return levi_civita(metric), None
    if kind == "flat":
        return Connection.flat(chart), None
    if kind == "skew-torsion":
        T = _sparse_field(desc.get("torsion", {}), chart, 3, f"{where}.torsion", antisymmetric=True)
        return with_skew_torsion(metric, T), T
    if kind == "explicit":
        if "christoffel" in desc:
            F = _matrix_field(desc["christoffel"], chart, (n, n, n), f"{where}.christoffel")
        else:
            F = _sparse_field(desc.get("components", {}), chart, 3, f"{where}.components")
        return Connection(F, "explicit"), None
    if kind == "difference":
        base, T = _connection(desc.get("base", {"type": "levi-civita"}), chart, metric, f"{where}.base")
        S = _sparse_field(desc.get("components", {}), chart, 3, f"{where}.components")
        return base.plus(S, "difference"), T
    raise SceneError(f"{where}.type", f"unknown connection type {kind!r}")


def _rotation_basis(R_entries, chart, where):
    R = _matrix_field(R_entries, chart, (3, 3), where)
    return AdmissibleBasis.flat(chart).rotated(R)


def _basis(desc, chart, metric, where="basis"):
    n = chart.dimension
    if desc in (None, "preset"):
        return AdmissibleBasis.flat(chart)
    if desc == "from-metric":
        if n != 4:
            raise SceneError(where, "'from-metric' needs a 4-dimensional chart")
        return basis_from_metric(metric)
    if isinstance(desc, dict):
        if "rotation" in desc:
            return _rotation_basis(desc["rotation"], chart, f"{where}.rotation")
        try:
            fields = [_matrix_field(desc[k], chart, (n, n), f"{where}.{k}") for k in ("J1", "J2", "J3")]
        except KeyError as exc:
            raise SceneError(f"{where}.{exc.args[0]}", "missing basis entry") from None
        return AdmissibleBasis.from_fields(*fields)
    raise SceneError(where, "expected 'preset', 'from-metric' or an object")


def _points(desc, n, count=None, seed=None, where="samples"):
    if desc is None:
        desc = {"box": [-0.5, 0.5]}
    if not isinstance(desc, dict):
        raise SceneError(where, "expected an object")
    if "points" in desc:
        pts = desc["points"]
        if not isinstance(pts, list) or not pts:
            raise SceneError(f"{where}.points", "expected a non-empty list of points")
        out = []
        for i, p in enumerate(pts):
            if not isinstance(p, list) or len(p) != n:
                raise SceneError(f"{where}.points[{i}]", f"expected {n} coordinates")
            try:
                out.append(np.array([float(v) for v in p]))
            except (TypeError, ValueError):
                raise SceneError(f"{where}.points[{i}]", "coordinates must be numbers") from None
    else:
        box = desc.get("box", [-0.5, 0.5])
        try:
            box = np.asarray(box, dtype=float)
        except (TypeError, ValueError):
            raise SceneError(f"{where}.box", "expected [lo, hi] or a list of [lo, hi] pairs") from None
        if box.shape == (2,):
            box = np.tile(box, (n, 1))
        if box.shape != (n, 2) or np.any(box[:, 0] > box[:, 1]):
            raise SceneError(f"{where}.box", f"expected [lo, hi] or {n} pairs with lo <= hi")
        count = int(desc.get("count", 20) if count is None else count)
        seed = int(desc.get("seed", 0) if seed is None else seed)
        if count < 1:
            raise SceneError(f"{where}.count", "need at least one sample point")
        rng = np.random.default_rng(seed)
        out = [box[:, 0] + (box[:, 1] - box[:, 0]) * rng.random(n) for _ in range(count)]
    return sorted(out, key=lambda p: tuple(p.tolist()))


def build_scene(doc, count=None, seed=None, name=None):
    if not isinstance(doc, dict):
        raise SceneError("<root>", "scene must be a JSON object")
    if doc.get("schema") != SCHEMA:
        raise SceneError("schema", f"expected schema {SCHEMA}, got {doc.get('schema')!r}")
    n = doc.get("dimension")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise SceneError("dimension", "expected a positive integer")
    names = doc.get("coordinates") or [f"x{i}" for i in range(n)]
    if not isinstance(names, list) or len(names) != n or not all(isinstance(s, str) for s in names):
        raise SceneError("coordinates", f"expected {n} coordinate names")
    try:
        chart = Chart(tuple(names))
    except ValueError as exc:
        raise SceneError("coordinates", str(exc)) from None
    m = doc.get("metric", "preset")
    if m == "preset":
        metric = MetricField.euclidean(chart)
    else:
        metric = MetricField(_matrix_field(m, chart, (n, n), "metric"))
    basis = _basis(doc.get("basis", "preset"), chart, metric)
    conn, T = _connection(doc.get("connection", {"type": "levi-civita"}), chart, metric, "connection")
    other = tf = None
    if "other_connection" in doc:
        other, _ = _connection(doc["other_connection"], chart, metric, "other_connection")
    if "torsion_free_connection" in doc:
        tf, _ = _connection(doc["torsion_free_connection"], chart, metric, "torsion_free_connection")
    pts = _points(doc.get("samples"), n, count, seed)
    for i, p in enumerate(pts):
        try:
            metric.check(p, tol=1e-10)
        except Exception as exc:  # noqa: BLE001 - report as a scene problem
            raise SceneError(f"metric (sample {i})", str(exc)) from None
    return Scene(name or doc.get("name", "scene"), chart, metric, basis, conn, pts, other, tf, T, doc)


def preset_path(name):
    return resources.files("qtwistor") / "presets" / f"{name}.json"


def read_document(path):
    """Load a scene document from a file, falling back to the packaged presets."""
    p = Path(path)
    if p.is_file():
        text = p.read_text(encoding="utf-8")
    else:
        stem = p.stem if p.suffix == ".json" else p.name
        if p.parent.name in ("", "presets") and stem in PRESETS:
            text = preset_path(stem).read_text(encoding="utf-8")
        else:
            raise SceneError("--scene", f"no such scene file: {path}")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SceneError("--scene", f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def load_scene(path, count=None, seed=None):
    doc = read_document(path)
    return build_scene(doc, count, seed, name=Path(path).stem)


def load_preset(name, count=None, seed=None):
    if name not in PRESETS:
        raise SceneError("--scene", f"unknown preset {name!r}")
    return build_scene(json.loads(preset_path(name).read_text(encoding="utf-8")), count, seed, name)


# -- generators (used to write the presets and by the test corpus) ----------------

def _num(x):
    return repr(round(float(x), 6))


def conformal_factor(seed, n=4):
    """Random analytic f as an expression string, reproducible from ``seed``."""
    rng = np.random.default_rng(seed)
    c = rng.uniform(-0.3, 0.3, size=(n, 3))
    terms = []
    for i in range(n):
        j = (i + 1) % n
        terms.append(f"{_num(c[i, 0])}*sin({_num(1 + c[i, 1])}*x{i} + {_num(c[i, 2])}*x{j})")
        terms.append(f"{_num(c[i, 1] * c[i, 2])}*x{i}*x{j}")
    return " + ".join(terms)


def conformal_metric_entries(f, n=4):
    return [[f"exp(2*({f}))" if i == j else "0" for j in range(n)] for i in range(n)]


def euler_rotation_entries(alpha, beta, gamma):
    """R = Rz(alpha) Ry(beta) Rz(gamma) with angle expressions."""
    ca, sa = f"cos({alpha})", f"sin({alpha})"
    cb, sb = f"cos({beta})", f"sin({beta})"
    cg, sg = f"cos({gamma})", f"sin({gamma})"
    return [
        [f"{ca}*{cb}*{cg} - {sa}*{sg}", f"-{ca}*{cb}*{sg} - {sa}*{cg}", f"{ca}*{sb}"],
        [f"{sa}*{cb}*{cg} + {ca}*{sg}", f"-{sa}*{cb}*{sg} + {ca}*{cg}", f"{sa}*{sb}"],
        [f"-{sb}*{cg}", f"{sb}*{sg}", cb],
    ]


def preset_documents():
    """The preset scene documents, generated deterministically."""
    box4 = {"box": [-0.5, 0.5], "count": 20, "seed": 0}
    docs = {
        "flat4": {"schema": 1, "name": "flat4", "dimension": 4, "metric": "preset", "basis": "preset",
                  "connection": {"type": "levi-civita"}, "samples": box4},
        "flat8": {"schema": 1, "name": "flat8", "dimension": 8, "metric": "preset", "basis": "preset",
                  "connection": {"type": "levi-civita"}, "samples": dict(box4)},
        "conformal4": {"schema": 1, "name": "conformal4", "dimension": 4,
                       "metric": conformal_metric_entries(conformal_factor(2024)), "basis": "preset",
                       "connection": {"type": "levi-civita"}, "samples": dict(box4)},
        "non-asd4": {"schema": 1, "name": "non-asd4", "dimension": 4,
                     "metric": [["1 + x1*x2", "0", "0", "0"], ["0", "1", "0", "0"],
                                ["0", "0", "1", "0"], ["0", "0", "0", "1"]],
                     "basis": "from-metric", "connection": {"type": "levi-civita"}, "samples": dict(box4)},
        "rotated-basis8": {"schema": 1, "name": "rotated-basis8", "dimension": 8, "metric": "preset",
                           "basis": {"rotation": euler_rotation_entries(
                               "0.4*x0 + 0.3*x5", "0.7 + 0.2*x1*x2", "0.5*x3 - 0.2*x7")},
                           "connection": {"type": "levi-civita"}, "samples": dict(box4)},
    }
    # second connections for compare-connections
    docs["flat4"]["other_connection"] = {"type": "difference", "base": {"type": "levi-civita"},
                                         "components": flat_prop25_components([0.3, -0.7, 0.5, 0.2], 4)}
    lam = [0.3, -0.2, 0.1, 0.0, 0.5, 0.0, 0.0, 0.2]
    docs["flat8"]["other_connection"] = {"type": "difference", "base": {"type": "levi-civita"},
                                         "components": {f"{k},{i},{k}": _num(lam[i])
                                                        for i in range(8) for k in range(8) if lam[i]}}
    return docs


def write_presets(directory):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for name, doc in preset_documents().items():
        (directory / f"{name}.json").write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def flat_prop25_components(sigma, dim):
    """Sparse components of S_X = sum_i sigma(J_i X) J_i on the constant basis."""
    Js = flat_matrices(dim)
    S = np.einsum("l,ali,akj->kij", np.asarray(sigma, dtype=float), Js, Js)
    return {f"{k},{i},{j}": _num(S[k, i, j]) for k, i, j in zip(*np.nonzero(np.abs(S) > 1e-15))}

