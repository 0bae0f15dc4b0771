"""Chart-level tensor calculus on jets.

Index conventions used throughout the package:

* an endomorphism ``J`` is stored as ``J[k, i]`` = k-th component of ``J e_i``;
* a vector-valued 2-form ``B`` is stored as ``B[k, i, j]`` = k-th component of
  ``B(e_i, e_j)``;
* a 2-form ``a`` is stored as ``a[i, j] = a(e_i, e_j)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jets
from .expr import Const, Expression, evaluate, parse_expression
from .jets import Jet


@dataclass(frozen=True)
class Chart:
    names: tuple

    def __post_init__(self):
        names = tuple(self.names)
        object.__setattr__(self, "names", names)
        if not names:
            raise ValueError("a chart needs at least one coordinate")
        if len(set(names)) != len(names):
            raise ValueError(f"coordinate names must be distinct: {names}")

    @classmethod
    def standard(cls, n, prefix="x"):
        return cls(tuple(f"{prefix}{i}" for i in range(n)))

    @property
    def dimension(self):
        return len(self.names)

    def coordinate_jets(self, point, order):
        x = Jet.variables(np.asarray(point, dtype=float), order)
        return [x[i] for i in range(self.dimension)]


class Field:
    """A tensor field given by a function ``(point, order) -> Jet``.

    Jets are cached per point and order; fields are treated as immutable.
    """

    def __init__(self, chart, shape, fn, max_order=3):
        self.chart = chart
        self.shape = tuple(shape)
        self._fn = fn
        self.max_order = max_order
        self._cache = {}

    def jet(self, point, order=1):
        if order > self.max_order:
            raise ValueError(f"field supports derivatives up to order {self.max_order}")
        point = np.asarray(point, dtype=float)
        if point.shape != (self.chart.dimension,):
            raise ValueError(f"point must have {self.chart.dimension} coordinates")
        key = (point.tobytes(), order)
        hit = self._cache.get(key)
        if hit is None:
            hit = self._fn(point, order)
            if hit.shape != self.shape:
                raise ValueError(f"field produced shape {hit.shape}, expected {self.shape}")
            if len(self._cache) > 256:
                self._cache.clear()
            self._cache[key] = hit
        return hit

    def at(self, point):
        return self.jet(point, 0).value

    def __getitem__(self, idx):
        parent = self
        probe = np.empty(self.shape)[idx]
        return Field(self.chart, probe.shape, lambda p, k: parent.jet(p, k)[idx], self.max_order)

    @classmethod
    def constant(cls, chart, value):
        value = np.asarray(value, dtype=float)
        return cls(chart, value.shape, lambda p, k: Jet.constant(value, chart.dimension, k))

    @classmethod
    def from_exprs(cls, chart, entries):
        """Field whose components are expressions (strings or parsed trees)."""
        shape = _nested_shape(entries)
        parsed = np.empty(shape, dtype=object)
        for idx in np.ndindex(shape):
            e = entries
            for i in idx:
                e = e[i]
            parsed[idx] = e if isinstance(e, Expression) else parse_expression(str(e), chart.names)
        return ExprField(chart, parsed)


def _nested_shape(entries):
    if isinstance(entries, np.ndarray):
        return entries.shape
    shape = []
    e = entries
    while isinstance(e, (list, tuple)):
        shape.append(len(e))
        if not e:
            break
        e = e[0]
    return tuple(shape)


class ExprField(Field):
    def __init__(self, chart, exprs):
        self.exprs = exprs
        self._const = np.zeros(exprs.shape)
        self._live = []
        for idx in np.ndindex(exprs.shape):
            e = exprs[idx]
            if isinstance(e, Const):
                self._const[idx] = e.value
            else:
                self._live.append((idx, e))
        super().__init__(chart, exprs.shape, self._eval)

    def _eval(self, point, order):
        n = self.chart.dimension
        parts = [self._const.copy()] + [np.zeros(self.shape + (n,) * k) for k in range(1, order + 1)]
        if self._live:
            coords = self.chart.coordinate_jets(point, order)
            for idx, e in self._live:
                j = evaluate(e, coords)
                for k in range(order + 1):
                    parts[k][idx] = j.parts[k]
        return Jet(parts, n)

    def strings(self):
        out = np.empty(self.shape, dtype=object)
        for idx in np.ndindex(self.shape):
            out[idx] = str(self.exprs[idx])
        return out.tolist()


def _typed(shape_fn, name):
    def make(chart, entries):
        f = Field.from_exprs(chart, entries)
        want = shape_fn(chart.dimension)
        if f.shape != want:
            raise ValueError(f"{name} over a {chart.dimension}-dim chart needs shape {want}, got {f.shape}")
        return f
    make.__name__ = name
    make.__doc__ = f"Build a {name} from component expressions."
    return make


ScalarField = _typed(lambda n: (), "ScalarField")
VectorField = _typed(lambda n: (n,), "VectorField")
OneFormField = _typed(lambda n: (n,), "OneFormField")
EndoField = _typed(lambda n: (n, n), "EndoField")


def apply_endo(J, X):
    """The vector field ``J X``."""
    return Field(X.chart, X.shape, lambda p, k: jets.einsum("ki,i->k", J.jet(p, k), X.jet(p, k)),
                 min(J.max_order, X.max_order))


# -- operations -------------------------------------------------------------

def bracket_from_jets(X, Y):
    """[X, Y]^k = X^l d_l Y^k - Y^l d_l X^k from order >= 1 vector jets."""
    dX, dY = X.d(), Y.d()
    return jets.einsum("l,kl->k", X.truncate(dY.order), dY) - jets.einsum("l,kl->k", Y.truncate(dX.order), dX)


def lie_bracket(X, Y, p):
    if X.chart != Y.chart:
        raise ValueError("vector fields live on different charts")
    return bracket_from_jets(X.jet(p, 1), Y.jet(p, 1)).value


def d_oneform_jet(alpha):
    """(d alpha)_ij = d_i alpha_j - d_j alpha_i, one order lower than ``alpha``."""
    da = alpha.d()  # da[j, i] = d_i alpha_j
    return da.transpose(1, 0) - da


def d_oneform(alpha, p):
    return d_oneform_jet(alpha.jet(p, 1)).value


def wedge(a, b):
    """(a ^ b)(X, Y) = a(X) b(Y) - a(Y) b(X), no 1/2 factor."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError("covectors of different dimension")
    return np.outer(a, b) - np.outer(b, a)


def wedge_jet(a, b):
    ab = jets.einsum("i,j->ij", a, b)
    return ab - ab.transpose(1, 0)


def nijenhuis_from_jet(J):
    """N(X,Y) = [JX,JY] - [X,Y] - J[JX,Y] - J[X,JY] on coordinate fields.

    ``J`` is an order >= 1 jet of an endomorphism field; returns ``N[k, i, j]``.
    """
    J0 = J.value
    dJ = J.parts[1]  # dJ[k, j, l] = d_l J^k_j
    term1 = np.einsum("li,kjl->kij", J0, dJ)
    ext = np.einsum("kl,lji->kij", J0, dJ)  # J^k_l d_i J^l_j
    N = term1 - term1.transpose(0, 2, 1) - (ext - ext.transpose(0, 2, 1))
    return N


def nijenhuis(J, p):
    return nijenhuis_from_jet(J.jet(p, 1))


def nijenhuis_by_brackets(J, X, Y, p):
    """Evaluate N(X,Y) from the four Lie brackets of the given vector fields."""
    JX, JY = apply_endo(J, X), apply_endo(J, Y)
    Jp = J.at(p)
    return (lie_bracket(JX, JY, p) - lie_bracket(X, Y, p)
            - Jp @ lie_bracket(JX, Y, p) - Jp @ lie_bracket(X, JY, p))


def eval_vector_valued(B, X, Y):
    """B(X, Y) for B[k, i, j]."""
    return np.einsum("kij,i,j->k", B, X, Y)
