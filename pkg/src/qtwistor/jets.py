"""Array-valued truncated Taylor jets up to third order.

A :class:`Jet` stores the value of a tensor quantity together with its
partial derivatives with respect to ``nvars`` independent variables::

    parts[0]  shape V                 value
    parts[1]  shape V + (n,)          gradient, last axis = derivative index
    parts[2]  shape V + (n, n)        Hessian (symmetric in the trailing axes)
    parts[3]  shape V + (n, n, n)     third derivatives (fully symmetric)

Products use the Leibniz rule and unary functions use Faa di Bruno's
formula, so every derivative is exact up to round-off. Derivative axes
always trail the value axes; einsum specs passed to :func:`einsum` refer
to value axes only and must use lowercase letters.
"""

from __future__ import annotations

import itertools

import numpy as np

from .errors import DomainError

MAX_ORDER = 3
_FLETTERS = "ABC"
_GLETTERS = "DEF"


def _subsets(k):
    # (positions assigned to the left factor, positions assigned to the right factor)
    out = []
    for r in range(k + 1):
        for s in itertools.combinations(range(k), r):
            comp = tuple(j for j in range(k) if j not in s)
            out.append((s, comp))
    return out


_SUBSETS = [_subsets(k) for k in range(MAX_ORDER + 1)]


class Jet:
    """Truncated Taylor expansion of an array-valued function at a point."""

    __slots__ = ("parts", "nvars")
    __array_priority__ = 1000

    def __init__(self, parts, nvars):
        parts = tuple(np.asarray(p, dtype=float) for p in parts)
        if not 1 <= len(parts) <= MAX_ORDER + 1:
            raise ValueError(f"jet order must be between 0 and {MAX_ORDER}")
        self.parts = parts
        self.nvars = int(nvars)

    # -- construction -----------------------------------------------------
    @classmethod
    def constant(cls, value, nvars, order):
        value = np.asarray(value, dtype=float)
        parts = [value] + [np.zeros(value.shape + (nvars,) * k) for k in range(1, order + 1)]
        return cls(parts, nvars)

    @classmethod
    def variables(cls, point, order, nvars=None, offset=0):
        """Jet of the coordinate functions ``x_i`` at ``point`` (vector-valued)."""
        point = np.asarray(point, dtype=float)
        m = point.shape[0]
        nvars = m if nvars is None else nvars
        parts = [point.copy()]
        if order >= 1:
            g = np.zeros((m, nvars))
            g[np.arange(m), offset + np.arange(m)] = 1.0
            parts.append(g)
        for k in range(2, order + 1):
            parts.append(np.zeros((m,) + (nvars,) * k))
        return cls(parts, nvars)

    # -- basic properties ---------------------------------------------------
    @property
    def order(self):
        return len(self.parts) - 1

    @property
    def shape(self):
        return self.parts[0].shape

    @property
    def ndim(self):
        return self.parts[0].ndim

    @property
    def value(self):
        return self.parts[0]

    def _part(self, k):
        if k > self.order:
            raise ValueError(f"jet of order {self.order} has no order-{k} part")
        return self.parts[k]

    @property
    def grad(self):
        return self._part(1)

    @property
    def hess(self):
        return self._part(2)

    @property
    def third(self):
        return self._part(3)

    def __repr__(self):
        return f"Jet(shape={self.shape}, nvars={self.nvars}, order={self.order})"

    # -- structural operations ----------------------------------------------
    def truncate(self, order):
        if order > self.order:
            raise ValueError(f"cannot raise jet order from {self.order} to {order}")
        return Jet(self.parts[: order + 1], self.nvars)

    def d(self):
        """All first partials as a jet of one lower order; new last value axis."""
        if self.order == 0:
            raise ValueError("cannot differentiate an order-0 jet")
        return Jet(self.parts[1:], self.nvars)

    def pad(self, extra, offset=0):
        """Embed into ``nvars + extra`` variables, old variables starting at ``offset``."""
        n = self.nvars
        total = n + extra
        parts = [self.parts[0]]
        for k, p in enumerate(self.parts[1:], start=1):
            q = np.zeros(self.shape + (total,) * k)
            q[(Ellipsis,) + (slice(offset, offset + n),) * k] = p
            parts.append(q)
        return Jet(parts, total)

    def __getitem__(self, idx):
        if not isinstance(idx, tuple):
            idx = (idx,)
        if any(i is Ellipsis or i is None for i in idx):
            raise IndexError("Ellipsis and None are not supported in jet indexing")
        return Jet([p[idx + (slice(None),) * k] for k, p in enumerate(self.parts)], self.nvars)

    def transpose(self, *axes):
        if len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        m = self.ndim
        return Jet([p.transpose(tuple(axes) + tuple(range(m, m + k)))
                    for k, p in enumerate(self.parts)], self.nvars)

    @property
    def T(self):
        return self.transpose(tuple(reversed(range(self.ndim))))

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return Jet([p.reshape(tuple(shape) + (self.nvars,) * k) for k, p in enumerate(self.parts)],
                   self.nvars)

    def sum(self, axis):
        if axis < 0:
            axis += self.ndim
        return Jet([p.sum(axis=axis) for p in self.parts], self.nvars)

    # -- arithmetic ---------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Jet):
            if other.nvars != self.nvars:
                raise ValueError("jets over different variable sets")
            return other
        return Jet.constant(other, self.nvars, self.order)

    def __add__(self, other):
        other = self._coerce(other)
        k = min(self.order, other.order)
        return Jet([_bcast_add(self.parts[i], other.parts[i], self.ndim, other.ndim, i)
                    for i in range(k + 1)], self.nvars)

    __radd__ = __add__

    def __neg__(self):
        return Jet([-p for p in self.parts], self.nvars)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) + (-self)

    def __mul__(self, other):
        if not isinstance(other, Jet):
            c = np.asarray(other, dtype=float)
            if c.ndim == 0:
                return Jet([p * c for p in self.parts], self.nvars)
            other = self._coerce(other)
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            c = np.asarray(other, dtype=float)
            if c.ndim == 0:
                if c == 0:
                    raise DomainError("division of a jet by zero")
                return Jet([p / c for p in self.parts], self.nvars)
            other = self._coerce(other)
        return mul(self, reciprocal(other))

    def __rtruediv__(self, other):
        return mul(self._coerce(other), reciprocal(self))

    def __matmul__(self, other):
        other = self._coerce(other) if not isinstance(other, Jet) else other
        if self.ndim == 2 and other.ndim == 2:
            return einsum("ij,jk->ik", self, other)
        if self.ndim == 2 and other.ndim == 1:
            return einsum("ij,j->i", self, other)
        if self.ndim == 1 and other.ndim == 2:
            return einsum("i,ij->j", self, other)
        raise ValueError("matmul supports 1-d and 2-d jets only")


def _expand(p, vnd, k, target_vnd, lead=0, trail=0):
    """Insert singleton axes so a part broadcasts against another part."""
    shape = p.shape
    vshape, dshape = shape[:vnd], shape[vnd:]
    vshape = (1,) * (target_vnd - vnd) + vshape
    return p.reshape(vshape + (1,) * lead + dshape + (1,) * trail)


def _bcast_add(a, b, and_, bnd, k):
    nd = max(and_, bnd)
    return _expand(a, and_, k, nd) + _expand(b, bnd, k, nd)


def _leibniz(f, g, op, out_ndim):
    order = min(f.order, g.order)
    parts = []
    for k in range(order + 1):
        acc = None
        for s, comp in _SUBSETS[k]:
            arr = op(f.parts[len(s)], g.parts[len(comp)], len(s), len(comp))
            src = s + comp
            if k > 1 and src != tuple(range(k)):
                perm = tuple(range(out_ndim)) + tuple(out_ndim + src.index(j) for j in range(k))
                arr = arr.transpose(perm)
            acc = arr if acc is None else acc + arr
        parts.append(acc)
    return Jet(parts, f.nvars)


def mul(f, g):
    """Elementwise product; value shapes must agree or one must be scalar."""
    if f.nvars != g.nvars:
        raise ValueError("jets over different variable sets")
    fnd, gnd = f.ndim, g.ndim
    if fnd and gnd and f.shape != g.shape:
        raise ValueError(f"elementwise product of shapes {f.shape} and {g.shape}")
    nd = max(fnd, gnd)

    def op(a, b, ka, kb):
        return _expand(a, fnd, ka, nd, trail=kb) * _expand(b, gnd, kb, nd, lead=ka)

    return _leibniz(f, g, op, nd)


def einsum(spec, *operands):
    """Jet-aware einsum for one or two operands (lowercase value letters only).

    Plain arrays among the operands are treated as constants.
    """
    ins, out = spec.replace(" ", "").split("->")
    ins = ins.split(",")
    if len(ins) != len(operands):
        raise ValueError("einsum spec does not match operand count")
    jets = [o for o in operands if isinstance(o, Jet)]
    if not jets:
        return np.einsum(spec, *operands)
    if len(operands) == 1 or len(jets) == 1:
        # linear in the single jet operand
        jpos = next(i for i, o in enumerate(operands) if isinstance(o, Jet))
        jet = operands[jpos]
        parts = []
        for k, p in enumerate(jet.parts):
            dl = _FLETTERS[:k]
            sub = list(ins)
            sub[jpos] = ins[jpos] + dl
            args = [p if i == jpos else operands[i] for i in range(len(operands))]
            parts.append(np.einsum(",".join(sub) + "->" + out + dl, *args))
        return Jet(parts, jet.nvars)
    if len(operands) != 2:
        raise ValueError("einsum over more than two jets is not supported")
    f, g = operands
    if f.nvars != g.nvars:
        raise ValueError("jets over different variable sets")
    a_in, b_in = ins

    def op(a, b, ka, kb):
        fl, gl = _FLETTERS[:ka], _GLETTERS[:kb]
        return np.einsum(f"{a_in}{fl},{b_in}{gl}->{out}{fl}{gl}", a, b)

    return _leibniz(f, g, op, len(out))


def unary(f, derivs):
    """Apply an elementwise function given its value and first three derivatives at f.value."""
    k = f.order
    d0 = derivs[0]
    parts = [np.asarray(d0, dtype=float)]
    if k >= 1:
        f1 = f.parts[1]
        d1 = np.asarray(derivs[1])[(Ellipsis,) + (None,)]
        parts.append(d1 * f1)
    if k >= 2:
        f2 = f.parts[2]
        d1 = np.asarray(derivs[1])[(Ellipsis, None, None)]
        d2 = np.asarray(derivs[2])[(Ellipsis, None, None)]
        parts.append(d2 * f1[..., :, None] * f1[..., None, :] + d1 * f2)
    if k >= 3:
        f3 = f.parts[3]
        d1 = np.asarray(derivs[1])[(Ellipsis, None, None, None)]
        d2 = np.asarray(derivs[2])[(Ellipsis, None, None, None)]
        d3 = np.asarray(derivs[3])[(Ellipsis, None, None, None)]
        a = f1[..., :, None, None]
        b = f1[..., None, :, None]
        c = f1[..., None, None, :]
        mixed = (f2[..., :, :, None] * c + f2[..., :, None, :] * b + f2[..., None, :, :] * a)
        parts.append(d3 * a * b * c + d2 * mixed + d1 * f3)
    return Jet(parts, f.nvars)


# -- elementary functions -------------------------------------------------

def sin(f):
    s, c = np.sin(f.value), np.cos(f.value)
    return unary(f, (s, c, -s, -c))


def cos(f):
    s, c = np.sin(f.value), np.cos(f.value)
    return unary(f, (c, -s, -c, s))


def exp(f):
    e = np.exp(f.value)
    return unary(f, (e, e, e, e))


def log(f):
    x = f.value
    if np.any(x <= 0):
        raise DomainError("log of a non-positive value")
    return unary(f, (np.log(x), 1 / x, -1 / x**2, 2 / x**3))


def sqrt(f):
    x = f.value
    if np.any(x < 0) or (f.order > 0 and np.any(x == 0)):
        raise DomainError("sqrt outside its differentiable domain")
    r = np.sqrt(x)
    if f.order == 0:
        return Jet([r], f.nvars)
    return unary(f, (r, 0.5 / r, -0.25 / (r * x), 0.375 / (r * x * x)))


def reciprocal(f):
    x = f.value
    if np.any(x == 0):
        raise DomainError("division by zero")
    return unary(f, (1 / x, -1 / x**2, 2 / x**3, -6 / x**4))


def power(f, c):
    """f**c for a constant exponent. Integer c allows any base (nonzero if c < 0)."""
    x = f.value
    c = float(c)
    is_int = c == int(c)
    if is_int:
        if c < 0 and np.any(x == 0):
            raise DomainError("negative integer power of zero")
    elif np.any(x <= 0):
        raise DomainError("non-integer power of a non-positive value")
    derivs = []
    coeff = 1.0
    for k in range(MAX_ORDER + 1):
        if coeff == 0.0:
            derivs.append(np.zeros_like(x))
        else:
            derivs.append(coeff * x ** (c - k))
        coeff *= (c - k)
    return unary(f, derivs)


# -- array utilities --------------------------------------------------------

def stack(jets, axis=0):
    jets = list(jets)
    order = min(j.order for j in jets)
    nd = jets[0].ndim
    if axis < 0:
        axis += nd + 1
    return Jet([np.stack([j.parts[k] for j in jets], axis=axis) for k in range(order + 1)],
               jets[0].nvars)


def concatenate(jets, axis=0):
    jets = list(jets)
    order = min(j.order for j in jets)
    nd = jets[0].ndim
    if axis < 0:
        axis += nd
    return Jet([np.concatenate([j.parts[k] for j in jets], axis=axis) for k in range(order + 1)],
               jets[0].nvars)


def block(rows):
    """Assemble a 2-d jet from a nested list of 2-d jet blocks."""
    return concatenate([concatenate(r, axis=1) for r in rows], axis=0)


def inv(a):
    """Matrix inverse of a square 2-d jet, order by order from A B = I."""
    a0 = a.parts[0]
    try:
        b0 = np.linalg.inv(a0)
    except np.linalg.LinAlgError as exc:
        raise DomainError("singular matrix in jet inverse") from exc
    if not np.all(np.isfinite(b0)) or np.linalg.cond(a0) > 1e14:
        raise DomainError("singular matrix in jet inverse")
    parts = [b0]
    for k in range(1, a.order + 1):
        acc = None
        for s, comp in _SUBSETS[k]:
            if not s:
                continue  # the A0 B_k term is solved for
            fl, gl = _FLETTERS[: len(s)], _GLETTERS[: len(comp)]
            arr = np.einsum(f"ij{fl},jk{gl}->ik{fl}{gl}", a.parts[len(s)], parts[len(comp)])
            src = s + comp
            if k > 1 and src != tuple(range(k)):
                perm = (0, 1) + tuple(2 + src.index(j) for j in range(k))
                arr = arr.transpose(perm)
            acc = arr if acc is None else acc + arr
        dl = _FLETTERS[:k]
        parts.append(-np.einsum(f"ij,jk{dl}->ik{dl}", b0, acc))
    return Jet(parts, a.nvars)


__all__ = [
    "Jet", "mul", "einsum", "unary", "sin", "cos", "exp", "log", "sqrt", "reciprocal",
    "power", "stack", "concatenate", "block", "inv", "MAX_ORDER",
]
