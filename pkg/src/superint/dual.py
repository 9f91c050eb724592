"""Forward-mode dual numbers with a vector tangent.

A :class:`Dual` carries a value and the gradient of that value with respect
to a fixed set of seed variables, so one evaluation yields the whole
gradient. Values may be real or complex; the handful of numpy ufuncs used by
the observables (sin, cos, sqrt, arctan2, hypot, ...) dispatch through
``__array_ufunc__``.
"""
from __future__ import annotations

import numpy as np


class Dual:
    __slots__ = ("val", "grad")
    # make numpy defer to our reflected operators
    __array_priority__ = 1000

    def __init__(self, val, grad):
        self.val = val
        self.grad = np.asarray(grad)

    @classmethod
    def seed(cls, values):
        """Independent variables, one unit tangent per entry of ``values``."""
        n = len(values)
        eye = np.eye(n)
        return [cls(float(v), eye[i]) for i, v in enumerate(values)]

    def __repr__(self):
        return f"Dual({self.val!r}, {self.grad!r})"

    # arithmetic ---------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val + other.val, self.grad + other.grad)
        return Dual(self.val + other, self.grad)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val - other.val, self.grad - other.grad)
        return Dual(self.val - other, self.grad)

    def __rsub__(self, other):
        return Dual(other - self.val, -self.grad)

    def __neg__(self):
        return Dual(-self.val, -self.grad)

    def __pos__(self):
        return self

    def __mul__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val * other.val, self.val * other.grad + other.val * self.grad)
        return Dual(self.val * other, self.grad * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            q = self.val / other.val
            return Dual(q, (self.grad - q * other.grad) / other.val)
        return Dual(self.val / other, self.grad / other)

    def __rtruediv__(self, other):
        q = other / self.val
        return Dual(q, -q / self.val * self.grad)

    def __pow__(self, n):
        if isinstance(n, Dual):
            raise TypeError("Dual exponents are not supported")
        if n == 0:
            return Dual(self.val ** 0, np.zeros_like(self.grad))
        return Dual(self.val**n, n * self.val ** (n - 1) * self.grad)

    def conjugate(self):
        return Dual(np.conj(self.val), np.conj(self.grad))

    @property
    def real(self):
        return Dual(np.real(self.val), np.real(self.grad))

    @property
    def imag(self):
        return Dual(np.imag(self.val), np.imag(self.grad))

    def __abs__(self):
        # real-valued only; complex modulus is not needed on a dual path
        s = np.sign(self.val)
        return Dual(abs(self.val), s * self.grad)

    # comparisons act on the value so guards keep working under AD
    def __lt__(self, other):
        return self.val < value_of(other)

    def __le__(self, other):
        return self.val <= value_of(other)

    def __gt__(self, other):
        return self.val > value_of(other)

    def __ge__(self, other):
        return self.val >= value_of(other)

    def __float__(self):
        return float(self.val)

    # numpy dispatch -----------------------------------------------------
    def __array_ufunc__(self, ufunc, method, *inputs, **kwargs):
        if method != "__call__" or kwargs:
            return NotImplemented
        rule = _UFUNC_RULES.get(ufunc)
        if rule is None:
            return NotImplemented
        return rule(*[_lift(x) for x in inputs])


def _lift(x):
    return x if isinstance(x, Dual) else Dual(x, 0.0)


def value_of(x):
    """Strip any dual tangent, returning the plain value."""
    return x.val if isinstance(x, Dual) else x


def _sin(a):
    return Dual(np.sin(a.val), np.cos(a.val) * a.grad)


def _cos(a):
    return Dual(np.cos(a.val), -np.sin(a.val) * a.grad)


def _sqrt(a):
    s = np.sqrt(a.val)
    return Dual(s, a.grad / (2 * s))


def _arctan2(y, x):
    d = x.val**2 + y.val**2
    return Dual(np.arctan2(y.val, x.val), (x.val * y.grad - y.val * x.grad) / d)


def _hypot(x, y):
    h = np.hypot(x.val, y.val)
    return Dual(h, (x.val * x.grad + y.val * y.grad) / h)


def _square(a):
    return a * a


_UFUNC_RULES = {
    np.sin: _sin,
    np.cos: _cos,
    np.sqrt: _sqrt,
    np.arctan2: _arctan2,
    np.hypot: _hypot,
    np.square: _square,
    np.add: lambda a, b: a + b,
    np.subtract: lambda a, b: a - b,
    np.multiply: lambda a, b: a * b,
    np.true_divide: lambda a, b: a / b,
    np.negative: lambda a: -a,
    np.conjugate: lambda a: a.conjugate(),
    np.absolute: abs,
}
