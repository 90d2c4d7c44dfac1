"""Truncated Taylor-series arithmetic.

A jet is an array ``c`` of shape ``(k + 1, *shape)`` holding normalized Taylor
coefficients ``c[j] = f^(j)(t) / j!`` of a function at each sample time.  The
operations below propagate all coefficients exactly, so composite waveforms get
analytic derivatives of any order without finite differencing.
"""

import math

import numpy as np


def constant(value, shape, order):
    out = np.zeros((order + 1,) + tuple(shape))
    out[0] = value
    return out


def variable(t, order):
    """Jet of the identity function ``f(t) = t``."""
    t = np.asarray(t, dtype=float)
    out = np.zeros((order + 1,) + t.shape)
    out[0] = t
    if order >= 1:
        out[1] = 1.0
    return out


def mul(a, b):
    k = min(len(a), len(b))
    out = np.zeros((k,) + np.broadcast_shapes(a.shape[1:], b.shape[1:]))
    for n in range(k):
        for i in range(n + 1):
            out[n] += a[i] * b[n - i]
    return out


def div(a, b):
    k = min(len(a), len(b))
    out = np.zeros((k,) + np.broadcast_shapes(a.shape[1:], b.shape[1:]))
    for n in range(k):
        acc = np.array(np.broadcast_to(a[n], out.shape[1:]), dtype=float)
        for i in range(1, n + 1):
            acc -= b[i] * out[n - i]
        out[n] = acc / b[0]
    return out


def exp(a):
    k = len(a)
    out = np.zeros_like(a)
    out[0] = np.exp(a[0])
    for n in range(1, k):
        acc = np.zeros_like(a[0])
        for i in range(1, n + 1):
            acc += i * a[i] * out[n - i]
        out[n] = acc / n
    return out


def sqrt(a):
    """Square root jet; the value must be strictly positive where derivatives are used."""
    k = len(a)
    out = np.zeros_like(a)
    out[0] = np.sqrt(a[0])
    with np.errstate(divide="ignore", invalid="ignore"):
        for n in range(1, k):
            acc = a[n].copy()
            for i in range(1, n):
                acc -= out[i] * out[n - i]
            out[n] = acc / (2.0 * out[0])
    return out


def derivative(a):
    """Jet of ``f'`` from a jet of ``f``; loses one order."""
    k = len(a)
    if k < 2:
        raise ValueError("jet order too low to differentiate")
    factors = np.arange(1, k).reshape((k - 1,) + (1,) * (a.ndim - 1))
    return a[1:] * factors


def integrate(d, value):
    """Jet of ``g`` with ``g(t) = value`` and ``g' = d``; gains one order."""
    k = len(d) + 1
    out = np.zeros((k,) + d.shape[1:])
    out[0] = value
    factors = np.arange(1, k).reshape((k - 1,) + (1,) * (d.ndim - 1))
    out[1:] = d / factors
    return out


def arctan_ratio(y, x):
    """Jet of ``arctan(y / x)`` on the principal branch.

    Derivatives use ``(y' x - y x') / (x^2 + y^2)`` so huge ratios near a zero of
    ``x`` stay finite.
    """
    with np.errstate(divide="ignore", invalid="ignore"):
        value = np.arctan(y[0] / x[0])
    value = np.where(x[0] == 0, np.copysign(np.pi / 2, y[0]) * (y[0] != 0), value)
    if len(y) == 1 or len(x) == 1:
        return value[np.newaxis]
    num = mul(derivative(y), x[:-1]) - mul(y[:-1], derivative(x))
    den = mul(x, x) + mul(y, y)
    return integrate(div(num, den[:-1]), value)


def to_derivatives(c):
    """Convert normalized coefficients to plain derivatives ``f^(j)``."""
    scale = np.array([math.factorial(j) for j in range(len(c))], dtype=float)
    return c * scale.reshape((len(c),) + (1,) * (c.ndim - 1))


def sincos(a):
    """Jets of ``sin(a)`` and ``cos(a)``."""
    k = len(a)
    s = np.zeros_like(a)
    c = np.zeros_like(a)
    s[0] = np.sin(a[0])
    c[0] = np.cos(a[0])
    for n in range(1, k):
        acc_s = np.zeros_like(a[0])
        acc_c = np.zeros_like(a[0])
        for i in range(1, n + 1):
            acc_s += i * a[i] * c[n - i]
            acc_c -= i * a[i] * s[n - i]
        s[n] = acc_s / n
        c[n] = acc_c / n
    return s, c
