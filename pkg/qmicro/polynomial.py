"""Dense polynomials as coefficient lists.

A polynomial is a list of coefficients in ascending powers, so
``[1, 10, 5]`` is ``1 + 10x + 5x**2``. The helpers are written against the
number protocol only, so ``fractions.Fraction`` coefficients stay exact and
floats stay floats.
"""

from math import comb
from typing import List, Sequence

Poly = List


def trim(p: Sequence) -> Poly:
    """Strip trailing zero coefficients."""
    n = len(p)
    while n and not p[n - 1]:
        n -= 1
    return list(p[:n])


def pad(p: Sequence, length: int, zero=0) -> Poly:
    """Return ``p`` extended with zeros to ``length`` coefficients."""
    return list(p) + [zero] * (length - len(p))


def add(a: Sequence, b: Sequence) -> Poly:
    """Coefficient-wise sum; the result has the longer length."""
    if len(a) < len(b):
        a, b = b, a
    res = list(a)
    for i, c in enumerate(b):
        res[i] = res[i] + c
    return res


def scale(p: Sequence, c) -> Poly:
    """Multiply every coefficient by ``c``."""
    return [c * x for x in p]


def mul(a: Sequence, b: Sequence) -> Poly:
    """Product by direct convolution; empty if either factor is empty."""
    if not a or not b:
        return []
    res = [a[0] * 0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if not x:
            continue
        for j, y in enumerate(b):
            res[i + j] = res[i + j] + x * y
    return res


def derivative(p: Sequence, order: int = 1) -> Poly:
    """Return the ``order``-th derivative."""
    res = list(p)
    for _ in range(order):
        res = [res[i] * i for i in range(1, len(res))]
    return res


def antiderivative(p: Sequence) -> Poly:
    """Return the antiderivative vanishing at zero."""
    if not p:
        return []
    return [p[0] * 0] + [c / (i + 1) for i, c in enumerate(p)]


def evaluate(p: Sequence, x):
    """Evaluate by Horner's rule; the empty polynomial is 0."""
    acc = 0
    for c in reversed(p):
        acc = acc * x + c
    return acc


def taylor_shift(p: Sequence, h) -> Poly:
    """
    Re-expand ``p(x)`` around ``h``.

    Args:
        p (Sequence): Coefficients of p in powers of x.
        h: Shift.

    Returns:
        Poly: Coefficients q with q(y) = p(y + h).
    """
    n = len(p)
    res = [p[0] * 0] * n if n else []
    for k in range(n):
        # p_k (y + h)^k
        hp = 1
        for j in range(k, -1, -1):
            res[j] = res[j] + p[k] * comb(k, j) * hp
            hp = hp * h
    return res


def integrate(p: Sequence, a, b):
    """Definite integral of ``p`` over ``[a, b]``."""
    q = antiderivative(p)
    return evaluate(q, b) - evaluate(q, a)
