"""Exact univariate polynomial arithmetic over Fraction.

Polynomials are tuples of Fraction coefficients in ascending order.  All
routines here are exact; sign questions on an interval are settled by Sturm
chains and interval arithmetic rather than sampling.
"""

from __future__ import annotations

import math
from fractions import Fraction

Poly = tuple[Fraction, ...]

_ZERO = Fraction(0)
_ONE = Fraction(1)


def as_fraction(x) -> Fraction:
    """Convert int/float/str/Fraction to an exact Fraction.

    Floats convert exactly (they are binary rationals); strings accept both
    decimal and "p/q" forms.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"non-finite value {x!r}")
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot convert {type(x).__name__} to Fraction")


def poly(coeffs) -> Poly:
    p = tuple(as_fraction(c) for c in coeffs)
    while len(p) > 1 and p[-1] == 0:
        p = p[:-1]
    return p if p else (_ZERO,)


def degree(p: Poly) -> int:
    return len(p) - 1


def is_zero(p: Poly) -> bool:
    return all(c == 0 for c in p)


def peval(p: Poly, x) -> Fraction:
    x = as_fraction(x)
    acc = _ZERO
    for c in reversed(p):
        acc = acc * x + c
    return acc


def peval_float(p: Poly, x: float) -> float:
    acc = 0.0
    for c in reversed(p):
        acc = acc * float(x) + float(c)
    return acc


def padd(p: Poly, q: Poly) -> Poly:
    n = max(len(p), len(q))
    return poly(tuple((p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0)
                      for i in range(n)))


def psub(p: Poly, q: Poly) -> Poly:
    return padd(p, pscale(q, -1))


def pscale(p: Poly, s) -> Poly:
    s = as_fraction(s)
    return poly(tuple(c * s for c in p))


def pmul(p: Poly, q: Poly) -> Poly:
    out = [_ZERO] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a == 0:
            continue
        for j, b in enumerate(q):
            out[i + j] += a * b
    return poly(out)


def pderiv(p: Poly) -> Poly:
    if len(p) == 1:
        return (_ZERO,)
    return poly(tuple(p[i] * i for i in range(1, len(p))))


def pantideriv(p: Poly) -> Poly:
    return poly((_ZERO,) + tuple(c / (i + 1) for i, c in enumerate(p)))


def integrate_over(p: Poly, a, b) -> Fraction:
    anti = pantideriv(p)
    return peval(anti, b) - peval(anti, a)


def pcompose(p: Poly, inner: Poly) -> Poly:
    """p(inner(x)), exact."""
    acc: Poly = (_ZERO,)
    for c in reversed(p):
        acc = padd(pmul(acc, inner), (as_fraction(c),))
    return acc


def _pdivmod(p: Poly, q: Poly) -> tuple[Poly, Poly]:
    if is_zero(q):
        raise ZeroDivisionError("polynomial division by zero")
    rem = list(p)
    quo = [_ZERO] * max(1, len(p) - len(q) + 1)
    dq = degree(q)
    lead = q[-1]
    for i in range(len(rem) - 1, dq - 1, -1):
        if rem[i] == 0:
            continue
        k = rem[i] / lead
        quo[i - dq] = k
        for j in range(len(q)):
            rem[i - dq + j] -= k * q[j]
    return poly(quo), poly(rem[:dq] if dq > 0 else [_ZERO])


def pgcd(p: Poly, q: Poly) -> Poly:
    a, b = poly(p), poly(q)
    while not is_zero(b):
        _, r = _pdivmod(a, b)
        a, b = b, r
    if is_zero(a):
        return (_ONE,)
    return pscale(a, 1 / a[-1])


def squarefree(p: Poly) -> Poly:
    if degree(p) <= 1:
        return p
    g = pgcd(p, pderiv(p))
    if degree(g) == 0:
        return p
    quo, _ = _pdivmod(p, g)
    return quo


def sturm_chain(p: Poly) -> list[Poly]:
    chain = [poly(p), pderiv(p)]
    while not is_zero(chain[-1]) and degree(chain[-1]) > 0:
        _, r = _pdivmod(chain[-2], chain[-1])
        if is_zero(r):
            break
        chain.append(pscale(r, -1))
    return chain


def _variations(chain: list[Poly], x: Fraction) -> int:
    signs = []
    for q in chain:
        v = peval(q, x)
        if v != 0:
            signs.append(1 if v > 0 else -1)
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def count_roots(p: Poly, a, b) -> int:
    """Number of distinct real roots of p in (a, b]."""
    a, b = as_fraction(a), as_fraction(b)
    if a >= b:
        return 0
    sf = squarefree(p)
    if degree(sf) == 0:
        return 0
    chain = sturm_chain(sf)
    return _variations(chain, a) - _variations(chain, b)


def count_roots_closed(p: Poly, a, b) -> int:
    a = as_fraction(a)
    extra = 1 if peval(p, a) == 0 else 0
    return count_roots(p, a, b) + extra


def isolate_roots(p: Poly, a, b, width) -> list[tuple[Fraction, Fraction]]:
    """Disjoint intervals of length <= width covering the roots of p in [a, b].

    An exact root hit is returned as a degenerate interval (r, r).
    """
    a, b, width = as_fraction(a), as_fraction(b), as_fraction(width)
    if a >= b:
        return []
    sf = squarefree(p)
    if degree(sf) == 0:
        return []
    chain = sturm_chain(sf)
    out: list[tuple[Fraction, Fraction]] = []
    if peval(sf, a) == 0:
        out.append((a, a))
    va, vb = _variations(chain, a), _variations(chain, b)
    # stack holds (lo, hi, v(lo), v(hi)); v(lo)-v(hi) roots live in (lo, hi]
    stack = [(a, b, va, vb)]
    while stack:
        lo, hi, vlo, vhi = stack.pop()
        n = vlo - vhi
        if n <= 0:
            continue
        if n == 1:
            if peval(sf, hi) == 0:
                out.append((hi, hi))
                continue
            if hi - lo <= width:
                out.append((lo, hi))
                continue
        mid = (lo + hi) / 2
        vmid = _variations(chain, mid)
        stack.append((lo, mid, vlo, vmid))
        stack.append((mid, hi, vmid, vhi))
    out.sort()
    return out


def interval_eval(p: Poly, lo, hi) -> tuple[Fraction, Fraction]:
    """Exact interval-arithmetic bounds of p over [lo, hi] (Horner form)."""
    lo, hi = as_fraction(lo), as_fraction(hi)
    acc_lo, acc_hi = _ZERO, _ZERO
    for c in reversed(p):
        cands = (acc_lo * lo, acc_lo * hi, acc_hi * lo, acc_hi * hi)
        acc_lo, acc_hi = min(cands) + c, max(cands) + c
    return acc_lo, acc_hi


def abs_bound(p: Poly, lo, hi) -> Fraction:
    a, b = interval_eval(p, lo, hi)
    return max(abs(a), abs(b))


def certified_max(p: Poly, a, b, slack=Fraction(1, 10**9)) -> Fraction:
    """Upper bound U >= max(p on [a, b]) with U - max <= slack when feasible.

    Always returns a valid upper bound; the slack target is met unless the
    refinement cap is reached first.
    """
    a, b, slack = as_fraction(a), as_fraction(b), as_fraction(slack)
    best = max(peval(p, a), peval(p, b))
    dp = pderiv(p)
    if is_zero(dp):
        return p[0]
    width = b - a
    upper = interval_eval(p, a, b)[1]
    for _ in range(40):
        width = width / 8
        upper = best
        for lo, hi in isolate_roots(dp, a, b, width):
            if lo == hi:
                best = max(best, peval(p, lo))
                continue
            best = max(best, peval(p, (lo + hi) / 2))
            upper = max(upper, interval_eval(p, lo, hi)[1])
        upper = max(upper, best)
        if upper - best <= slack:
            return upper
    return upper


def certify_negative(p: Poly, a, b, slack=Fraction(1, 10**9)):
    """Decide whether p < 0 strictly on [a, b].

    Returns (True, upper_bound) with a certified negative upper bound, or
    (False, witness) with a point where p >= 0 (or touches zero).
    """
    a, b = as_fraction(a), as_fraction(b)
    for x in (a, b, (a + b) / 2):
        if peval(p, x) >= 0:
            return False, x
    sf = squarefree(p)
    if count_roots_closed(sf, a, b) > 0:
        boxes = isolate_roots(sf, a, b, (b - a) / 2**20)
        w = (boxes[0][0] + boxes[0][1]) / 2 if boxes else (a + b) / 2
        return False, w
    # no roots and p(a) < 0, so p < 0 throughout; certify a negative bound
    s = as_fraction(slack)
    for _ in range(8):
        upper = certified_max(p, a, b, s)
        if upper < 0:
            return True, upper
        s = s / 1024
    raise ArithmeticError("could not certify a negative upper bound")


def gcd_fraction(a: Fraction, b: Fraction) -> Fraction:
    """gcd on rationals: the largest g with a/g and b/g both integers."""
    a, b = abs(a), abs(b)
    if a == 0:
        return b
    if b == 0:
        return a
    num = math.gcd(a.numerator * b.denominator, b.numerator * a.denominator)
    return Fraction(num, a.denominator * b.denominator)
