"""Truncated Laurent series in q over exact rationals.

The central value type is :class:`QSeries`: a dense window of exact rational
coefficients between a lowest exponent ``val`` (which may be negative) and a
precision bound ``prec``.  Every coefficient with ``val <= e <= prec`` is known
exactly; nothing is claimed above ``prec``.  Exact Laurent polynomials carry
``prec = INF`` so that products of exact values stay exact.

Precision is propagated pessimistically through every operation, which makes
"these two series agree to order N" a sound statement rather than an accident
of zero padding.
"""

from __future__ import annotations

import math
from fractions import Fraction

try:
    from gmpy2 import mpq as QQ
except ImportError:  # pragma: no cover - gmpy2 is a hard dependency, Fraction works too
    QQ = Fraction

INF = math.inf

ZERO = QQ(0)
ONE = QQ(1)


class SeriesError(Exception):
    """Base class for all engine errors."""


class ZeroSeries(SeriesError):
    """Inversion or division demanded of a series that is zero on its window."""


class PrecisionExceeded(SeriesError):
    """A coefficient beyond the known precision window was requested."""


class DivergentProduct(SeriesError):
    """An infinite product whose factors do not leave low exponents alone."""


class PoleInBottom(SeriesError):
    """A denominator q-shifted factorial contains an exactly-zero factor."""


class ValuationStall(SeriesError):
    """An infinite sum whose term valuations stopped increasing."""


class CapExceeded(SeriesError):
    """An infinite sum exceeded the hard term cap."""


class UnsatisfiableSignature(SeriesError):
    """Parameter sampling could not satisfy the constraints."""


class PrecisionLoss(SeriesError):
    """An evaluation could not reach the requested precision."""


def _as_coeff(x) -> QQ:
    if isinstance(x, (int, Fraction)) or type(x) is type(ZERO):
        return QQ(x)
    return QQ(x)


class QSeries:
    """A truncated Laurent series with exact rational coefficients.

    ``coeffs[i]`` is the coefficient of ``q**(val + i)``.  Coefficients above
    ``val + len(coeffs) - 1`` and up to ``prec`` are exactly zero; above
    ``prec`` they are unknown.  ``prec`` may be ``INF`` for exact Laurent
    polynomials.  Instances are immutable by convention.
    """

    __slots__ = ("val", "prec", "coeffs")

    def __init__(self, val: int, coeffs, prec=INF):
        coeffs = [_as_coeff(c) for c in coeffs]
        lo = 0
        while lo < len(coeffs) and not coeffs[lo]:
            lo += 1
        hi = len(coeffs)
        while hi > lo and not coeffs[hi - 1]:
            hi -= 1
        coeffs = coeffs[lo:hi]
        val = val + lo
        if not coeffs:
            # empty window: canonically "known to be 0 up to prec"
            val = 0 if prec is INF else prec + 1
        if prec is not INF and coeffs and val + len(coeffs) - 1 > prec:
            raise ValueError("coefficients extend beyond declared precision")
        self.val = val
        self.prec = prec
        self.coeffs = coeffs

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero(prec=INF) -> QSeries:
        return QSeries(0, [], prec)

    @staticmethod
    def one() -> QSeries:
        return QSeries(0, [ONE])

    @staticmethod
    def monomial(c, m: int = 0) -> QSeries:
        return QSeries(m, [c])

    # -- basic structure ---------------------------------------------------

    def is_zero(self) -> bool:
        """True when no nonzero coefficient is stored (zero on the window)."""
        return not self.coeffs

    def valuation(self):
        """Lowest exponent with a nonzero coefficient, or None on the window."""
        return self.val if self.coeffs else None

    def degree(self):
        """Highest stored nonzero exponent, or None."""
        return self.val + len(self.coeffs) - 1 if self.coeffs else None

    def coefficient(self, e: int) -> QQ:
        if self.prec is not INF and e > self.prec:
            raise PrecisionExceeded(f"coefficient of q^{e} requested, known only to q^{self.prec}")
        i = e - self.val
        if self.coeffs and 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return ZERO

    def __eq__(self, other):
        if not isinstance(other, QSeries):
            return NotImplemented
        return (self.val == other.val and self.prec == other.prec
                and self.coeffs == other.coeffs)

    def __hash__(self):
        return hash((self.val, self.prec, tuple(self.coeffs)))

    def __bool__(self):
        return bool(self.coeffs)

    def key(self):
        """Hashable identity of the stored window (ignores prec)."""
        return (self.val, tuple(self.coeffs))

    # -- helpers -----------------------------------------------------------

    def shift(self, m: int) -> QSeries:
        """Multiplication by q^m."""
        if not self.coeffs:
            return QSeries(0, [], self.prec if self.prec is INF else self.prec + m)
        return QSeries(self.val + m, self.coeffs,
                       INF if self.prec is INF else self.prec + m)

    def scale(self, c) -> QSeries:
        c = _as_coeff(c)
        if not c:
            return QSeries.zero(self.prec)
        return QSeries(self.val, [c * x for x in self.coeffs], self.prec)

    def truncate(self, prec: int) -> QSeries:
        """Forget everything above exponent ``prec``."""
        if self.prec is not INF and self.prec <= prec:
            return self
        if not self.coeffs:
            return QSeries(0, [], prec)
        keep = prec - self.val + 1
        return QSeries(self.val, self.coeffs[:max(0, keep)], prec)

    # -- ring operations ---------------------------------------------------

    def __neg__(self) -> QSeries:
        return QSeries(self.val, [-x for x in self.coeffs], self.prec)

    def __add__(self, other: QSeries) -> QSeries:
        if not isinstance(other, QSeries):
            return NotImplemented
        prec = min(self.prec, other.prec)
        if not self.coeffs and not other.coeffs:
            return QSeries(0, [], prec)
        if not self.coeffs:
            return other.truncate(prec) if prec is not INF else other
        if not other.coeffs:
            return self.truncate(prec) if prec is not INF else self
        lo = min(self.val, other.val)
        hi = max(self.val + len(self.coeffs), other.val + len(other.coeffs))
        if prec is not INF:
            hi = min(hi, prec + 1)
        out = [ZERO] * (hi - lo)
        for i, c in enumerate(self.coeffs):
            j = self.val + i - lo
            if j < len(out):
                out[j] = c
        for i, c in enumerate(other.coeffs):
            j = other.val + i - lo
            if 0 <= j < len(out):
                out[j] = out[j] + c
        return QSeries(lo, out, prec)

    def __sub__(self, other: QSeries) -> QSeries:
        return self + (-other)

    def __mul__(self, other: QSeries) -> QSeries:
        if not isinstance(other, QSeries):
            return NotImplemented
        if not self.coeffs or not other.coeffs:
            if self.prec is INF and other.prec is INF:
                return QSeries.zero()
            # propagate the precision law with the stored window starts
            prec = min(self._prec_plus(other.val), other._prec_plus(self.val))
            return QSeries(0, [], prec)
        val = self.val + other.val
        prec = min(self._prec_plus(other.val), other._prec_plus(self.val))
        n, m = len(self.coeffs), len(other.coeffs)
        width = n + m - 1
        if prec is not INF:
            width = min(width, prec - val + 1)
            if width <= 0:
                return QSeries(0, [], prec)
        out = [ZERO] * width
        a, b = self.coeffs, other.coeffs
        if m < n:
            a, b, n, m = b, a, m, n
        for i in range(n):
            ai = a[i]
            if not ai:
                continue
            top = min(m, width - i)
            for j in range(top):
                out[i + j] += ai * b[j]
        return QSeries(val, out, prec)

    def _prec_plus(self, d: int):
        return INF if self.prec is INF else self.prec + d

    def mul_binomial(self, c, e: int) -> QSeries:
        """Multiply by the binomial (1 - c*q^e) in O(window) time."""
        c = _as_coeff(c)
        if not c:
            return self
        return self + self.shift(e).scale(-c)

    def div_binomial(self, c, e: int, prec: int) -> QSeries:
        """Divide by (1 - c*q^e), valid through exponent ``prec``."""
        c = _as_coeff(c)
        if not c:
            return self.truncate(prec) if self.prec is not INF and False else self
        if e == 0:
            if c == 1:
                raise ZeroSeries("division by the zero binomial (1 - q^0)")
            return self.scale(ONE / (ONE - c))
        if e < 0:
            # (1 - c q^e) = (-c q^e) (1 - (1/c) q^{-e})
            return self.shift(-e).scale(-ONE / c).div_binomial(ONE / c, -e, prec)
        top = min(prec, self.prec)
        if not self.coeffs:
            return QSeries(0, [], top)
        width = top - self.val + 1
        if width <= 0:
            return QSeries(0, [], top)
        out = [ZERO] * width
        for i, x in enumerate(self.coeffs):
            if i < width:
                out[i] = x
        for i in range(width):
            if i - e >= 0 and out[i - e]:
                out[i] = out[i] + c * out[i - e]
        return QSeries(self.val, out, top)

    def inverse(self, prec: int) -> QSeries:
        """Multiplicative inverse, correct through exponent ``prec``."""
        if not self.coeffs:
            raise ZeroSeries("cannot invert a series that is zero on its window")
        v = self.val
        c = self.coeffs
        # output exponents run from -v to prec; need self known to prec + 2v
        top = prec if self.prec is INF else self.prec - 2 * v
        width = top + v + 1  # number of output coefficients
        if width <= 0:
            return QSeries(0, [], top)
        inv0 = ONE / c[0]
        out = [ZERO] * width
        out[0] = inv0
        n = len(c)
        for k in range(1, width):
            s = ZERO
            for i in range(1, min(k, n - 1) + 1):
                if c[i]:
                    s += c[i] * out[k - i]
            if s:
                out[k] = -s * inv0
        return QSeries(-v, out, top)

    def div(self, other: QSeries, prec: int) -> QSeries:
        """self / other, aiming for precision ``prec``."""
        if not other.coeffs:
            raise ZeroSeries("division by a series that is zero on its window")
        if self.coeffs is not None and not self.coeffs:
            return QSeries(0, [], prec)
        request = prec + max(0, other.val) + max(0, -self.val if self.coeffs else 0)
        return self * other.inverse(request)

    def pow_int(self, k: int, prec=None) -> QSeries:
        """Integer power; negative exponents invert first."""
        if k < 0:
            if prec is None:
                raise ValueError("negative powers need a target precision")
            inv_prec = prec + max(0, (-self.val) * (-k)) if self.coeffs else prec
            return self.inverse(inv_prec).pow_int(-k, prec)
        result = QSeries.one()
        base = self
        while k:
            if k & 1:
                result = result * base
                if prec is not None and result.prec is not INF:
                    result = result.truncate(min(result.prec, prec)) if result.prec > prec else result
            k >>= 1
            if k:
                base = base * base
        if prec is not None and result.prec is not INF and result.prec > prec:
            result = result.truncate(prec)
        return result

    # -- substitutions -----------------------------------------------------

    def substitute_power(self, k: int) -> QSeries:
        """q -> q^k.  Precision becomes k*prec + (k-1)."""
        if k < 1:
            raise ValueError("substitution exponent must be >= 1")
        if k == 1:
            return self
        prec = INF if self.prec is INF else k * self.prec + (k - 1)
        if not self.coeffs:
            return QSeries(0, [], prec)
        out = [ZERO] * ((len(self.coeffs) - 1) * k + 1)
        for i, c in enumerate(self.coeffs):
            out[i * k] = c
        return QSeries(self.val * k, out, prec)

    def substitute_negate(self) -> QSeries:
        """q -> -q: the coefficient of q^e picks up (-1)^e."""
        out = [c if (self.val + i) % 2 == 0 else -c
               for i, c in enumerate(self.coeffs)]
        return QSeries(self.val, out, self.prec)

    # -- comparison on overlap ----------------------------------------------

    def first_mismatch(self, other: QSeries, lo=None, hi=None):
        """First exponent where the two windows disagree, or None.

        The comparison runs over the overlap of the precision windows,
        optionally clipped to [lo, hi].
        """
        top = min(self.prec, other.prec)
        if hi is not None:
            top = min(top, hi)
        bot = min(self.val if self.coeffs else top,
                  other.val if other.coeffs else top)
        if lo is not None:
            bot = max(bot, lo)
        if top is INF:
            top = max(self.degree() or bot, other.degree() or bot)
        e = bot
        while e <= top:
            a = self.coefficient(e)
            b = other.coefficient(e)
            if a != b:
                return (e, a, b)
            e += 1
        return None

    def agrees_with(self, other: QSeries, lo=None, hi=None) -> bool:
        return self.first_mismatch(other, lo, hi) is None

    # -- display -----------------------------------------------------------

    def terms(self):
        """Nonzero (exponent, coefficient) pairs in increasing order."""
        return [(self.val + i, c) for i, c in enumerate(self.coeffs) if c]

    def __repr__(self):
        parts = []
        for e, c in self.terms()[:8]:
            if e == 0:
                parts.append(f"{c}")
            elif e == 1:
                parts.append(f"{c}*q" if c != 1 else "q")
            else:
                parts.append(f"{c}*q^{e}" if c != 1 else f"q^{e}")
        if len(self.terms()) > 8:
            parts.append("...")
        body = " + ".join(parts) if parts else "0"
        tail = "" if self.prec is INF else f" + O(q^{self.prec + 1})"
        return f"<QSeries {body}{tail}>"


class QMonomial:
    """c * q^m with exact rational c; the substitution value for parameters."""

    __slots__ = ("c", "m")

    def __init__(self, c, m: int = 0):
        c = _as_coeff(c)
        self.c = c
        self.m = m if c else 0

    @staticmethod
    def zero() -> QMonomial:
        return QMonomial(0, 0)

    @staticmethod
    def q(m: int = 1) -> QMonomial:
        return QMonomial(1, m)

    def is_zero(self) -> bool:
        return not self.c

    @property
    def valuation(self) -> int:
        if not self.c:
            raise ZeroSeries("the zero monomial has no valuation")
        return self.m

    def __mul__(self, other: QMonomial) -> QMonomial:
        return QMonomial(self.c * other.c, self.m + other.m)

    def __truediv__(self, other: QMonomial) -> QMonomial:
        if not other.c:
            raise ZeroSeries("division by the zero monomial")
        return QMonomial(self.c / other.c, self.m - other.m)

    def __neg__(self) -> QMonomial:
        return QMonomial(-self.c, self.m)

    def __pow__(self, k: int) -> QMonomial:
        if not self.c:
            if k < 0:
                raise ZeroSeries("negative power of the zero monomial")
            return QMonomial(0, 0) if k else QMonomial(1, 0)
        return QMonomial(self.c ** k, self.m * k)

    def __eq__(self, other):
        if not isinstance(other, QMonomial):
            return NotImplemented
        return self.c == other.c and self.m == other.m

    def __hash__(self):
        return hash((self.c, self.m))

    def to_series(self, prec=INF) -> QSeries:
        if not self.c:
            return QSeries.zero(prec)
        return QSeries(self.m, [self.c], prec)

    def __str__(self):
        if not self.c:
            return "0"
        if self.m == 0:
            return str(self.c)
        qp = "q" if self.m == 1 else f"q^{self.m}"
        return qp if self.c == 1 else f"{self.c}*{qp}"

    __repr__ = __str__

    @staticmethod
    def parse(text: str) -> QMonomial:
        """Parse 'c', 'q^m', 'c*q^m', with c as 'p' or 'p/r'."""
        s = text.strip().replace(" ", "")
        neg = False
        while s[:1] in "+-":
            if s[0] == "-":
                neg = not neg
            s = s[1:]
        c = ONE
        m = 0
        if "*" in s:
            cpart, qpart = s.split("*", 1)
        elif s.startswith("q"):
            cpart, qpart = "", s
        else:
            cpart, qpart = s, ""
        if cpart:
            if "/" in cpart:
                p, r = cpart.split("/")
                c = QQ(int(p), int(r))
            else:
                c = QQ(int(cpart))
        if qpart:
            if qpart == "q":
                m = 1
            elif qpart.startswith("q^"):
                m = int(qpart[2:])
            else:
                raise ValueError(f"cannot parse monomial {text!r}")
        if neg:
            c = -c
        return QMonomial(c, m)


class BiSeries:
    """A polynomial in an auxiliary variable x whose coefficients are QSeries.

    Carrier of the q-derivative operator D_{q,x} f = (f(x) - f(qx)) / x.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        coeffs = list(coeffs)
        while len(coeffs) > 1 and coeffs[-1].is_zero():
            coeffs.pop()
        if not coeffs:
            coeffs = [QSeries.zero()]
        self.coeffs = coeffs

    @property
    def degree_bound(self) -> int:
        return len(self.coeffs) - 1

    @staticmethod
    def x() -> BiSeries:
        return BiSeries([QSeries.zero(), QSeries.one()])

    @staticmethod
    def const(s: QSeries) -> BiSeries:
        return BiSeries([s])

    def __add__(self, other: BiSeries) -> BiSeries:
        n = max(len(self.coeffs), len(other.coeffs))
        out = []
        for i in range(n):
            a = self.coeffs[i] if i < len(self.coeffs) else QSeries.zero()
            b = other.coeffs[i] if i < len(other.coeffs) else QSeries.zero()
            out.append(a + b)
        return BiSeries(out)

    def __neg__(self) -> BiSeries:
        return BiSeries([-c for c in self.coeffs])

    def __sub__(self, other: BiSeries) -> BiSeries:
        return self + (-other)

    def __mul__(self, other: BiSeries) -> BiSeries:
        out = [QSeries.zero() for _ in range(len(self.coeffs) + len(other.coeffs) - 1)]
        for i, a in enumerate(self.coeffs):
            if a.is_zero():
                continue
            for j, b in enumerate(other.coeffs):
                if b.is_zero():
                    continue
                out[i + j] = out[i + j] + a * b
        return BiSeries(out)

    def scale(self, s: QSeries) -> BiSeries:
        return BiSeries([c * s for c in self.coeffs])


def bi_qderivative(f: BiSeries) -> BiSeries:
    """D_{q,x} f: the x^{k-1} coefficient becomes (1 - q^k) * f_k."""
    out = []
    for k in range(1, len(f.coeffs)):
        fk = f.coeffs[k]
        out.append(fk - fk.shift(k))
    if not out:
        out = [QSeries.zero()]
    return BiSeries(out)


def bi_eval(f: BiSeries, x0: QMonomial, prec: int) -> QSeries:
    """Evaluate f at the monomial x0: sum of f_k * x0^k."""
    acc = QSeries.zero()
    power = QMonomial(1, 0)
    for k, fk in enumerate(f.coeffs):
        if k:
            power = power * x0
        if power.is_zero():
            break
        if not fk.is_zero() or fk.prec is not INF:
            acc = acc + (fk * power.to_series())
    if acc.prec is not INF and acc.prec > prec:
        acc = acc.truncate(acc.prec)
    return acc
