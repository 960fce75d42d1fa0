"""Directed-rounding interval arithmetic.

Endpoints are binary64.  No rounding-mode switching: every elementary
operation is computed in round-to-nearest and the result is padded to the
next representable value on each side (one step for IEEE correctly-rounded
+,-,*,/,sqrt; two steps for libm transcendentals, which are assumed
faithfully rounded).  All operations are pure, hence freely shareable
across threads.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .errors import DomainError

_INF = math.inf


def _down(x: float) -> float:
    return math.nextafter(x, -_INF)


def _up(x: float) -> float:
    return math.nextafter(x, _INF)


def _down2(x: float) -> float:
    return math.nextafter(math.nextafter(x, -_INF), -_INF)


def _up2(x: float) -> float:
    return math.nextafter(math.nextafter(x, _INF), _INF)


class Interval:
    """Closed interval [lo, hi] with outward-rounded arithmetic."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi=None):
        if hi is None:
            hi = lo
        lo = float(lo)
        hi = float(hi)
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise DomainError("interval endpoints must be finite")
        if lo > hi:
            raise DomainError(f"invalid interval: [{lo}, {hi}]")
        self.lo = lo
        self.hi = hi

    # -- constructors -------------------------------------------------

    @classmethod
    def from_decimal(cls, text: str) -> "Interval":
        """Outward-round a decimal literal to representable endpoints.

        This is the constructor used for every user-supplied parameter,
        so that e.g. "0.71646" becomes the tightest binary64 interval
        containing the exact decimal value.
        """
        try:
            exact = Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise DomainError(f"not a decimal literal: {text!r}") from exc
        approx = float(exact)
        fa = Fraction(approx)
        if fa == exact:
            return cls(approx, approx)
        if fa < exact:
            return cls(approx, _up(approx))
        return cls(_down(approx), approx)

    @classmethod
    def hull(cls, values) -> "Interval":
        items = [v if isinstance(v, Interval) else cls(float(v)) for v in values]
        return cls(min(v.lo for v in items), max(v.hi for v in items))

    # -- queries ------------------------------------------------------

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mag(self) -> float:
        """sup |x| over the interval."""
        return max(abs(self.lo), abs(self.hi))

    @property
    def mig(self) -> float:
        """inf |x| over the interval."""
        if self.lo <= 0.0 <= self.hi:
            return 0.0
        return min(abs(self.lo), abs(self.hi))

    def __contains__(self, x) -> bool:
        if isinstance(x, Interval):
            return self.lo <= x.lo and x.hi <= self.hi
        return self.lo <= float(x) <= self.hi

    def contains_zero(self) -> bool:
        return self.lo <= 0.0 <= self.hi

    def intersects(self, other: "Interval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def intersect(self, other: "Interval") -> "Interval":
        lo = max(self.lo, other.lo)
        hi = min(self.hi, other.hi)
        if lo > hi:
            raise DomainError("empty intersection")
        return Interval(lo, hi)

    def strictly_below(self, other: "Interval") -> bool:
        return self.hi < other.lo

    def __repr__(self):
        return f"Interval({self.lo!r}, {self.hi!r})"

    def __eq__(self, other):
        return (
            isinstance(other, Interval) and self.lo == other.lo and self.hi == other.hi
        )

    def __hash__(self):
        return hash((self.lo, self.hi))

    # -- arithmetic ---------------------------------------------------

    @staticmethod
    def _coerce(x) -> "Interval":
        if isinstance(x, Interval):
            return x
        if isinstance(x, (int, float)):
            return Interval(float(x))
        return NotImplemented

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __abs__(self):
        if self.lo >= 0.0:
            return Interval(self.lo, self.hi)
        if self.hi <= 0.0:
            return Interval(-self.hi, -self.lo)
        return Interval(0.0, self.mag)

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return Interval(_down(self.lo + o.lo), _up(self.hi + o.hi))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return Interval(_down(self.lo - o.hi), _up(self.hi - o.lo))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        cands = (
            self.lo * o.lo,
            self.lo * o.hi,
            self.hi * o.lo,
            self.hi * o.hi,
        )
        return Interval(_down(min(cands)), _up(max(cands)))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        if o.contains_zero():
            raise DomainError("division by an interval containing zero")
        cands = (
            self.lo / o.lo,
            self.lo / o.hi,
            self.hi / o.lo,
            self.hi / o.hi,
        )
        return Interval(_down(min(cands)), _up(max(cands)))

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def sqr(self) -> "Interval":
        """Tight square: exploits dependency, unlike self * self."""
        m = self.mig
        return Interval(_down(m * m), _up(self.mag * self.mag))


# -- elementary functions ---------------------------------------------


def isqrt(x: Interval) -> Interval:
    if x.lo < 0.0:
        raise DomainError("sqrt of interval with negative lower endpoint")
    return Interval(max(0.0, _down(math.sqrt(x.lo))), _up(math.sqrt(x.hi)))


def iexp(x: Interval) -> Interval:
    return Interval(max(0.0, _down2(math.exp(x.lo))), _up2(math.exp(x.hi)))


def ilog(x: Interval) -> Interval:
    if x.lo <= 0.0:
        raise DomainError("log of interval with nonpositive lower endpoint")
    return Interval(_down2(math.log(x.lo)), _up2(math.log(x.hi)))


def iabs(x: Interval) -> Interval:
    return abs(x)


def ipowi(x: Interval, k: int) -> Interval:
    """x**k for integer k >= 0, tight on even powers."""
    if k < 0:
        raise DomainError("negative powers go through division")
    if k == 0:
        return Interval(1.0)
    if k == 1:
        return Interval(x.lo, x.hi)
    if k % 2 == 0:
        half = ipowi(x, k // 2)
        return half.sqr()
    return x * ipowi(x, k - 1)


PI = Interval(_down(math.pi), _up(math.pi))
HALF_PI = Interval(_down(math.pi / 2), _up(math.pi / 2))
TWO_PI = Interval(_down(2 * math.pi), _up(2 * math.pi))


def _trig_extrema_ks(x: Interval, offset: Interval):
    """Integers k with x possibly containing offset + k*pi.

    The enclosure errs outward: extra candidates only widen trig bounds.
    """
    t_lo = (Interval(x.lo) - offset) / PI
    t_hi = (Interval(x.hi) - offset) / PI
    k_min = math.ceil(t_lo.lo)
    k_max = math.floor(t_hi.hi)
    return range(k_min, k_max + 1)


def isin(x: Interval) -> Interval:
    if x.width >= TWO_PI.hi:
        return Interval(-1.0, 1.0)
    lo = min(_down2(math.sin(x.lo)), _down2(math.sin(x.hi)))
    hi = max(_up2(math.sin(x.lo)), _up2(math.sin(x.hi)))
    for k in _trig_extrema_ks(x, HALF_PI):
        if k % 2 == 0:
            hi = 1.0
        else:
            lo = -1.0
    return Interval(max(lo, -1.0), min(hi, 1.0))


def icos(x: Interval) -> Interval:
    if x.width >= TWO_PI.hi:
        return Interval(-1.0, 1.0)
    lo = min(_down2(math.cos(x.lo)), _down2(math.cos(x.hi)))
    hi = max(_up2(math.cos(x.lo)), _up2(math.cos(x.hi)))
    for k in _trig_extrema_ks(x, Interval(0.0)):
        if k % 2 == 0:
            hi = 1.0
        else:
            lo = -1.0
    return Interval(max(lo, -1.0), min(hi, 1.0))


# -- complex rectangles -----------------------------------------------


class ComplexInterval:
    """Rectangular complex enclosure re + i*im."""

    __slots__ = ("re", "im")

    def __init__(self, re, im=0.0):
        if isinstance(re, complex):
            re, im = re.real, re.imag
        self.re = Interval._coerce(re)
        self.im = Interval._coerce(im)

    @staticmethod
    def _coerce(x) -> "ComplexInterval":
        if isinstance(x, ComplexInterval):
            return x
        if isinstance(x, complex):
            return ComplexInterval(x.real, x.imag)
        if isinstance(x, (Interval, int, float)):
            return ComplexInterval(x)
        return NotImplemented

    def __repr__(self):
        return f"ComplexInterval({self.re!r}, {self.im!r})"

    def conj(self):
        return ComplexInterval(self.re, -self.im)

    def __neg__(self):
        return ComplexInterval(-self.re, -self.im)

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return ComplexInterval(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return ComplexInterval(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return ComplexInterval(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )

    __rmul__ = __mul__

    def mag_upper(self) -> float:
        """Rigorous upper bound of sup |z| over the rectangle."""
        a = self.re.mag
        b = self.im.mag
        return _up(math.sqrt(_up(_up(a * a) + _up(b * b))))

    def mag_interval(self) -> Interval:
        a = self.re.mig
        b = self.im.mig
        lo = max(0.0, _down(math.sqrt(_down(_down(a * a) + _down(b * b)))))
        return Interval(lo, self.mag_upper())

    def contains(self, z: complex) -> bool:
        return z.real in self.re and z.imag in self.im


# -- vectorized intervals ---------------------------------------------

_NEG = np.float64(-np.inf)
_POS = np.float64(np.inf)


class IArray:
    """ndarray of intervals stored as (lo, hi) float arrays.

    Elementwise semantics match Interval, with one-ulp outward padding
    per operation.  Used for matrix/vector work where scalar Interval
    objects would be too slow.
    """

    __slots__ = ("lo", "hi")

    @classmethod
    def _raw(cls, lo, hi):
        """Internal: skip validation when invariants hold by construction."""
        out = object.__new__(cls)
        out.lo = lo
        out.hi = hi
        return out

    def __init__(self, lo, hi=None):
        lo = np.asarray(lo, dtype=np.float64)
        hi = lo.copy() if hi is None else np.asarray(hi, dtype=np.float64)
        if lo.shape != hi.shape:
            raise DomainError("mismatched interval-array shapes")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise DomainError("interval-array endpoints must be finite")
        if np.any(lo > hi):
            raise DomainError("interval-array with lo > hi")
        self.lo = lo
        self.hi = hi

    @classmethod
    def from_scalars(cls, items) -> "IArray":
        items = [Interval._coerce(v) for v in items]
        return cls(
            np.array([v.lo for v in items]), np.array([v.hi for v in items])
        )

    @classmethod
    def zeros(cls, shape) -> "IArray":
        z = np.zeros(shape)
        return cls(z, z.copy())

    # -- views ---------------------------------------------------------

    @property
    def shape(self):
        return self.lo.shape

    @property
    def ndim(self):
        return self.lo.ndim

    @property
    def mid(self):
        return 0.5 * (self.lo + self.hi)

    @property
    def width(self):
        return self.hi - self.lo

    @property
    def mag(self):
        return np.maximum(np.abs(self.lo), np.abs(self.hi))

    @property
    def mig(self):
        out = np.minimum(np.abs(self.lo), np.abs(self.hi))
        out[(self.lo <= 0.0) & (self.hi >= 0.0)] = 0.0
        return out

    def __len__(self):
        return len(self.lo)

    def __getitem__(self, idx):
        lo = self.lo[idx]
        if np.ndim(lo) == 0:
            return Interval(float(lo), float(self.hi[idx]))
        return IArray(lo.copy(), self.hi[idx].copy())

    def __setitem__(self, idx, value):
        if isinstance(value, (Interval, int, float)):
            value = Interval._coerce(value)
            self.lo[idx] = value.lo
            self.hi[idx] = value.hi
        else:
            self.lo[idx] = value.lo
            self.hi[idx] = value.hi

    def item(self, *idx) -> Interval:
        return Interval(float(self.lo[idx]), float(self.hi[idx]))

    def to_scalars(self):
        flat_lo = self.lo.ravel()
        flat_hi = self.hi.ravel()
        return [Interval(float(a), float(b)) for a, b in zip(flat_lo, flat_hi)]

    def copy(self):
        return IArray(self.lo.copy(), self.hi.copy())

    def reshape(self, *shape):
        return IArray(self.lo.reshape(*shape), self.hi.reshape(*shape))

    @property
    def T(self):
        return IArray(self.lo.T.copy(), self.hi.T.copy())

    def contains_array(self, x) -> bool:
        x = np.asarray(x, dtype=np.float64)
        return bool(np.all(self.lo <= x) and np.all(x <= self.hi))

    # -- arithmetic ----------------------------------------------------

    @staticmethod
    def _coerce(x):
        if isinstance(x, IArray):
            return x
        if isinstance(x, Interval):
            return IArray(np.asarray(x.lo), np.asarray(x.hi))
        return IArray(np.asarray(x, dtype=np.float64))

    def __neg__(self):
        return IArray._raw(-self.hi, -self.lo)

    def __abs__(self):
        lo = self.mig
        return IArray._raw(lo, self.mag)

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return IArray._raw(
            np.nextafter(self.lo + o.lo, _NEG), np.nextafter(self.hi + o.hi, _POS)
        )

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return IArray._raw(
            np.nextafter(self.lo - o.hi, _NEG), np.nextafter(self.hi - o.lo, _POS)
        )

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        c1 = self.lo * o.lo
        c2 = self.lo * o.hi
        c3 = self.hi * o.lo
        c4 = self.hi * o.hi
        lo = np.minimum(np.minimum(c1, c2), np.minimum(c3, c4))
        hi = np.maximum(np.maximum(c1, c2), np.maximum(c3, c4))
        return IArray._raw(np.nextafter(lo, _NEG), np.nextafter(hi, _POS))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        if np.any((o.lo <= 0.0) & (o.hi >= 0.0)):
            raise DomainError("division by an interval containing zero")
        c1 = self.lo / o.lo
        c2 = self.lo / o.hi
        c3 = self.hi / o.lo
        c4 = self.hi / o.hi
        lo = np.minimum(np.minimum(c1, c2), np.minimum(c3, c4))
        hi = np.maximum(np.maximum(c1, c2), np.maximum(c3, c4))
        return IArray(np.nextafter(lo, _NEG), np.nextafter(hi, _POS))

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def sqr(self):
        lo = self.mig
        hi = self.mag
        return IArray._raw(
            np.nextafter(lo * lo, _NEG), np.nextafter(hi * hi, _POS)
        )

    def sum(self, axis=None) -> "Interval | IArray":
        """Interval sum with a rigorous accumulated rounding bound."""
        n = self.lo.size if axis is None else self.lo.shape[axis]
        slo = np.sum(self.lo, axis=axis)
        shi = np.sum(self.hi, axis=axis)
        amax = np.sum(np.abs(self.lo), axis=axis) + np.sum(np.abs(self.hi), axis=axis)
        # |fl(sum) - sum| <= gamma_n * sum|terms|, gamma_n = n*u/(1-n*u)
        u = 2.0**-53
        gamma = (n * u) / (1.0 - n * u)
        err = np.nextafter(gamma * amax, _POS)
        lo = np.nextafter(slo - err, _NEG)
        hi = np.nextafter(shi + err, _POS)
        if np.ndim(lo) == 0:
            return Interval(float(lo), float(hi))
        return IArray._raw(lo, hi)

    def intersect(self, other: "IArray") -> "IArray":
        lo = np.maximum(self.lo, other.lo)
        hi = np.minimum(self.hi, other.hi)
        if np.any(lo > hi):
            raise DomainError("empty elementwise intersection")
        return IArray(lo, hi)

    def __repr__(self):
        return f"IArray(lo={self.lo!r}, hi={self.hi!r})"


def isqrt_arr(x: IArray) -> IArray:
    """Elementwise interval sqrt (IEEE sqrt is correctly rounded)."""
    if np.any(x.lo < 0.0):
        raise DomainError("sqrt of interval array with negative entries")
    lo = np.nextafter(np.sqrt(x.lo), _NEG)
    return IArray(np.maximum(lo, 0.0), np.nextafter(np.sqrt(x.hi), _POS))


def ipad_rows(x: IArray, k: int) -> IArray:
    """Append k zero rows (axis 0)."""
    pad = [(0, k)] + [(0, 0)] * (x.ndim - 1)
    return IArray(np.pad(x.lo, pad), np.pad(x.hi, pad))


def _mid_rad(x: IArray):
    mid = 0.5 * (x.lo + x.hi)
    rad = np.nextafter(np.maximum(x.hi - mid, mid - x.lo), _POS)
    return mid, rad


_U = 2.0**-53


def _mr_matmul(am, ar, bm, br, k: int):
    """Midpoint-radius product core with floating-point error absorbed.

    For A in am +- ar and B in bm +- br, the exact product lies in
    cm +- cr: cr majorizes |am| br + ar(|bm| + br) plus the dot-product
    rounding gamma_k |am||bm|, with a small multiplicative cushion for
    the round-to-nearest evaluation of cr itself.
    """
    cm = am @ bm
    aam = np.abs(am)
    abm = np.abs(bm)
    gamma = (k + 2) * _U / (1.0 - (k + 2) * _U)
    cr = aam @ br + ar @ (abm + br) + gamma * (aam @ abm)
    cr = np.nextafter(cr * (1.0 + 64.0 * _U) + 1e-300, _POS)
    return cm, cr


def imatmul(a: IArray, b: IArray) -> IArray:
    """Rigorous interval matrix product (midpoint-radius, BLAS-backed)."""
    if a.shape[-1] != b.shape[0]:
        raise DomainError("incompatible shapes in interval matmul")
    am, ar = _mid_rad(a)
    bm, br = _mid_rad(b)
    cm, cr = _mr_matmul(am, ar, bm, br, b.shape[0])
    return IArray._raw(
        np.nextafter(cm - cr, _NEG), np.nextafter(cm + cr, _POS)
    )


def imatvec(a: IArray, x: IArray) -> IArray:
    """Rigorous interval matrix-vector product."""
    return imatmul(a, IArray._raw(x.lo[:, None], x.hi[:, None])).reshape(-1)


def idot(a: IArray, b: IArray) -> Interval:
    return (a * b).sum()


# -- complex interval arrays -------------------------------------------


class CArray:
    """Rectangular complex interval arrays: re + i*im, both IArray."""

    __slots__ = ("re", "im")

    def __init__(self, re, im=None):
        if isinstance(re, np.ndarray) and np.iscomplexobj(re):
            if im is not None:
                raise DomainError("complex data with separate imaginary part")
            self.re = IArray(np.ascontiguousarray(re.real))
            self.im = IArray(np.ascontiguousarray(re.imag))
            return
        self.re = re if isinstance(re, IArray) else IArray(np.asarray(re, dtype=np.float64))
        if im is None:
            im = IArray.zeros(self.re.shape)
        self.im = im if isinstance(im, IArray) else IArray(np.asarray(im, dtype=np.float64))
        if self.re.shape != self.im.shape:
            raise DomainError("mismatched real/imaginary shapes")

    @classmethod
    def _raw(cls, re, im):
        out = object.__new__(cls)
        out.re = re
        out.im = im
        return out

    @classmethod
    def zeros(cls, shape):
        return cls(IArray.zeros(shape), IArray.zeros(shape))

    @property
    def shape(self):
        return self.re.shape

    @property
    def mid(self):
        return self.re.mid + 1j * self.im.mid

    def __len__(self):
        return len(self.re)

    def __getitem__(self, idx):
        r = self.re[idx]
        if isinstance(r, Interval):
            return ComplexInterval(r, self.im[idx])
        return CArray._raw(r, self.im[idx])

    def __setitem__(self, idx, value):
        value = ComplexInterval._coerce(value) if not isinstance(value, CArray) else value
        if isinstance(value, CArray):
            self.re[idx] = value.re
            self.im[idx] = value.im
        else:
            self.re[idx] = value.re
            self.im[idx] = value.im

    def item(self, *idx) -> ComplexInterval:
        return ComplexInterval(self.re.item(*idx), self.im.item(*idx))

    def copy(self):
        return CArray._raw(self.re.copy(), self.im.copy())

    def conj(self):
        return CArray._raw(self.re, -self.im)

    def __neg__(self):
        return CArray._raw(-self.re, -self.im)

    @staticmethod
    def _coerce(x):
        if isinstance(x, CArray):
            return x
        if isinstance(x, (ComplexInterval, complex)):
            z = ComplexInterval._coerce(x)
            return CArray._raw(
                IArray(np.asarray(z.re.lo), np.asarray(z.re.hi)),
                IArray(np.asarray(z.im.lo), np.asarray(z.im.hi)),
            )
        if isinstance(x, (Interval, int, float)):
            v = Interval._coerce(x)
            return CArray._raw(
                IArray(np.asarray(v.lo), np.asarray(v.hi)),
                IArray(np.asarray(0.0), np.asarray(0.0)),
            )
        return CArray(np.asarray(x))

    def __add__(self, other):
        o = self._coerce(other)
        return CArray._raw(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return CArray._raw(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        return CArray._raw(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )

    __rmul__ = __mul__

    def mag_upper(self) -> np.ndarray:
        """Elementwise upper bound of sup |z| over each rectangle."""
        a = self.re.mag
        b = self.im.mag
        m = np.sqrt(np.nextafter(a * a + b * b, _POS))
        return np.nextafter(m, _POS)

    def sum(self, axis=None):
        r = self.re.sum(axis=axis)
        i = self.im.sum(axis=axis)
        if isinstance(r, Interval):
            return ComplexInterval(r, i)
        return CArray._raw(r, i)


def l1norm_upper(mags: np.ndarray) -> float:
    """Upper bound of a sum of nonnegative floats, rounding accounted for."""
    body = IArray._raw(np.zeros_like(mags), mags).sum()
    return body.hi


def _c_mid_rad(x: CArray):
    mid = x.mid
    rr = np.maximum(x.re.hi - mid.real, mid.real - x.re.lo)
    ri = np.maximum(x.im.hi - mid.imag, mid.imag - x.im.lo)
    rad = np.nextafter(np.sqrt(np.nextafter(rr * rr + ri * ri, _POS)), _POS)
    rad = np.nextafter(rad * (1.0 + 8.0 * _U), _POS)
    return mid, rad


def cmatmul(a: CArray, b: CArray) -> CArray:
    """Rigorous complex interval matrix product (midpoint-radius).

    The radius bounds both the input uncertainty and the rounding of the
    complex midpoint product (complex multiply errs within sqrt(5)/2 ulp
    per operation, absorbed into the gamma factor with a cushion).
    """
    if a.shape[-1] != b.shape[0]:
        raise DomainError("incompatible shapes in complex interval matmul")
    am, ar = _c_mid_rad(a)
    bm, br = _c_mid_rad(b)
    k = b.shape[0]
    cm = am @ bm
    aam = np.nextafter(np.abs(am) * (1.0 + 4.0 * _U), _POS)
    abm = np.nextafter(np.abs(bm) * (1.0 + 4.0 * _U), _POS)
    gamma = 4.0 * (k + 4) * _U / (1.0 - 4.0 * (k + 4) * _U)
    cr = aam @ br + ar @ (abm + br) + gamma * (aam @ abm)
    cr = np.nextafter(cr * (1.0 + 64.0 * _U) + 1e-300, _POS)
    re = IArray._raw(
        np.nextafter(cm.real - cr, _NEG), np.nextafter(cm.real + cr, _POS)
    )
    im = IArray._raw(
        np.nextafter(cm.imag - cr, _NEG), np.nextafter(cm.imag + cr, _POS)
    )
    return CArray._raw(re, im)


def cmatvec(a: CArray, x: CArray) -> CArray:
    out = cmatmul(a, CArray._raw(
        IArray._raw(x.re.lo[:, None], x.re.hi[:, None]),
        IArray._raw(x.im.lo[:, None], x.im.hi[:, None]),
    ))
    return CArray._raw(out.re.reshape(-1), out.im.reshape(-1))
