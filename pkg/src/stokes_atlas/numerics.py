"""Complex scalar special functions and truncated power-series arithmetic.

Everything here works in double precision on Python ``complex`` scalars and
``numpy.complex128`` coefficient arrays.  The branch convention used across
the package is ``arg z in (-pi, pi]``; multivalued powers take an explicit
integer winding on top of the principal logarithm.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DivisionByZeroSeries, PoleError

TAU_INT = 1e-9
TWO_PI_I = 2j * math.pi


def distance_to_integer(z: complex) -> float:
    z = complex(z)
    return abs(z - round(z.real))


def is_near_integer(z: complex, tol: float = TAU_INT) -> bool:
    return distance_to_integer(z) < tol


def is_nonpositive_integer(z: complex, tol: float = TAU_INT) -> bool:
    z = complex(z)
    return z.real < 0.5 and is_near_integer(z, tol)


def principal_arg(z: complex) -> float:
    """Argument of ``z`` in ``(-pi, pi]``."""
    a = math.atan2(complex(z).imag, complex(z).real)
    return math.pi if a == -math.pi else a


def principal_log(z: complex) -> complex:
    z = complex(z)
    if z == 0:
        raise ValueError("log of zero")
    return complex(math.log(abs(z)), principal_arg(z))


def cpow(x: complex, e: complex, winding: int = 0) -> complex:
    """``x**e`` on the sheet ``log x = Log x + 2*pi*i*winding``."""
    return cmath.exp(complex(e) * (principal_log(x) + TWO_PI_I * winding))


def log_gamma(z: complex) -> complex:
    """Principal branch of log Gamma(z).

    Raises PoleError within ``TAU_INT`` of a nonpositive integer.
    """
    z = complex(z)
    if is_nonpositive_integer(z):
        raise PoleError(f"Gamma has a pole at {z}")
    val = complex(special.loggamma(z))
    if not (math.isfinite(val.real) and math.isfinite(val.imag)):
        raise PoleError(f"log Gamma not finite at {z}")
    return val


def gamma(z: complex) -> complex:
    return cmath.exp(log_gamma(z))


def reciprocal_gamma(z: complex) -> complex:
    """1/Gamma(z), an entire function; exactly 0 at the poles of Gamma."""
    z = complex(z)
    if is_nonpositive_integer(z):
        return 0j
    return complex(special.rgamma(z))


def pochhammer(a: complex, n: int) -> complex:
    """Rising factorial ``a (a+1) ... (a+n-1)`` as a running product."""
    if n < 0:
        raise ValueError("pochhammer needs n >= 0")
    out = 1 + 0j
    a = complex(a)
    for k in range(n):
        out *= a + k
    return out


def gamma_ratio(num: list, den: list) -> complex:
    """``prod Gamma(num) / prod Gamma(den)``.

    Numerator poles raise PoleError; denominator poles give an exact zero.
    """
    log_num = sum((log_gamma(z) for z in num), 0j)
    out = cmath.exp(log_num)
    for z in den:
        out *= reciprocal_gamma(z)
    return out


@dataclass(frozen=True)
class TruncatedSeries:
    """Taylor coefficients ``c_0 .. c_K`` of a function about 0.

    ``exponent`` shifts the whole series by ``x**exponent``; it only matters
    for the Euler operator ``x d/dx``.
    """

    coeffs: np.ndarray
    exponent: complex = 0j

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.complex128)
        if c.ndim != 1 or c.size == 0:
            raise ValueError("coefficients must be a non-empty 1-d sequence")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def order(self) -> int:
        return self.coeffs.size - 1

    def __call__(self, x: complex, winding: int = 0) -> complex:
        x = complex(x)
        val = complex(np.polynomial.polynomial.polyval(x, self.coeffs))
        if self.exponent != 0:
            val *= cpow(x, self.exponent, winding)
        return val

    def truncate(self, order: int) -> "TruncatedSeries":
        c = np.zeros(order + 1, dtype=np.complex128)
        k = min(order, self.order)
        c[: k + 1] = self.coeffs[: k + 1]
        return TruncatedSeries(c, self.exponent)


def series_multiply(f: TruncatedSeries, g: TruncatedSeries) -> TruncatedSeries:
    """Product truncated at the smaller of the two orders."""
    k = min(f.order, g.order)
    c = np.convolve(f.coeffs[: k + 1], g.coeffs[: k + 1])[: k + 1]
    return TruncatedSeries(c, f.exponent + g.exponent)


def series_divide(num: TruncatedSeries, den: TruncatedSeries) -> TruncatedSeries:
    """Quotient ``num/den`` up to the smaller order, by forward substitution."""
    d0 = den.coeffs[0]
    if d0 == 0:
        raise DivisionByZeroSeries("constant term of the divisor vanishes")
    k = min(num.order, den.order)
    a, b = num.coeffs, den.coeffs
    c = np.zeros(k + 1, dtype=np.complex128)
    for n in range(k + 1):
        acc = a[n]
        for j in range(1, n + 1):
            acc -= b[j] * c[n - j]
        c[n] = acc / d0
    return TruncatedSeries(c, num.exponent - den.exponent)


def linear_product_series(roots: list, order: int) -> TruncatedSeries:
    """Coefficients of ``prod_i (1 - r_i x)`` truncated at ``order``."""
    c = np.zeros(order + 1, dtype=np.complex128)
    c[0] = 1.0
    for r in roots:
        c[1:] = c[1:] - complex(r) * c[:-1]
    return TruncatedSeries(c)


def poly_from_shifts(shifts: list) -> np.ndarray:
    """Ascending coefficients of ``prod_j (theta + s_j)`` as a polynomial in theta."""
    poly = np.array([1.0 + 0j])
    for s in shifts:
        poly = np.convolve(poly, np.array([complex(s), 1.0]))
    return poly
