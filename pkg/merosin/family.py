"""
Safe evaluation of the family f_λ(z) = sin z / (z² + λ), λ > 0.

On the imaginary axis f_λ(iy) = i·h_λ(y) with h_λ(y) = sinh y / (λ − y²),
so both maps share the pole guard and the overflow guard defined here.
Special cases come back as tagged EvalResult values, never as exceptions,
because the orbit code treats them as evidence (pole hit, escape).
"""
import cmath
import logging
import math
import sys
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache

import numpy as np

from merosin.errors import ValidationError
from merosin.rootkit import Bracket, bisect

logger = logging.getLogger(__name__)

# |z² + λ| below POLE_EPS·(1 + |z|²) counts as landing on a pole
POLE_EPS = 1e-12
# past this ordinate sin/sinh values are no longer useful as floats
OVERFLOW_ORDINATE = math.asinh(sys.float_info.max) / 2


@dataclass(frozen=True)
class ParamPoint:
    """A validated parameter λ > 0 with its pole ordinate √λ cached."""
    lam: float
    pole_ordinate: float = field(init=False, repr=False)

    def __post_init__(self):
        try:
            lam = float(self.lam)
        except (TypeError, ValueError):
            raise ValidationError(f"lambda must be a real number, got {self.lam!r}")
        if not math.isfinite(lam) or lam <= 0:
            raise ValidationError(f"lambda must be a finite positive number, got {self.lam!r}")
        object.__setattr__(self, 'lam', lam)
        object.__setattr__(self, 'pole_ordinate', math.sqrt(lam))

    @property
    def poles(self):
        return (complex(0.0, self.pole_ordinate), complex(0.0, -self.pole_ordinate))


class EvalKind(Enum):
    VALUE = "value"
    POLE_PROXIMITY = "pole_proximity"
    OVERFLOW = "overflow"


@dataclass(frozen=True)
class EvalResult:
    kind: EvalKind
    value: complex | float | None = None

    @property
    def ok(self):
        return self.kind is EvalKind.VALUE


POLE = EvalResult(EvalKind.POLE_PROXIMITY)
OVERFLOW = EvalResult(EvalKind.OVERFLOW)


def _denominator(z, p):
    """Return z² + λ, or None when z sits within the pole guard."""
    d = z * z + p.lam
    modulus_sq = z.real * z.real + z.imag * z.imag
    if abs(d) < POLE_EPS * (1.0 + modulus_sq):
        return None
    return d


def _out_of_range(z):
    return not (math.isfinite(z.real) and math.isfinite(z.imag)) or abs(z.imag) > OVERFLOW_ORDINATE


def eval_f(z, p):
    """Evaluate f_λ(z)."""
    z = complex(z)
    if _out_of_range(z):
        return OVERFLOW
    d = _denominator(z, p)
    if d is None:
        return POLE
    return EvalResult(EvalKind.VALUE, cmath.sin(z) / d)


def eval_f_prime(z, p):
    """Evaluate f'_λ(z) = ((z²+λ) cos z − 2z sin z) / (z²+λ)²."""
    z = complex(z)
    if _out_of_range(z):
        return OVERFLOW
    d = _denominator(z, p)
    if d is None:
        return POLE
    return EvalResult(EvalKind.VALUE, (d * cmath.cos(z) - 2.0 * z * cmath.sin(z)) / (d * d))


def _h_denominator(y, p):
    d = p.lam - y * y
    if abs(d) < POLE_EPS * (1.0 + y * y):
        return None
    return d


def eval_h(y, p):
    """Evaluate h_λ(y) = sinh y / (λ − y²), the map f_λ induces on the imaginary axis."""
    y = float(y)
    if not math.isfinite(y) or abs(y) > OVERFLOW_ORDINATE:
        return OVERFLOW
    d = _h_denominator(y, p)
    if d is None:
        return POLE
    return EvalResult(EvalKind.VALUE, math.sinh(y) / d)


def eval_h_prime(y, p):
    y = float(y)
    if not math.isfinite(y) or abs(y) > OVERFLOW_ORDINATE:
        return OVERFLOW
    d = _h_denominator(y, p)
    if d is None:
        return POLE
    return EvalResult(EvalKind.VALUE, (d * math.cosh(y) + 2.0 * y * math.sinh(y)) / (d * d))


def f_array(z, lam):
    """
    Vectorised f_λ over a numpy array.

    Entries that hit the pole guard or the overflow guard come back as NaN.
    """
    z = np.asarray(z, dtype=np.complex128)
    with np.errstate(all='ignore'):
        d = z * z + lam
        bad = (np.abs(d) < POLE_EPS * (1.0 + np.abs(z) ** 2)) | (np.abs(z.imag) > OVERFLOW_ORDINATE)
        out = np.sin(z) / d
    out[bad] = np.nan
    return out


def h_array(y, lam):
    """Vectorised h_λ; NaN marks pole or overflow entries."""
    y = np.asarray(y, dtype=np.float64)
    lam = np.asarray(lam, dtype=np.float64)
    with np.errstate(all='ignore'):
        d = lam - y * y
        bad = (np.abs(d) < POLE_EPS * (1.0 + y * y)) | (np.abs(y) > OVERFLOW_ORDINATE) | ~np.isfinite(y)
        out = np.sinh(np.where(bad, 0.0, y)) / np.where(bad, 1.0, d)
    return np.where(bad, np.nan, out)


class AuxFunction(Enum):
    PSI_CAP = "PsiCap"
    PHI_SMALL = "Phi_small"
    PSI_LOW = "psi_low"
    PHI_BIG = "PhiBig"


@lru_cache(maxsize=None)
def x0():
    """Positive zero of xΨ(x), i.e. the root of sin x = x³ in (0, 1)."""
    result = bisect(lambda x: math.sin(x) - x ** 3, Bracket.of(lambda x: math.sin(x) - x ** 3, 0.5, 1.0), 1e-15)
    logger.debug(f"x0 = {result.root!r} after {result.iterations} bisections")
    return result.root


def sinc(x):
    """sin x / x with the removable singularity filled in; this is Ψ(x) + x²."""
    return math.sin(x) / x if x != 0.0 else 1.0


def psi_cap(x):
    return sinc(x) - x * x


def phi_small(x):
    # cos x/(Ψ+x²) − 2x sin x/(Ψ+x²)² with Ψ+x² = sin x/x
    return (x * math.cos(x) - 2.0 * x ** 3) / math.sin(x)


def psi_low(x):
    return 2.0 * x * math.tan(x) - x * x


def phi_big(y):
    if y > 700.0:
        return math.inf
    return math.sinh(y) / y + y * y if y != 0.0 else 1.0


_AUX_TABLE = {
    AuxFunction.PSI_CAP: psi_cap,
    AuxFunction.PHI_SMALL: phi_small,
    AuxFunction.PSI_LOW: psi_low,
    AuxFunction.PHI_BIG: phi_big,
}


def aux(fn_id, t):
    """
    Evaluate one of the four scalar helpers behind the bifurcation constants.

    Args:
        fn_id (AuxFunction or str): PsiCap, Phi_small, psi_low or PhiBig
        t (float): argument inside the function's natural domain

    Returns:
        float: the function value

    Raises:
        ValidationError: unknown function or t outside its domain
    """
    try:
        fn_id = AuxFunction(fn_id)
    except ValueError:
        raise ValidationError(f"unknown auxiliary function {fn_id!r}")
    t = float(t)
    upper = {
        AuxFunction.PHI_SMALL: x0(),
        AuxFunction.PSI_LOW: math.pi / 2,
    }.get(fn_id, math.inf)
    if not (0.0 < t < upper):
        raise ValidationError(f"{fn_id.value} is defined on (0, {upper:.15g}), got t={t!r}")
    return _AUX_TABLE[fn_id](t)
