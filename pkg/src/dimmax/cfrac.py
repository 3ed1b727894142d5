"""Continued-fraction kernel: digit words, cylinder intervals, expansion rates.

The Gauss map T(x) = 1/x mod 1 codes a point x in (0,1) by its continued
fraction digits.  A finite word (i_1, ..., i_N) of digits >= 1 names both

  * the rational point  x = [i_1, ..., i_N] = 1/(i_1 + 1/(i_2 + ... + 1/i_N)),
  * the rank-N cylinder, the interval of points whose first N digits equal
    the word.

The cylinder endpoints are the values of the word and of the word with its
last digit incremented; which one is the left endpoint flips with the parity
of the word length.  Since |T'(x)| = 1/x^2, the log-derivative 2*log(1/x) is
monotone decreasing on (0,1), so evaluating it at the two cylinder endpoints
gives a rigorous bracket for its oscillation over the cylinder.  Everything
here is pure and allocation-light; the heavy enumeration lives in
:mod:`dimmax.measures`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence


@dataclass(frozen=True)
class DigitWord:
    """A finite word of continued-fraction digits (each >= 1, length >= 1)."""

    digits: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.digits) < 1:
            raise ValueError("digit word must have length >= 1")
        for d in self.digits:
            if not isinstance(d, int) or d < 1:
                raise ValueError(f"digits must be integers >= 1, got {d!r}")

    @classmethod
    def of(cls, digits: Iterable[int]) -> "DigitWord":
        return cls(tuple(int(d) for d in digits))

    def __len__(self) -> int:
        return len(self.digits)

    def __iter__(self):
        return iter(self.digits)

    def extended(self, digit: int) -> "DigitWord":
        """The word with one more digit appended."""
        return DigitWord(self.digits + (int(digit),))

    def sibling(self) -> "DigitWord":
        """The word with its last digit incremented (the other cylinder endpoint)."""
        return DigitWord(self.digits[:-1] + (self.digits[-1] + 1,))


@dataclass(frozen=True)
class CylinderGeometry:
    """Value, endpoints, and log-derivative bracket of a rank-N cylinder.

    Invariants: 0 < lo <= value <= hi <= 1 and
    logderiv_lo <= 2*log(1/value) <= logderiv_hi.
    """

    value: float
    lo: float
    hi: float
    logderiv_lo: float
    logderiv_hi: float


def _as_digits(word) -> Sequence[int]:
    if isinstance(word, DigitWord):
        return word.digits
    return DigitWord.of(word).digits


def cf_value(word) -> float:
    """Evaluate [i_1, ..., i_N] = 1/(i_1 + 1/(i_2 + ... + 1/i_N)).

    Back-to-front nesting: each step is a single reciprocal-and-add, which is
    backward stable at the depths used here (<= ~30), unlike the forward
    p/q recurrence in floating point at large digits.
    """
    digits = _as_digits(word)
    x = 0.0
    for d in reversed(digits):
        x = 1.0 / (d + x)
    return x


def cylinder_interval(word) -> tuple[float, float]:
    """Endpoints (lo, hi) of the set of x whose first N digits equal ``word``.

    The endpoints are cf_value(word) and cf_value of the word with its last
    digit incremented; the ordering depends on the parity of N, so the pair
    is returned sorted.
    """
    w = word if isinstance(word, DigitWord) else DigitWord.of(word)
    a = cf_value(w)
    b = cf_value(w.sibling())
    return (a, b) if a <= b else (b, a)


def log_deriv(x: float) -> float:
    """log|T'(x)| = 2*log(1/x) for the Gauss map, defined on 0 < x < 1."""
    if not 0.0 < x < 1.0:
        raise ValueError(f"log_deriv requires 0 < x < 1, got {x}")
    return -2.0 * math.log(x)


def capped_log_deriv(x: float, cap_digit: int) -> float:
    """min(2*log(1/x), 2*log M): the expansion rate capped at digit size M >= 2."""
    if cap_digit < 2:
        raise ValueError(f"cap digit must be >= 2, got {cap_digit}")
    return min(log_deriv(x), 2.0 * math.log(cap_digit))


def cylinder_geometry(word) -> CylinderGeometry:
    """Cylinder value, endpoints, and the rigorous 2*log(1/x) bracket.

    2*log(1/x) is decreasing, so its range over the cylinder [lo, hi] is
    exactly [2*log(1/hi), 2*log(1/lo)] (lo = hi = 1 degenerates to [0, 0]).
    """
    w = word if isinstance(word, DigitWord) else DigitWord.of(word)
    value = cf_value(w)
    lo, hi = cylinder_interval(w)
    ld_lo = -2.0 * math.log(hi)
    ld_hi = -2.0 * math.log(lo)
    return CylinderGeometry(value=value, lo=lo, hi=hi, logderiv_lo=ld_lo, logderiv_hi=ld_hi)


def digits_of(x: float, count: int) -> list[int]:
    """First ``count`` continued-fraction digits of x in (0,1), by iterating the Gauss map."""
    if not 0.0 < x < 1.0:
        raise ValueError(f"digits_of requires 0 < x < 1, got {x}")
    out = []
    for _ in range(count):
        inv = 1.0 / x
        d = int(inv)
        out.append(d)
        x = inv - d
        if x <= 0.0:  # landed on a rational; stop early
            break
    return out
