"""Non-negative exact rationals with downward-rounded ("LB") operations.

Exact operations return the exact result.  ``lb_*`` operations return a value
on the grid {k/D} that is never above the exact result, which keeps
denominators bounded while preserving the direction of every inequality a
lower-bound computation relies on.
"""

from __future__ import annotations

import math
from fractions import Fraction

__all__ = ["NonNegRational", "lb_div", "lb_round", "parse_rational"]


def _wrap(x):
    if x is NotImplemented:
        return x
    if isinstance(x, Fraction):
        return NonNegRational(x)
    return x


class NonNegRational(Fraction):
    __slots__ = ()

    def __new__(cls, numerator=0, denominator=None):
        self = super().__new__(cls, numerator, denominator)
        if self._numerator < 0:
            raise ValueError(f"negative value {Fraction(self)} for NonNegRational")
        return self

    def __add__(self, other):
        return _wrap(Fraction.__add__(self, other))

    def __radd__(self, other):
        return _wrap(Fraction.__radd__(self, other))

    def __mul__(self, other):
        return _wrap(Fraction.__mul__(self, other))

    def __rmul__(self, other):
        return _wrap(Fraction.__rmul__(self, other))

    def __truediv__(self, other):
        return _wrap(Fraction.__truediv__(self, other))

    def __rtruediv__(self, other):
        return _wrap(Fraction.__rtruediv__(self, other))

    def __sub__(self, other):
        # raises if the exact difference is negative; see sub_clamped
        return _wrap(Fraction.__sub__(self, other))

    def sub_clamped(self, other) -> "NonNegRational":
        d = Fraction.__sub__(self, other)
        return NonNegRational(d if d > 0 else 0)

    def lb_div(self, other, grid: int) -> "NonNegRational":
        return lb_div(self, other, grid)

    def lb_round(self, grid: int) -> "NonNegRational":
        return lb_round(self, grid)

    def __repr__(self):
        return f"NonNegRational({self._numerator}, {self._denominator})"

    def __str__(self):
        return f"{self._numerator}/{self._denominator}"

    def __reduce__(self):
        return (NonNegRational, (self._numerator, self._denominator))

    def __copy__(self):
        return self

    def __deepcopy__(self, memo):
        return self


def _check_grid(grid):
    if not isinstance(grid, int) or grid < 1:
        raise ValueError(f"grid must be a positive integer, got {grid!r}")


def lb_round(x, grid: int) -> NonNegRational:
    """Largest multiple of 1/grid that is <= x."""
    _check_grid(grid)
    x = Fraction(x)
    return NonNegRational(math.floor(x * grid), grid)


def lb_div(a, b, grid: int) -> NonNegRational:
    """Largest multiple of 1/grid that is <= a/b."""
    _check_grid(grid)
    a, b = Fraction(a), Fraction(b)
    if b == 0:
        raise ZeroDivisionError("lb_div by zero")
    # floor(grid * a / b) with integer arithmetic only
    num = grid * a.numerator * b.denominator
    den = a.denominator * b.numerator
    return NonNegRational(num // den, grid)


def parse_rational(text) -> NonNegRational:
    """Accept ``p/q``, a decimal string, an int or a Fraction."""
    if isinstance(text, (int, Fraction)):
        return NonNegRational(text)
    s = str(text).strip()
    try:
        return NonNegRational(Fraction(s))
    except (ValueError, ZeroDivisionError) as e:
        raise ValueError(f"not a non-negative rational: {text!r}") from e
