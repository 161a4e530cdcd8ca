"""Low-level numerical helpers: compensated summation and Bernoulli numbers."""

from fractions import Fraction

import numpy as np

# B_2, B_4, ..., B_20
BERNOULLI_EVEN = tuple(
    float(Fraction(num, den))
    for num, den in (
        (1, 6),
        (-1, 30),
        (1, 42),
        (-1, 30),
        (5, 66),
        (-691, 2730),
        (7, 6),
        (-3617, 510),
        (43867, 798),
        (-174611, 330),
    )
)


def neumaier_sum(values):
    """Neumaier-compensated sum of an iterable of floats."""
    total = 0.0
    comp = 0.0
    for v in values:
        v = float(v)
        t = total + v
        if abs(total) >= abs(v):
            comp += (total - t) + v
        else:
            comp += (v - t) + total
        total = t
    return total + comp


class CompensatedAccumulator:
    """Elementwise Neumaier accumulator for numpy arrays.

    Used to combine per-chunk partial sums; within a chunk numpy's pairwise
    summation keeps the error at O(log(chunk) * eps).
    """

    def __init__(self, shape):
        self.total = np.zeros(shape)
        self.comp = np.zeros(shape)

    def add(self, values):
        t = self.total + values
        big = np.abs(self.total) >= np.abs(values)
        self.comp += np.where(big, (self.total - t) + values, (values - t) + self.total)
        self.total = t

    def result(self):
        return self.total + self.comp
