"""Streaming mean/variance for positive samples that may exceed float range.

Samples are supplied as natural logarithms. The accumulator keeps the usual
``(count, mean, M2)`` triple relative to a scale ``exp(shift)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class LogMoments:
    count: int = 0
    shift: float = -math.inf
    mean: float = 0.0
    m2: float = 0.0

    @classmethod
    def from_logs(cls, log_values) -> LogMoments:
        x = np.asarray(log_values, dtype=float).ravel()
        if x.size == 0:
            return cls()
        shift = float(x.max())
        if shift == -math.inf:
            return cls(int(x.size), -math.inf, 0.0, 0.0)
        if shift == math.inf:
            raise OverflowError("sample is +inf even in log domain")
        v = np.exp(x - shift)
        mean = float(v.mean())
        m2 = float(np.sum((v - mean) ** 2))
        return cls(int(x.size), shift, mean, m2)

    def _at(self, shift: float) -> tuple[float, float]:
        if self.count == 0 or self.shift == -math.inf:
            return 0.0, 0.0
        f = math.exp(self.shift - shift)
        return self.mean * f, self.m2 * f * f

    def merge(self, other: LogMoments) -> LogMoments:
        if other.count == 0:
            return self
        if self.count == 0:
            return other
        shift = max(self.shift, other.shift)
        if shift == -math.inf:
            return LogMoments(self.count + other.count)
        ma, qa = self._at(shift)
        mb, qb = other._at(shift)
        n = self.count + other.count
        delta = mb - ma
        mean = ma + delta * other.count / n
        m2 = qa + qb + delta * delta * self.count * other.count / n
        return LogMoments(n, shift, mean, m2)

    @property
    def log_mean(self) -> float:
        if self.count == 0 or self.mean <= 0:
            return -math.inf
        return self.shift + math.log(self.mean)

    @property
    def log_stderr(self) -> float:
        if self.count < 2 or self.m2 <= 0:
            return -math.inf
        return self.shift + 0.5 * math.log(self.m2 / (self.count - 1) / self.count)


def merge_all(parts: Sequence[LogMoments]) -> LogMoments:
    """Pairwise tree merge in the given order."""
    parts = list(parts)
    if not parts:
        return LogMoments()
    while len(parts) > 1:
        nxt = [parts[i].merge(parts[i + 1]) for i in range(0, len(parts) - 1, 2)]
        if len(parts) % 2:
            nxt.append(parts[-1])
        parts = nxt
    return reduce(LogMoments.merge, parts)
