"""Multiprecision complex linear solves with precision escalation.

Complex values are plain ``mpmath.mpc`` numbers; the working precision is the
decimal digit count passed explicitly to every routine and applied through
``mpmath.workdps``, so results never depend on the global mpmath context.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Sequence

import mpmath

__all__ = [
    "PrecisionPolicy",
    "SingularMatrixError",
    "PrecisionExhaustedError",
    "solve_linear_float",
    "solve_with_escalation",
    "escalate",
    "residual",
]

log = logging.getLogger(__name__)

MIN_DIGITS = 16


class SingularMatrixError(ArithmeticError):
    pass


class PrecisionExhaustedError(ArithmeticError):
    pass


@dataclass(frozen=True)
class PrecisionPolicy:
    initial_digits: int
    max_digits: int = 8192
    escalation_factor: float = 2.0
    target_residual_exponent: int | None = None

    def __post_init__(self):
        if self.initial_digits < 1 or self.max_digits < 1:
            raise ValueError("digit counts must be positive")
        if self.initial_digits > self.max_digits:
            raise ValueError("initial_digits must not exceed max_digits")
        if self.escalation_factor <= 1:
            raise ValueError("escalation_factor must be > 1")
        if self.target_residual_exponent is not None and self.target_residual_exponent < 1:
            raise ValueError("target_residual_exponent must be positive")

    @property
    def target(self) -> int:
        """Required number of verified digits (defaults to half the initial precision)."""
        if self.target_residual_exponent is None:
            return max(1, self.initial_digits // 2)
        return self.target_residual_exponent

    @classmethod
    def for_size(cls, p: int, digits: int | None = None) -> PrecisionPolicy:
        """Default policy for a system of size ``p``: start at max(128, 8p) digits."""
        initial = digits if digits is not None else max(128, 8 * p)
        return cls(initial_digits=initial, max_digits=max(8192, initial))

    def schedule(self):
        d = self.initial_digits
        while d <= self.max_digits:
            yield d
            d = max(d + 1, int(round(d * self.escalation_factor)))


def solve_linear_float(matrix: Sequence[Sequence], rhs: Sequence, digits: int) -> list:
    """Gaussian elimination with partial pivoting by maximum modulus.

    ``matrix`` is a square list of rows; entries may be anything mpmath can
    convert.  Raises SingularMatrixError when the best available pivot has
    modulus below ``10**(8 - digits)``.
    """
    n = len(matrix)
    if n == 0 or any(len(row) != n for row in matrix) or len(rhs) != n:
        raise ValueError("matrix must be square and match the right-hand side")
    digits = max(digits, MIN_DIGITS)
    with mpmath.workdps(digits):
        tiny = mpmath.mpf(10) ** (8 - digits)
        a = [[mpmath.mpc(x) for x in row] + [mpmath.mpc(b)] for row, b in zip(matrix, rhs)]
        for col in range(n):
            piv = max(range(col, n), key=lambda r: abs(a[r][col]))
            if abs(a[piv][col]) < tiny:
                raise SingularMatrixError(f"pivot below tolerance in column {col}")
            if piv != col:
                a[col], a[piv] = a[piv], a[col]
            prow = a[col]
            inv = 1 / prow[col]
            for r in range(col + 1, n):
                row = a[r]
                f = row[col]
                if f == 0:
                    continue
                f = f * inv
                for c in range(col + 1, n + 1):
                    row[c] -= f * prow[c]
                row[col] = mpmath.mpc(0)
        x = [mpmath.mpc(0)] * n
        for r in range(n - 1, -1, -1):
            row = a[r]
            s = row[n]
            for c in range(r + 1, n):
                s -= row[c] * x[c]
            x[r] = s / row[r]
    return x


def residual(matrix, rhs, x, digits: int):
    """Relative residual ``|Mx - b|_inf / |b|_inf``."""
    with mpmath.workdps(digits):
        worst = mpmath.mpf(0)
        for row, b in zip(matrix, rhs):
            s = mpmath.fsum(c * xi for c, xi in zip(row, x))
            worst = max(worst, abs(s - b))
        scale = max(abs(b) for b in rhs)
        return worst / scale if scale else worst


def escalate(attempt: Callable[[int], tuple[bool, object]], policy: PrecisionPolicy):
    """Run ``attempt(digits)`` at increasing precision until it reports success.

    ``attempt`` returns ``(ok, value)``.  Returns ``(value, digits)`` for the
    first successful attempt.
    """
    for digits in policy.schedule():
        ok, value = attempt(digits)
        if ok:
            return value, digits
        log.info("verification failed at %d digits, escalating", digits)
    raise PrecisionExhaustedError(
        f"no verified solution up to {policy.max_digits} digits"
    )


def solve_with_escalation(
    build: Callable[[int], tuple[list, list]],
    policy: PrecisionPolicy,
    verify: Callable[[list, int], bool],
):
    """Solve ``build(digits)`` repeatedly, escalating precision until ``verify`` passes."""

    def attempt(digits):
        matrix, rhs = build(digits)
        try:
            x = solve_linear_float(matrix, rhs, digits)
        except SingularMatrixError:
            return False, None
        return verify(x, digits), x

    return escalate(attempt, policy)
