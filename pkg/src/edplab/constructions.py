"""Generators for the named low-discrepancy sequences and multiplicative tools.

Includes the base-3 construction whose entry at m = (3a+1)*3^b is +1 and at
m = (3a-1)*3^b is -1 (its prefix sum counts the ternary digits of n equal
to 1), the mod-3 character 1,-1,0,..., expansion of completely
multiplicative sequences from prime values, the averaged squared partial
sum statistic, and seeded random +-1 sequences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping, Union

import numpy as np

from .sequences import SignSequence

#: documented sieve limit; a byte array of this size is ~10 MB
SIEVE_LIMIT = 10**7


@lru_cache(maxsize=8)
def primes_upto(n: int) -> tuple:
    """All primes <= n by a plain sieve. Cached; results are immutable."""
    if n > SIEVE_LIMIT:
        raise ValueError(f"sieve limit is {SIEVE_LIMIT}, got {n}")
    if n < 2:
        return ()
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, int(n**0.5) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return tuple(int(p) for p in np.nonzero(sieve)[0])


@lru_cache(maxsize=8)
def smallest_prime_factors(n: int) -> np.ndarray:
    """spf[k] = smallest prime factor of k for k = 2..n (spf[0] = spf[1] = 0)."""
    if n > SIEVE_LIMIT:
        raise ValueError(f"sieve limit is {SIEVE_LIMIT}, got {n}")
    spf = np.zeros(n + 1, dtype=np.int64)
    for p in range(2, n + 1):
        if spf[p] == 0:
            spf[p::p][spf[p::p] == 0] = p
    spf.setflags(write=False)
    return spf


def bcc_sequence(n: int) -> SignSequence:
    """First n entries of the base-3 sequence: +1 at (3a+1)*3^b, -1 at (3a-1)*3^b.

    The decomposition strips factors of 3, then reads the residue mod 3 of
    what is left (necessarily 1 or 2).
    """
    if n < 1:
        raise ValueError("need n >= 1")
    m = np.arange(1, n + 1, dtype=np.int64)
    reduced = m.copy()
    while True:
        mask = reduced % 3 == 0
        if not mask.any():
            break
        reduced[mask] //= 3
    vals = np.where(reduced % 3 == 1, 1, -1)
    return SignSequence(tuple(int(v) for v in vals))


def bcc_prefix_sums(n: int) -> np.ndarray:
    """Prefix sums of bcc_sequence for 1..n (direct summation, no formula)."""
    seq = bcc_sequence(n)
    return np.cumsum(seq.as_array())


def bcc_prefix_formula(n: int) -> int:
    """Number of ternary digits of n equal to 1 (the closed form of the prefix sum)."""
    if n < 1:
        raise ValueError("need n >= 1")
    count = 0
    while n:
        if n % 3 == 1:
            count += 1
        n //= 3
    return count


def ternary_ones_counts(n: int) -> np.ndarray:
    """Vectorized bcc_prefix_formula over 1..n."""
    x = np.arange(1, n + 1, dtype=np.int64)
    ones = np.zeros(n, dtype=np.int64)
    while x.any():
        ones += x % 3 == 1
        x //= 3
    return ones


def character_mod3(n: int) -> SignSequence:
    """The periodic sequence 1, -1, 0, 1, -1, 0, ... (quadratic character mod 3)."""
    if n < 1:
        raise ValueError("need n >= 1")
    table = {1: 1, 2: -1, 0: 0}
    return SignSequence(tuple(table[m % 3] for m in range(1, n + 1)))


@dataclass(frozen=True)
class MultiplicativeSpec:
    """Values at every prime <= horizon, defining a completely multiplicative sequence.

    Real case: values in {-1, +1}. Complex case: unit-modulus complex values
    (tolerance 1e-12 on construction).
    """

    prime_values: Mapping[int, Union[int, complex]]
    horizon: int

    COMPLEX_TOL = 1e-12

    def __post_init__(self):
        ps = primes_upto(self.horizon)
        for p in ps:
            if p not in self.prime_values:
                raise ValueError(f"no value assigned for prime {p}")
        for p, v in self.prime_values.items():
            if isinstance(v, complex):
                if abs(abs(v) - 1.0) > self.COMPLEX_TOL:
                    raise ValueError(f"value at prime {p} has modulus {abs(v)!r}, not 1")
            elif v not in (-1, 1):
                raise ValueError(f"value at prime {p} must be +-1 (or unit complex), got {v!r}")
        object.__setattr__(self, "prime_values", dict(self.prime_values))

    @property
    def is_real(self) -> bool:
        return all(not isinstance(v, complex) for v in self.prime_values.values())


class ComplexSequence:
    """1-indexed sequence of complex numbers (unit-modulus checked on demand)."""

    UNIT_TOL = 1e-12

    def __init__(self, values):
        arr = np.asarray(values, dtype=np.complex128)
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("expected a non-empty 1-d complex array")
        arr.setflags(write=False)
        self._arr = arr

    @classmethod
    def from_sign_sequence(cls, seq: SignSequence) -> "ComplexSequence":
        return cls(seq.as_array().astype(np.complex128))

    @property
    def values(self) -> np.ndarray:
        return self._arr

    @property
    def length(self) -> int:
        return self._arr.size

    def __len__(self) -> int:
        return self._arr.size

    def __getitem__(self, n: int) -> complex:
        if not 1 <= n <= self._arr.size:
            raise IndexError(f"position {n} outside 1..{self._arr.size}")
        return complex(self._arr[n - 1])

    def is_unit(self, tol: float = UNIT_TOL) -> bool:
        return bool(np.all(np.abs(np.abs(self._arr) - 1.0) <= tol))


def expand_multiplicative(spec: MultiplicativeSpec):
    """Expand prime values to the full sequence via complete multiplicativity.

    Entry 1 is +1; entry at m is the product of prime values with
    multiplicity from m's factorization. Returns a SignSequence in the real
    case, a ComplexSequence otherwise.
    """
    n = spec.horizon
    spf = smallest_prime_factors(n)
    if spec.is_real:
        vals = [0] * (n + 1)
        vals[1] = 1
        for m in range(2, n + 1):
            p = int(spf[m])
            vals[m] = spec.prime_values[p] * vals[m // p]
        return SignSequence(tuple(vals[1:]))
    vals_c = np.zeros(n + 1, dtype=np.complex128)
    vals_c[1] = 1.0
    for m in range(2, n + 1):
        p = int(spf[m])
        vals_c[m] = complex(spec.prime_values[p]) * vals_c[m // p]
    return ComplexSequence(vals_c[1:])


def bcc_multiplicative_spec(n: int) -> MultiplicativeSpec:
    """Prime values reproducing bcc_sequence: +1 at p = 3 and p = 1 mod 3, else -1."""
    pv = {p: (1 if (p == 3 or p % 3 == 1) else -1) for p in primes_upto(n)}
    return MultiplicativeSpec(pv, n)


def is_completely_multiplicative(seq: SignSequence) -> bool:
    """True iff seq[m*n] == seq[m]*seq[n] whenever m*n <= length.

    Requires strict +-1 entries (zero entries make the property vacuous or
    broken depending on convention, so they are rejected).
    """
    seq.require_pm1("is_completely_multiplicative")
    vals = seq.values
    n = len(vals)
    if n >= 1 and vals[0] != 1:
        return False
    for a in range(2, int(math.isqrt(n)) + 1):
        va = vals[a - 1]
        for b in range(a, n // a + 1):
            if vals[a * b - 1] != va * vals[b - 1]:
                return False
    return True


def partial_sum_energy(zs) -> float:
    """Averaged squared partial sums: N^-1 * sum_{n<=N} |s_n|^2.

    Accepts a ComplexSequence or a SignSequence (embedded as reals).
    """
    if isinstance(zs, SignSequence):
        zs = ComplexSequence.from_sign_sequence(zs)
    s = np.cumsum(zs.values)
    return float(np.mean(np.abs(s) ** 2))


def random_pm1(n: int, seed: int) -> SignSequence:
    """Independent uniform +-1 entries from numpy's PCG64 stream for `seed`.

    Deterministic: the same seed always yields the same sequence. The
    generator is pinned to PCG64 so Monte Carlo numbers reproduce
    bit-for-bit across platforms.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    vals = rng.integers(0, 2, size=n) * 2 - 1
    return SignSequence(tuple(int(v) for v in vals))


# --- spec file format: lines of "<prime> <value>" with # comments ---


def write_multiplicative_spec(spec: MultiplicativeSpec, path) -> None:
    if not spec.is_real:
        raise ValueError("only real +-1 specs have a file representation")
    with open(path, "w") as fh:
        fh.write(f"# horizon {spec.horizon}\n")
        for p in sorted(spec.prime_values):
            fh.write(f"{p} {spec.prime_values[p]}\n")


def read_multiplicative_spec(path) -> MultiplicativeSpec:
    horizon = None
    pv: dict[int, int] = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].split()
                if len(parts) == 2 and parts[0] == "horizon":
                    horizon = int(parts[1])
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected '<prime> <value>'")
            pv[int(parts[0])] = int(parts[1])
    if horizon is None:
        horizon = max(pv) if pv else 1
    return MultiplicativeSpec(pv, horizon)
