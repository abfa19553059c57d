"""Core types for sign sequences, homogeneous APs and discrepancy evaluation.

A homogeneous arithmetic progression (HAP) is {d, 2d, ..., md}. The
discrepancy of a finite sequence is the maximum over all in-range HAPs of
the absolute partial sum along the HAP. Everything else in the package is
built on the types and evaluators here.

Conventions: sequences are 1-indexed (entry n lives at index n), entries
are -1, 0 or +1 (0 is allowed so character-like examples are first class),
and all HAP sums are exact integer arithmetic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

import numpy as np

from .errors import HapRangeError

_VALID_ENTRIES = (-1, 0, 1)


@dataclass(frozen=True)
class HAP:
    """Homogeneous arithmetic progression {d, 2d, ..., md}."""

    d: int
    m: int

    def __post_init__(self):
        if self.d < 1 or self.m < 1:
            raise ValueError(f"HAP needs d >= 1 and m >= 1, got (d={self.d}, m={self.m})")

    @property
    def last(self) -> int:
        """Largest element m*d."""
        return self.m * self.d

    def indices(self) -> range:
        return range(self.d, self.m * self.d + 1, self.d)

    def indicator(self, n: int) -> np.ndarray:
        """0/1 membership vector of length n (position i-1 marks element i)."""
        if self.last > n:
            raise HapRangeError(f"HAP (d={self.d}, m={self.m}) reaches {self.last} > {n}")
        v = np.zeros(n)
        v[self.d - 1 : self.last : self.d] = 1.0
        return v


@dataclass(frozen=True)
class SignSequence:
    """Finite sequence with entries in {-1, 0, +1}, 1-indexed."""

    values: tuple

    def __post_init__(self):
        vals = tuple(int(v) for v in self.values)
        for i, v in enumerate(vals, start=1):
            if v not in _VALID_ENTRIES:
                raise ValueError(f"entry {v!r} at position {i} is not -1, 0 or +1")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_iterable(cls, it: Iterable[int]) -> "SignSequence":
        return cls(tuple(it))

    @property
    def length(self) -> int:
        return len(self.values)

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, n: int) -> int:
        """Entry at 1-based position n; position 0 is reserved and invalid."""
        if not 1 <= n <= len(self.values):
            raise IndexError(f"position {n} outside 1..{len(self.values)}")
        return self.values[n - 1]

    def __iter__(self) -> Iterator[int]:
        return iter(self.values)

    def prefix(self, n: int) -> "SignSequence":
        if not 1 <= n <= len(self.values):
            raise ValueError(f"prefix length {n} outside 1..{len(self.values)}")
        return SignSequence(self.values[:n])

    def negate(self) -> "SignSequence":
        return SignSequence(tuple(-v for v in self.values))

    def has_zero(self) -> bool:
        return 0 in self.values

    def require_pm1(self, context: str = "operation") -> None:
        """Reject sequences containing 0 where strict +-1 entries are needed."""
        if self.has_zero():
            pos = self.values.index(0) + 1
            raise ValueError(f"{context} requires +-1 entries but position {pos} is 0")

    def as_array(self) -> np.ndarray:
        return np.array(self.values, dtype=np.int64)


@dataclass(frozen=True)
class DiscrepancyReport:
    """Result of a full HAP-discrepancy evaluation.

    per_d_max keeps, for every common difference d, the maximum absolute
    partial sum over that d's HAPs; the search and certificate modules
    consume these, so the O(N) memory is accepted.
    """

    max_abs_sum: int
    witness: HAP
    per_d_max: Mapping[int, int] = field(repr=False)

    def to_json(self) -> str:
        doc = {
            "max_abs_sum": self.max_abs_sum,
            "witness_d": self.witness.d,
            "witness_m": self.witness.m,
            "per_d_max": {str(d): int(v) for d, v in sorted(self.per_d_max.items())},
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "DiscrepancyReport":
        doc = json.loads(text)
        return cls(
            max_abs_sum=int(doc["max_abs_sum"]),
            witness=HAP(int(doc["witness_d"]), int(doc["witness_m"])),
            per_d_max={int(k): int(v) for k, v in doc["per_d_max"].items()},
        )


class VectorSequence:
    """Ordered list of real coordinate vectors of a common dimension.

    Backed by a read-only (length, dimension) float array. 1-indexed like
    SignSequence. The unit-norm variant is checked by `is_unit` /
    `require_unit` with tolerance 1e-9.
    """

    UNIT_TOL = 1e-9

    def __init__(self, vectors):
        arr = np.array(vectors, dtype=float)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"expected a (length, dimension) array, got shape {arr.shape}")
        arr.setflags(write=False)
        self._arr = arr

    @classmethod
    def from_sign_sequence(cls, seq: SignSequence) -> "VectorSequence":
        """Embed a sign sequence as 1-dimensional vectors."""
        return cls(seq.as_array().reshape(-1, 1).astype(float))

    @property
    def vectors(self) -> np.ndarray:
        return self._arr

    @property
    def length(self) -> int:
        return self._arr.shape[0]

    @property
    def dimension(self) -> int:
        return self._arr.shape[1]

    def __len__(self) -> int:
        return self.length

    def __getitem__(self, n: int) -> np.ndarray:
        if not 1 <= n <= self.length:
            raise IndexError(f"position {n} outside 1..{self.length}")
        return self._arr[n - 1]

    def is_unit(self, tol: float = UNIT_TOL) -> bool:
        norms = np.linalg.norm(self._arr, axis=1)
        return bool(np.all(np.abs(norms - 1.0) <= tol))

    def require_unit(self, tol: float = UNIT_TOL) -> None:
        norms = np.linalg.norm(self._arr, axis=1)
        bad = np.nonzero(np.abs(norms - 1.0) > tol)[0]
        if bad.size:
            n = int(bad[0]) + 1
            raise ValueError(f"vector at position {n} has norm {norms[bad[0]]!r}, not 1 within {tol}")


def hap_sum(seq: SignSequence, hap: HAP) -> int:
    """Exact partial sum of seq over the HAP {d, 2d, ..., md}."""
    if hap.last > seq.length:
        raise HapRangeError(
            f"HAP (d={hap.d}, m={hap.m}) needs index {hap.last} but sequence has length {seq.length}"
        )
    vals = seq.values
    return sum(vals[j - 1] for j in hap.indices())


def discrepancy(seq: SignSequence) -> DiscrepancyReport:
    """Maximum |HAP partial sum| over all HAPs with m*d <= length.

    Runs one pass of prefix sums per common difference d, so the total work
    is sum_d floor(N/d) = O(N log N).
    """
    n = seq.length
    if n < 1:
        raise ValueError("discrepancy of an empty sequence is undefined")
    arr = seq.as_array()
    best = -1
    witness = HAP(1, 1)
    per_d_max: dict[int, int] = {}
    for d in range(1, n + 1):
        sums = np.cumsum(arr[d - 1 :: d])
        np.abs(sums, out=sums)
        k = int(np.argmax(sums))
        dmax = int(sums[k])
        per_d_max[d] = dmax
        if dmax > best:
            best = dmax
            witness = HAP(d, k + 1)
    return DiscrepancyReport(max_abs_sum=best, witness=witness, per_d_max=per_d_max)


def prefix_discrepancies(seq: SignSequence) -> np.ndarray:
    """discrepancy(prefix of length L) for every L = 1..length, in one sweep.

    The HAPs confined to the length-L prefix are exactly those ending at
    some index <= L, so the prefix discrepancies are the running maximum of
    per-endpoint partial-sum records. Discrepancy is therefore monotone
    non-decreasing in L, which this array makes explicit.
    """
    n = seq.length
    if n < 1:
        raise ValueError("empty sequence")
    arr = seq.as_array()
    ending_max = np.zeros(n + 1, dtype=np.int64)
    for d in range(1, n + 1):
        sums = np.cumsum(arr[d - 1 :: d])
        np.abs(sums, out=sums)
        ends = np.arange(d, n + 1, d)
        np.maximum.at(ending_max, ends, sums)
    return np.maximum.accumulate(ending_max[1:])


def vector_hap_norm(vs: VectorSequence, hap: HAP) -> float:
    """Euclidean norm of the vector sum over the HAP."""
    if hap.last > vs.length:
        raise HapRangeError(
            f"HAP (d={hap.d}, m={hap.m}) needs index {hap.last} but sequence has length {vs.length}"
        )
    block = vs.vectors[hap.d - 1 : hap.last : hap.d]
    return float(np.linalg.norm(block.sum(axis=0)))


def vector_discrepancy(vs: VectorSequence) -> float:
    """Max of vector_hap_norm over all in-range HAPs."""
    n = vs.length
    if n < 1:
        raise ValueError("vector discrepancy of an empty sequence is undefined")
    best = 0.0
    for d in range(1, n + 1):
        partial = np.cumsum(vs.vectors[d - 1 :: d], axis=0)
        norms = np.linalg.norm(partial, axis=1)
        m = float(norms.max())
        if m > best:
            best = m
    return best


# --- file formats (sequence text format is the interchange contract) ---


def write_sequence(seq: SignSequence, path, header: str | None = None) -> None:
    """One entry per line from {-1, 0, 1}; optional leading # comment."""
    with open(path, "w") as fh:
        if header:
            for line in header.splitlines():
                fh.write(f"# {line}\n")
        for v in seq.values:
            fh.write(f"{v}\n")


def read_sequence(path) -> SignSequence:
    entries = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line in ("-1", "0", "1", "+1"):
                entries.append(int(line))
            else:
                raise ValueError(f"{path}:{lineno}: entry {line!r} is not one of -1, 0, 1")
    if not entries:
        raise ValueError(f"{path}: no sequence entries found")
    return SignSequence(tuple(entries))
