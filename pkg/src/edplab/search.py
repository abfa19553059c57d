"""Backtracking search for long sequences of bounded HAP discrepancy.

The search assigns entries +-1 left to right, keeping one running sum per
common difference d. Appending entry n touches exactly the sums of the
divisors of n (precomputed divisor table — the key performance decision),
so a branch is pruned the moment any |running sum| would exceed the target
C, and an entry is forced as soon as some divisor's sum sits at +-C.

Besides the open-ended depth-first search there are exhaustion primitives
(prove that no sequence of a given length exists, count the ones that do),
a variant restricted to completely multiplicative sequences (branching on
prime positions only), and a brute-force horizon check for the mod-p
variant of the problem.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .constructions import smallest_prime_factors
from .errors import InconclusiveError
from .sequences import SignSequence

_VALUE_ORDERS = ("balance", "plus_first", "randomized")
_BUDGET_CHECK_MASK = 0xFFF  # look at the clock every 4096 nodes


@dataclass(frozen=True)
class SearchConfig:
    """Parameters of a bounded-discrepancy search.

    value_order picks the branching heuristic: "balance" (default) tries
    first the sign minimizing the total |running sum| over the divisors of
    the next index, ties toward +1; "plus_first" always tries +1 first;
    "randomized" is "balance" with seeded random tie-breaking.
    """

    target_discrepancy: int
    max_length: Optional[int] = None
    time_budget: float = 60.0
    value_order: str = "balance"
    multiplicative_only: bool = False
    seed: int = 0
    max_nodes: int = 10**9

    def __post_init__(self):
        if self.target_discrepancy < 1:
            raise ValueError("target discrepancy must be >= 1")
        if self.time_budget <= 0:
            raise ValueError("time budget must be positive")
        if self.value_order not in _VALUE_ORDERS:
            raise ValueError(f"value_order must be one of {_VALUE_ORDERS}")
        if self.max_length is not None and self.max_length < 1:
            raise ValueError("max_length must be >= 1")
        if self.max_nodes < 1:
            raise ValueError("max_nodes must be >= 1")


@dataclass(frozen=True)
class SearchCheckpoint:
    """Resume token for an interrupted search: the DFS path plus branch state.

    `signs` is the current path as '+'/'-' characters; `branch[i]` records
    how position i+1 was entered: 'f' = forced (no sibling), '0' = first
    choice with the sibling still pending, '1' = second choice. Together
    with the config this reconstructs the DFS stack exactly. Only
    deterministic value orders can be resumed.
    """

    target_discrepancy: int
    multiplicative_only: bool
    value_order: str
    signs: str
    branch: str
    best: tuple
    nodes_visited: int

    def to_json(self) -> str:
        return json.dumps(
            {
                "target_discrepancy": self.target_discrepancy,
                "multiplicative_only": self.multiplicative_only,
                "value_order": self.value_order,
                "signs": self.signs,
                "branch": self.branch,
                "best": list(self.best),
                "nodes_visited": self.nodes_visited,
            },
            indent=2,
            sort_keys=True,
        ) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "SearchCheckpoint":
        doc = json.loads(text)
        return cls(
            target_discrepancy=int(doc["target_discrepancy"]),
            multiplicative_only=bool(doc["multiplicative_only"]),
            value_order=str(doc["value_order"]),
            signs=str(doc["signs"]),
            branch=str(doc["branch"]),
            best=tuple(int(v) for v in doc["best"]),
            nodes_visited=int(doc["nodes_visited"]),
        )

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path) -> "SearchCheckpoint":
        with open(path) as fh:
            return cls.from_json(fh.read())


@dataclass(frozen=True)
class SearchResult:
    best_sequence: SignSequence
    best_length: int
    exhausted: bool
    nodes_visited: int
    elapsed: float
    progress: tuple = ()  # ((elapsed_seconds, best_length), ...) improvement events
    checkpoint: Optional[SearchCheckpoint] = field(default=None, repr=False)


def divisor_table(limit: int) -> list:
    """divisors[n] for n = 0..limit (divisors[0] is empty)."""
    divs = [[] for _ in range(limit + 1)]
    for d in range(1, limit + 1):
        for n in range(d, limit + 1, d):
            divs[n].append(d)
    return [tuple(t) for t in divs]


class _Frontier:
    """Grow-on-demand divisor and smallest-prime-factor tables."""

    def __init__(self, initial: int, multiplicative: bool):
        self.limit = max(64, initial)
        self.divs = divisor_table(self.limit)
        self.multiplicative = multiplicative
        self.spf = smallest_prime_factors(self.limit) if multiplicative else None

    def ensure(self, n: int) -> None:
        if n <= self.limit:
            return
        while self.limit < n:
            self.limit *= 2
        self.divs = divisor_table(self.limit)
        if self.multiplicative:
            self.spf = smallest_prime_factors(self.limit)


def _make_orderer(value_order: str, seed: int) -> Callable:
    """Return choose(n, sums, divs) -> (first, alt) for a free decision."""
    if value_order == "plus_first":
        def choose(n, sums, divs):
            return 1, -1
        return choose
    if value_order == "balance":
        def choose(n, sums, divs):
            sp = sm = 0
            for d in divs:
                s = sums[d]
                sp += s + 1 if s >= 0 else -1 - s
                sm += s - 1 if s > 0 else 1 - s
            return (1, -1) if sp <= sm else (-1, 1)
        return choose
    rng = np.random.Generator(np.random.PCG64(seed))
    def choose(n, sums, divs):
        sp = sm = 0
        for d in divs:
            s = sums[d]
            sp += s + 1 if s >= 0 else -1 - s
            sm += s - 1 if s > 0 else 1 - s
        if sp == sm:
            return (1, -1) if rng.integers(0, 2) else (-1, 1)
        return (1, -1) if sp < sm else (-1, 1)
    return choose


def _run_dfs(
    C: int,
    *,
    multiplicative: bool,
    value_order: str,
    seed: int,
    max_length: Optional[int],
    time_budget: Optional[float],
    max_nodes: int,
    stop_at_depth: Optional[int] = None,
    count_at_depth: Optional[int] = None,
    root_plus_only: bool = False,
    resume: Optional[SearchCheckpoint] = None,
):
    """Shared iterative DFS engine.

    Returns a dict with best/exhausted/nodes/elapsed/progress/count and the
    final stack state (for checkpointing). `stop_at_depth` ends the search
    as soon as that depth is reached; `count_at_depth` counts every node at
    that depth without descending past it. `root_plus_only` explores only
    the +1 branch at position 1 (sound for length/existence questions by
    the global negation symmetry; counts are doubled by the caller).
    """
    frontier = _Frontier(max_length or 64, multiplicative)
    choose = _make_orderer(value_order, seed)
    hard_cap = max_length if max_length is not None else None
    depth_cap = stop_at_depth or count_at_depth
    if depth_cap is not None:
        hard_cap = depth_cap if hard_cap is None else min(hard_cap, depth_cap)

    sums = [0] * (frontier.limit + 1)
    vals = [0] * (frontier.limit + 1)  # vals[n] = assigned entry, 1-indexed
    stack: list = []  # (alt, flag) per depth; flag in 'f', '0', '1'
    best = 0
    best_seq: tuple = ()
    nodes = 0
    count = 0
    progress: list = []
    t0 = time.perf_counter()
    out_of_budget = False

    def candidates(n):
        """(first, alt) for position n, or (None, None) if the node is dead."""
        forced = None
        for d in frontier.divs[n]:
            s = sums[d]
            if s >= C:
                if forced == 1:
                    return None, None
                forced = -1
            elif s <= -C:
                if forced == -1:
                    return None, None
                forced = 1
        if multiplicative:
            if n == 1:
                fixed = 1  # value at 1 is +1 for any completely multiplicative sequence
            else:
                p = int(frontier.spf[n])
                fixed = vals[p] * vals[n // p] if p != n else None
            if fixed is not None:
                if forced is not None and forced != fixed:
                    return None, None
                return fixed, None
        if forced is not None:
            return forced, None
        if n == 1 and root_plus_only:
            return 1, None
        return choose(n, sums, frontier.divs[n])

    def place(n, v):
        for d in frontier.divs[n]:
            sums[d] += v
        vals[n] = v

    def unplace(n, v):
        for d in frontier.divs[n]:
            sums[d] -= v

    if resume is not None:
        for i, ch in enumerate(resume.signs):
            n = i + 1
            frontier.ensure(n + 1)
            if frontier.limit + 1 > len(sums):
                sums.extend([0] * (frontier.limit + 1 - len(sums)))
                vals.extend([0] * (frontier.limit + 1 - len(vals)))
            v = 1 if ch == "+" else -1
            flag = resume.branch[i]
            place(n, v)
            stack.append((None if flag in ("f", "1") else -v, flag))
        best = len(resume.best)
        best_seq = resume.best
        nodes = resume.nodes_visited

    n = len(stack) + 1
    while True:
        if hard_cap is None or n <= hard_cap:
            frontier.ensure(n)
            if frontier.limit + 1 > len(sums):
                sums.extend([0] * (frontier.limit + 1 - len(sums)))
                vals.extend([0] * (frontier.limit + 1 - len(vals)))
            first, alt = candidates(n)
        else:
            first = alt = None
        descend = first is not None
        if descend and count_at_depth is not None and n == count_at_depth:
            # count both branches of the final level without descending
            trial = [first] if alt is None else [first, alt]
            for v in trial:
                nodes += 1
                count += 1
            descend = False
        if descend:
            place(n, first)
            stack.append((alt, "f" if alt is None else "0"))
            nodes += 1
            if n > best:
                best = n
                best_seq = tuple(vals[1 : n + 1])
                progress.append((time.perf_counter() - t0, best))
                if stop_at_depth is not None and best >= stop_at_depth:
                    break
                if max_length is not None and best >= max_length:
                    break
            n += 1
            if nodes & _BUDGET_CHECK_MASK == 0 and time_budget is not None:
                if time.perf_counter() - t0 > time_budget:
                    out_of_budget = True
                    break
            if nodes >= max_nodes:
                out_of_budget = True
                break
            continue
        # dead end: backtrack to the deepest pending sibling
        moved = False
        while stack:
            n -= 1
            alt, flag = stack.pop()
            unplace(n, vals[n])
            if alt is not None:
                place(n, alt)
                stack.append((None, "1"))
                nodes += 1
                if n > best:
                    best = n
                    best_seq = tuple(vals[1 : n + 1])
                    progress.append((time.perf_counter() - t0, best))
                n += 1
                moved = True
                break
        if moved:
            if nodes & _BUDGET_CHECK_MASK == 0 and time_budget is not None:
                if time.perf_counter() - t0 > time_budget:
                    out_of_budget = True
                    break
            if nodes >= max_nodes:
                out_of_budget = True
                break
            continue
        # stack empty: the whole pruned tree was explored
        return {
            "best": best,
            "best_seq": best_seq,
            "exhausted": True,
            "nodes": nodes,
            "count": count,
            "elapsed": time.perf_counter() - t0,
            "progress": progress,
            "out_of_budget": False,
            "stack": stack,
            "vals": vals,
        }
    return {
        "best": best,
        "best_seq": best_seq,
        "exhausted": False,
        "nodes": nodes,
        "count": count,
        "elapsed": time.perf_counter() - t0,
        "progress": progress,
        "out_of_budget": out_of_budget,
        "stack": stack,
        "vals": vals,
    }


def _checkpoint_from_state(config: SearchConfig, state) -> Optional[SearchCheckpoint]:
    stack = state["stack"]
    if not stack:
        return None
    vals = state["vals"]
    signs = "".join("+" if vals[i + 1] > 0 else "-" for i in range(len(stack)))
    branch = "".join(flag for _, flag in stack)
    return SearchCheckpoint(
        target_discrepancy=config.target_discrepancy,
        multiplicative_only=config.multiplicative_only,
        value_order=config.value_order,
        signs=signs,
        branch=branch,
        best=state["best_seq"],
        nodes_visited=state["nodes"],
    )


def _check_resume(config: SearchConfig, resume: SearchCheckpoint) -> None:
    if config.value_order == "randomized":
        raise ValueError("randomized value order cannot be resumed (RNG state is not checkpointed)")
    if (
        resume.target_discrepancy != config.target_discrepancy
        or resume.multiplicative_only != config.multiplicative_only
        or resume.value_order != config.value_order
    ):
        raise ValueError("checkpoint was produced by an incompatible search configuration")


def longest_with_discrepancy(
    config: SearchConfig, resume: Optional[SearchCheckpoint] = None
) -> SearchResult:
    """Depth-first search for the longest +-1 sequence with discrepancy <= C.

    Returns the best sequence found within the budget. `exhausted` is True
    only when the full pruned tree was explored, in which case no sequence
    of length best_length + 1 exists. Running out of time or nodes is not
    an error: the best-so-far comes back with exhausted=False and a resume
    checkpoint. Only the +1 branch is explored at position 1 (the -1
    subtree is its mirror image and adds no lengths).
    """
    if resume is not None:
        _check_resume(config, resume)
    state = _run_dfs(
        config.target_discrepancy,
        multiplicative=config.multiplicative_only,
        value_order=config.value_order,
        seed=config.seed,
        max_length=config.max_length,
        time_budget=config.time_budget,
        max_nodes=config.max_nodes,
        root_plus_only=not config.multiplicative_only,
        resume=resume,
    )
    exhausted = state["exhausted"]
    if config.max_length is not None and state["best"] >= config.max_length:
        exhausted = False  # stopped at the cap; nothing proved about longer sequences
    return SearchResult(
        best_sequence=SignSequence(state["best_seq"]),
        best_length=state["best"],
        exhausted=exhausted,
        nodes_visited=state["nodes"],
        elapsed=state["elapsed"],
        progress=tuple(state["progress"]),
        checkpoint=None if exhausted else _checkpoint_from_state(config, state),
    )


def longest_multiplicative_with_discrepancy(
    config: SearchConfig, resume: Optional[SearchCheckpoint] = None
) -> SearchResult:
    """Search restricted to completely multiplicative sequences.

    Branches only at prime positions; composite entries are the forced
    products of their factors' values, checked against the running sums
    like any other entry.
    """
    if not config.multiplicative_only:
        raise ValueError("config.multiplicative_only must be True for the multiplicative search")
    return longest_with_discrepancy(config, resume=resume)


def prove_no_extension(C: int, L: int, max_nodes: int = 10**9) -> bool:
    """True iff every +-1 sequence of length L has discrepancy > C.

    Established by exhausting the pruned search tree to depth L (the +1
    root branch only; negation symmetry covers the rest). Exceeding the
    node cap raises InconclusiveError — never a silent wrong answer.
    """
    if C < 1 or L < 1:
        raise ValueError("need C >= 1 and L >= 1")
    state = _run_dfs(
        C,
        multiplicative=False,
        value_order="plus_first",
        seed=0,
        max_length=None,
        time_budget=None,
        max_nodes=max_nodes,
        stop_at_depth=L,
        root_plus_only=True,
    )
    if state["best"] >= L:
        return False
    if state["out_of_budget"]:
        raise InconclusiveError(f"node cap {max_nodes} exceeded before exhausting length {L}")
    return True


def count_sequences(C: int, L: int, max_nodes: int = 10**9) -> int:
    """Exact number of +-1 sequences of length L with discrepancy <= C.

    Any prefix of a valid sequence is valid (discrepancy is monotone in
    length), so valid sequences are exactly the depth-L nodes of the pruned
    tree. The +1-rooted count is doubled for the mirror subtree.
    """
    if C < 1 or L < 1:
        raise ValueError("need C >= 1 and L >= 1")
    state = _run_dfs(
        C,
        multiplicative=False,
        value_order="plus_first",
        seed=0,
        max_length=None,
        time_budget=None,
        max_nodes=max_nodes,
        count_at_depth=L,
        root_plus_only=True,
    )
    if state["out_of_budget"]:
        raise InconclusiveError(f"node cap {max_nodes} exceeded while counting at length {L}")
    return 2 * state["count"]


def reference_forced_value(sums, divisors, C: int) -> Optional[int]:
    """Slow reference propagator: the unique value not violating |sum| <= C.

    `sums[d]` is the running sum for difference d; `divisors` the divisors
    of the next index. Returns +1 or -1 if exactly one survives, 0 if both
    fail (dead node), None if both are fine (free choice).
    """
    ok = []
    for v in (1, -1):
        if all(abs(sums[d] + v) <= C for d in divisors):
            ok.append(v)
    if len(ok) == 2:
        return None
    if len(ok) == 1:
        return ok[0]
    return 0


def fast_forced_value(sums, divisors, C: int) -> Optional[int]:
    """Boundary-scan propagator used by the engine (same contract as the reference)."""
    forced = None
    for d in divisors:
        s = sums[d]
        if s >= C:
            if forced == 1:
                return 0
            forced = -1
        elif s <= -C:
            if forced == -1:
                return 0
            forced = 1
    return forced


def modular_min_horizon(
    p: int, n_max: int, cell_cap: int = 5 * 10**8
) -> Optional[int]:
    """Smallest N <= n_max such that every sequence over the non-zero residues
    mod p attains every residue as some HAP partial sum with n*d <= N.

    Brute force over all (p-1)^N sequences, vectorized per difference d.
    Returns None if no N <= n_max suffices. The work is capped at roughly
    `cell_cap` array cells; exceeding it raises InconclusiveError.
    """
    if p < 2:
        raise ValueError("p must be a prime >= 2")
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    base = p - 1
    full = (1 << p) - 1
    for n in range(1, n_max + 1):
        total = base**n
        cells = total * sum(n // d for d in range(1, n + 1))
        if cells > cell_cap:
            raise InconclusiveError(
                f"enumeration at N={n} needs ~{cells:.2e} cells, cap is {cell_cap:.2e}"
            )
        idx = np.arange(total, dtype=np.int64)
        digits = np.empty((total, n), dtype=np.int8)
        for j in range(n):
            digits[:, j] = (idx // base**j) % base + 1
        attained = np.zeros(total, dtype=np.uint32)
        for d in range(1, n + 1):
            partial = np.cumsum(digits[:, d - 1 :: d].astype(np.int32), axis=1) % p
            masks = np.bitwise_or.reduce(
                np.left_shift(np.uint32(1), partial.astype(np.uint32)), axis=1
            )
            attained |= masks
        if bool((attained == full).all()):
            return n
    return None
