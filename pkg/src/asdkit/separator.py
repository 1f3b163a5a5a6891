"""Partitioning the interval [m] into sets with prescribed sums.

The solver has two routes.  The algorithmic route works over the pair
system P_m = {{x, m+1-x} : x in [m/2]} (every pair sums to m+1): targets
divisible by m+1 are unions of whole pairs; general targets are reduced
modulo m+1 by repeatedly borrowing a two-element residue pair for the
smallest outstanding target and charging the complementary elements to
the largest one.  It applies when every target is comfortably large
(configurable thresholds, defaults min(1600*i, 20*(m+1))).  Small
instances fall back to an exact backtracking search over subsets of [m].
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from .config import DESK, EngineConfig
from .errors import (InfeasibleError, PreconditionError,
                     UnsupportedInstanceError, ValidationError)


@dataclass(frozen=True)
class SeparationInstance:
    m: int
    targets: tuple[int, ...]

    def __post_init__(self):
        if self.m < 1:
            raise ValidationError("m must be positive")
        if any(t <= 0 for t in self.targets):
            raise ValidationError("targets must be positive")


@dataclass(frozen=True)
class PairSystem:
    """Subset of the pairs {x, m+1-x}; each pair identified by x <= m/2."""

    m: int
    available: frozenset[int]

    def __post_init__(self):
        if self.m % 2:
            raise ValidationError("pair systems need even m")
        if any(not (1 <= x <= self.m // 2) for x in self.available):
            raise ValidationError("pair ids must lie in [1, m/2]")

    @staticmethod
    def full(m: int) -> "PairSystem":
        return PairSystem(m, frozenset(range(1, m // 2 + 1)))

    def elements(self) -> set[int]:
        return {x for p in self.available for x in (p, self.m + 1 - p)}

    def pair(self, x: int) -> tuple[int, int]:
        return (x, self.m + 1 - x)


@dataclass(frozen=True)
class SeparationResult:
    m: int
    parts: tuple[tuple[int, ...], ...]  # aligned with the input target order
    path: str  # "paper" or "fallback"

    def as_dict(self) -> dict:
        return {"m": self.m, "parts": [list(p) for p in self.parts],
                "path": self.path}


def residue_pairs(n: int, m: int) -> list[tuple[int, int]]:
    """All (x, y) with 1 <= x < y <= m, x+y = n (mod m+1) and x+y <= n,
    sorted by x.  Size is at least min(n/2, m/2) - 1."""
    if m % 2:
        raise PreconditionError("residue_pairs requires even m")
    if n < 1:
        raise PreconditionError("residue_pairs requires n >= 1")
    out = []
    for x in range(1, m + 1):
        y = (n - x) % (m + 1)
        if x < y <= m and x + y <= n:
            out.append((x, y))
    assert len(out) >= min(n / 2, m / 2) - 1
    return out


def separate_divisible(lambdas: Sequence[int], pairs: PairSystem
                       ) -> SeparationResult:
    """Separate targets of the form lambda_i * (m+1) using whole pairs."""
    if any(l <= 0 for l in lambdas):
        raise ValidationError("multipliers must be positive")
    free = sorted(pairs.available)
    if sum(lambdas) > len(free):
        raise InfeasibleError(
            f"need {sum(lambdas)} pairs but only {len(free)} available")
    parts = []
    at = 0
    for lam in lambdas:
        chunk = free[at:at + lam]
        at += lam
        parts.append(tuple(sorted(x for p in chunk for x in pairs.pair(p))))
    return SeparationResult(pairs.m, tuple(parts), "paper")


# ---------------------------------------------------------------------------
# The congruence-reduction recursion
# ---------------------------------------------------------------------------

def _pid(m: int, x: int) -> int:
    return min(x, m + 1 - x)


def _pick_residue_pair(m: int, n: int, avail: set[int]) -> tuple[int, int]:
    elems = {x for p in avail for x in (p, m + 1 - p)}
    for x, y in residue_pairs(n, m):
        if x in elems and y in elems:
            return x, y
    raise PreconditionError(
        f"no usable residue pair for target {n} with {len(avail)} pairs left")


def _all_large(m: int, seq: list[tuple[int, int]], avail: set[int],
               parts: dict[int, list[int]]) -> tuple[list[int], set[int]]:
    """Reduce each target to a residue b_i <= a_i, b_i = a_i (mod m+1),
    placing the elements realizing the b_i.  The last target may be as
    small as m+1; all earlier ones must be >= 3(m+1).

    Returns the b_i values (aligned with seq) and the pair ids consumed.
    """
    total = sum(v for v, _ in seq)
    if total % (m + 1):
        raise PreconditionError("target sum not divisible by m+1")
    if seq[-1][0] < m + 1:
        raise PreconditionError(f"last target {seq[-1][0]} < m+1")
    for v, _ in seq[:-1]:
        if v < 3 * (m + 1):
            raise PreconditionError(f"target {v} < 3(m+1)")

    if len(seq) == 1:
        p = min(avail)
        tag = seq[0][1]
        parts[tag].extend(pairs_elems(m, [p]))
        return [m + 1], {p}

    a_k, tag_k = seq[-1]
    x, y = _pick_residue_pair(m, a_k, avail)
    parts[tag_k].extend([x, y])
    removed = {_pid(m, x), _pid(m, y)}
    rest = [list(t) for t in seq[:-1]]
    carry = 0
    if x + y != m + 1:
        carry = 2 * (m + 1) - x - y
        rest[-1][0] -= carry
        parts[rest[-1][1]].extend([m + 1 - x, m + 1 - y])
    b_rest, used = _all_large(m, [tuple(t) for t in rest], avail - removed,
                              parts)
    b_rest[-1] += carry
    return b_rest + [x + y], used | removed


def pairs_elems(m: int, pids: Sequence[int]) -> list[int]:
    return sorted(x for p in pids for x in (p, m + 1 - p))


def separate_congruent(targets: Sequence[int], pairs: PairSystem
                       ) -> tuple[list[int], SeparationResult]:
    """Separate targets that are each >= 3(m+1) (the last may be >= m+1)
    and sum to a multiple of m+1.

    Returns the residues b_i reached by the reduction together with the
    full separation of the original targets.
    """
    m = pairs.m
    seq = [(int(v), i) for i, v in enumerate(targets)]
    k = len(seq)
    total = sum(v for v, _ in seq)
    if total % (m + 1):
        raise PreconditionError("sum of targets not divisible by m+1")
    ell = total // (m + 1)
    if len(pairs.available) < max(ell, m / 4 + 2 * k):
        raise PreconditionError(
            f"|S|={len(pairs.available)} < max(l={ell}, m/4+2k={m / 4 + 2 * k})")

    parts: dict[int, list[int]] = {i: [] for i in range(k)}
    avail = set(pairs.available)
    b, used = _all_large(m, seq, avail, parts)
    lambdas = []
    for (v, _), bv in zip(seq, b):
        if bv > v or (v - bv) % (m + 1):
            raise AssertionError("residue reduction went wrong")
        lambdas.append((v - bv) // (m + 1))
    free = sorted(avail - used)
    if sum(lambdas) > len(free):
        raise AssertionError("not enough pairs left for the divisible step")
    at = 0
    for i, lam in enumerate(lambdas):
        chunk = free[at:at + lam]
        at += lam
        parts[i].extend(pairs_elems(m, chunk))
    out = tuple(tuple(sorted(parts[i])) for i in range(k))
    _check_sums(out, targets)
    return b, SeparationResult(m, out, "paper")


def _check_sums(parts, targets):
    for p, t in zip(parts, targets):
        if sum(p) != t:
            raise AssertionError(f"part {p} sums to {sum(p)}, want {t}")


def _not_too_large(m: int, seq: list[tuple[int, int]], avail: set[int],
                   start: int, k: int, parts: dict[int, list[int]]) -> None:
    """Separate the ascending tail (positions start..k of a length-k
    sequence) out of the available pairs.

    Each step pulls a two-element residue pair for the smallest target,
    tops it up with whole pairs, charges the complementary elements to
    the largest target, and recurses on the re-sorted rest.
    """
    total = sum(v for v, _ in seq)
    assert total % (m + 1) == 0
    ell = total // (m + 1)
    count = k - start + 1
    assert count == len(seq)
    if len(avail) < ell:
        raise PreconditionError(f"|S|={len(avail)} < l={ell}")
    floor_need = max(m / 2 - 4 * start + 1, m / 4 + 4 * (k - start),
                     5 * (k - start + 1))
    if ell < floor_need:
        raise PreconditionError(
            f"l={ell} < max(m/2-4i+1, m/4+4(k-i), 5(k-i+1))={floor_need}")
    for off, (v, _) in enumerate(seq):
        j = start + off
        if v < min(16 * j, 3 * (m + 1)):
            raise PreconditionError(
                f"target {v} at position {j} below min(16j, 3(m+1))")

    if start == k:
        v, tag = seq[0]
        assert v == ell * (m + 1)
        chunk = sorted(avail)[:ell]
        parts[tag].extend(pairs_elems(m, chunk))
        return

    if seq[0][0] >= 3 * (m + 1):
        _combine(m, seq, avail, parts)
        return

    a_i, tag_i = seq[0]
    x, y = _pick_residue_pair(m, a_i, avail)
    rem = a_i - x - y
    assert rem in (0, m + 1, 2 * (m + 1))
    parts[tag_i].extend([x, y])
    avail = avail - {_pid(m, x), _pid(m, y)}
    lam = rem // (m + 1)
    chunk = sorted(avail)[:lam]
    parts[tag_i].extend(pairs_elems(m, chunk))
    avail = avail - set(chunk)

    rest = [list(t) for t in seq[1:]]
    if x + y != m + 1:
        rest[-1][0] -= 2 * (m + 1) - x - y
        parts[rest[-1][1]].extend([m + 1 - x, m + 1 - y])
    rest_sorted = sorted((tuple(t) for t in rest), key=lambda t: (t[0], t[1]))
    _not_too_large(m, rest_sorted, avail, start + 1, k, parts)


def _combine(m: int, seq: list[tuple[int, int]], avail: set[int],
             parts: dict[int, list[int]]) -> None:
    sub_targets = [v for v, _ in seq]
    sub = PairSystem(m, frozenset(avail))
    _, res = separate_congruent(sub_targets, sub)
    for (v, tag), p in zip(seq, res.parts):
        parts[tag].extend(p)


# ---------------------------------------------------------------------------
# Exact fallback search
# ---------------------------------------------------------------------------

_fail_cache: dict[int, set] = {}


def _exact_separate(m: int, tagged: list[tuple[int, int]]
                    ) -> Optional[dict[int, list[int]]]:
    """Backtracking partition of {1..m} into subsets with the given sums.

    Targets are processed largest-first; subsets are built from the
    largest remaining element down, pruning by remaining-sum bounds.
    Runs of equal targets are canonicalized by forcing strictly
    decreasing subset maxima.  Failed (mask, targets) states are cached
    per m across calls.
    """
    desc = sorted(tagged, key=lambda t: (-t[0], t[1]))
    values = [v for v, _ in desc]
    # A part summing to v needs an element <= v, and the j smallest parts
    # hold j disjoint nonempty subsets, so their sums cover 1+...+j.
    if len(values) > m:
        return None
    asc = sorted(values)
    acc = 0
    for j, v in enumerate(asc, start=1):
        acc += v
        if acc < j * (j + 1) // 2:
            return None
    failed = _fail_cache.setdefault(m, set())
    suffix = [0] * (m + 2)
    for x in range(m, 0, -1):
        suffix[x] = suffix[x + 1] + x

    def subsets(mask: int, target: int, cap: int):
        """Subsets of `mask` with sum `target`, max element < cap,
        yielded as (chosen_mask, max_element)."""
        elems = [x for x in range(min(cap - 1, m), 0, -1) if mask >> x & 1]
        total = sum(elems)

        def rec(idx: int, left: int, acc_mask: int, acc_total: int, top: int):
            if left == 0:
                yield acc_mask, top
                return
            if idx >= len(elems) or acc_total < left:
                return
            x = elems[idx]
            rest = acc_total - x
            if x <= left:
                yield from rec(idx + 1, left - x, acc_mask | (1 << x),
                               rest, top or x)
            yield from rec(idx + 1, left, acc_mask, rest, top)

        yield from rec(0, target, 0, total, 0)

    def rec(mask: int, idx: int, cap: int) -> Optional[list[int]]:
        if idx == len(values):
            return [] if mask == 0 else None
        v = values[idx]
        bound = cap if idx and values[idx - 1] == v else m + 1
        key = (mask, tuple(values[idx:]), bound)
        if key in failed:
            return None
        for sub_mask, top in subsets(mask, v, bound):
            rest = rec(mask & ~sub_mask, idx + 1, top)
            if rest is not None:
                return [sub_mask] + rest
        failed.add(key)
        return None

    full = (1 << (m + 1)) - 2
    masks = rec(full, 0, m + 1)
    if masks is None:
        return None
    out: dict[int, list[int]] = {}
    for (v, tag), sub_mask in zip(desc, masks):
        out[tag] = [x for x in range(1, m + 1) if sub_mask >> x & 1]
    return out


# ---------------------------------------------------------------------------
# Driver
# ---------------------------------------------------------------------------

def meets_algorithmic_preconditions(m: int, sorted_targets: Sequence[int],
                                    cfg: EngineConfig) -> bool:
    return all(
        v >= min(cfg.sep_linear * i, cfg.sep_flat * (m + 1))
        for i, v in enumerate(sorted_targets, start=1)
    )


def separate(inst: SeparationInstance, cfg: EngineConfig = DESK
             ) -> SeparationResult:
    """Partition [m] into parts with the requested sums.

    Uses the pair-system route when the targets meet the size thresholds,
    and the exact search for m up to the fallback cap; parts come back in
    the input target order.
    """
    m = inst.m
    total = m * (m + 1) // 2
    if sum(inst.targets) != total:
        raise ValidationError(
            f"targets sum to {sum(inst.targets)}, want m(m+1)/2 = {total}")
    tagged = sorted(((v, i) for i, v in enumerate(inst.targets)),
                    key=lambda t: (t[0], t[1]))
    svals = [v for v, _ in tagged]
    if meets_algorithmic_preconditions(m, svals, cfg):
        parts = _solve_paper(m, tagged)
        out = tuple(tuple(sorted(parts[i])) for i in range(len(inst.targets)))
        _check_sums(out, inst.targets)
        return SeparationResult(m, out, "paper")
    if m <= cfg.sep_fallback_m:
        found = _exact_separate(m, tagged)
        if found is None:
            raise InfeasibleError(f"[{m}] does not separate {inst.targets}")
        out = tuple(tuple(sorted(found[i])) for i in range(len(inst.targets)))
        _check_sums(out, inst.targets)
        return SeparationResult(m, out, "fallback")
    raise UnsupportedInstanceError(
        f"m={m} exceeds the fallback cap and the size thresholds fail")


def _solve_paper(m: int, tagged: list[tuple[int, int]]) -> dict[int, list[int]]:
    if m % 2:
        top_v, top_tag = tagged[-1]
        reduced = sorted(tagged[:-1] + [(top_v - m, top_tag)],
                         key=lambda t: (t[0], t[1]))
        parts = _solve_even(m - 1, reduced)
        parts[top_tag].append(m)
        return parts
    return _solve_even(m, tagged)


def _solve_even(m: int, tagged: list[tuple[int, int]]) -> dict[int, list[int]]:
    k = len(tagged)
    if k > m // 16:
        raise PreconditionError(f"k={k} > m/16={m // 16}")
    parts: dict[int, list[int]] = {tag: [] for _, tag in tagged}
    _not_too_large(m, tagged, set(range(1, m // 2 + 1)), 1, k, parts)
    return parts
