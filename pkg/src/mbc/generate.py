"""Generation, storage and querying of minimal balanced collections.

The generator grows the player set one element at a time.  Given every
minimal balanced collection on 1..n-1, four construction rules produce the
collections on 1..n:

  case 1: pick members whose weights sum to exactly 1 and put the new player
          into each of them;
  case 2: pick members whose weights sum to s < 1, put the new player into
          them, and add the singleton {p} with weight 1-s;
  case 3: as case 2, but instead of {p} add S u {p} for some non-picked
          member S with weight above 1-s, splitting S's weight;
  case 4: take the union of two distinct collections whose combined
          characteristic matrix has rank k-1, and transfer the new player
          into the unique convex combination of the two weight systems that
          gives it total weight 1.

Every rule emits only minimal balanced collections and together they are
exhaustive, so after deduplication the output is the complete set.  The
inner loops work on integer weight numerators over a shared denominator;
fractions only materialize at the API boundary.
"""

from __future__ import annotations

import heapq
import os
import tempfile
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import gcd, lcm

from .model import PLAYER_CAP, WeightedCollection, full_mask
from . import linalg, polytope
from .linalg import _echelon

# Known counts of minimal balanced collections (used for CLI summaries only;
# tests recompute everything they assert).
KNOWN_COUNTS = {1: 1, 2: 2, 3: 6, 4: 42, 5: 1292, 6: 200214, 7: 132422036}

DEFAULT_PLAYER_LIMIT = 7

MINIMAL = "minimal"
BALANCED_NOT_MINIMAL = "balanced_not_minimal"
NOT_BALANCED = "not_balanced"

# internal record: (masks ascending, integer weight numerators, denominator)
Triple = tuple[tuple[int, ...], tuple[int, ...], int]


def _to_triple(wc: WeightedCollection) -> Triple:
    den = 1
    for w in wc.weights:
        den = lcm(den, w.denominator)
    nums = tuple(int(w * den) for w in wc.weights)
    return wc.coalitions, nums, den


def _to_collection(masks, nums, den) -> WeightedCollection:
    return WeightedCollection(tuple(masks), tuple(Fraction(x, den) for x in nums))


def _subset_sums(nums) -> list[int]:
    """sums[I] = sum of nums[i] over the set bits of I, for all I < 2^k."""
    sums = [0]
    for w in nums:
        sums += [s + w for s in sums]
    return sums


def _rank01(masks, n: int) -> int:
    """Rank over the rationals of the n-by-k matrix of characteristic columns."""
    rows = [[(m >> i) & 1 for m in masks] for i in range(n)]
    _, pivots = _echelon(rows)
    return len(pivots)


def _format_triple_line(masks, nums, den) -> str:
    parts = []
    for mask, num in zip(masks, nums):
        g = gcd(num, den)
        parts.append(f"{mask:x}:{num // g}/{den // g}")
    return " ".join(parts)


# ---------------------------------------------------------------------------
# the four construction rules, shared by the bulk generator and the public
# single-step helpers


def apply_case1(wc: WeightedCollection, picked, p: int) -> WeightedCollection:
    """Case 1: the picked members' weights sum to 1; the new player joins
    them and the weight system is unchanged.  `picked` holds 0-based member
    positions."""
    masks, nums, den = _to_triple(wc)
    picked = sorted(set(picked))
    if sum(nums[i] for i in picked) != den:
        raise ValueError("case 1 needs the picked weights to sum to exactly 1")
    p_bit = 1 << (p - 1)
    _require_new_player(masks, p_bit)
    entries = [
        ((m | p_bit) if i in picked else m, nums[i]) for i, m in enumerate(masks)
    ]
    entries.sort()
    return _to_collection([m for m, _ in entries], [x for _, x in entries], den)


def apply_case2(wc: WeightedCollection, picked, p: int) -> WeightedCollection:
    """Case 2: the picked weights sum to s < 1; the new player joins them and
    the singleton {p} enters with weight 1-s."""
    masks, nums, den = _to_triple(wc)
    picked = sorted(set(picked))
    s = sum(nums[i] for i in picked)
    if s >= den:
        raise ValueError("case 2 needs the picked weights to sum below 1")
    p_bit = 1 << (p - 1)
    _require_new_player(masks, p_bit)
    entries = [
        ((m | p_bit) if i in picked else m, nums[i]) for i, m in enumerate(masks)
    ]
    entries.append((p_bit, den - s))
    entries.sort()
    return _to_collection([m for m, _ in entries], [x for _, x in entries], den)


def apply_case3(wc: WeightedCollection, picked, split, p: int) -> WeightedCollection:
    """Case 3: besides moving the new player into the picked members, the
    non-picked member at position `split` is duplicated into S u {p} with
    weight 1-s, keeping S with the weight remainder."""
    masks, nums, den = _to_triple(wc)
    picked = sorted(set(picked))
    if split in picked:
        raise ValueError("the split member must not be picked")
    s = sum(nums[i] for i in picked)
    rem = den - s
    if not 0 < rem < nums[split]:
        raise ValueError("case 3 needs 1 > sum of picked weights > 1 - split weight")
    p_bit = 1 << (p - 1)
    _require_new_player(masks, p_bit)
    entries = [
        ((m | p_bit) if i in picked else m, nums[i])
        for i, m in enumerate(masks)
        if i != split
    ]
    entries.append((masks[split] | p_bit, rem))
    entries.append((masks[split], nums[split] - rem))
    entries.sort()
    return _to_collection([m for m, _ in entries], [x for _, x in entries], den)


def apply_case4(first: WeightedCollection, second: WeightedCollection, picked,
                p: int) -> WeightedCollection:
    """Case 4: the union of two distinct minimal balanced collections with
    characteristic rank one below its size; the new player joins the picked
    union members and the weights interpolate the two systems at the unique
    point giving the new player total weight 1.  `picked` indexes the sorted
    union."""
    masks_a, nums_a, den_a = _to_triple(first)
    masks_b, nums_b, den_b = _to_triple(second)
    union_masks = sorted(set(masks_a) | set(masks_b))
    k = len(union_masks)
    n_old = max(union_masks).bit_length()
    if first.coalitions == second.coalitions:
        raise ValueError("case 4 needs two distinct collections")
    if _rank01(union_masks, n_old) != k - 1:
        raise ValueError("case 4 needs characteristic rank exactly |union| - 1")
    L = lcm(den_a, den_b)
    pos_a = {m: i for i, m in enumerate(masks_a)}
    pos_b = {m: i for i, m in enumerate(masks_b)}
    mu = [nums_a[pos_a[m]] * (L // den_a) if m in pos_a else 0 for m in union_masks]
    nu = [nums_b[pos_b[m]] * (L // den_b) if m in pos_b else 0 for m in union_masks]
    picked = sorted(set(picked))
    a = L - sum(mu[i] for i in picked)
    b = sum(nu[i] for i in picked) - sum(mu[i] for i in picked)
    if b == 0 or not (0 < Fraction(a, b) < 1):
        raise ValueError("case 4 needs the interpolation parameter inside ]0,1[")
    p_bit = 1 << p - 1
    _require_new_player(union_masks, p_bit)
    entries = []
    for i, m in enumerate(union_masks):
        num = b * mu[i] + a * (nu[i] - mu[i])
        entries.append(((m | p_bit) if i in picked else m, num))
    den = L * b
    if den < 0:
        den = -den
        entries = [(m, -x) for m, x in entries]
    entries.sort()
    return _to_collection([m for m, _ in entries], [x for _, x in entries], den)


def _require_new_player(masks, p_bit: int) -> None:
    if any(m & p_bit for m in masks):
        raise ValueError("the new player already appears in the collection")


def _children_123(masks, nums, den, p_bit, emit):
    k = len(masks)
    sums = _subset_sums(nums)
    for I in range(1 << k):
        s = sums[I]
        if s > den:
            continue
        base = [
            ((m | p_bit) if (I >> i) & 1 else m, nums[i])
            for i, m in enumerate(masks)
        ]
        if s == den:
            emit(base, den)
            continue
        rem = den - s
        emit(base + [(p_bit, rem)], den)
        for d in range(k):
            if not (I >> d) & 1 and nums[d] > rem:
                child = [pair for i, pair in enumerate(base) if i != d]
                child.append((masks[d] | p_bit, rem))
                child.append((masks[d], nums[d] - rem))
                emit(child, den)


def _children_4(masks, mu, nu, L, p_bit, emit):
    """Case 4 for one merged pair: mu, nu are the two weight systems extended
    by zeros to the union, as integers over the common denominator L."""
    k = len(masks)
    smu = _subset_sums(mu)
    snu = _subset_sums(nu)
    for I in range(1, 1 << k):
        a = L - smu[I]
        b = snu[I] - smu[I]
        if b > 0:
            if not 0 < a < b:
                continue
        elif b < 0:
            if not b < a < 0:
                continue
        else:
            continue
        child = []
        for i, m in enumerate(masks):
            num = b * mu[i] + a * (nu[i] - mu[i])
            child.append(((m | p_bit) if (I >> i) & 1 else m, num))
        den = L * b
        if den < 0:
            den = -den
            child = [(m, -x) for m, x in child]
        emit(child, den)


def _add_player_raw(parents: list[Triple], n_old: int, allowed: set[int] | None,
                    sink=None) -> dict[tuple[int, ...], tuple[tuple[int, ...], int]]:
    """One induction step: all minimal balanced collections on n_old+1 players
    from those on n_old.  Returns a dict keyed by the coalition tuple (the
    weights of a minimal balanced collection are determined by it).  When
    `sink` is given, canonical lines are pushed there instead (streaming mode)
    and the returned dict stays empty.
    """
    p_bit = 1 << n_old
    out: dict[tuple[int, ...], tuple[tuple[int, ...], int]] = {}

    if sink is None:
        def emit(entries, den):
            entries.sort()
            masks = tuple(m for m, _ in entries)
            if masks in out:
                return
            if allowed is not None and not all(m in allowed for m in masks):
                return
            out[masks] = (tuple(x for _, x in entries), den)
    else:
        def emit(entries, den):
            entries.sort()
            if allowed is not None and not all(m in allowed for m, _ in entries):
                return
            sink(_format_triple_line([m for m, _ in entries],
                                     [x for _, x in entries], den))

    for masks, nums, den in parents:
        _children_123(masks, nums, den, p_bit, emit)

    # case 4 over unordered pairs; the two orderings of a pair generate the
    # same children, so one suffices
    n_parents = len(parents)
    cmasks = [0] * n_parents
    for idx, (masks, _, _) in enumerate(parents):
        cm = 0
        for m in masks:
            cm |= 1 << (m - 1)
        cmasks[idx] = cm
    pos = [{m: i for i, m in enumerate(masks)} for masks, _, _ in parents]
    size_limit = n_old + 1
    for ia in range(n_parents):
        ca = cmasks[ia]
        masks_a, nums_a, den_a = parents[ia]
        pos_a = pos[ia]
        for ib in range(ia + 1, n_parents):
            union = ca | cmasks[ib]
            k = union.bit_count()
            if k > size_limit:
                continue
            union_masks = []
            u = union
            while u:
                low = u & -u
                union_masks.append(low.bit_length())
                u ^= low
            if _rank01(union_masks, n_old) != k - 1:
                continue
            masks_b, nums_b, den_b = parents[ib]
            pos_b = pos[ib]
            L = lcm(den_a, den_b)
            fa = L // den_a
            fb = L // den_b
            mu = [nums_a[pos_a[m]] * fa if m in pos_a else 0 for m in union_masks]
            nu = [nums_b[pos_b[m]] * fb if m in pos_b else 0 for m in union_masks]
            _children_4(union_masks, mu, nu, L, p_bit, emit)
    return out


# ---------------------------------------------------------------------------
# database


@dataclass(frozen=True)
class MbcDatabase:
    """All minimal balanced collections for a fixed n, canonically sorted by
    coalition tuple and deduplicated; optionally generated under a set-system
    restriction (in which case only collections whose coalitions fit inside
    some set-system element are present)."""

    n: int
    collections: tuple[WeightedCollection, ...]
    restricted: bool = False

    def __len__(self) -> int:
        return len(self.collections)

    def __iter__(self):
        return iter(self.collections)

    def coalition_tuples(self) -> set[tuple[int, ...]]:
        return {wc.coalitions for wc in self.collections}

    def contains(self, masks) -> bool:
        key = tuple(sorted(masks))
        lo, hi = 0, len(self.collections)
        while lo < hi:
            mid = (lo + hi) // 2
            if self.collections[mid].coalitions < key:
                lo = mid + 1
            else:
                hi = mid
        return lo < len(self.collections) and self.collections[lo].coalitions == key

    def header(self) -> str:
        tail = " restricted" if self.restricted else ""
        return f"MBCDB 1 n={self.n} count={len(self.collections)}{tail}"

    def save(self, path) -> None:
        lines = sorted(wc.format_line() for wc in self.collections)
        with open(path, "w") as fh:
            fh.write(self.header() + "\n")
            for line in lines:
                fh.write(line + "\n")

    def dump(self, fh) -> None:
        fh.write(self.header() + "\n")
        for line in sorted(wc.format_line() for wc in self.collections):
            fh.write(line + "\n")

    @classmethod
    def load(cls, path) -> "MbcDatabase":
        with open(path) as fh:
            header = fh.readline().strip()
            fields = header.split()
            if len(fields) < 4 or fields[0] != "MBCDB" or fields[1] != "1":
                raise ValueError(f"not an MBCDB file: {header!r}")
            try:
                n = int(fields[2].removeprefix("n="))
                count = int(fields[3].removeprefix("count="))
            except ValueError as exc:
                raise ValueError(f"bad MBCDB header: {header!r}") from exc
            restricted = "restricted" in fields[4:]
            collections = []
            for line in fh:
                line = line.strip()
                if line:
                    collections.append(WeightedCollection.parse_line(line))
        if len(collections) != count:
            raise ValueError(
                f"MBCDB count mismatch: header says {count}, file has {len(collections)}"
            )
        collections.sort(key=lambda wc: wc.coalitions)
        return cls(n, tuple(collections), restricted)


def _allowed_masks(set_system, n: int) -> set[int]:
    top = full_mask(n)
    allowed: set[int] = set()
    for f in set_system:
        f &= top
        sub = f
        while sub:
            allowed.add(sub)
            sub = (sub - 1) & f
    return allowed


def _validate_set_system(set_system, n: int) -> tuple[int, ...]:
    masks = tuple(sorted(set(set_system)))
    if not masks:
        raise ValueError("empty set system")
    cover = 0
    for m in masks:
        if not 0 < m < (1 << n):
            raise ValueError(f"set-system element {m:#x} out of range for n={n}")
        cover |= m
    if cover != full_mask(n):
        raise ValueError("set system does not cover the player set")
    return masks


def peleg(n: int, set_system=None, player_limit: int = DEFAULT_PLAYER_LIMIT) -> MbcDatabase:
    """All minimal balanced collections on 1..n, by induction from n=1.

    With `set_system`, collections whose coalitions do not all fit inside
    some element of the system are discarded as soon as they appear.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if n > player_limit:
        raise ValueError(f"n={n} exceeds the configured limit {player_limit}")
    allowed = None
    restricted = False
    if set_system is not None:
        _validate_set_system(set_system, n)
        allowed = _allowed_masks(set_system, n)
        restricted = True

    parents: list[Triple] = [((1,), (1,), 1)]
    if allowed is not None:
        parents = [t for t in parents if all(m in allowed for m in t[0])]
    for i in range(1, n):
        result = _add_player_raw(parents, i, allowed)
        parents = [(masks, nums, den) for masks, (nums, den) in result.items()]
        parents.sort()
    collections = tuple(_to_collection(*t) for t in sorted(parents))
    return MbcDatabase(n, collections, restricted)


def add_new_player(db: MbcDatabase, p: int) -> MbcDatabase:
    """One induction step on an existing database; p must be the next player."""
    if 1 <= p <= db.n:
        raise ValueError(f"player {p} is already in the set")
    if p != db.n + 1:
        raise ValueError(f"players must stay contiguous; expected p={db.n + 1}")
    if p > PLAYER_CAP:
        raise ValueError(f"player cap {PLAYER_CAP} exceeded")
    parents = [_to_triple(wc) for wc in db.collections]
    result = _add_player_raw(parents, db.n, None)
    collections = tuple(
        _to_collection(masks, nums, den)
        for masks, (nums, den) in sorted(result.items())
    )
    return MbcDatabase(db.n + 1, collections, db.restricted)


def peleg_stream(n: int, out_path, set_system=None, shard_lines: int = 1_000_000,
                 tmp_dir=None, player_limit: int = DEFAULT_PLAYER_LIMIT) -> int:
    """Like `peleg`, but the final induction step streams to disk.

    Collections on n-1 players are generated in memory; the children are
    written to sorted shard files which are then merged with deduplication
    into the MBCDB file.  Returns the collection count.  This is the n=7
    path: the output does not fit comfortably in RAM as structured values.
    """
    if n < 2:
        raise ValueError("streaming generation needs n >= 2")
    base = peleg(n - 1, set_system=set_system, player_limit=player_limit)
    allowed = None
    if set_system is not None:
        allowed = _allowed_masks(set_system, n)
    parents = [_to_triple(wc) for wc in base.collections]

    shards: list[str] = []
    buffer: set[str] = set()

    def flush():
        if not buffer:
            return
        fd, path = tempfile.mkstemp(prefix="mbcshard", dir=tmp_dir)
        with os.fdopen(fd, "w") as fh:
            for line in sorted(buffer):
                fh.write(line + "\n")
        shards.append(path)
        buffer.clear()

    def sink(line: str):
        buffer.add(line)
        if len(buffer) >= shard_lines:
            flush()

    try:
        _add_player_raw(parents, n - 1, allowed, sink=sink)
        flush()
        count = 0
        body_fd, body_path = tempfile.mkstemp(prefix="mbcbody", dir=tmp_dir)
        try:
            files = [open(path) for path in shards]
            with os.fdopen(body_fd, "w") as body:
                previous = None
                for line in heapq.merge(*files):
                    if line != previous:
                        body.write(line)
                        count += 1
                        previous = line
            for fh in files:
                fh.close()
            tail = " restricted" if set_system is not None else ""
            with open(out_path, "w") as out:
                out.write(f"MBCDB 1 n={n} count={count}{tail}\n")
                with open(body_path) as body:
                    for line in body:
                        out.write(line)
        finally:
            os.unlink(body_path)
    finally:
        for path in shards:
            if os.path.exists(path):
                os.unlink(path)
    return count


# ---------------------------------------------------------------------------
# checks and conversions


def check_minimal_balanced(masks, n: int):
    """Classify a collection of coalitions.

    Returns (MINIMAL, weights) when the balancing weight system exists, is
    unique and strictly positive; (BALANCED_NOT_MINIMAL, None) when positive
    weight systems exist but are not unique; (NOT_BALANCED, None) otherwise.
    """
    masks = tuple(masks)
    if not masks:
        raise ValueError("empty collection")
    top = full_mask(n)
    for m in masks:
        if not 0 < m <= top:
            raise ValueError(f"coalition {m:#x} out of range for n={n}")
    if len(set(masks)) != len(masks):
        raise ValueError("duplicate coalitions")
    masks = tuple(sorted(masks))

    matrix = linalg.RatMatrix.from_collection(masks, n)
    status, solution = linalg.solve_unique(matrix, [1] * n)
    if status == linalg.UNIQUE:
        if all(x > 0 for x in solution):
            return MINIMAL, tuple(solution)
        return NOT_BALANCED, None
    if status == linalg.NO_SOLUTION:
        return NOT_BALANCED, None
    # solutions form an affine family: positive ones exist iff the vertices
    # of the weight polytope jointly cover every member
    vertices = polytope.weight_polytope_vertices(masks, n)
    covered = set()
    for support, _ in vertices:
        covered.update(support)
    if covered == set(masks):
        return BALANCED_NOT_MINIMAL, None
    return NOT_BALANCED, None


def is_minimal_balanced(wc: WeightedCollection, n: int) -> bool:
    status, weights = check_minimal_balanced(wc.coalitions, n)
    return status == MINIMAL and weights == wc.weights


def is_balanced_collection(masks, db: MbcDatabase) -> bool:
    """A collection is balanced iff it equals the union of the minimal
    balanced collections it contains."""
    target = frozenset(masks)
    if not target:
        return False
    covered: set[int] = set()
    for wc in db.collections:
        if covered >= target:
            break
        member_set = wc.masks()
        if member_set <= target:
            covered |= member_set
    return covered == target


def to_regular_hypergraph(wc: WeightedCollection) -> tuple[int, tuple[int, ...]]:
    """Depth and integer multiplicities of a minimal balanced collection seen
    as a regular hypergraph: the depth is the common per-vertex degree."""
    depth = 1
    for w in wc.weights:
        depth = lcm(depth, w.denominator)
    multiplicities = tuple(int(w * depth) for w in wc.weights)
    return depth, multiplicities


def brute_force_mbcs(n: int) -> list[WeightedCollection]:
    """Independent oracle: test every subcollection of 2^N of size <= n.

    Exponential in 2^n; intended for n <= 4 cross-checks.
    """
    all_masks = list(range(1, full_mask(n) + 1))
    found = []
    for size in range(1, n + 1):
        for combo in combinations(all_masks, size):
            status, weights = check_minimal_balanced(combo, n)
            if status == MINIMAL:
                found.append(WeightedCollection(combo, weights))
    found.sort(key=lambda wc: wc.coalitions)
    return found
