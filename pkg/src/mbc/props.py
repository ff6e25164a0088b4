"""Coalition and game predicates driven by the collection database.

Everything here reduces to weighted-sum tests over the minimal balanced
collections of the player set: core nonemptiness, exactness, effectiveness,
strict vital-exactness, feasibility of collections, extendability via
reduced games.  Since the database does not depend on the game, it is built
once and scanned with per-game indexes; derived games only ever move one
value (the complement of the studied coalition), so the index adjusts sums
incrementally instead of rescanning.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations

from . import polytope
from .generate import MbcDatabase, peleg
from .model import Game, complement, full_mask, members
from .polytope import LinearSystem, enumerate_vertices


class UnbalancedGameError(ValueError):
    """Raised when an operation requiring a nonempty core meets a game
    without one."""


# ---------------------------------------------------------------------------
# derived games


@dataclass(frozen=True)
class DerivedGame:
    """A game that differs from its base only on an explicit override set."""

    base: Game
    overrides: dict  # mask -> Fraction

    @property
    def n(self) -> int:
        return self.base.n

    def value(self, mask: int) -> Fraction:
        if mask in self.overrides:
            return self.overrides[mask]
        return self.base.value(mask)

    def grand_value(self) -> Fraction:
        return self.value(full_mask(self.n))

    def to_game(self) -> Game:
        values = {
            mask: self.value(mask)
            for mask in range(1, full_mask(self.n) + 1)
            if self.value(mask) != 0
        }
        return Game(self.n, values)


def derived_vS(game: Game, S: int) -> DerivedGame:
    """The game differing from `game` only at S^c, where it takes v(N)-v(S)."""
    if S == 0:
        raise ValueError("empty coalition")
    comp = complement(S, game.n)
    if comp == 0:
        return DerivedGame(game, {})
    return DerivedGame(game, {comp: game.grand_value() - game.value(S)})


def derived_vSS(game: Game, collection) -> DerivedGame:
    """v^S applied for every S of a collection; the overrides win over any
    base values carried by the complements."""
    overrides = {}
    for S in collection:
        if S == 0:
            raise ValueError("empty coalition")
        comp = complement(S, game.n)
        if comp:
            overrides[comp] = game.grand_value() - game.value(S)
    return DerivedGame(game, overrides)


# ---------------------------------------------------------------------------
# balancedness index


class BalancedIndex:
    """Per-(game, database) sums Σ λ_S v(S), with a per-coalition index so
    that games differing from the base at a single coalition are evaluated
    by adjusting only the affected collections."""

    def __init__(self, game: Game, db: MbcDatabase):
        if game.n != db.n:
            raise ValueError(f"game has n={game.n}, database has n={db.n}")
        self.game = game
        self.db = db
        self.grand = game.grand_value()
        sums = []
        per: dict[int, list[tuple[int, Fraction]]] = {}
        value = game.value
        for idx, wc in enumerate(db.collections):
            total = Fraction(0)
            for mask, w in wc.items():
                v = value(mask)
                if v:
                    total += w * v
                per.setdefault(mask, []).append((idx, w))
            sums.append(total)
        self.sums = sums
        self.per = per
        self.base_tight = [i for i, s in enumerate(sums) if s == self.grand]
        self.balanced = all(s <= self.grand for s in sums)

    def require_balanced(self):
        if not self.balanced:
            raise UnbalancedGameError("the game has an empty core")

    def tight_with_single_override(self, mask: int, new_value: Fraction):
        """Indices of collections whose sum equals v(N) for the game with
        v(mask) replaced by new_value, assuming the base game is balanced."""
        delta = new_value - self.game.value(mask)
        out = []
        if delta == 0:
            return list(self.base_tight)
        affected = self.per.get(mask, ())
        affected_ids = {i for i, _ in affected}
        out.extend(i for i in self.base_tight if i not in affected_ids)
        for i, w in affected:
            if self.sums[i] + w * delta == self.grand:
                out.append(i)
        out.sort()
        return out

    def balanced_with_single_override(self, mask: int, new_value: Fraction) -> bool:
        self.require_balanced()
        delta = new_value - self.game.value(mask)
        if delta <= 0:
            return True
        for i, w in self.per.get(mask, ()):
            if self.sums[i] + w * delta > self.grand:
                return False
        return True


def is_balanced_game(game, db: MbcDatabase) -> bool:
    """Bondareva-Shapley: the core is nonempty iff no minimal balanced
    collection pushes the weighted value sum above v(N).  Stops at the first
    violation."""
    return balancedness_witness(game, db) is None


def balancedness_witness(game, db: MbcDatabase):
    """The first collection violating the core-nonemptiness inequality, or
    None when the game is balanced."""
    grand = game.grand_value()
    value = game.value
    for wc in db.collections:
        total = Fraction(0)
        for mask, w in wc.items():
            v = value(mask)
            if v:
                total += w * v
        if total > grand:
            return wc
    return None


def is_exact(S: int, game: Game, index: BalancedIndex) -> bool:
    """S is exact iff the derived game v^S keeps a nonempty core."""
    if S == 0:
        raise ValueError("empty coalition")
    index.require_balanced()
    comp = complement(S, game.n)
    if comp == 0:
        return True  # N is exact: any core element is efficient
    return index.balanced_with_single_override(
        comp, game.grand_value() - game.value(S)
    )


def effective_set(game: Game, db: MbcDatabase, index: BalancedIndex | None = None):
    """Coalitions tight at every core element: the union of the minimal
    balanced collections whose weighted sum meets v(N) exactly."""
    if index is None:
        index = BalancedIndex(game, db)
    index.require_balanced()
    out: set[int] = set()
    for i in index.base_tight:
        out.update(db.collections[i].coalitions)
    return frozenset(out)


def is_strictly_vital_exact(S: int, game: Game, index: BalancedIndex) -> bool:
    """S admits a core element tight on S and strictly slack on every proper
    nonempty subset of S.  Checked through the effective set of v^S: no tight
    collection of v^S may contain a proper subset of S (S itself excluded)."""
    if S == 0:
        raise ValueError("empty coalition")
    index.require_balanced()
    n = index.game.n
    comp = complement(S, n)
    if not is_exact(S, game, index):
        return False
    if comp == 0:
        tight = index.base_tight
    else:
        tight = index.tight_with_single_override(
            comp, game.grand_value() - game.value(S)
        )
    for i in tight:
        for T in index.db.collections[i].coalitions:
            if T != S and T & ~S == 0:
                return False
    return True


def sve_family(game: Game, db: MbcDatabase, index: BalancedIndex | None = None):
    """The strictly vital-exact proper coalitions, ascending by mask.  This
    is the core-describing family the stability pipeline works over."""
    if index is None:
        index = BalancedIndex(game, db)
    return tuple(
        S
        for S in range(1, full_mask(game.n))
        if is_strictly_vital_exact(S, game, index)
    )


def exact_coalitions(game: Game, db: MbcDatabase, index: BalancedIndex | None = None):
    if index is None:
        index = BalancedIndex(game, db)
    return tuple(
        S for S in range(1, full_mask(game.n) + 1) if is_exact(S, game, index)
    )


# ---------------------------------------------------------------------------
# reduced games and extendability


def reduced_game(game: Game, keep: int, fixed: dict[int, Fraction]) -> Game:
    """Davis-Maschler reduced game on the players of `keep`, with the payoff
    of every outside player pinned by `fixed`.  Players are relabelled
    1..|keep| in ascending order."""
    if keep == 0:
        raise ValueError("empty coalition")
    n = game.n
    outside = complement(keep, n)
    if set(fixed) != set(members(outside)):
        raise ValueError("fixed payoffs must cover exactly the outside players")
    keep_players = members(keep)
    relabel = {p: i for i, p in enumerate(keep_players)}

    # z(Q) for all submasks of the outside set, in increasing mask order
    zsum: dict[int, Fraction] = {0: Fraction(0)}
    q = 0
    while True:
        if q:
            low = q & -q
            zsum[q] = zsum[q ^ low] + fixed[low.bit_length()]
        q = (q - outside) & outside
        if q == 0:
            break

    m = len(keep_players)
    values: dict[int, Fraction] = {}
    grand = game.grand_value()
    total_fixed = zsum[outside]

    t = 0
    while True:
        t = (t - keep) & keep
        if t == 0:
            break
        new_mask = 0
        tm = t
        while tm:
            low = tm & -tm
            new_mask |= 1 << relabel[low.bit_length()]
            tm ^= low
        if t == keep:
            val = grand - total_fixed
        else:
            best = None
            q = 0
            while True:
                cand = game.value(t | q) - zsum[q]
                if best is None or cand > best:
                    best = cand
                q = (q - outside) & outside
                if q == 0:
                    break
            val = best
        if val != 0:
            values[new_mask] = val
    return Game(m, values)


@lru_cache(maxsize=None)
def _small_db(m: int) -> MbcDatabase:
    return peleg(m)


def is_extendable(S: int, game: Game, dim_cap: int = polytope.DEFAULT_DIM_CAP) -> bool:
    """Every subgame-core allocation on S extends to a full core element iff
    every vertex of C(S,v) induces a balanced reduced game on S^c.  An empty
    subgame core extends vacuously.

    In the balancedness test every coalition of S^c carries its recruitment
    value max over Q of v(T u Q) - x(Q), S^c itself included, and the sums
    compare against the fixed level v(N) - x(S); using the plain reduced-game
    value of S^c on both sides would make its collection vacuous and lose the
    constraint the extension must respect.
    """
    if S == 0:
        raise ValueError("empty coalition")
    n = game.n
    if S == full_mask(n):
        return True
    vertices = enumerate_vertices(LinearSystem.subgame_core(game, S), dim_cap)
    if not vertices:
        return True
    outside = complement(S, n)
    m = len(members(outside))
    db_small = _small_db(m)
    keep_players = members(S)
    for vertex in vertices:
        fixed = {p: vertex[i] for i, p in enumerate(keep_players)}
        level = game.grand_value() - sum(fixed.values())
        reduced = reduced_game(game, outside, fixed)
        top = _recruitment_value(game, outside, S, fixed)
        values = reduced.with_value(full_mask(m), top)
        for wc in db_small.collections:
            total = Fraction(0)
            for mask, w in wc.items():
                v = values.value(mask)
                if v:
                    total += w * v
            if total > level:
                return False
    return True


def _recruitment_value(game: Game, T: int, inside: int, fixed: dict) -> Fraction:
    """max over Q inside of v(T u Q) - x(Q) for the pinned payoffs."""
    best = None
    q = 0
    while True:
        cost = sum(
            (fixed[p] for p in members(q)), Fraction(0)
        )
        candidate = game.value(T | q) - cost
        if best is None or candidate > best:
            best = candidate
        q = (q - inside) & inside
        if q == 0:
            break
    return best


# ---------------------------------------------------------------------------
# core-describing families


def is_core_describing(family, game: Game, dim_cap: int = polytope.DEFAULT_DIM_CAP) -> bool:
    """True iff the family's constraints alone already cut out the core:
    every missing coalition's constraint is implied."""
    family = set(family)
    n = game.n
    singles = all((1 << i) in family for i in range(n))
    system = LinearSystem.family_polytope(game, sorted(family))
    if not singles and _family_unbounded(system):
        raise polytope.UnboundedPolytopeError(
            "family polytope is unbounded; singletons are missing"
        )
    vertices = enumerate_vertices(system, dim_cap)
    if not vertices:
        # the family polytope contains the core, which is nonempty for the
        # intended (balanced) callers, so this means an empty core
        return False
    for T in range(1, full_mask(n)):
        if T in family:
            continue
        indicator = [(T >> i) & 1 for i in range(n)]
        lowest = min(
            sum(x for x, bit in zip(vertex, indicator) if bit)
            for vertex in vertices
        )
        if lowest < game.value(T):
            return False
    return True


def _family_unbounded(system: LinearSystem) -> bool:
    hull = polytope._solve_affine(system.eqs, system.n_vars)
    if hull is None:
        return False
    x0, basis = hull
    rows = []
    for coeffs, _ in system.ineqs:
        rows.append(
            (tuple(sum(c * w for c, w in zip(coeffs, vec)) for vec in basis), Fraction(0), False)
        )
    d = len(basis)
    for i in range(d):
        unit = tuple(Fraction(1) if j == i else Fraction(0) for j in range(d))
        for direction in (unit, tuple(-u for u in unit)):
            probe = rows + [(direction, Fraction(1), False)]
            if polytope._fm_feasible(probe, d):
                return True
    return False


# ---------------------------------------------------------------------------
# feasible collections


@dataclass
class FeasibleCollectionReport:
    collection: tuple[int, ...]
    feasible: bool
    blocking: bool
    has_min_extendable: bool


class FeasibilityOracle:
    """Feasibility of subcollections of a fixed core-describing family.

    A collection of strict violations is feasible iff no minimal balanced
    collection drawn from (family minus the collection) plus the violated
    complements pushes the adjusted weighted sum to v(N) (or beyond).  Only
    database entries living inside family-union-complements can ever matter,
    so they are extracted once and annotated with the family-index bitmasks
    that decide their eligibility per query.
    """

    def __init__(self, game: Game, db: MbcDatabase, family):
        self.game = game
        self.db = db
        self.family = tuple(sorted(family))
        self.n = game.n
        self.grand = game.grand_value()
        self.findex = {mask: i for i, mask in enumerate(self.family)}
        universe = set(self.family) | {
            complement(S, self.n) for S in self.family
        }
        universe.discard(0)
        self.entries = []
        for wc in db.collections:
            if not wc.masks() <= universe:
                continue
            need = 0       # family bits that must be inside the queried collection
            pure = 0       # family bits that must stay outside it
            duals = []     # members present in the family together with their complement
            terms = []     # (weight, delta, trigger_bit) per member
            ok = True
            for T, w in wc.items():
                fbit = self.findex.get(T)
                comp = complement(T, self.n)
                cbit = self.findex.get(comp)
                if fbit is None and cbit is None:
                    ok = False
                    break
                fmask = 0 if fbit is None else 1 << fbit
                cmask = 0 if cbit is None else 1 << cbit
                if fmask and cmask:
                    duals.append((fmask, cmask))
                elif fmask:
                    pure |= fmask
                else:
                    need |= cmask
                delta = (self.grand - game.value(comp)) - game.value(T)
                terms.append((w, delta, cmask))
            if not ok:
                continue
            base = sum((w * game.value(T) for T, w in wc.items()), Fraction(0))
            self.entries.append((need, pure, tuple(duals), base, tuple(terms), wc))

    def collection_mask(self, masks) -> int:
        bits = 0
        for S in masks:
            if S not in self.findex:
                raise ValueError("collection must be drawn from the family")
            bits |= 1 << self.findex[S]
        return bits

    def feasible(self, masks) -> bool:
        return self.feasible_by_mask(self.collection_mask(masks))

    def feasible_by_mask(self, smask: int) -> bool:
        grand = self.grand
        for need, pure, duals, base, terms, _ in self.entries:
            if need & ~smask or pure & smask:
                continue
            if duals and any(
                fmask & smask and not (cmask & smask) for fmask, cmask in duals
            ):
                continue
            total = base
            touches = False
            for w, delta, cmask in terms:
                if cmask & smask:
                    touches = True
                    if delta:
                        total += w * delta
            if total > grand or (touches and total == grand):
                return False
        return True

    def witness(self, masks):
        """The first database collection defeating feasibility, or None."""
        smask = self.collection_mask(masks)
        for need, pure, duals, base, terms, wc in self.entries:
            if need & ~smask or pure & smask:
                continue
            if duals and any(
                fmask & smask and not (cmask & smask) for fmask, cmask in duals
            ):
                continue
            total = base
            touches = False
            for w, delta, cmask in terms:
                if cmask & smask:
                    touches = True
                    if delta:
                        total += w * delta
            if total > self.grand or (touches and total == self.grand):
                return wc
        return None


def is_feasible(collection, family, game: Game, db: MbcDatabase,
                oracle: FeasibilityOracle | None = None) -> bool:
    """Is the region where exactly these family constraints are violated
    nonempty?  The empty collection is feasible precisely for balanced games
    (its region is the core)."""
    family_set = set(family)
    if any(S not in family_set for S in collection):
        raise ValueError("collection must be a subset of the family")
    if oracle is None:
        oracle = FeasibilityOracle(game, db, family)
    return oracle.feasible(collection)


def is_blocking(collection, n: int) -> bool:
    return len(collection) == 2 and (collection[0] | collection[1]) == full_mask(n)


def minimal_members(collection):
    """Members with no proper subset inside the collection."""
    out = []
    for S in collection:
        if not any(T != S and T & ~S == 0 for T in collection):
            out.append(S)
    return out


def feasible_collections(oracle: FeasibilityOracle):
    """All feasible nonempty subcollections of the oracle's family, by
    increasing size and lexicographic member order."""
    for size in range(1, len(oracle.family) + 1):
        for combo in combinations(oracle.family, size):
            if oracle.feasible(combo):
                yield combo


def feasibility_survey(game: Game, db: MbcDatabase, family,
                       extendable_cache: dict | None = None):
    """Feasible collections with blocking and minimal-extendable-member
    annotations (the analyze payload)."""
    oracle = FeasibilityOracle(game, db, family)
    if extendable_cache is None:
        extendable_cache = {}
    reports = []
    for combo in feasible_collections(oracle):
        has_ext = False
        for S in minimal_members(combo):
            if S not in extendable_cache:
                extendable_cache[S] = is_extendable(S, game)
            if extendable_cache[S]:
                has_ext = True
                break
        reports.append(
            FeasibleCollectionReport(
                collection=combo,
                feasible=True,
                blocking=is_blocking(combo, game.n),
                has_min_extendable=has_ext,
            )
        )
    return reports
