"""Core stability decided through nested balancedness.

The decision procedure discretizes the preimputation space into regions
(feasible collections over the strictly-vital-exact family), then for each
surviving region checks a second-level balancedness condition over a finite
vector set Omega built from admissible collection systems.  Cheap necessary
and sufficient conditions run first: game balancedness, exactness of the
singletons, the family being core-describing, blocking pairs, and the
weak-extendability sufficient condition.

The second level generalizes balanced collections to balanced sets: finite
sets of nonnegative vectors whose positive combinations reach the all-ones
vector.  Minimal balanced subsets of Omega are enumerated by a depth-first
search over linearly independent subsets, pruning above any subset that
already spans the all-ones vector (no strict superset can be minimal).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from . import linalg, props
from .generate import MbcDatabase
from .model import (
    Game,
    WeightedCollection,
    coalition_key,
    complement,
    format_value,
    members,
)

STABLE = "Stable"
NOT_STABLE = "NotStable"
UNKNOWN = "Unknown"


@dataclass
class StabilityCaps:
    """Resource limits for the nested stage.  Exceeding them yields an
    Unknown verdict rather than silent truncation."""

    max_systems: int | None = 20_000
    time_limit: float | None = 600.0
    dim_cap: int = 8


@dataclass
class StabilityReport:
    verdict: str
    stage: str
    witness: dict | None
    diagnostics: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    def to_payload(self, with_timings: bool = False) -> dict:
        payload = {
            "verdict": self.verdict,
            "stage": self.stage,
            "witness": self.witness,
            "diagnostics": self.diagnostics,
        }
        if with_timings:
            payload["timings"] = {k: round(v, 6) for k, v in self.timings.items()}
        return payload


def _char_vector(mask: int, n: int) -> tuple[Fraction, ...]:
    return tuple(Fraction((mask >> i) & 1) for i in range(n))


def _singletons_of(S: int) -> frozenset[int]:
    return frozenset(1 << (p - 1) for p in members(S))


def _render_collection(wc: WeightedCollection) -> dict:
    return {
        "coalitions": [coalition_key(m) for m in wc.coalitions],
        "weights": [format_value(w) for w in wc.weights],
    }


def _render_masks(masks) -> list[str]:
    return [coalition_key(m) for m in masks]


# ---------------------------------------------------------------------------
# association and admissibility


def associated_mbcs(S: int, family, db: MbcDatabase) -> list[WeightedCollection]:
    """Collections associated with S: they contain a singleton of S and live
    inside {singletons of S} + {S^c} + {family members not inside S}."""
    return associated_collections(S, db.n, family, db.collections)


def associated_collections(S: int, n: int, family, pool) -> list[WeightedCollection]:
    singles = _singletons_of(S)
    comp = complement(S, n)
    allowed = set(singles)
    allowed.add(comp)
    allowed.update(T for T in family if T & ~S)
    allowed.discard(0)
    out = []
    for wc in pool:
        has_single = False
        ok = True
        for T in wc.coalitions:
            if T not in allowed:
                ok = False
                break
            if T in singles:
                has_single = True
        if ok and has_single:
            out.append(wc)
    return out


def admissible_collections(S: int, collection, n: int, family, pool):
    """Associated collections that are admissible for the feasible collection:
    after dropping S's singletons, they either meet the collection or avoid
    its complements entirely."""
    s_set = set(collection)
    comp_set = {complement(T, n) for T in collection}
    singles = _singletons_of(S)
    out = []
    for wc in associated_collections(S, n, family, pool):
        star = [T for T in wc.coalitions if T not in singles]
        if any(T in s_set for T in star) or not any(T in comp_set for T in star):
            out.append(wc)
    return out


def admissible_systems(collection, family, db: MbcDatabase, pool=None):
    """Lazily yields every admissible system: one admissible collection per
    member, in lexicographic product order over the per-member lists."""
    n = db.n
    if pool is None:
        pool = association_pool(db, family, n)
    lists = [
        admissible_collections(S, collection, n, family, pool) for S in collection
    ]
    for combo in product(*lists):
        yield dict(zip(collection, combo))


def association_pool(db: MbcDatabase, family, n: int) -> list[WeightedCollection]:
    """Database entries that can ever be associated with a member of the
    family: all members must be singletons, family members, or complements
    of family members."""
    universe = {1 << i for i in range(n)}
    universe.update(family)
    universe.update(complement(T, n) for T in family)
    universe.discard(0)
    return [wc for wc in db.collections if wc.masks() <= universe]


# ---------------------------------------------------------------------------
# Omega and the a-values


@dataclass
class OmegaSet:
    """The vector set for the second-level balancedness test, with the
    provenance of every vector (a vector can be generated several times)."""

    omega_a: frozenset
    omega_b: frozenset
    omega_c: frozenset
    provenance: dict

    def vectors(self) -> tuple:
        return tuple(sorted(self.omega_a | self.omega_b | self.omega_c))


def z_vector(S: int, wc: WeightedCollection, n: int) -> tuple[Fraction, ...]:
    """The singleton-weight pattern of an associated collection: coordinate
    j carries the weight of {j} when j is in S and {j} is a member, else 0."""
    coords = [Fraction(0)] * n
    for mask, w in wc.items():
        if mask & S and mask.bit_count() == 1:
            coords[mask.bit_length() - 1] = w
    return tuple(coords)


def c_value(S: int, wc: WeightedCollection, game: Game) -> Fraction:
    """v(N) minus the non-singleton part of the association inequality,
    evaluated on the derived game v^S."""
    derived = props.derived_vS(game, S)
    singles = _singletons_of(S)
    total = Fraction(0)
    for T, w in wc.items():
        if T not in singles:
            v = derived.value(T)
            if v:
                total += w * v
    return game.grand_value() - total


def build_omega(collection, system: dict, family, n: int) -> OmegaSet:
    """Omega for one admissible system: complements of the collection,
    family members outside it, and the singleton patterns z^S."""
    provenance: dict = {}
    omega_a = set()
    for S in collection:
        vec = _char_vector(complement(S, n), n)
        omega_a.add(vec)
        provenance.setdefault(vec, []).append(("complement", S))
    omega_b = set()
    s_set = set(collection)
    for T in family:
        if T in s_set:
            continue
        vec = _char_vector(T, n)
        omega_b.add(vec)
        provenance.setdefault(vec, []).append(("family", T))
    omega_c = set()
    for S in collection:
        vec = z_vector(S, system[S], n)
        omega_c.add(vec)
        provenance.setdefault(vec, []).append(("pattern", S))
    return OmegaSet(frozenset(omega_a), frozenset(omega_b), frozenset(omega_c), provenance)


def a_values(omega: OmegaSet, collection, system: dict, game: Game) -> dict:
    """a_z = max over the provenance entries of z: v(N)-v(S) for complements,
    v(T) for family vectors, and the association bound for patterns."""
    grand = game.grand_value()
    table: dict = {}
    for vec, sources in omega.provenance.items():
        best = None
        for kind, source in sources:
            if kind == "complement":
                val = grand - game.value(source)
            elif kind == "family":
                val = game.value(source)
            else:
                val = c_value(source, system[source], game)
            if best is None or val > best:
                best = val
        table[vec] = best
    return table


# ---------------------------------------------------------------------------
# minimal balanced sets


def minimal_balanced_sets(vectors, n: int):
    """All minimal balanced subsets of a finite vector set.

    Returns (indices, weights) pairs, indices referring to the input order.
    Depth-first growth of linearly independent subsets; as soon as a subset
    spans the all-ones vector it is tested and the branch is cut, because a
    strict superset would force zero weights and cannot be minimal.
    """
    vectors = [tuple(Fraction(x) for x in vec) for vec in vectors]
    for vec in vectors:
        if len(vec) != n:
            raise ValueError("vector dimension mismatch")
        if all(x == 0 for x in vec):
            raise ValueError("zero vector in a balanced-set universe")
        if any(x < 0 for x in vec):
            raise ValueError("balanced-set vectors must be nonnegative")
    m = len(vectors)
    results = []
    ones = [Fraction(1)] * n

    def reduce(vec, basis):
        v = list(vec)
        for piv, row in basis:
            x = v[piv]
            if x:
                f = x / row[piv]
                for j in range(n):
                    if row[j]:
                        v[j] -= f * row[j]
        return v

    def dfs(start, chosen, basis, target):
        if all(x == 0 for x in target):
            cols = [[vectors[j][i] for j in chosen] for i in range(n)]
            status, weights = linalg.solve_unique(cols, ones)
            if status == linalg.UNIQUE and all(w > 0 for w in weights):
                results.append((tuple(chosen), weights))
            return
        if len(chosen) == n:
            return
        for j in range(start, m):
            residual = reduce(vectors[j], basis)
            piv = next((i for i, x in enumerate(residual) if x), None)
            if piv is None:
                continue
            x = target[piv]
            if x:
                f = x / residual[piv]
                new_target = [
                    t - f * r if r else t for t, r in zip(target, residual)
                ]
            else:
                new_target = target
            chosen.append(j)
            basis.append((piv, residual))
            dfs(j + 1, chosen, basis, new_target)
            basis.pop()
            chosen.pop()

    dfs(0, [], [], list(ones))
    return results


def is_minimal_balanced_set(vectors, n: int) -> bool:
    """Direct test: the column system has a unique, strictly positive
    solution against the all-ones vector."""
    vectors = list(vectors)
    cols = [[Fraction(vec[i]) for vec in vectors] for i in range(n)]
    status, weights = linalg.solve_unique(cols, [Fraction(1)] * n)
    return status == linalg.UNIQUE and all(w > 0 for w in weights)


def mbs_candidate_filter(wc: WeightedCollection, s_prime: int, z) -> bool:
    """Necessary condition for replacing the column of s_prime by z to yield
    a minimal balanced set: z stays independent of the remaining columns and
    lies in the column span of the full collection."""
    z = tuple(Fraction(x) for x in z)
    n = len(z)
    if s_prime not in wc.coalitions:
        raise ValueError("s_prime must be a member of the collection")
    support = 0
    for i, x in enumerate(z):
        if x < 0:
            raise ValueError("z must be nonnegative")
        if x > 0:
            support |= 1 << i
    if support != s_prime:
        raise ValueError("z must be supported exactly on s_prime")
    others = [m for m in wc.coalitions if m != s_prime]
    if others:
        matrix = linalg.RatMatrix.from_collection(others, n)
        independent = any(
            sum(a * b for a, b in zip(z, y)) != 0
            for y in linalg.left_null_space(matrix)
        )
    else:
        independent = True
    full = linalg.RatMatrix.from_collection(wc.coalitions, n)
    in_image = linalg.in_column_span(full, z)
    return independent and in_image


# ---------------------------------------------------------------------------
# the nested condition


def _nested_for_system(vectors, a_table, omega_a_sources, omega_c_vecs, game,
                       mbs_cache, diagnostics) -> bool:
    """The two existential clauses of the stability theorem for one system:
    some minimal balanced subset outside B0 with weighted a-value above v(N),
    or some subset inside B0 reaching it."""
    grand = game.grand_value()
    key = tuple(vectors)
    mbs = mbs_cache.get(key)
    if mbs is None:
        mbs = minimal_balanced_sets(vectors, game.n)
        mbs_cache[key] = mbs
    satisfied = False
    for indices, weights in mbs:
        psi = Fraction(0)
        for idx, w in zip(indices, weights):
            psi += w * a_table[vectors[idx]]
        in_b0 = False
        for idx in indices:
            vec = vectors[idx]
            sources = omega_a_sources.get(vec)
            if sources and any(
                a_table[vec] == grand - game.value(S) for S in sources
            ):
                in_b0 = True
                break
        shortcut_b0 = any(
            vectors[idx] in omega_a_sources and vectors[idx] not in omega_c_vecs
            for idx in indices
        )
        if shortcut_b0 != in_b0:
            diagnostics["b0_definition_disagreements"] = (
                diagnostics.get("b0_definition_disagreements", 0) + 1
            )
        if in_b0:
            if psi >= grand:
                satisfied = True
                break
        elif psi > grand:
            satisfied = True
            break
    return satisfied


def nested_balancedness_ok(collection, family, db, game: Game,
                           caps: StabilityCaps | None = None,
                           pool=None, mbs_cache=None, diagnostics=None,
                           deadline=None):
    """Checks the stability theorem's condition for one feasible collection.

    Returns ("ok", None), ("fail", witness) with the first failing system in
    enumeration order, or ("capped", info) when resource caps were hit.
    Systems agreeing on every singleton pattern and association bound are
    checked once: the condition only depends on those.
    """
    if caps is None:
        caps = StabilityCaps()
    n = game.n
    if pool is None:
        pool = association_pool(db, family, n)
    if mbs_cache is None:
        mbs_cache = {}
    if diagnostics is None:
        diagnostics = {}

    choice_lists = []
    for S in collection:
        admissible = admissible_collections(S, collection, n, family, pool)
        seen = {}
        order = []
        for wc in admissible:
            z = z_vector(S, wc, n)
            c = c_value(S, wc, game)
            if (z, c) not in seen:
                seen[(z, c)] = wc
                order.append((z, c, wc))
        if not order:
            return "ok", None  # empty product: vacuously satisfied
        choice_lists.append(order)

    total = 1
    for order in choice_lists:
        total *= len(order)
    if caps.max_systems is not None and total > caps.max_systems:
        return "capped", {"reason": "system-cap", "systems": total}

    grand = game.grand_value()
    omega_a_sources: dict = {}
    base_table: dict = {}
    for S in collection:
        vec = _char_vector(complement(S, n), n)
        omega_a_sources.setdefault(vec, []).append(S)
        val = grand - game.value(S)
        if vec not in base_table or val > base_table[vec]:
            base_table[vec] = val
    s_set = set(collection)
    for T in family:
        if T in s_set:
            continue
        vec = _char_vector(T, n)
        val = game.value(T)
        if vec not in base_table or val > base_table[vec]:
            base_table[vec] = val

    checked = 0
    for combo in product(*choice_lists):
        if deadline is not None and checked % 32 == 0 and time.monotonic() > deadline:
            return "capped", {"reason": "time-cap", "systems": total}
        checked += 1
        a_table = dict(base_table)
        omega_c_vecs = set()
        for z, c, _ in combo:
            omega_c_vecs.add(z)
            if z not in a_table or c > a_table[z]:
                a_table[z] = c
        vectors = tuple(sorted(a_table))
        if not _nested_for_system(vectors, a_table, omega_a_sources,
                                  omega_c_vecs, game, mbs_cache, diagnostics):
            witness = {
                "collection": _render_masks(collection),
                "system": [
                    {
                        "coalition": coalition_key(S),
                        "collection": _render_collection(wc),
                    }
                    for S, (_, _, wc) in zip(collection, combo)
                ],
            }
            return "fail", witness
    return "ok", None


# ---------------------------------------------------------------------------
# the complete decision procedure


def is_core_stable(game: Game, db: MbcDatabase,
                   caps: StabilityCaps | None = None) -> StabilityReport:
    """Decide core stability, with every early exit of the staged procedure:
    balancedness, singleton exactness, the vital-exact family being
    core-describing, blocking pairs, weak extendability, then the nested
    balancedness condition region by region."""
    if caps is None:
        caps = StabilityCaps()
    timings: dict[str, float] = {}
    diagnostics: dict = {}
    t0 = time.monotonic()

    def mark(stage):
        nonlocal t0
        now = time.monotonic()
        timings[stage] = now - t0
        t0 = now

    violated = props.balancedness_witness(game, db)
    mark("balancedness")
    if violated is not None:
        return StabilityReport(
            NOT_STABLE, "balancedness",
            {"violated_collection": _render_collection(violated),
             "note": "empty core"},
            diagnostics, timings)

    index = props.BalancedIndex(game, db)
    for i in range(game.n):
        if not props.is_exact(1 << i, game, index):
            mark("singleton-exactness")
            return StabilityReport(
                NOT_STABLE, "singleton-exactness",
                {"non_exact_singleton": coalition_key(1 << i)},
                diagnostics, timings)
    mark("singleton-exactness")

    family = props.sve_family(game, db, index)
    diagnostics["vital_exact_count"] = len(family)
    mark("vital-exactness")

    try:
        describing = props.is_core_describing(family, game, caps.dim_cap)
    except props.polytope.DimensionCapError:
        mark("core-describing")
        return StabilityReport(
            UNKNOWN, "core-describing",
            {"reason": "dimension-cap"}, diagnostics, timings)
    mark("core-describing")
    if not describing:
        return StabilityReport(
            NOT_STABLE, "core-describing",
            {"family": _render_masks(family)},
            diagnostics, timings)

    oracle = props.FeasibilityOracle(game, db, family)
    feasible = list(props.feasible_collections(oracle))
    diagnostics["feasible_count"] = len(feasible)
    mark("feasibility")

    blocking = [c for c in feasible if props.is_blocking(c, game.n)]
    mark("blocking")
    if blocking:
        return StabilityReport(
            NOT_STABLE, "blocking",
            {"blocking_pair": _render_masks(blocking[0]),
             "all_blocking_pairs": [_render_masks(c) for c in blocking]},
            diagnostics, timings)

    extendable_cache: dict[int, bool] = {}

    def has_min_extendable(collection):
        for S in props.minimal_members(collection):
            if S not in extendable_cache:
                extendable_cache[S] = props.is_extendable(S, game, caps.dim_cap)
            if extendable_cache[S]:
                return True
        return False

    try:
        survivors = [c for c in feasible if not has_min_extendable(c)]
    except props.polytope.DimensionCapError:
        mark("weak-extendability")
        return StabilityReport(
            UNKNOWN, "weak-extendability",
            {"reason": "dimension-cap"}, diagnostics, timings)
    diagnostics["surviving_count"] = len(survivors)
    mark("weak-extendability")
    if not survivors:
        return StabilityReport(
            STABLE, "weak-extendability",
            {"note": "every feasible collection has a minimal extendable member"},
            diagnostics, timings)

    pool = association_pool(db, family, game.n)
    mbs_cache: dict = {}
    deadline = None
    if caps.time_limit is not None:
        deadline = time.monotonic() + caps.time_limit
    capped_info = None
    for collection in survivors:
        status, detail = nested_balancedness_ok(
            collection, family, db, game, caps,
            pool=pool, mbs_cache=mbs_cache, diagnostics=diagnostics,
            deadline=deadline)
        if status == "fail":
            mark("nested-balancedness")
            return StabilityReport(
                NOT_STABLE, "nested-balancedness", detail, diagnostics, timings)
        if status == "capped" and capped_info is None:
            capped_info = {"collection": _render_masks(collection), **detail}
        if deadline is not None and time.monotonic() > deadline:
            if capped_info is None:
                capped_info = {"collection": _render_masks(collection),
                               "reason": "time-cap"}
            break
    mark("nested-balancedness")
    if capped_info is not None:
        return StabilityReport(UNKNOWN, "nested-balancedness", capped_info,
                               diagnostics, timings)
    return StabilityReport(
        STABLE, "nested-balancedness",
        {"note": "every feasible collection satisfies the nested condition"},
        diagnostics, timings)
