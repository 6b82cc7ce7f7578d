"""Buchberger Groebner bases over K and the decision procedures built on them.

Every geometric check in towercert ends up here: ideal membership, ideal
equality, unit-ideal detection, and radical membership through the
Rabinowitsch trick. Bases are computed on sympy ``PolyElement`` values with a
hand-written Buchberger loop (normal selection strategy, Gebauer-Moeller
criteria) and cached per monomial order on the ideal.
"""

import logging
import threading
from collections.abc import Iterable, Iterator
from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass

from sympy.polys.rings import PolyElement

from towercert.errors import BudgetExceeded, RingMismatch
from towercert.polyring import MonomialOrder, Poly, PolyRing, format_poly, move


logger = logging.getLogger(__name__)

DEFAULT_STEP_BUDGET = 1_000_000


# --- Step budget ---
class StepBudget:
    """Counts reduction steps; raises BudgetExceeded past the limit."""

    def __init__(self, limit: int = DEFAULT_STEP_BUDGET):
        self.limit = limit
        self.spent = 0

    def charge(self, steps: int = 1) -> None:
        self.spent += steps
        if self.spent > self.limit:
            raise BudgetExceeded(self.limit)


_budget: ContextVar[StepBudget | None] = ContextVar("towercert_step_budget", default=None)


@contextmanager
def budget_scope(limit: int) -> Iterator[StepBudget]:
    """Run a block under a fresh step budget shared by every GB it computes."""
    budget = StepBudget(limit)
    token = _budget.set(budget)
    try:
        yield budget
    finally:
        _budget.reset(token)


def current_budget() -> StepBudget:
    budget = _budget.get()
    return budget if budget is not None else StepBudget()


@dataclass
class GBStats:
    pairs: int = 0
    coprime_skipped: int = 0
    chain_skipped: int = 0
    reductions: int = 0
    size: int = 0


# --- Ideals ---
class Ideal:
    """A finitely generated ideal with a per-order cache of reduced bases."""

    def __init__(self, ring: PolyRing, generators: Iterable[Poly] = ()):
        gens = []
        for g in generators:
            if g.ring != ring:
                raise RingMismatch(f"generator over {g.ring.describe()} in ideal of {ring.describe()}")
            if not g.is_zero:
                gens.append(g)
        self.ring = ring
        self.generators: tuple[Poly, ...] = tuple(gens)
        self._bases: dict[MonomialOrder, tuple[PolyElement, ...]] = {}
        self._lock = threading.Lock()

    @classmethod
    def parse(cls, ring: PolyRing, *texts: str) -> "Ideal":
        return cls(ring, [ring.poly(t) for t in texts])

    def __repr__(self) -> str:
        return f"Ideal({self.describe()})"

    def describe(self) -> str:
        return "<" + ", ".join(format_poly(g) for g in self.generators) + ">"

    def __add__(self, other: "Ideal") -> "Ideal":
        return ideal_sum(self, other)

    def __mul__(self, other: "Ideal") -> "Ideal":
        return ideal_product(self, other)

    def groebner(self, order: MonomialOrder | None = None) -> tuple[Poly, ...]:
        ring = self.ring.with_order(order or self.ring.order)
        return tuple(Poly(ring, g) for g in self._basis(ring.order))

    def _basis(self, order: MonomialOrder) -> tuple[PolyElement, ...]:
        cached = self._bases.get(order)
        if cached is not None:
            return cached
        ring = self.ring.with_order(order).sympy
        basis = tuple(_buchberger([g.rep.set_ring(ring) for g in self.generators], ring, current_budget()))
        with self._lock:
            return self._bases.setdefault(order, basis)


def ideal_sum(a: Ideal, b: Ideal) -> Ideal:
    _same_ring(a.ring, b.ring)
    return Ideal(a.ring, a.generators + b.generators)


def ideal_product(a: Ideal, b: Ideal) -> Ideal:
    _same_ring(a.ring, b.ring)
    return Ideal(a.ring, [f * g for f in a.generators for g in b.generators])


def extend_ideal(ideal: Ideal, ring: PolyRing) -> Ideal:
    """The same generators viewed in a ring with more variables."""
    return Ideal(ring, [move(g, ring) for g in ideal.generators])


def _same_ring(a: PolyRing, b: PolyRing) -> None:
    if a != b:
        raise RingMismatch(f"{a.describe()} vs {b.describe()}")


# --- Buchberger ---
def _spoly(f: PolyElement, g: PolyElement) -> PolyElement:
    ring = f.ring
    lcm = ring.monomial_lcm(f.LM, g.LM)
    return f.mul_monom(ring.monomial_div(lcm, f.LM)) - g.mul_monom(ring.monomial_div(lcm, g.LM))


def _reduce(p: PolyElement, basis: list[PolyElement], budget: StepBudget) -> PolyElement:
    """Full reduction of p by monic polynomials."""
    ring = p.ring
    remainder = ring.zero.copy()
    p = p.copy()
    while p:
        monom, coeff = p.LT
        for g in basis:
            quotient = ring.monomial_div(monom, g.LM)
            if quotient is not None:
                p = p - g.mul_term((quotient, coeff))
                budget.charge()
                break
        else:
            remainder[monom] = coeff
            del p[monom]
    return remainder


def _divides(a: tuple[int, ...], b: tuple[int, ...]) -> bool:
    return all(x <= y for x, y in zip(a, b, strict=True))


def _update(basis: list[PolyElement], active: set[int], pairs: set[tuple[int, int]], h: PolyElement, stats: GBStats) -> None:
    """Add h to the basis, pruning pairs with the Gebauer-Moeller criteria."""
    ring = h.ring
    k = len(basis)
    basis.append(h)
    lm_h = h.LM

    def lcm_with_h(i: int) -> tuple[int, ...]:
        return ring.monomial_lcm(basis[i].LM, lm_h)

    def coprime_with_h(i: int) -> bool:
        return ring.monomial_mul(basis[i].LM, lm_h) == lcm_with_h(i)

    candidates = sorted(active)
    accepted: list[int] = []
    while candidates:
        i = candidates.pop()
        lcm = lcm_with_h(i)
        if coprime_with_h(i) or not any(_divides(lcm_with_h(j), lcm) for j in (*candidates, *accepted)):
            accepted.append(i)
        else:
            stats.chain_skipped += 1

    for i, j in sorted(pairs):
        lcm_ij = ring.monomial_lcm(basis[i].LM, basis[j].LM)
        if (
            _divides(lm_h, lcm_ij)
            and lcm_with_h(i) != lcm_ij
            and lcm_with_h(j) != lcm_ij
        ):
            pairs.discard((i, j))
            stats.chain_skipped += 1

    for i in accepted:
        if coprime_with_h(i):
            stats.coprime_skipped += 1
        else:
            pairs.add((i, k))

    for i in list(active):
        if _divides(lm_h, basis[i].LM):
            active.discard(i)
    active.add(k)


def _select(basis: list[PolyElement], pairs: set[tuple[int, int]]) -> tuple[int, int]:
    """Normal strategy: smallest lcm by degree, then by the monomial order."""
    ring = basis[0].ring

    def key(pair: tuple[int, int]):
        lcm = ring.monomial_lcm(basis[pair[0]].LM, basis[pair[1]].LM)
        return (sum(lcm), ring.order(lcm), pair)

    return min(pairs, key=key)


def _interreduce(polys: list[PolyElement], budget: StepBudget) -> list[PolyElement]:
    """Reduce each element by the others until nothing changes."""
    polys = [p.monic() for p in polys if p]
    changed = True
    while changed:
        changed = False
        for idx in range(len(polys)):
            others = [q for j, q in enumerate(polys) if j != idx and q]
            r = _reduce(polys[idx], others, budget)
            if r != polys[idx]:
                polys[idx] = r.monic() if r else r
                changed = True
        polys = [p for p in polys if p]
    return polys


def _is_constant(p: PolyElement) -> bool:
    return bool(p) and p.LM == p.ring.zero_monom


def _buchberger(generators: list[PolyElement], ring, budget: StepBudget) -> list[PolyElement]:
    stats = GBStats()
    polys = [g for g in generators if g]
    if not polys:
        return []
    if any(_is_constant(g) for g in polys):
        return [ring.one]

    basis: list[PolyElement] = []
    active: set[int] = set()
    pairs: set[tuple[int, int]] = set()
    for h in sorted(_interreduce(polys, budget), key=lambda p: ring.order(p.LM)):
        if _is_constant(h):
            return [ring.one]
        _update(basis, active, pairs, h, stats)

    while pairs:
        i, j = _select(basis, pairs)
        pairs.discard((i, j))
        stats.pairs += 1
        h = _reduce(_spoly(basis[i], basis[j]), [basis[a] for a in sorted(active)], budget)
        if h:
            if _is_constant(h):
                logger.debug(f"Unit ideal detected after {stats.pairs} pairs")
                return [ring.one]
            _update(basis, active, pairs, h.monic(), stats)

    reduced = _finalize([basis[a] for a in sorted(active)], budget)
    stats.size = len(reduced)
    stats.reductions = budget.spent
    logger.debug(
        f"GB in {len(ring.gens)} vars: size={stats.size} pairs={stats.pairs} "
        f"coprime={stats.coprime_skipped} chain={stats.chain_skipped} steps={stats.reductions}"
    )
    return reduced


def _finalize(basis: list[PolyElement], budget: StepBudget) -> list[PolyElement]:
    """Minimize, interreduce, and sort a Groebner basis descending by leading monomial."""
    ring = basis[0].ring
    minimal: list[PolyElement] = []
    for idx, g in enumerate(basis):
        lm = g.LM
        dominated = False
        for jdx, other in enumerate(basis):
            if jdx == idx:
                continue
            if _divides(other.LM, lm) and (other.LM != lm or jdx < idx):
                dominated = True
                break
        if not dominated:
            minimal.append(g)
    reduced = []
    for idx, g in enumerate(minimal):
        others = [q for j, q in enumerate(minimal) if j != idx]
        # leading terms survive: no other leading monomial divides them
        reduced.append(_reduce(g, others, budget).monic())
    return sorted(reduced, key=lambda p: ring.order(p.LM), reverse=True)


def buchberger(ideal: Ideal, order: MonomialOrder | None = None) -> tuple[Poly, ...]:
    """The reduced Groebner basis of ``ideal`` under ``order`` (default: the ring's).

    Raises:
        BudgetExceeded: The active step budget ran out.
    """
    return ideal.groebner(order)


# --- Decision procedures ---
def normal_form(p: Poly, ideal: Ideal) -> Poly:
    _same_ring(p.ring, ideal.ring)
    basis = list(ideal._basis(ideal.ring.order))
    if not basis:
        return p
    return Poly(p.ring, _reduce(p.rep, basis, current_budget()))


def ideal_member(p: Poly, ideal: Ideal) -> bool:
    return normal_form(p, ideal).is_zero


def ideal_equal(a: Ideal, b: Ideal) -> bool:
    _same_ring(a.ring, b.ring)
    return all(ideal_member(g, a) for g in b.generators) and all(ideal_member(g, b) for g in a.generators)


def is_unit_ideal(ideal: Ideal) -> bool:
    basis = ideal._basis(ideal.ring.order)
    return len(basis) == 1 and _is_constant(basis[0])


def radical_member(p: Poly, ideal: Ideal) -> bool:
    """p in sqrt(I), decided by whether I + <1 - u*p> is the unit ideal."""
    _same_ring(p.ring, ideal.ring)
    if p.is_zero or ideal_member(p, ideal):
        return True
    u = ideal.ring.fresh_name("u")
    ring = ideal.ring.extend(u)
    lifted = extend_ideal(ideal, ring)
    return is_unit_ideal(Ideal(ring, [*lifted.generators, ring.one - ring.gen(u) * move(p, ring)]))
