"""Bounded-degree certificates that E, Gm and the nonreduced punctured line
admit no nonconstant maps from A1.

A map A1 -> E of exact degree e in x is a pair x(t), y(t) with y^2 = f(x).
The coefficients of x and y become unknowns and every coefficient of
y(t)^2 - f(x(t)) an equation; a unit coefficient ideal means no such pair
exists over the algebraic closure. Only degrees up to the bound are covered:
the full statement is a theorem, this is its bounded-degree shadow.

Two ways of encoding "exact degree e" are supported:

* ``normalized`` (default): over the closure, t -> s*t + r makes x monic
  without a t^(e-1) term, and y -> -y fixes the leading coefficient of y to 1.
* ``rabinowitsch``: only the translation is used; the leading coefficient c
  of x stays free and u*c - 1 is added.
"""

import itertools
import logging
import random
import time
from collections.abc import Sequence
from dataclasses import dataclass, field
from enum import StrEnum
from typing import Literal

from towercert.errors import BudgetExceeded
from towercert.exactfield import FieldElem, FieldSpec, Rational, is_zero
from towercert.groebner import Ideal, buchberger, is_unit_ideal
from towercert.polyring import GREVLEX, Poly, PolyRing, build_f, evaluate, format_poly, substitute


logger = logging.getLogger(__name__)

DEFAULT_DEGREE_BOUND = 4
CONSTANT_GRID = tuple(range(-3, 4))

SliceMode = Literal["normalized", "rabinowitsch"]


class RigidTarget(StrEnum):
    ELLIPTIC_E = "EllipticE"
    GM = "Gm"
    NONREDUCED_PUNCTURED_LINE = "NonreducedPuncturedLine"


class CertStatus(StrEnum):
    CERTIFIED = "CertifiedNoNonconstant"
    FOUND_MAP = "FoundMap"
    INCONCLUSIVE = "Inconclusive"


# --- Types ---
@dataclass(eq=False)
class SliceSystem:
    """Coefficient equations for maps of one exact degree."""

    target: RigidTarget
    degree: int
    ring: PolyRing
    equations: list[Poly]
    # equations encoding the degree condition (Rabinowitsch or nothing)
    extra: list[Poly] = field(default_factory=list)
    # must be nonzero at a genuine solution; None when normalization fixes it to 1
    leading: Poly | None = None
    vacuous: bool = False

    @property
    def unknowns(self) -> tuple[str, ...]:
        return tuple(v for v in self.ring.names if v != "u")

    def ideal(self) -> Ideal:
        return Ideal(self.ring, [*self.equations, *self.extra])


@dataclass
class SliceEvidence:
    target: RigidTarget
    degree: int
    vacuous: bool
    unknowns: int = 0
    equations: int = 0
    gb_size: int = 0
    unit: bool = False
    elapsed_ms: float = 0.0

    def summary(self) -> str:
        if self.vacuous:
            return f"{self.target} degree {self.degree}: empty by degree parity"
        verdict = "unit ideal" if self.unit else "proper ideal"
        return f"{self.target} degree {self.degree}: {self.equations} equations in {self.unknowns} unknowns, GB size {self.gb_size}, {verdict}"


@dataclass
class RigidityCertificate:
    target: RigidTarget
    degree_bound: int
    status: CertStatus
    evidence: list[SliceEvidence] = field(default_factory=list)
    witness: str | None = None
    mode: SliceMode = "normalized"

    @property
    def certified(self) -> bool:
        return self.status == CertStatus.CERTIFIED

    def describe(self) -> str:
        head = f"{self.target} up to degree {self.degree_bound} ({self.mode}): {self.status}"
        return head + (f" [{self.witness}]" if self.witness else "")


# --- Building slice systems ---
def _coefficients(p: Poly, t_index: int, ring: PolyRing) -> list[Poly]:
    """Coefficients of p as a polynomial in the variable at ``t_index``, moved into ``ring``."""
    grouped: dict[int, dict[tuple[int, ...], object]] = {}
    for monom, coeff in p.rep.items():
        k = monom[t_index]
        rest = monom[:t_index] + monom[t_index + 1 :]
        grouped.setdefault(k, {})[rest] = coeff
    out = []
    for k in sorted(grouped):
        poly = ring.sympy.zero.copy()
        for monom, coeff in grouped[k].items():
            poly[monom] = coeff
        out.append(Poly(ring, poly))
    return out


def _with_t(unknowns: Sequence[str], spec: FieldSpec) -> tuple[PolyRing, PolyRing]:
    ring = PolyRing.of(tuple(unknowns), spec, GREVLEX, rational=True)
    # t goes last so that dropping it keeps the unknowns' positions
    return ring, PolyRing.of((*unknowns, "t"), spec, GREVLEX, rational=True)


def _series(ring: PolyRing, names: dict[int, str | int]) -> Poly:
    """sum of c_k t^k where c_k is an unknown name or a fixed integer."""
    t = ring.gen("t")
    total = ring.zero
    for k, c in names.items():
        coeff = ring.gen(c) if isinstance(c, str) else ring.const(c)
        total = total + coeff * t**k
    return total


def elliptic_slice(spec: FieldSpec, e: int, mode: SliceMode = "normalized") -> SliceSystem:
    """Unknown coefficients of x (exact degree e) and y with y^2 = f(x)."""
    if (3 * e) % 2:
        # deg y^2 = 3 deg x
        empty = PolyRing.of(("t",), spec, GREVLEX, rational=True)
        return SliceSystem(RigidTarget.ELLIPTIC_E, e, empty, [], vacuous=True)
    m = 3 * e // 2
    x_terms: dict[int, str | int] = {k: f"a{k}" for k in range(e - 1)}
    y_terms: dict[int, str | int] = {k: f"b{k}" for k in range(m)}
    if mode == "normalized":
        x_terms[e] = 1
        y_terms[m] = 1
    else:
        x_terms[e] = f"a{e}"
        y_terms[m] = f"b{m}"
    unknowns = [c for c in (*x_terms.values(), *y_terms.values()) if isinstance(c, str)]
    if mode == "rabinowitsch":
        unknowns.append("u")
    ring, ring_t = _with_t(unknowns, spec)

    x_t = _series(ring_t, x_terms)
    y_t = _series(ring_t, y_terms)
    line = PolyRing.of(("x",), spec, rational=True)
    f_of_x = substitute(build_f(spec, "x", line), {"x": x_t}, ring_t)
    equations = _coefficients(y_t**2 - f_of_x, ring_t.varset.index("t"), ring)

    if mode == "rabinowitsch":
        c = ring.gen(f"a{e}")
        return SliceSystem(RigidTarget.ELLIPTIC_E, e, ring, equations, [ring.gen("u") * c - 1], leading=c)
    return SliceSystem(RigidTarget.ELLIPTIC_E, e, ring, equations)


def units_slice(spec: FieldSpec, e: int, bound: int, mode: SliceMode = "normalized") -> SliceSystem:
    """u(t) v(t) = 1 with deg u = e and deg v <= bound."""
    u_terms: dict[int, str | int] = {k: f"p{k}" for k in range(e)}
    u_terms[e] = 1 if mode == "normalized" else f"p{e}"
    v_terms: dict[int, str | int] = {k: f"q{k}" for k in range(bound + 1)}
    unknowns = [c for c in (*u_terms.values(), *v_terms.values()) if isinstance(c, str)]
    if mode == "rabinowitsch":
        unknowns.append("u")
    ring, ring_t = _with_t(unknowns, spec)
    product = _series(ring_t, u_terms) * _series(ring_t, v_terms) - 1
    equations = _coefficients(product, ring_t.varset.index("t"), ring)
    if mode == "rabinowitsch":
        c = ring.gen(f"p{e}")
        return SliceSystem(RigidTarget.GM, e, ring, equations, [ring.gen("u") * c - 1], leading=c)
    return SliceSystem(RigidTarget.GM, e, ring, equations)


def nilpotent_slice(spec: FieldSpec, e: int, mode: SliceMode = "normalized") -> SliceSystem:
    """A nonzero image w(t) of y with w^2 = 0, of exact degree e."""
    w_terms: dict[int, str | int] = {k: f"w{k}" for k in range(e)}
    w_terms[e] = 1 if mode == "normalized" else f"w{e}"
    unknowns = [c for c in w_terms.values() if isinstance(c, str)]
    if mode == "rabinowitsch":
        unknowns.append("u")
    if not unknowns:
        unknowns = ["w"]
    ring, ring_t = _with_t(unknowns, spec)
    w = _series(ring_t, w_terms)
    equations = _coefficients(w**2, ring_t.varset.index("t"), ring)
    if mode == "rabinowitsch":
        c = ring.gen(f"w{e}")
        return SliceSystem(RigidTarget.NONREDUCED_PUNCTURED_LINE, e, ring, equations, [ring.gen("u") * c - 1], leading=c)
    return SliceSystem(RigidTarget.NONREDUCED_PUNCTURED_LINE, e, ring, equations)


# --- Certification ---
def _examine(system: SliceSystem) -> SliceEvidence:
    evidence = SliceEvidence(system.target, system.degree, system.vacuous)
    if system.vacuous:
        evidence.unit = True
        return evidence
    start = time.perf_counter()
    ideal = system.ideal()
    evidence.unknowns = system.ring.ngens
    evidence.equations = len(ideal.generators)
    evidence.gb_size = len(buchberger(ideal))
    evidence.unit = is_unit_ideal(ideal)
    evidence.elapsed_ms = (time.perf_counter() - start) * 1000
    logger.debug(evidence.summary())
    return evidence


def _certify(target: RigidTarget, bound: int, systems: Sequence[SliceSystem], mode: SliceMode) -> RigidityCertificate:
    cert = RigidityCertificate(target, bound, CertStatus.CERTIFIED, mode=mode)
    for system in systems:
        try:
            evidence = _examine(system)
        except BudgetExceeded as e:
            cert.status = CertStatus.INCONCLUSIVE
            cert.witness = f"step budget {e.limit} exhausted at degree {system.degree}"
            return cert
        cert.evidence.append(evidence)
        if not evidence.unit:
            cert.status = CertStatus.FOUND_MAP
            found = search_small_solutions(system)
            if found:
                cert.witness = f"degree {system.degree}: " + ", ".join(f"{k}={v}" for k, v in found[0].items())
            else:
                cert.witness = f"degree {system.degree}: coefficient ideal has solutions over the closure"
            return cert
    return cert


def certify_E(spec: FieldSpec, degree_bound: int = DEFAULT_DEGREE_BOUND, mode: SliceMode = "normalized") -> RigidityCertificate:
    """No nonconstant map A1 -> E with deg x(t) <= degree_bound.

    Odd degrees are empty by parity; every even degree is decided by one
    Groebner basis computation.

    Raises:
        ValueError: degree_bound < 1.
    """
    _check_bound(degree_bound)
    systems = [elliptic_slice(spec, e, mode) for e in range(1, degree_bound + 1)]
    cert = _certify(RigidTarget.ELLIPTIC_E, degree_bound, systems, mode)
    logger.info(f"Rigidity of E: {cert.describe()}")
    return cert


def certify_Gm(spec: FieldSpec, degree_bound: int = DEFAULT_DEGREE_BOUND, mode: SliceMode = "normalized") -> RigidityCertificate:
    """No nonconstant unit of K[t] of degree <= degree_bound."""
    _check_bound(degree_bound)
    systems = [units_slice(spec, e, degree_bound, mode) for e in range(1, degree_bound + 1)]
    return _certify(RigidTarget.GM, degree_bound, systems, mode)


def certify_nonreduced_line(spec: FieldSpec, degree_bound: int = DEFAULT_DEGREE_BOUND, mode: SliceMode = "normalized") -> RigidityCertificate:
    """Maps A1 -> Spec K[x, y]/<y^2> minus the origin are maps to Gm.

    y must go to a square-zero element of the reduced ring K[t]; each slice
    "y -> w of exact degree e" is a unit ideal. What is left is x(t) avoiding
    0, i.e. a unit, and that is certify_Gm.
    """
    _check_bound(degree_bound)
    systems = [nilpotent_slice(spec, e, mode) for e in range(0, degree_bound + 1)]
    cert = _certify(RigidTarget.NONREDUCED_PUNCTURED_LINE, degree_bound, systems, mode)
    if not cert.certified:
        return cert
    residual = certify_Gm(spec, degree_bound, mode)
    cert.evidence.extend(residual.evidence)
    cert.status = residual.status
    cert.witness = residual.witness
    return cert


def _check_bound(degree_bound: int) -> None:
    if degree_bound < 1:
        raise ValueError(f"degree bound must be at least 1, got {degree_bound}")


# --- Cross-checks ---
def search_small_solutions(system: SliceSystem, samples: int = 2000, box: int = 3, seed: int = 0) -> list[dict[str, Rational]]:
    """Random small-integer assignments that solve the slice's equations.

    Entries are drawn from -box..box; the Rabinowitsch variable is solved for
    rather than drawn, so only assignments with a nonzero leading coefficient
    count.
    """
    if system.vacuous:
        return []
    rng = random.Random(seed)
    spec = system.ring.field
    names = system.ring.names
    free = [i for i, v in enumerate(names) if v != "u"]
    found = []
    for _ in range(samples):
        values = [spec.zero] * len(names)
        for i in free:
            values[i] = spec.elem(rng.randint(-box, box))
        if system.leading is not None:
            lead = evaluate(system.leading, values)
            if is_zero(lead):
                continue
            values[names.index("u")] = spec.one / lead
        if all(is_zero(evaluate(eq, values)) for eq in system.equations):
            solution = {names[i]: values[i].a for i in free}
            if solution not in found:
                found.append(solution)
    return found


@dataclass
class ConstantMaps:
    ideal_is_unit: bool
    found: list[tuple[FieldElem, FieldElem]]


def constant_maps(spec: FieldSpec, candidates: Sequence[int] = CONSTANT_GRID) -> ConstantMaps:
    """The degree-0 slice for E without any nonconstancy condition.

    Its ideal is proper, and a grid over ``candidates`` plus the lambdas finds
    the K-points (c1, c2) with c2^2 = f(c1) among them.
    """
    ring = PolyRing.of(("c1", "c2"), spec, GREVLEX, rational=True)
    line = PolyRing.of(("x",), spec, rational=True)
    f = substitute(build_f(spec, "x", line), {"x": ring.gen("c1")}, ring)
    relation = ring.gen("c2") ** 2 - f
    ideal = Ideal(ring, [relation])
    grid = sorted({spec.elem(c).a for c in candidates} | set(spec.lambdas))
    found = []
    for c1, c2 in itertools.product(grid, repeat=2):
        point = (spec.elem(c1), spec.elem(c2))
        if is_zero(evaluate(relation, point)):
            found.append(point)
    return ConstantMaps(is_unit_ideal(ideal), found)


def describe_system(system: SliceSystem) -> list[str]:
    return [format_poly(eq) for eq in [*system.equations, *system.extra]]
