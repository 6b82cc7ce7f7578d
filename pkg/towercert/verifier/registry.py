from collections.abc import Callable
from dataclasses import dataclass
from typing import Any

from towercert.tower import TowerContext
from towercert.verifier import checks
from towercert.verifier.config import VerifierConfig


Runner = Callable[[TowerContext, VerifierConfig], dict[str, Any]]


@dataclass(frozen=True)
class CheckSpec:
    id: str
    title: str
    anchor: str
    runner: Runner


# --- Anchors ---
# Every stated result of the construction, by topic. Each is either certified by
# a registered check or listed in OUT_OF_SCOPE.
ANCHOR_INVENTORY = {
    "curve-and-first-level": "the curve E, the varieties X1 and Y1, and the map rho1",
    "tower-by-pullback": "X_n as the pullback of X_{n-1} along psi and phi",
    "n-fold-fiber-product": "X_n as an iterated fiber product of copies of X1 over A1",
    "closed-form-Yn": "Y_n written with explicit coordinates",
    "geometric-description": "Y_n and X_n as explicit closed and open subschemes, phi and psi as projections",
    "fibers-rigid": "closed fibers of phi_n are A1-rigid",
    "paths-constant-after-psi": "psi_n o gamma is constant for every path gamma into X_n",
    "psi-factors-through-S": "psi_n factors through the naive component sheaf of X_n",
    "alpha-beta-distinct": "the classes of alpha_n and beta_n differ in S^n(X_n)",
    "alpha-beta-homotopic": "alpha_n and beta_n become A1-homotopic in S^n(X_n) via a Nisnevich cover",
    "homotopies-respect-fibers": "naive homotopies are compatible with maps to A1-invariant sheaves",
    "rigid-embedding": "closed embedding of an affine scheme into a smooth scheme",
    "smooth-variant": "a smooth variety with the same separation property",
    "modified-homotopies": "the homotopies h1^a, h1~^a reaching every K-point of X_n",
    "connected-components-trivial": "pi0^A1(X_n) is trivial",
    "main-separation": "S^n(X_n) differs from S^{n+1}(X_n)",
    "naive-homotopy-relation": "elementary and naive A1-homotopy of sections",
    "naive-components-sheaf": "definition of S(F) by Nisnevich sheafification",
    "universal-property-of-S": "maps killing naive homotopies factor through S",
    "a1-invariance": "A1-invariant sheaves",
    "elementary-nisnevich-cover": "elementary Nisnevich coverings",
    "distinguished-square-pushout": "elementary distinguished squares are cocartesian",
    "a1-connectedness-on-fields": "A1-connectedness tested on finitely generated field extensions",
    "pi0-colimit-formula": "field sections of pi0^A1 as the colimit of S^n",
    "s-squared-trivial": "S(F)(K) trivial on fields implies S^2(F) trivial",
    "class-notation": "[x]_j, the image of a section x in S^j",
    "l-bijection": "pi0^A1(F)(K) -> L(F)(K) is a bijection for finitely generated K",
}

OUT_OF_SCOPE = frozenset(
    {
        "paths-constant-after-psi",
        "psi-factors-through-S",
        "homotopies-respect-fibers",
        "rigid-embedding",
        "smooth-variant",
        "connected-components-trivial",
        "main-separation",
        "naive-homotopy-relation",
        "naive-components-sheaf",
        "universal-property-of-S",
        "a1-invariance",
        "distinguished-square-pushout",
        "a1-connectedness-on-fields",
        "pi0-colimit-formula",
        "s-squared-trivial",
        "class-notation",
        "l-bijection",
    }
)


# --- Registry ---
REGISTRY: tuple[CheckSpec, ...] = (
    CheckSpec("C1", "E is smooth", "curve-and-first-level", checks.check_smoothness),
    CheckSpec("C2", "Y_n presentation matches the pullback and the fold", "closed-form-Yn", checks.check_presentation),
    CheckSpec("C3", "phi, psi and rho1 are ring maps", "geometric-description", checks.check_ring_maps),
    CheckSpec("C4", "the pullback squares commute", "tower-by-pullback", checks.check_square),
    CheckSpec("C5", "alpha and beta are points and glue", "n-fold-fiber-product", checks.check_points),
    CheckSpec("C6", "psi_n swaps alpha and beta", "alpha-beta-distinct", checks.check_psi_swaps),
    CheckSpec("C7", "rho1 is an isomorphism off x0 = 0", "curve-and-first-level", checks.check_rho_iso),
    CheckSpec("C8", "V1 and V2 form an elementary Nisnevich cover", "elementary-nisnevich-cover", checks.check_nisnevich_cover),
    CheckSpec("C9", "h1 and h2 cover p1 and p2", "alpha-beta-homotopic", checks.check_gluing_maps),
    CheckSpec("C10", "H joins h1 and h2 at every level", "alpha-beta-homotopic", checks.check_endpoints),
    CheckSpec("C11", "endpoints hit alpha and beta", "alpha-beta-homotopic", checks.check_endpoint_images),
    CheckSpec("C12", "fibers of phi_n are E or a nonreduced punctured line", "fibers-rigid", checks.check_fibers),
    CheckSpec("C13", "E, Gm and the nonreduced line admit no nonconstant paths", "fibers-rigid", checks.check_rigidity),
    CheckSpec("C14", "modified homotopies are well defined and cover X1", "modified-homotopies", checks.check_modified_homotopies),
)

BY_ID = {spec.id: spec for spec in REGISTRY}


def selected(ids: tuple[str, ...]) -> list[CheckSpec]:
    return [BY_ID[i] for i in ids]
