"""Exact certification of the tower X_n over Q(lambda)."""

from towercert.exactfield import FieldElem, FieldSpec, make_field
from towercert.groebner import Ideal, buchberger, ideal_member, radical_member
from towercert.polyring import Poly, PolyRing, parse_poly
from towercert.tower import TowerContext, build_tower


__all__ = [
    "FieldElem",
    "FieldSpec",
    "Ideal",
    "Poly",
    "PolyRing",
    "TowerContext",
    "build_tower",
    "buchberger",
    "ideal_member",
    "make_field",
    "parse_poly",
    "radical_member",
]
