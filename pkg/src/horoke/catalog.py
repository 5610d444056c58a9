"""Embedded catalog of worked examples, stored in the same TOML schema users write."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from typing import Any, Mapping

import tomli
import tomli_w

from .criteria import Family
from .geometry import Polytope
from .rational import parse_rational
from .rootdata import HorosymmetricDatum, build_datum, dh_polynomial

SCHEMA = 1
VERDICTS = ("exists", "not_exists", "boundary")
SOURCES = ("paper", "derived")


class CatalogError(ValueError):
    clause = "catalog"


class UnknownId(KeyError):
    pass


@dataclass(frozen=True)
class KnownClaim:
    verdict: str
    source: str
    note: str = ""
    recomputed: str | None = None  # set where recomputation disagrees with the source
    value: Fraction | None = None

    @property
    def expected(self) -> str:
        return self.recomputed or self.verdict


@dataclass(frozen=True)
class ManifoldEntry:
    id: str
    aliases: tuple[str, ...]
    group: str
    dimension: int
    datum: HorosymmetricDatum
    anticanonical_polytope: Polytope
    known: Mapping[str, KnownClaim]
    provenance: str
    family: Family | None = None
    figure: tuple | None = None
    raw: Mapping[str, Any] = field(default_factory=dict, compare=False, hash=False)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ManifoldEntry):
            return NotImplemented
        return canonical_document(self.raw) == canonical_document(other.raw)

    def __hash__(self) -> int:
        return hash(self.id)


def _frac(x) -> Fraction:
    if isinstance(x, bool):
        raise CatalogError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return parse_rational(x)
    raise CatalogError(f"expected a rational, got {x!r}")


def _frac_rows(rows) -> list[list[Fraction]]:
    return [[_frac(x) for x in r] for r in rows]


def _datum_spec(raw: Mapping) -> dict:
    spec: dict[str, Any] = {}
    for key in ("killing", "roots_Qu", "roots_s_plus", "spherical_basis", "projection", "soliton_directions", "central_directions"):
        if key in raw:
            spec[key] = _frac_rows(raw[key])
    if "chart_origin" in raw:
        spec["chart_origin"] = [_frac(x) for x in raw["chart_origin"]]
    if "restricted_roots" in raw:
        spec["restricted_roots"] = [
            {"root": [_frac(x) for x in item["root"]], "multiplicity": int(item.get("multiplicity", 1))}
            for item in raw["restricted_roots"]
        ]
    if "basis" in raw:
        spec["basis"] = list(raw["basis"])
    return spec


def parse_datum(raw: Mapping) -> HorosymmetricDatum:
    return build_datum(_datum_spec(raw))


def parse_polytope(raw: Mapping) -> Polytope:
    return Polytope.from_vertices([tuple(_frac(x) for x in v) for v in raw["vertices"]])


def parse_family(raw: Mapping) -> Family:
    params = tuple(raw["parameters"])
    classes = tuple(tuple(tuple(str(x) for x in row) for row in c["vertices"]) for c in raw["classes"])
    window = (str(raw["window"][0]), str(raw["window"][1]))
    fixed = tuple(sorted((k, _frac(v)) for k, v in raw.get("fixed", {}).items()))
    free = raw.get("free", "")
    return Family(params, classes, window, free, fixed)


def parse_entry(doc: Mapping) -> ManifoldEntry:
    if doc.get("schema", SCHEMA) != SCHEMA:
        raise CatalogError(f"unsupported schema {doc.get('schema')!r}")
    datum = parse_datum(doc["datum"])
    poly = parse_polytope(doc["polytope"])
    if poly.dim_ambient != datum.ambient_rank:
        raise CatalogError("polytope and datum dimensions differ")
    known = {}
    for claim, item in sorted(doc.get("known", {}).items()):
        if item["verdict"] not in VERDICTS or item["source"] not in SOURCES:
            raise CatalogError(f"bad known claim {claim!r}")
        if item.get("recomputed") not in (None,) + VERDICTS:
            raise CatalogError(f"bad recomputed verdict for {claim!r}")
        value = _frac(item["value"]) if "value" in item else None
        known[claim] = KnownClaim(item["verdict"], item["source"], item.get("note", ""), item.get("recomputed"), value)
    family = parse_family(doc["family"]) if "family" in doc else None
    figure = None
    if "figure" in doc:
        figure = tuple(tuple(_frac(x) for x in v) for v in doc["figure"]["vertices"])
    dim = int(doc["dimension"])
    degree = dh_polynomial(datum).degree
    if degree + datum.rank != dim:
        raise CatalogError(f"{doc['id']}: deg P_DH + rank = {degree + datum.rank} != dimension {dim}")
    return ManifoldEntry(
        doc["id"],
        tuple(doc.get("aliases", ())),
        doc.get("group", ""),
        dim,
        datum,
        poly,
        known,
        doc.get("provenance", ""),
        family,
        figure,
        doc,
    )


def loads(text: str) -> ManifoldEntry:
    return parse_entry(tomli.loads(text))


def canonical_document(doc: Mapping) -> dict:
    """Normalize rationals to 'p/q' strings so equal entries serialize identically."""

    def norm(x):
        if isinstance(x, Mapping):
            return {k: norm(v) for k, v in sorted(x.items())}
        if isinstance(x, list | tuple):
            return [norm(v) for v in x]
        if isinstance(x, Fraction):
            return str(x)
        if isinstance(x, int) and not isinstance(x, bool):
            return str(x)
        return x

    return norm(doc)


def _toml_ready(x):
    if isinstance(x, Mapping):
        return {k: _toml_ready(v) for k, v in sorted(x.items())}
    if isinstance(x, list | tuple):
        return [_toml_ready(v) for v in x]
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else str(x)
    return x


def dumps(entry: ManifoldEntry) -> str:
    """TOML text in the input schema; integers stay integers, other rationals become 'p/q'."""
    return tomli_w.dumps(_toml_ready(entry.raw))


def _catalog_files():
    root = resources.files("horoke") / "data" / "catalog"
    return sorted((p for p in root.iterdir() if p.name.endswith(".toml")), key=lambda p: p.name)


@lru_cache(maxsize=1)
def _load_all() -> tuple[dict[str, ManifoldEntry], dict[str, str]]:
    entries: dict[str, ManifoldEntry] = {}
    for path in _catalog_files():
        e = loads(path.read_text(encoding="utf-8"))
        if e.id in entries:
            raise CatalogError(f"duplicate id {e.id}")
        entries[e.id] = e
    aliases: dict[str, str] = {}
    for e in entries.values():
        for a in e.aliases:
            if a not in entries:
                aliases.setdefault(a, e.id)
    return entries, aliases


def list_ids(include_aliases: bool = False) -> list[str]:
    entries, aliases = _load_all()
    ids = sorted(entries)
    if include_aliases:
        ids = sorted(set(ids) | set(aliases))
    return ids


def all_aliases(include_shadowed: bool = True) -> dict[str, str]:
    """alias -> id; shadowed aliases (equal to another primary id) included on request."""
    entries, aliases = _load_all()
    out = dict(aliases)
    if include_shadowed:
        for e in entries.values():
            for a in e.aliases:
                out.setdefault(a, e.id)
    return dict(sorted(out.items()))


def get(id_: str) -> ManifoldEntry:
    entries, aliases = _load_all()
    if id_ in entries:
        return entries[id_]
    if id_ in aliases:
        return entries[aliases[id_]]
    raise UnknownId(id_)
