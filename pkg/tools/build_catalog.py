"""Regenerate src/horoke/data/catalog/*.toml from the tables below.

Coordinates are in fundamental weights (plus a κ-orthogonal torus direction f
for the SL2 x C* entries, where the basis is (f, α)).
"""

from __future__ import annotations

from fractions import Fraction
from pathlib import Path

import tomli_w

OUT = Path(__file__).resolve().parents[1] / "src" / "horoke" / "data" / "catalog"

SL2xSL2 = {
    "basis": ["w1", "w2"],
    "killing": [["1/2", "0"], ["0", "1/2"]],
    "roots_Qu": [["2", "0"], ["0", "2"]],
}
SL3 = {
    "basis": ["w1", "w2"],
    "killing": [["2/3", "1/3"], ["1/3", "2/3"]],
    "roots_Qu": [["2", "-1"], ["1", "1"]],
    "spherical_basis": [["1", "0"]],
}
SYM = {
    "basis": ["f", "alpha"],
    "killing": [["1", "0"], ["0", "2"]],
    "roots_s_plus": [["0", "1"]],
    "restricted_roots": [{"root": ["0", "1"], "multiplicity": 1}],
    "spherical_basis": [["1", "0"], ["0", "1"]],
    "soliton_directions": [["1", "0"]],
    "central_directions": [["1", "0"]],
}
SL2 = {
    "basis": ["w"],
    "killing": [["1/2"]],
    "roots_Qu": [["2"]],
    "spherical_basis": [["2"]],
}
SL2xSL3 = {
    "basis": ["w1", "w2", "w3"],
    "killing": [["1/2", "0", "0"], ["0", "2/3", "1/3"], ["0", "1/3", "2/3"]],
    "roots_Qu": [["2", "0", "0"], ["0", "2", "-1"], ["0", "1", "1"]],
}
RANK1 = {"soliton_directions": [["1"]], "central_directions": [["1"]]}


def known(verdict, source, note="", recomputed=None, value=None):
    out = {"verdict": verdict, "source": source}
    if note:
        out["note"] = note
    if recomputed:
        out["recomputed"] = recomputed
    if value is not None:
        out["value"] = value
    return out


def entry(id_, group, dim, datum, vertices, provenance, known_claims, aliases=(), figure=None, family=None):
    doc = {
        "schema": 1,
        "id": id_,
        "aliases": list(aliases),
        "group": group,
        "dimension": dim,
        "provenance": provenance,
        "datum": datum,
        "polytope": {"vertices": [[str(x) for x in v] for v in vertices]},
        "known": known_claims,
    }
    if figure is not None:
        doc["figure"] = figure
    if family is not None:
        doc["family"] = family
    return doc


def sl2xsl2(basis, origin=("0", "0")):
    return {**SL2xSL2, "spherical_basis": [basis], **RANK1, "chart_origin": list(origin)}


ENTRIES = [
    entry(
        "F3_3.31", "SL2xSL2", 3, sl2xsl2(["1", "1"]), [(1, 1), (3, 3)],
        "SL2xSL2 rank one horospherical, M = Z(α1+α2)/2, t(α1+α2)/2 for t in [1,3]",
        {
            "ke": known("not_exists", "paper", "bar = 15/13 (α1+α2)"),
            "mabuchi": known("exists", "paper", "63a + 20b = 0"),
        },
    ),
    entry(
        "F3_2.33", "SL2xSL2", 3, sl2xsl2(["-1", "1"], ("4", "0")), [(4, 0), (1, 3)],
        "SL2xSL2 rank one horospherical, M = Z(α1−α2)/2, (4−t)α1/2 + tα2/2 for t in [0,3]; chart origin 2α1",
        {
            "ke": known("not_exists", "derived"),
            "mabuchi": known("exists", "paper", "2a − 5b = 0"),
        },
    ),
    entry(
        "F3_3.25", "SL2xSL2", 3, sl2xsl2(["-1", "1"], ("4", "0")), [(3, 1), (1, 3)],
        "SL2xSL2 rank one horospherical, M = Z(α1−α2)/2, t in [1,3]",
        {"ke": known("exists", "paper", "symmetric under α1 <-> α2")},
    ),
    entry(
        "P3_A1A1", "SL2xSL2", 3, sl2xsl2(["-1", "1"], ("4", "0")), [(4, 0), (0, 4)],
        "P3 with its SL2xSL2 rank one horospherical structure, t in [0,4]",
        {"ke": known("exists", "derived")},
    ),
    entry(
        "F3_3.28", "SL2xSL2", 3, sl2xsl2(["1", "0"]), [(1, 2), (3, 2)],
        "SL2xSL2 product case, M = Zα1/2, tα1/2 + α2 for t in [1,3]; α2 offset transcribed verbatim",
        {"ke": known("not_exists", "derived")},
    ),
    entry(
        "F3_2.34", "SL2xSL2", 3, sl2xsl2(["1", "0"]), [(0, 2), (3, 2)],
        "SL2xSL2 product case, M = Zα1/2, tα1/2 + α2 for t in [0,3]",
        {"ke": known("exists", "derived")},
    ),
    entry(
        "P3_A2", "SL3", 3, {**SL3, **RANK1}, [(0, 0), (4, 0)],
        "P3 with its SL3 rank one horospherical structure, t(2α1+α2)/3 for t in [0,4]",
        {"ke": known("exists", "derived")},
    ),
    entry(
        "F3_2.35", "SL3", 3, {**SL3, **RANK1}, [(2, 0), (4, 0)],
        "SL3 rank one horospherical, t in [2,4]",
        {"ke": known("not_exists", "derived")},
    ),
    entry(
        "F3_2.36", "SL3", 3, {**SL3, **RANK1}, [(1, 0), (5, 0)],
        "SL3 rank one horospherical, M = Z(4α1+2α2)/3, t in [1,5]",
        {
            "ke": known("not_exists", "paper"),
            "mabuchi": known("not_exists", "paper", "196a + 40b = 0, sign change on [1,5]"),
            "power_mabuchi_2": known("exists", "paper", "a+ branch admissible"),
            "rlb": known("not_exists", "derived", "greatest Ricci lower bound", value="31/43"),
        },
    ),
]

# (x, y) on x f + y α, and picture-grid vertices (X, Y) from the figures
SYMMETRIC = [
    ("RA1", "F3_3.27", [(-1, 0), (-1, 2), (1, 2), (1, 0)], "RA", {"ke": known("exists", "derived")}),
    ("RA2", "F3_3.31", [(-1, 0), (-1, 3), (1, 1), (1, 0)], "RA", {"ke": known("not_exists", "derived")}),
    ("RA3", "F3_4.8", [(-1, 0), (-1, 2), (0, 2), (1, 1), (1, 0)], "RA",
     {"mabuchi": known("exists", "paper", "112a − 65b = 0")}),
    ("RB1", "F3_2.34", [(-1, 0), (-1, 3), (1, 3), (1, 0)], "RB", {"ke": known("exists", "derived")}),
    ("RB2", "F3_2.36", [(-1, 0), (-1, 5), (1, 1), (1, 0)], "RB", {"ke": known("not_exists", "derived")}),
    ("RB3", "F3_3.22", [(-1, 0), (-1, 3), (0, 3), (1, 1), (1, 0)], "RB",
     {"mabuchi": known("exists", "paper")}),
    ("RC1", "Q3", [(3, 0), (0, 3), (-3, 0)], "RC", {"ke": known("exists", "derived")}),
    ("RC2", "P3", [(1, 0), (1, 4), (-3, 0)], "RC", {"ke": known("exists", "derived")}),
    ("RC3", "F3_2.35", [(1, 0), (1, 4), (-1, 2), (-1, 0)], "RC", {"ke": known("not_exists", "derived")}),
    ("RC4", "F3_2.29", [(3, 0), (1, 2), (-1, 2), (-3, 0)], "RC", {"ke": known("exists", "paper")}),
    ("RC5", "F3_2.30", [(-3, 0), (0, 3), (1, 2), (1, 0)], "RC",
     {"mabuchi": known("not_exists", "paper", "49a − 20b = 0, zero at −49/20")}),
    ("RC6", "F3_3.19", [(1, 0), (1, 2), (0, 3), (-1, 2), (-1, 0)], "RC", {"ke": known("exists", "paper")}),
]

FIGURE_MAPS = {
    "RA": ("(x, y) = (Y, X)", lambda x, y: (y, x)),
    "RB": ("(x, y) = (Y, 2X)", lambda x, y: (y / 2, x)),
    "RC": ("(x, y) = (-X-Y, X-Y)", lambda x, y: ((y - x) / 2, (-x - y) / 2)),
}


for sid, alias, verts, kind, claims in SYMMETRIC:
    desc, inv = FIGURE_MAPS[kind]
    fig = [[str(c) for c in inv(Fraction(x), Fraction(y))] for x, y in verts]
    ENTRIES.append(
        entry(
            sid, "SL2xC*", 3, dict(SYM), verts,
            f"SL2 x C* symmetric threefold {sid}, coordinates x f + y α",
            claims, aliases=(alias,), figure={"map": desc, "vertices": fig},
        )
    )

for k in range(1, 5):
    m2 = 2 + k  # 2M in fundamental-weight units
    ENTRIES.append(
        entry(
            f"P11{k}", "SL2", 2, {**SL2, **RANK1}, [(0,), (m2,)],
            f"weighted projective plane P(1,1,{k}), polytope [0, (1+k/2)α]",
            {"mabuchi": known("exists", "paper") if k == 1 else known(
                "not_exists", "paper", "affine function not positive on the polytope",
                recomputed="boundary" if k == 2 else None)},
        )
    )


def fourfold(id_, direction, ac, window_hi, claims, provenance):
    d1, d2 = direction  # t(ϖ1 + d2 ϖ2) with d1 = 1
    datum = {
        **SL2xSL3,
        "spherical_basis": [["1", str(d2), "0"]],
        **RANK1,
        "chart_origin": ["0", str(ac[2]), "0"],
    }
    s = ac[2]
    verts = [(t, s + d2 * t, 0) for t in (ac[0], ac[1])]
    fam = {
        "parameters": ["s1", "s2", "s3"],
        "fixed": {"s1": "1/4", "s2": "3/2"} if d2 == -1 else {"s1": "1/2", "s2": "3/2"},
        "free": "s3",
        "window": ["s2", f"{window_hi}+s2"],
        "classes": [
            {"vertices": [["s1", f"s3{d2:+d}*s1", "0"], ["s2", f"s3{d2:+d}*s2", "0"]]},
            {"vertices": [
                [f"{ac[0]}-s1", f"({s}-s3){d2:+d}*({ac[0]}-s1)", "0"],
                [f"{ac[1]}-s2", f"({s}-s3){d2:+d}*({ac[1]}-s2)", "0"],
            ]},
        ],
    }
    return entry(id_, "SL2xSL3", 4, datum, verts, provenance, claims, family=fam)


ENTRIES.append(
    fourfold(
        "P4_O(1,-1)", (1, -1), (1, 3, 5), 2,
        {
            "ke": known("not_exists", "paper", "bar(1,3,5) = 5ϖ2 + (244/125)(ϖ1−ϖ2)"),
            "coupled": known(
                "exists", "paper", "printed quartic root near 2.6831 for s1 = 1/4, s2 = 3/2",
                recomputed="not_exists",
            ),
        },
        "P(O ⊕ O(1,-1)) over P1 x P2, Δ(s) = s3ϖ2 + t(ϖ1−ϖ2) for t in [s1, s2]",
    )
)
ENTRIES.append(
    fourfold(
        "P4_O(-1,2)", (1, -2), (1, 3, 7), 4,
        {
            "ke": known("not_exists", "paper"),
            "coupled": known("exists", "paper", "10w² + 261w + 1631 = 0 with w = z² − 7z"),
        },
        "P(O ⊕ O(-1,2)) over P1 x P2, Δ(s) = s3ϖ2 + t(ϖ1−2ϖ2) for t in [s1, s2]",
    )
)


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    for old in OUT.glob("*.toml"):
        old.unlink()
    for doc in ENTRIES:
        name = doc["id"].replace("(", "_").replace(")", "").replace(",", "_")
        (OUT / f"{name}.toml").write_text(tomli_w.dumps(doc), encoding="utf-8")
    print(f"wrote {len(ENTRIES)} entries to {OUT}")


if __name__ == "__main__":
    main()
