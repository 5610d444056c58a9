import pytest

from horoke import catalog, criteria

IDS = catalog.list_ids()


def recompute(e, claim: str) -> str:
    d, ac = e.datum, e.anticanonical_polytope
    if claim == "ke":
        return criteria.check_ke(d, ac).verdict
    if claim == "mabuchi":
        return criteria.solve_mabuchi(d, ac).verdict
    if claim.startswith("power_mabuchi_"):
        return criteria.solve_power_mabuchi(d, ac, int(claim.rsplit("_", 1)[1])).verdict
    if claim == "rlb":
        return "exists" if criteria.greatest_ricci_lower_bound(d, ac).value == 1 else "not_exists"
    if claim == "coupled":
        return criteria.coupled_search(d, e.family).report.verdict
    raise AssertionError(f"unhandled claim {claim}")


@pytest.mark.parametrize("ident", IDS)
def test_known_verdicts_reproduce(ident):
    e = catalog.get(ident)
    for claim, known in e.known.items():
        assert recompute(e, claim) == known.expected, claim
        if known.value is not None and claim == "rlb":
            assert criteria.greatest_ricci_lower_bound(e.datum, e.anticanonical_polytope).value == known.value


@pytest.mark.parametrize("ident", IDS)
def test_round_trip(ident):
    e = catalog.get(ident)
    again = catalog.loads(catalog.dumps(e))
    assert again == e
    assert again.anticanonical_polytope == e.anticanonical_polytope
    assert again.datum == e.datum
    assert catalog.dumps(again) == catalog.dumps(e)


def test_disagreements_are_recorded():
    flagged = {(i, c) for i in IDS for c, k in catalog.get(i).known.items() if k.recomputed}
    assert flagged == {("P112", "mabuchi"), ("P4_O(1,-1)", "coupled")}


def test_aliases_resolve_and_primary_ids_shadow():
    aliases = catalog.all_aliases(include_shadowed=False)
    for a, target in aliases.items():
        assert catalog.get(a).id == target
    for a, target in catalog.all_aliases().items():
        if a in IDS:
            assert catalog.get(a).id == a


def test_unknown_id():
    with pytest.raises(catalog.UnknownId):
        catalog.get("F3_9.99")


def test_schema_and_bad_claims_rejected():
    e = catalog.get("F3_3.25")
    doc = dict(e.raw)
    with pytest.raises(catalog.CatalogError):
        catalog.parse_entry({**doc, "schema": 2})
    with pytest.raises(catalog.CatalogError):
        catalog.parse_entry({**doc, "known": {"ke": {"verdict": "maybe", "source": "paper"}}})
    with pytest.raises(catalog.CatalogError):
        catalog.parse_entry({**doc, "dimension": 4})
