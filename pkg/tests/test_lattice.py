import json
from fractions import Fraction

import pytest
from hypothesis import given, settings

from cubecons.lattice import (
    SKEW,
    Face,
    MapFamily,
    ParseError,
    PointState,
    SeriesComponent,
    ValidationError,
    admissible_pairs,
    dumps_family,
    enumerate_faces,
    face_of_var,
    family_from_json,
    family_to_json,
    load_map_family,
    parse_face_label,
    permute_family,
    roles,
    save_map_family,
    var_name,
    x,
)
from cubecons.maps import expand_darboux
from conftest import families


def test_face_normalization_and_ids():
    assert Face(3, 1) == Face(1, 3)
    assert sorted(f.var for f in enumerate_faces(4)) == list(range(6))
    # ids do not depend on N
    assert sorted(f.var for f in enumerate_faces(5) if f.j <= 4) == list(range(6))
    for f in enumerate_faces(6):
        assert face_of_var(f.var) == f
        assert parse_face_label(f.label) == f
    assert var_name(Face(1, 2).var) == "x12"
    with pytest.raises(ValueError):
        Face(2, 2)


def test_admissible_pair_counts():
    assert len(enumerate_faces(4)) == 6
    assert len(admissible_pairs(4)) == 12
    assert len(admissible_pairs(5)) == 30


def test_roles():
    vij, vik, vjk = roles(Face(1, 2), 3)
    assert (vij, vik, vjk) == (Face(1, 2).var, Face(1, 3).var, Face(2, 3).var)


def test_identity_family():
    fam = MapFamily.identity(4, 3)
    assert len(fam.components) == 12
    assert all(not fam.A(f, k, m) for f, k in fam.keys() for m in (2, 3))


def test_component_rejects_foreign_variable():
    bad = SeriesComponent(Face(1, 2), 3, {2: x(1, 4) * x(1, 2)})
    with pytest.raises(ValidationError) as exc:
        MapFamily(4, 2, {(Face(1, 2), 3): bad})
    assert exc.value.face == Face(1, 2) and exc.value.dir == 3


def test_component_rejects_mixed_degree_slice():
    bad = SeriesComponent(Face(1, 2), 3, {2: x(1, 2) * x(1, 3) * x(2, 3)})
    with pytest.raises(ValidationError):
        MapFamily(4, 3, {(Face(1, 2), 3): bad})


def test_family_rejects_inadmissible_and_too_high():
    with pytest.raises(ValidationError):
        MapFamily(4, 2, {(Face(1, 2), 1): SeriesComponent(Face(1, 2), 1)})
    comp = SeriesComponent(Face(1, 2), 3, {3: x(1, 2) * x(1, 2) * x(1, 2)})
    with pytest.raises(ValidationError):
        MapFamily(4, 2, {(Face(1, 2), 3): comp})


def test_truncate_and_with_slice():
    d = expand_darboux(5)
    t = d.truncated(3)
    assert t.order == 3 and not t.A(Face(1, 2), 3, 4)
    assert t.A(Face(1, 2), 3, 3) == d.A(Face(1, 2), 3, 3)
    w = t.with_slice(4, d.slice(4))
    assert w.order == 4 and w == d.truncated(4)


def test_json_round_trip_darboux(tmp_path):
    d = expand_darboux(6)
    p = tmp_path / "d.json"
    save_map_family(d, p)
    assert load_map_family(p) == d
    assert dumps_family(load_map_family(p)) == p.read_text()


def test_json_role_and_label_keys_agree():
    doc_roles = {"order": 2, "components": [
        {"face": [1, 2], "dir": 3, "terms": [{"coeff": "1/2", "exps": {"ik": 1, "jk": 1}}]}]}
    doc_labels = {"order": 2, "components": [
        {"face": [1, 2], "dir": 3, "terms": [{"coeff": "1/2", "exps": {"13": 1, "23": 1}}]}]}
    assert family_from_json(doc_roles) == family_from_json(doc_labels)
    fam = family_from_json(doc_roles)
    assert fam.A(Face(1, 2), 3, 2) == (x(1, 3) * x(2, 3)).scale(Fraction(1, 2))


@pytest.mark.parametrize("doc, err", [
    ({"components": []}, ParseError),
    ({"order": 2, "components": {}}, ParseError),
    ({"order": 2, "components": [{"face": [1, 2], "dir": 1, "terms": []}]}, ValidationError),
    ({"order": 2, "components": [{"face": [1, 2], "dir": 3, "terms": [{"coeff": "a", "exps": {}}]}]}, ParseError),
    ({"order": 2, "components": [{"face": [1, 2], "dir": 3, "terms": [{"coeff": "1", "exps": {"14": 2}}]}]}, ValidationError),
    ({"order": 2, "components": [{"face": [1, 2], "dir": 3, "terms": [{"coeff": "1", "exps": {"ij": -1}}]}]}, ParseError),
    ({"order": 2, "components": [{"face": [1, 2], "dir": 3}, {"face": [2, 1], "dir": 3}]}, ValidationError),
    ({"order": 2, "symmetry": "weird", "components": []}, ValidationError),
    ([1, 2], ParseError),
])
def test_bad_documents(doc, err):
    with pytest.raises(err):
        family_from_json(doc)


def test_missing_and_malformed_files(tmp_path):
    with pytest.raises(ParseError):
        load_map_family(tmp_path / "nope.json")
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(ParseError):
        load_map_family(p)


@given(families())
@settings(max_examples=50, deadline=None)
def test_round_trip_random(fam):
    doc = json.loads(json.dumps(family_to_json(fam)))
    again = family_from_json(doc)
    assert again == fam
    assert dumps_family(again) == dumps_family(fam)


def test_point_state_skew_sign():
    st = PointState({f: Fraction(f.var + 1) for f in enumerate_faces(4)}, SKEW)
    assert st.get(2, 1) == -st.get(1, 2)
    sym = PointState(st.values)
    assert sym.get(2, 1) == sym.get(1, 2)


def test_permute_family_darboux_invariant():
    d = expand_darboux(4)
    assert permute_family(d, {1: 2, 2: 3, 3: 4, 4: 1}) == d
