import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cohen_norms.documents import (
    DocumentError,
    dump_family_document,
    dump_operator_document,
    parse_family_document,
    parse_operator_document,
    render_csv,
    render_json,
    write_atomic,
)
from cohen_norms.operators import HomogeneousPolynomial, LinearOperator, MultilinearOperator
from cohen_norms.seqnorms import FunctionalFamily, VectorFamily
from cohen_norms.spaces import NormedSpace

ID2_DOC = """{"type": "linear", "domains": [{"dim": 2, "q": 2}], "codomain": {"dim": 2, "q": 2},
 "coefficients": [[1, 0], [0, 1]]}"""


def test_minimal_linear_identity():
    op = parse_operator_document(ID2_DOC).operator
    E = NormedSpace(2, 2)
    assert op == LinearOperator(np.eye(2), E, E)


def test_ragged_matrix_names_the_row():
    text = '{"type": "linear", "domains": [{"dim": 2, "q": 2}], "codomain": {"dim": 2, "q": 2},\n "coefficients": [[1, 0],\n [0]]}'
    with pytest.raises(DocumentError) as err:
        parse_operator_document(text)
    assert err.value.path == "coefficients[1]"
    assert err.value.line == 3
    assert "ragged" in str(err.value)


@pytest.mark.parametrize(
    "text, path",
    [
        ('{"domains": [], "codomain": {}, "coefficients": []}', "$"),
        ('{"type": "cubic", "domains": [], "codomain": {}, "coefficients": []}', "type"),
        ('{"type": "linear", "domains": [{"dim": 0, "q": 2}], "codomain": {"dim": 1, "q": 2}, "coefficients": []}', "domains[0].dim"),
        ('{"type": "linear", "domains": [{"dim": 1, "q": 0.5}], "codomain": {"dim": 1, "q": 2}, "coefficients": [[1]]}', "domains[0].q"),
        ('{"type": "linear", "domains": [{"dim": 1, "q": 2}], "codomain": {"dim": 1, "q": 2}, "coefficients": [["a"]]}', "coefficients[0][0]"),
    ],
)
def test_schema_errors_carry_field_paths(text, path):
    with pytest.raises(DocumentError) as err:
        parse_operator_document(text)
    assert err.value.path == path


def test_json_syntax_error_has_line_and_column():
    with pytest.raises(DocumentError) as err:
        parse_operator_document('{\n  "type": "linear",\n  "domains": [}\n')
    assert err.value.line == 3 and err.value.col is not None


def test_asymmetric_polynomial_is_symmetrized_with_warning():
    text = '{"type": "polynomial", "domains": [{"dim": 2, "q": 2}], "codomain": {"dim": 1, "q": 2}, "coefficients": [[[1, 0.3], [0.1, 2]]]}'
    parsed = parse_operator_document(text)
    assert parsed.warnings
    np.testing.assert_allclose(parsed.operator.tensor, [[[1, 0.2], [0.2, 2]]])
    again = parse_operator_document(dump_operator_document(parsed.operator))
    assert again.operator == parsed.operator and not again.warnings


def test_polynomial_degree_inferred_and_checked():
    text = '{"type": "polynomial", "domains": [{"dim": 1, "q": 2}], "codomain": {"dim": 1, "q": 2}, "coefficients": [[[[2]]]]}'
    assert parse_operator_document(text).operator.degree == 3
    bad = text.replace('"coefficients"', '"degree": 2, "coefficients"')
    with pytest.raises(DocumentError):
        parse_operator_document(bad)


def _spaces():
    return st.builds(
        NormedSpace, st.integers(1, 3), st.sampled_from([1.0, 1.5, 2.0, 3.0, math.inf])
    )


@settings(max_examples=40, deadline=None)
@given(st.lists(_spaces(), min_size=1, max_size=3), _spaces(), st.integers(0, 2**32 - 1))
def test_operator_round_trip_is_exact(domains, codomain, seed):
    rng = np.random.default_rng(seed)
    tensor = rng.standard_normal((codomain.dim, *[d.dim for d in domains])) * 10.0 ** rng.integers(-8, 8)
    op = LinearOperator(tensor, domains[0], codomain) if len(domains) == 1 else MultilinearOperator(tensor, domains, codomain)
    back = parse_operator_document(dump_operator_document(op)).operator
    assert back == op and type(back) is type(op)
    P = HomogeneousPolynomial(rng.standard_normal((codomain.dim,) + (domains[0].dim,) * len(domains)), domains[0], codomain)
    assert parse_operator_document(dump_operator_document(P)).operator == P


def test_family_documents(rng):
    fam = VectorFamily(rng.standard_normal((3, 2)), NormedSpace(2, math.inf))
    back = parse_family_document(dump_family_document(fam))
    assert np.array_equal(back.members, fam.members) and back.space == fam.space
    funcs = FunctionalFamily(rng.standard_normal((2, 2)), NormedSpace(2, 1))
    back = parse_family_document(dump_family_document(funcs))
    assert isinstance(back, FunctionalFamily) and np.array_equal(back.coeffs, funcs.coeffs)
    with pytest.raises(DocumentError):
        parse_family_document('{"space": {"dim": 2, "q": 2}, "members": [[1, 2], [3]]}')


def test_render_json_uses_shortest_repr_and_inf():
    text = render_json({"a": 0.1 + 0.2, "b": math.inf, "c": np.float64(1e-300), "d": np.int64(3)})
    doc = json.loads(text)
    assert doc == {"a": 0.30000000000000004, "b": "inf", "c": 1e-300, "d": 3}


def test_render_csv():
    text = render_csv([{"name": "a", "passed": True, "margin": 0.1}, {"name": "b", "lower": math.inf}])
    lines = text.splitlines()
    assert lines[0] == "name,passed,margin,lower"
    assert lines[1] == "a,true,0.1,"
    assert lines[2] == "b,,,inf"


def test_write_atomic(tmp_path):
    target = tmp_path / "r.json"
    write_atomic(str(target), "one")
    write_atomic(str(target), "two")
    assert target.read_text() == "two"
    assert [p.name for p in tmp_path.iterdir()] == ["r.json"]
