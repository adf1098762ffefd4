from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from teichtqft import codec
from teichtqft.errors import FormatSyntaxError, InvalidIndex, SemanticError
from teichtqft.mesh import build_triangulation

from test_mesh import gluings

FIVE2 = """tqft-tri v1
tets 3
signs +1 +1 +1
glue 0 0 2 3
glue 0 1 2 2
glue 0 2 1 3
glue 0 3 1 0
glue 1 1 2 0
glue 1 2 2 1
"""


def test_five2_document():
    tri = codec.parse(FIVE2)
    assert tri.n == 3 and tri.cells.num_edges == 3
    assert codec.serialize(tri) == FIVE2


def test_empty_gluing_round_trip_is_byte_identical():
    text = "tqft-tri v1\ntets 1\nsigns +1\n"
    assert codec.serialize(codec.parse(text)) == text


def test_out_of_range_tet_is_semantic():
    with pytest.raises(InvalidIndex) as ei:
        codec.parse("tqft-tri v1\ntets 2\nsigns +1 -1\nglue 0 0 7 1\n")
    assert ei.value.exit_code == 3


@pytest.mark.parametrize("text, line, col", [
    ("", 1, 1),
    ("tqft-tri v2\n", 1, 1),
    ("tqft-tri v1\ntets two\n", 2, 6),
    ("tqft-tri v1\ntets 1\nsigns +2\n", 3, 7),
    ("tqft-tri v1\ntets 1\nsigns +1\nglue 0 0 0\n", 4, 1),
    ("tqft-tri v1\ntets 1\nsigns +1\nangles 0 0.5 x 0.25\n", 4, 14),
    ("tqft-tri v1\ntets 1\nsigns +1\n\n# note\nfrobnicate\n", 6, 1),
])
def test_syntax_errors_carry_positions(text, line, col):
    with pytest.raises(FormatSyntaxError) as ei:
        codec.parse(text)
    assert (ei.value.line, ei.value.column) == (line, col)
    assert ei.value.exit_code == 2


def test_angles_are_exact():
    tri = codec.parse("tqft-tri v1\ntets 1\nsigns -1\nangles 0 0.1 0.2 7/10\n")
    assert tri.angles == ((Fraction(1, 10), Fraction(1, 5), Fraction(7, 10)),)
    assert "angles 0 0.1 0.2 0.7" in codec.serialize(tri)


def test_non_decimal_fractions_survive():
    tri = build_triangulation([1], [], angles=[(Fraction(1, 3), Fraction(1, 3), Fraction(1, 3))])
    text = codec.serialize(tri)
    assert "1/3" in text and codec.parse(text) == tri


def test_missing_angles_rejected():
    with pytest.raises(SemanticError):
        codec.parse("tqft-tri v1\ntets 2\nsigns +1 +1\nangles 0 0.2 0.3 0.5\n")


def test_comments_and_gamma(tmp_path):
    text = "tqft-tri v1  # header\ntets 2\nsigns +1 -1\nglue 0 0 1 2\nglue 0 1 1 3\n" \
           "glue 0 2 1 0\nglue 0 3 1 1\ngamma 1\n"
    tri = codec.parse(text)
    assert tri.gamma == {1}
    p = tmp_path / "x.tri"
    codec.dump(tri, p)
    assert codec.load(p) == tri


@st.composite
def documents(draw):
    signs, glue = draw(gluings())
    n = len(signs)
    angles = None
    if draw(st.booleans()):
        angles = []
        for _ in range(n):
            a = Fraction(draw(st.integers(1, 98)), draw(st.sampled_from([100, 7, 3])))
            b = Fraction(draw(st.integers(-5, 5)), 11)
            angles.append((a, b, 1 - a - b))
    return build_triangulation(signs, glue, angles=angles)


@given(documents())
def test_round_trips(tri):
    text = codec.serialize(tri)
    again = codec.parse(text)
    assert again == tri
    assert codec.serialize(again) == text
