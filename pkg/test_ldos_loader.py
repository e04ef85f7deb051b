"""
Tests for the tabulated LDOS reader.
"""
import numpy as np
import pytest

from qdmollow.services.ldos_loader import ingest_ldos, parse_ldos
from qdmollow.services.photon_reservoir import TabulatedReservoir
from qdmollow.utils.errors import LDOSFormatError

VALID = """# sample
# PF_scale 0.5

1.0  0.5  0.2
2.0  1.0  1.0
3.0  0.25 0.5
"""


def test_parse_valid_file():
    omega, j, alpha, scale = parse_ldos(VALID)
    assert np.array_equal(omega, [1.0, 2.0, 3.0])
    assert np.array_equal(j, [0.5, 1.0, 0.25])
    assert np.array_equal(alpha, [0.2, 1.0, 0.5])
    assert scale == 0.5


def test_missing_alpha_column_defaults_to_one():
    omega, j, alpha, scale = parse_ldos("1 2\n2 3\n")
    assert np.array_equal(alpha, [1.0, 1.0])
    assert scale == 1.0


@pytest.mark.parametrize(
    "text,row",
    [
        ("1 2\n2 3 4 5\n", 2),
        ("1 2 3\n2 3\n", 2),
        ("# header\n1 2\nx 3\n", 3),
        ("1 2\n2 nan\n", 2),
        ("1 2\n3 1\n2 1\n", 3),
        ("1 2\n1 1\n", 2),
        ("1 2\n2 -1\n", 2),
        ("1 2 1\n2 1 -0.5\n", 2),
        ("# PF_scale\n1 2\n2 3\n", 1),
        ("# PF_scale big\n1 2\n2 3\n", 1),
    ],
)
def test_malformed_rows_report_line_number(text, row):
    with pytest.raises(LDOSFormatError) as info:
        parse_ldos(text)
    assert info.value.row == row


def test_too_few_rows():
    with pytest.raises(LDOSFormatError) as info:
        parse_ldos("# only a comment\n1 2\n")
    assert info.value.row is None


def test_missing_file(tmp_path):
    with pytest.raises(LDOSFormatError):
        ingest_ldos(tmp_path / "absent.txt")


def test_ingest_written_file(tmp_path):
    path = tmp_path / "ldos.txt"
    path.write_text(VALID, encoding="utf-8")
    res = ingest_ldos(path)
    assert isinstance(res, TabulatedReservoir)
    assert res.source == str(path)
    assert res.j_ph(2.0) == pytest.approx(0.5)
    assert res.propagator(2.0) == pytest.approx(1.0)


def test_bundled_sample(w1_sample):
    res = ingest_ldos(w1_sample)
    assert res.omega[0] == pytest.approx(1341.5)
    assert res.omega.size == 1751
    assert res.ldos_maximum() == pytest.approx(1343.0, abs=0.005)
    low, high = res.resonances()
    assert low == pytest.approx(1343.0, abs=0.005)
    assert high == pytest.approx(1343.35, abs=0.005)
