"""Unit tests for sample, distribution and moment files."""

from pathlib import Path

import numpy as np
import pytest

from qbm.lab.learning.data import data_moments, from_table
from qbm.lab.learning.parse import (
    read_distribution,
    read_moments,
    read_samples,
    write_distribution,
    write_moments,
)
from qbm.lab.quantum.density import MomentVector
from qbm.lab.quantum.operators import complete_spec
from qbm.lab.quantum.parse import ParseError


def write(tmp_path: Path, name: str, text: str) -> Path:
    fp = tmp_path / name
    fp.write_text(text)
    return fp


class TestSamples:
    def test_read(self, tmp_path: Path):
        fp = write(tmp_path, "samples.txt", "# header\n+1 +1\n1 1\n\n-1 +1  # flipped\n+1 -1\n")
        q = read_samples(fp)
        np.testing.assert_array_equal(q.indices, [0, 1, 2])
        np.testing.assert_allclose(q.probabilities, [0.5, 0.25, 0.25])

    def test_zero_one(self, tmp_path: Path):
        fp = write(tmp_path, "samples.txt", "1 0\n0 0\n")
        q = read_samples(fp, zero_one=True)
        np.testing.assert_array_equal(q.indices, [2, 3])

    def test_zero_token_without_flag(self, tmp_path: Path):
        fp = write(tmp_path, "samples.txt", "1 1\n1 0\n")
        with pytest.raises(ParseError) as excinfo:
            read_samples(fp)
        assert excinfo.value.line == 2

    def test_ragged(self, tmp_path: Path):
        fp = write(tmp_path, "samples.txt", "1 1\n# comment\n1 -1 1\n")
        with pytest.raises(ParseError) as excinfo:
            read_samples(fp)
        assert excinfo.value.line == 3
        assert str(excinfo.value).startswith(f"{fp}:3:")

    def test_empty(self, tmp_path: Path):
        with pytest.raises(ParseError):
            read_samples(write(tmp_path, "samples.txt", "# nothing\n"))


class TestDistribution:
    def test_read(self, tmp_path: Path):
        fp = write(tmp_path, "q.txt", "+1 +1 0.5\n-1 -1 0.5\n+1 -1 0\n")
        q = read_distribution(fp)
        np.testing.assert_array_equal(q.indices, [0, 3])

    def test_write_read(self, tmp_path: Path):
        q = from_table(3, {0: 0.1, 5: 0.2, 6: 0.3, 7: 0.4})
        write_distribution(q, tmp_path / "q.txt")
        back = read_distribution(tmp_path / "q.txt")
        np.testing.assert_array_equal(back.indices, q.indices)
        np.testing.assert_allclose(back.probabilities, q.probabilities, rtol=1e-15)

    @pytest.mark.parametrize(
        "text,line",
        [
            ("+1 +1 0.5\n+1 -1 x\n", 2),
            ("+1 +1 0.5\n+1 0.5\n", 2),
            ("+1 +1 -0.5\n", 1),
            ("+1 +1 0.5\n+1 +1 0.5\n", 2),
            ("0.5\n", 1),
        ],
    )
    def test_malformed(self, tmp_path: Path, text: str, line: int):
        with pytest.raises(ParseError) as excinfo:
            read_distribution(write(tmp_path, "q.txt", text))
        assert excinfo.value.line == line

    def test_not_normalized(self, tmp_path: Path):
        with pytest.raises(ParseError):
            read_distribution(write(tmp_path, "q.txt", "+1 0.5\n-1 0.4\n"))


class TestMoments:
    def test_write_read(self, tmp_path: Path):
        spec = complete_spec(3)
        q = from_table(3, {0: 0.1, 5: 0.2, 6: 0.3, 7: 0.4})
        values = data_moments(spec, q)
        write_moments(spec, values, tmp_path / "targets.csv", entropy=0.25)
        back, entropy = read_moments(tmp_path / "targets.csv", spec)
        assert back.keys == values.keys
        np.testing.assert_allclose(back.values, values.values, atol=1e-16)
        assert entropy == 0.25

    def test_reordered_and_without_entropy(self, tmp_path: Path):
        fp = write(
            tmp_path,
            "targets.csv",
            "kind,i,j,axis,value\ncoupling,0,1,z,-0.5\nfield,1,,z,0.1\nfield,0,,z,0.2\n",
        )
        spec = complete_spec(2, axes="z")
        values, entropy = read_moments(fp, spec)
        np.testing.assert_array_equal(values.values, [0.2, 0.1, -0.5])
        assert entropy is None

    def test_subset_of_file(self, tmp_path: Path):
        spec = complete_spec(2)
        write_moments(spec, MomentVector(tuple(spec.keys), np.linspace(-0.8, 0.8, len(spec))), tmp_path / "t.csv")
        values, _ = read_moments(tmp_path / "t.csv", spec.restrict("x"))
        np.testing.assert_allclose(values.values, np.linspace(-0.8, 0.8, len(spec))[[0, 3, 6]])

    @pytest.mark.parametrize(
        "rows,line",
        [
            ("field,0,,z,0.1\nfield,1,,w,0.2\n", 3),
            ("field,0,,z,1.5\n", 2),
            ("field,0,,z,0.1\ncoupling,1,0,z,0.2\n", 3),
            ("spin,0,,z,0.1\n", 2),
            ("field,0,,z,\n", 2),
        ],
    )
    def test_malformed(self, tmp_path: Path, rows: str, line: int):
        fp = write(tmp_path, "targets.csv", "kind,i,j,axis,value\n" + rows)
        with pytest.raises(ParseError) as excinfo:
            read_moments(fp, complete_spec(2, axes="z"))
        assert excinfo.value.line == line

    def test_missing_term(self, tmp_path: Path):
        fp = write(tmp_path, "targets.csv", "kind,i,j,axis,value\nfield,0,,z,0.1\n")
        with pytest.raises(ParseError):
            read_moments(fp, complete_spec(2, axes="z"))

    def test_missing_column(self, tmp_path: Path):
        fp = write(tmp_path, "targets.csv", "kind,i,axis,value\nfield,0,z,0.1\n")
        with pytest.raises(ParseError):
            read_moments(fp, complete_spec(1, axes="z"))
