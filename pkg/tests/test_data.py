import numpy as np
import pytest

from logan.data import DataError, Dataset, read_csv, write_csv
from logan.sem import sample, scenario_model


def test_round_trip_exact(tmp_path):
    ds = sample(scenario_model("A", seed=1), 30, seed=5)
    write_csv(ds, tmp_path / "x.csv")
    back = read_csv(tmp_path / "x.csv")
    assert back.columns == ds.columns
    assert np.array_equal(back.values, ds.values)


def test_roles_reorder_columns(tmp_path):
    path = tmp_path / "r.csv"
    path.write_text("a,age,b,score\n" + "\n".join(f"{i},{2 * i},{i % 3},{i * i}" for i in range(6)))
    ds = read_csv(path, exposure="age", outcome="a")
    assert ds.columns == ["age", "b", "score", "a"]
    assert ds.values[2].tolist() == [4.0, 2.0, 4.0, 2.0]
    ds = read_csv(path, exposure="age", outcome="score", mediators=["b"])
    assert ds.d == 1 and ds.mediator_names == ["b"]


@pytest.mark.parametrize("text, match", [
    ("a,b,c\n1,2\n", "row 2 has 2 fields"),
    ("a,b,c\n1,x,3\n", "row 2, column 'b'"),
    ("", "empty"),
    ("a,b,c\n1,2,3\n", "at least 4"),
])
def test_malformed(tmp_path, text, match):
    path = tmp_path / "bad.csv"
    path.write_text(text)
    with pytest.raises(DataError, match=match):
        read_csv(path)


def test_bad_roles(tmp_path):
    path = tmp_path / "r.csv"
    path.write_text("a,b,c\n" + "1,2,3\n" * 5)
    with pytest.raises(DataError, match="not found"):
        read_csv(path, exposure="z")
    with pytest.raises(DataError):
        read_csv(path, exposure="a", outcome="a")


def test_centering_and_rows():
    ds = Dataset(np.arange(12.0).reshape(4, 3))
    c = ds.centered()
    assert np.allclose(c.values.mean(axis=0), 0) and c.is_centered
    assert c.centered() is c
    sub = c.rows([0, 2])
    assert sub.n == 2 and sub.columns == ["E", "M1", "Y"]
