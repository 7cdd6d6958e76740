import numpy as np
import pytest

from parahyp.spectral import Field, GridSpec
from parahyp.storage import csv_text, dump_states, load_states, read_csv, write_csv, write_json


def test_state_round_trip(tmp_path):
    g = GridSpec(2, 16)
    states = [Field(g, np.random.default_rng(i).standard_normal((2, 16, 16))) for i in range(3)]
    path = tmp_path / "s.bin"
    dump_states(path, [0.0, 0.5, 1.0], states)
    times, back = load_states(path)
    assert times == [0.0, 0.5, 1.0]
    assert all(np.array_equal(a.values, b.values) for a, b in zip(states, back))
    assert path.read_bytes()[:8] == b"PHYSTATE"


def test_state_dump_rejects_garbage(tmp_path):
    bad = tmp_path / "bad.bin"
    bad.write_bytes(b"NOTSTATE" + bytes(40))
    with pytest.raises(ValueError):
        load_states(bad)


def test_csv_round_trip_and_header(tmp_path):
    rows = [{"k": 0, "a": 0.1, "tag": "x"}, {"k": 1, "a": 1 / 3, "tag": "y"}]
    path = tmp_path / "t.csv"
    write_csv(path, rows, ["note"])
    text = path.read_text()
    assert text.startswith("# domain")
    back = read_csv(path)
    assert back[1]["a"] == 1 / 3 and back[0]["tag"] == "x"
    assert csv_text(rows) == csv_text(rows)


def test_json_writer(tmp_path):
    write_json(tmp_path / "x.json", {"a": np.float64(1.5), "b": np.arange(2)})
    assert '"a": 1.5' in (tmp_path / "x.json").read_text()
    assert not list(tmp_path.glob(".*"))
