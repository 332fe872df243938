import json

import numpy as np
import pandas as pd

from nlqm.output import line_plot, output_path, write_csv, write_json


def test_output_path_sanitizes_label(tmp_path):
    out = tmp_path / "out"
    path = output_path(out, "kappa.svg", label="../run one", index=2)
    assert path == str(out / "run_one-kappa-2.svg")
    assert out.is_dir()
    assert output_path(out, "kappa.svg") == str(out / "kappa.svg")


def test_csv_round_trips_full_precision(tmp_path):
    values = np.array([1.0 / 3.0, np.pi, 1e-17])
    path = write_csv(tmp_path / "x.csv", {"s": np.arange(3.0), "kappa": values})
    frame = pd.read_csv(path, float_precision="round_trip")
    assert list(frame.columns) == ["s", "kappa"]
    np.testing.assert_array_equal(frame["kappa"].to_numpy(), values)
    assert "\r" not in (tmp_path / "x.csv").read_text()


def test_json_is_plain_and_sorted(tmp_path):
    path = write_json(tmp_path / "r.json", {"b": np.float64(0.1), "a": [1 + 2j], "c": float("nan"), "d": np.arange(2)})
    text = (tmp_path / "r.json").read_text()
    assert text.index('"a"') < text.index('"b"')
    data = json.loads(text)
    assert data == {"a": [[1.0, 2.0]], "b": 0.1, "c": None, "d": [0, 1]}


def test_svg_is_deterministic(app, tmp_path):
    x = np.linspace(0.0, 1.0, 11)
    with app.app_context():
        first = line_plot(tmp_path / "a.svg", x, {"closed": x**2, "integrated": x**2}, xlabel="s")
        second = line_plot(tmp_path / "b.svg", x, {"closed": x**2, "integrated": x**2}, xlabel="s")
    assert (tmp_path / "a.svg").read_bytes() == (tmp_path / "b.svg").read_bytes()
    assert "<svg" in (tmp_path / "a.svg").read_text()
    assert first != second
