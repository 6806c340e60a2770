import math

import numpy as np
import pandas as pd

from utils.file_utils import ArtifactWriter, gnuplot_script, series_plot, to_builtin


def test_to_builtin_converts_numpy_and_non_finite():
    out = to_builtin({"a": np.float64(1.5), "b": [np.int64(2), math.inf], 3: np.array([0.5, np.nan])})
    assert out == {"a": 1.5, "b": [2, None], "3": [0.5, None]}
    assert type(out["b"][0]) is int


def test_csv_floats_round_trip(tmp_path):
    writer = ArtifactWriter(str(tmp_path / "out"))
    values = [0.1, 1 / 3, -2.5e-300]
    path = writer.write_csv("t.csv", pd.DataFrame({"x": values}))
    assert pd.read_csv(path, float_precision="round_trip")["x"].tolist() == values
    assert b"\r\n" not in (tmp_path / "out" / "t.csv").read_bytes()


def test_remove_all_cleans_up_created_dir(tmp_path):
    writer = ArtifactWriter(str(tmp_path / "new"))
    writer.write_text("a.txt", "x\n")
    writer.remove_all()
    assert not (tmp_path / "new").exists()


def test_remove_all_keeps_existing_dir(tmp_path):
    (tmp_path / "keep.txt").write_text("mine")
    writer = ArtifactWriter(str(tmp_path))
    writer.write_text("a.txt", "x\n")
    writer.remove_all()
    assert sorted(p.name for p in tmp_path.iterdir()) == ["keep.txt"]


def test_gnuplot_script():
    body = series_plot("chains.csv", "tht", 1, 3, 4, "chain 1")
    assert "strcol(1) eq \"tht\" && $2==1" in body
    script = gnuplot_script("demo", [body, body])
    assert script.startswith("# demo\n")
    assert script.count("\nplot ") == 2
    assert "pause -1" in script
