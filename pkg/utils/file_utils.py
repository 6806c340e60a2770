import os
import math
import logging
from typing import List, Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel

logger = logging.getLogger(__name__)

CSV_FLOAT_FORMAT = "%.17g"


def numpy_serializer(obj):
    """Custom JSON serializer for numpy scalars and arrays"""
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"Type {type(obj)} not serializable")


def to_builtin(obj):
    """Recursively converts numpy values to plain Python and non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): to_builtin(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_builtin(v) for v in obj]
    if isinstance(obj, (np.ndarray, np.generic)):
        return to_builtin(numpy_serializer(obj))
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


class ArtifactWriter:
    """Writes run artifacts into one output directory and can take them back.

    Every file written is remembered so a failed run leaves nothing behind.
    """

    def __init__(self, out_dir: str):
        self.out_dir = out_dir
        self._created_dir = not os.path.isdir(out_dir)
        os.makedirs(out_dir, exist_ok=True)
        self.paths: List[str] = []

    def _path(self, name: str) -> str:
        path = os.path.join(self.out_dir, name)
        self.paths.append(path)
        return path

    def write_csv(self, name: str, frame: pd.DataFrame) -> str:
        path = self._path(name)
        frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
        logger.info(f"{len(frame)} rows saved to {path}")
        return path

    def write_model(self, name: str, model: BaseModel) -> str:
        path = self._path(name)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(model.model_dump_json(indent=2))
            f.write("\n")
        logger.info(f"{type(model).__name__} saved to {path}")
        return path

    def write_text(self, name: str, text: str) -> str:
        path = self._path(name)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        logger.info(f"Text saved to {path}")
        return path

    def remove_all(self) -> None:
        """Deletes everything written so far, and the directory if this writer created it."""
        for path in self.paths:
            try:
                os.remove(path)
                logger.info(f"Removed partial artifact {path}")
            except FileNotFoundError:
                pass
            except OSError as e:
                logger.error(f"Failed to remove partial artifact {path}: {e}")
        self.paths.clear()
        if self._created_dir:
            try:
                os.rmdir(self.out_dir)
            except OSError:
                pass


def gnuplot_script(title: str, plots: Sequence[str], ylabel: str = "value",
                   xlabel: str = "iteration") -> str:
    """Plain gnuplot script over the CSV artifacts; each entry of ``plots`` is one plot command body."""
    lines = [
        f"# {title}",
        "# usage: gnuplot -p plot.gp",
        'set datafile separator ","',
        "set key outside right",
        f'set xlabel "{xlabel}"',
        f'set ylabel "{ylabel}"',
        f'set title "{title}"',
    ]
    for i, body in enumerate(plots):
        if i > 0:
            lines.append("pause -1 \"press enter for the next plot\"")
        lines.append(f"plot {body}")
    return "\n".join(lines) + "\n"


def series_plot(csv_name: str, arm: str, chain: int, xcol: int, ycol: int, label: str) -> str:
    """One chains.csv series selected by arm and chain, for use inside a plot command."""
    return (f"'{csv_name}' using {xcol}:((strcol(1) eq \"{arm}\" && ${2}=={chain}) ? ${ycol} : 1/0) "
            f"with lines title \"{label}\"")
