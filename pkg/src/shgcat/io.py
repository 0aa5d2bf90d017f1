"""CSV/JSON writers with a provenance header, and snapshot (de)serialisation."""

from __future__ import annotations

import csv
import io
import json
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .hilbert import TwoModeState

CONFIG_PREFIX = "# config: "


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def header_lines(config: dict) -> list[str]:
    return [f"# shgcat {__version__}", CONFIG_PREFIX + json.dumps(_jsonable(config), sort_keys=True)]


def write_csv(path, config: dict, columns: list[str], rows, extra_header=()) -> Path:
    """Comment header, one CSV header row, then data rows (floats in repr precision)."""
    buf = io.StringIO()
    for line in header_lines(config):
        buf.write(line + "\n")
    for line in extra_header:
        buf.write("# " + line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    path = Path(path)
    path.write_text(buf.getvalue())
    return path


def write_json(path, config: dict, payload: dict) -> Path:
    doc = {"shgcat_version": __version__, "config": _jsonable(config)}
    doc.update(_jsonable(payload))
    path = Path(path)
    path.write_text(json.dumps(doc, indent=1, sort_keys=False) + "\n")
    return path


def read_csv(path):
    """Return ``(config, columns, data)`` from a file written by :func:`write_csv`."""
    config = None
    lines = Path(path).read_text().splitlines()
    body = []
    for line in lines:
        if line.startswith(CONFIG_PREFIX):
            config = json.loads(line[len(CONFIG_PREFIX) :])
        elif not line.startswith("#"):
            body.append(line)
    rows = list(csv.reader(body))
    columns = rows[0]
    data = np.array([[float(v) for v in r] for r in rows[1:]]) if len(rows) > 1 else np.empty((0, len(columns)))
    return config, columns, data


def read_config_from_output(path) -> dict:
    """Recover the resolved configuration echoed into an output file."""
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        doc = json.loads(text)
        return doc["config"] if "config" in doc and "shgcat_version" in doc else doc
    for line in text.splitlines():
        if line.startswith(CONFIG_PREFIX):
            return json.loads(line[len(CONFIG_PREFIX) :])
    raise ValueError(f"{path} carries no configuration header")


def state_to_dict(state: TwoModeState, gt: float | None = None) -> dict:
    return {
        "alpha0": [state.alpha0.real, state.alpha0.imag],
        "cutoff_epsilon": state.cutoff_epsilon,
        "gt": gt,
        "blocks": [{"N": N, "re": a.real.tolist(), "im": a.imag.tolist()} for N, a in state],
    }


def state_from_dict(doc: dict) -> TwoModeState:
    blocks = doc["blocks"]
    Ns = tuple(int(b["N"]) for b in blocks)
    amps = tuple(np.asarray(b["re"], dtype=float) + 1j * np.asarray(b["im"], dtype=float) for b in blocks)
    a = doc.get("alpha0", [0.0, 0.0])
    return TwoModeState(Ns, amps, float(doc.get("cutoff_epsilon", 1e-12)), complex(a[0], a[1]))


def load_schema(name: str) -> dict:
    return json.loads(resources.files("shgcat").joinpath("schemas", f"{name}.schema.json").read_text())
