"""Instance files, reports and trace files."""

import json
import math
from pathlib import Path

import numpy as np

from .lp import LpInstance, PublicRegion, SensitivityModel


def load_instance(path):
    """Read an instance JSON file into an :class:`LpInstance`."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return instance_from_dict(data)


def instance_from_dict(data):
    if not isinstance(data, dict):
        raise ValueError("instance file must hold a JSON object")
    for key in ("A", "b", "sensitivity"):
        if key not in data:
            raise ValueError(f"instance is missing {key!r}")
    sens = data["sensitivity"]
    if isinstance(sens, list):
        raise ValueError("an instance carries exactly one sensitivity model")
    A = np.asarray(data["A"], dtype=np.float64)
    if A.ndim != 2:
        raise ValueError("A must be an array of rows")
    m, d = A.shape
    if data.get("m", m) != m or data.get("d", d) != d:
        raise ValueError(f"declared shape ({data.get('m')}, {data.get('d')}) does not match A {A.shape}")
    return LpInstance(
        A, data["b"], data.get("c"), data.get("senses"),
        data.get("var_lower"), SensitivityModel.from_dict(sens),
        PublicRegion.from_dict(data.get("region")),
    )


def instance_to_dict(instance):
    out = {
        "m": instance.m,
        "d": instance.d,
        "A": instance.A.tolist(),
        "b": instance.b.tolist(),
        "senses": [s.value for s in instance.senses],
    }
    if instance.c is not None:
        out["c"] = instance.c.tolist()
    if np.any(instance.var_lower != 0):
        out["var_lower"] = instance.var_lower.tolist()
    if instance.sensitivity is not None:
        out["sensitivity"] = instance.sensitivity.to_dict()
    if instance.region is not None:
        out["region"] = instance.region.to_dict()
    return out


def dump_instance(instance, path):
    write_json(instance_to_dict(instance), path)


def to_jsonable(obj):
    """Convert numpy values recursively; non-finite floats become strings."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    return obj


def dumps_report(report):
    """Canonical serialization: sorted keys, fixed separators, trailing newline."""
    return json.dumps(to_jsonable(report), sort_keys=True, indent=2) + "\n"


def write_json(report, path):
    Path(path).write_text(dumps_report(report), encoding="utf-8")


class TraceWriter:
    """Writes one JSON line per engine step.

    Each line holds ``t``, ``loss``, ``distribution`` (the distribution or
    projection the loss was scored against), ``density_param`` and ``eta``.
    """

    def __init__(self, path):
        self.path = Path(path)
        self._fh = open(self.path, "w", encoding="utf-8")

    def record(self, t, loss, distribution, density_param, eta):
        line = {"t": int(t), "loss": np.asarray(loss).tolist(),
                "distribution": np.asarray(distribution).tolist(),
                "density_param": density_param, "eta": float(eta)}
        self._fh.write(json.dumps(line, sort_keys=True) + "\n")

    def finish(self, distribution):
        """Record the distribution after the last update so the last loss is checkable too."""
        line = {"final": True, "distribution": np.asarray(distribution).tolist()}
        self._fh.write(json.dumps(line, sort_keys=True) + "\n")

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_trace(path):
    """Parse a trace file into ``(steps, final)``.

    ``steps`` lists the per-step dicts and ``final`` is the distribution after
    the last update (``None`` if the file has no closing line). Raises
    ``ValueError`` on malformed input.
    """
    steps, final = [], None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                step = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"line {lineno}: not JSON") from exc
            if not isinstance(step, dict):
                raise ValueError(f"line {lineno}: expected an object")
            if final is not None:
                raise ValueError(f"line {lineno}: data after the closing line")
            if step.get("final"):
                final = step["distribution"]
                continue
            missing = {"t", "loss", "distribution", "density_param", "eta"} - set(step)
            if missing:
                raise ValueError(f"line {lineno}: missing {sorted(missing)}")
            if step["t"] != len(steps):
                raise ValueError(f"line {lineno}: expected t={len(steps)}, got {step['t']}")
            steps.append(step)
    return steps, final
