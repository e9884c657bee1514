"""Check records and the JSON report written by the command-line front end."""
from __future__ import annotations

import json
import math
import platform
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass
class Check:
    name: str
    value: float
    threshold: float
    passed: bool
    kind: str = "max"  # "max": value <= threshold, "min": value >= threshold, "range"
    note: str = ""

    def to_dict(self):
        d = {"name": self.name, "value": _num(self.value), "threshold": _num(self.threshold),
             "pass": bool(self.passed), "kind": self.kind}
        if self.note:
            d["note"] = self.note
        return d


def _num(v):
    if isinstance(v, (list, tuple)):
        return [_num(x) for x in v]
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


def jsonable(obj):
    """Convert numpy scalars/arrays and complex numbers to JSON-friendly values."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [_num(obj.real), _num(obj.imag)]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    return obj


@dataclass
class Report:
    command: str
    config: dict
    checks: list = field(default_factory=list)
    results: dict = field(default_factory=dict)

    def check_max(self, name, value, threshold, note=""):
        value = float(value)
        self.checks.append(Check(name, value, threshold, bool(value <= threshold), "max", note))

    def check_min(self, name, value, threshold, note=""):
        value = float(value)
        self.checks.append(Check(name, value, threshold, bool(value >= threshold), "min", note))

    def check_range(self, name, value, lo, hi, note=""):
        value = float(value)
        self.checks.append(Check(name, value, [lo, hi], bool(lo <= value <= hi), "range", note))

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        names = [c.name for c in self.checks]
        if len(names) != len(set(names)):
            raise ValueError("duplicate check names in report")
        cfg = {k: v for k, v in self.config.items() if not k.startswith("_")}
        return {"command": self.command, "config": jsonable(cfg), "passed": self.passed,
                "checks": [c.to_dict() for c in self.checks], "results": jsonable(self.results)}

    def write(self, out_dir) -> Path:
        """Write ``report.json`` (deterministic) and ``metadata.json`` (environment, time)."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        path = out / "report.json"
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")
        (out / "metadata.json").write_text(json.dumps(metadata(), indent=2, sort_keys=True) + "\n")
        return path


def metadata() -> dict:
    from . import __version__, _kernels
    return {"created": time.strftime("%Y-%m-%dT%H:%M:%S%z"), "python": platform.python_version(),
            "numpy": np.__version__, "platform": platform.platform(),
            "kernel_backend": _kernels.BACKEND, "package_version": __version__}
