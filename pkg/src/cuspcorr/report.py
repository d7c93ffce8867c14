"""Experiment configuration, check records and deterministic report files."""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .errors import ParameterError, UsageError

STATUSES = ("pass", "fail", "soft", "info")
CORE_KEYS = ("experiment", "weight", "N", "X", "H", "theta", "A", "eps", "variant", "seed")


def coerce_value(text: str):
    t = text.strip()
    for conv in (int, float):
        try:
            return conv(t)
        except ValueError:
            pass
    if t.lower() in ("true", "false"):
        return t.lower() == "true"
    return t


def parse_config_text(text: str) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"config line {lineno}: expected key = value, got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if not key:
            raise UsageError(f"config line {lineno}: empty key")
        out[key] = coerce_value(value)
    return out


def load_config(path) -> dict:
    return parse_config_text(Path(path).read_text())


@dataclass
class ExperimentConfig:
    experiment: str
    weight: int = 12
    N: int | None = None
    X: int | None = None
    H: int | None = None
    theta: float | None = None
    A: float = 1.0
    eps: float = 0.05
    variant: str = "theorem1"
    seed: int = 0
    params: dict = field(default_factory=dict)

    @classmethod
    def from_mapping(cls, mapping: dict) -> "ExperimentConfig":
        if "experiment" not in mapping:
            raise UsageError("no experiment named")
        core = {k: mapping[k] for k in CORE_KEYS if k in mapping and mapping[k] is not None}
        extra = {k: v for k, v in mapping.items() if k not in CORE_KEYS and v is not None}
        cfg = cls(**core, params=dict(sorted(extra.items())))
        cfg.resolve()
        return cfg

    def resolve(self) -> None:
        if self.theta is not None:
            if not 0 < self.theta < 1:
                raise ParameterError(f"theta must lie in (0, 1), got {self.theta}")
            # without X, theta is left for sweeps that apply it per X
            if self.H is None and self.X is not None:
                self.H = math.ceil(self.X**self.theta)
        if self.H is not None and self.X is not None and not 1 <= self.H <= self.X - 1:
            raise ParameterError(f"H={self.H} must lie in [1, X-1] for X={self.X}")

    def get(self, key: str, default):
        v = self.params.get(key, default)
        if isinstance(default, bool):
            return bool(v)
        if isinstance(default, int) and not isinstance(v, bool):
            return int(v)
        if isinstance(default, float):
            return float(v)
        return v

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class CheckRecord:
    name: str
    status: str
    value: float | None = None
    envelope: float | None = None
    ratio: float | None = None
    ok: bool = True
    provenance: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ParameterError(f"unknown status {self.status!r}")


def hard(name, ok, value=None, envelope=None, *, module, op, params=None, **details) -> CheckRecord:
    return CheckRecord(name, "pass" if ok else "fail", _num(value), _num(envelope),
                       _ratio(value, envelope), bool(ok), _prov(module, op, params), _clean(details))


def soft(name, ok, value=None, envelope=None, *, module, op, params=None, **details) -> CheckRecord:
    return CheckRecord(name, "soft", _num(value), _num(envelope), _ratio(value, envelope), bool(ok),
                       _prov(module, op, params), _clean(details))


def info(name, value=None, *, module, op, params=None, **details) -> CheckRecord:
    return CheckRecord(name, "info", _num(value), None, None, True, _prov(module, op, params), _clean(details))


def _prov(module, op, params):
    return {"module": module, "operation": op, "parameters": _clean(params or {})}


def _num(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def _ratio(value, env):
    if value is None or env is None or not env:
        return None
    return _num(float(value) / float(env))


def _clean(obj):
    """Plain JSON types only: numpy scalars become Python numbers, tuples lists."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        obj = obj.item()
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    return obj


@dataclass
class ExperimentReport:
    config: dict
    records: list = field(default_factory=list)
    tables: dict = field(default_factory=dict)  # cache fingerprints: name -> {weight, ncoeffs, sha256}

    @property
    def summary(self) -> dict:
        counts = {s: 0 for s in STATUSES}
        for r in self.records:
            counts[r.status] += 1
        counts["soft_violations"] = sum(1 for r in self.records if r.status == "soft" and not r.ok)
        return counts

    @property
    def passed(self) -> bool:
        return all(r.status != "fail" for r in self.records)

    def failures(self) -> list[str]:
        return [r.name for r in self.records if r.status == "fail"]

    def to_dict(self) -> dict:
        return {
            "config": _clean(self.config),
            "records": [_clean(asdict(r)) for r in self.records],
            "tables": _clean(self.tables),
            "summary": self.summary,
            "passed": self.passed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, allow_nan=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ExperimentReport":
        d = json.loads(text)
        return cls(d["config"], [CheckRecord(**r) for r in d["records"]], d["tables"])


def fingerprint(form) -> dict:
    from .cache import encode

    return {"weight": form.weight, "ncoeffs": form.ncoeffs,
            "sha256": hashlib.sha256(encode(form.weight, form.a)).hexdigest()}


def new_run_dir(root, experiment: str) -> Path:
    """root/<experiment>-NNNN, the first unused index; never reuses a directory."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    i = 1
    while True:
        d = root / f"{experiment}-{i:04d}"
        try:
            d.mkdir()
            return d
        except FileExistsError:
            i += 1


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, float) else v for v in row])
    return path
