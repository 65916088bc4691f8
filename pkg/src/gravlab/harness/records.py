"""Result records and their CSV / JSON-lines serialization."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

from ..errors import InvalidInputError

CSV_COLUMNS = ("scenario", "model", "observable", "value", "unit", "stderr", "flag")

# flags
EXACT = "exact"
SIMULATION = "simulation"
MONTE_CARLO = "monte-carlo"
ORDER_OF_MAGNITUDE = "order-of-magnitude"
UNSPECIFIED = "unspecified-by-model"
NOT_IN_SOURCE = "not-specified-in-paper"


def _clean(value):
    """Coerce numpy scalars and tuples to plain JSON-friendly Python types."""
    if hasattr(value, "item") and not isinstance(value, (str, bytes)):
        value = value.item()
    if isinstance(value, tuple):
        return [_clean(v) for v in value]
    if isinstance(value, list):
        return [_clean(v) for v in value]
    return value


@dataclass(frozen=True)
class Observable:
    name: str
    value: float | str
    unit: str
    stderr: float | None = None
    n_samples: int | None = None
    flag: str = EXACT

    def __post_init__(self):
        if not self.name:
            raise InvalidInputError("observable needs a name")
        if self.unit is None:
            raise InvalidInputError(f"observable {self.name!r} needs a unit ('1' if dimensionless)")
        value = _clean(self.value)
        if not isinstance(value, str):
            value = float(value)
        object.__setattr__(self, "value", value)
        if self.stderr is not None:
            object.__setattr__(self, "stderr", float(_clean(self.stderr)))
        if self.n_samples is not None:
            object.__setattr__(self, "n_samples", int(_clean(self.n_samples)))
        if self.flag in (SIMULATION, MONTE_CARLO) and (self.stderr is None or self.n_samples is None):
            raise InvalidInputError(f"stochastic observable {self.name!r} needs stderr and n_samples")

    def to_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "unit": self.unit, "stderr": self.stderr,
                "n_samples": self.n_samples, "flag": self.flag}

    @classmethod
    def from_dict(cls, d: Mapping) -> "Observable":
        return cls(d["name"], d["value"], d["unit"], d.get("stderr"), d.get("n_samples"),
                   d.get("flag", EXACT))


@dataclass(frozen=True)
class ResultRecord:
    scenario: str
    model: str
    inputs: Mapping[str, Any] = field(default_factory=dict)
    observables: tuple[Observable, ...] = ()
    provenance: str = ""

    def __post_init__(self):
        obs = tuple(sorted(self.observables, key=lambda o: o.name))
        names = [o.name for o in obs]
        if len(set(names)) != len(names):
            raise InvalidInputError(f"duplicate observable names in {names}")
        object.__setattr__(self, "observables", obs)
        object.__setattr__(self, "inputs", {str(k): _clean(v) for k, v in sorted(self.inputs.items())})

    def get(self, name: str) -> Observable:
        for o in self.observables:
            if o.name == name:
                return o
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"scenario": self.scenario, "model": self.model, "inputs": dict(self.inputs),
                "observables": [o.to_dict() for o in self.observables],
                "provenance": self.provenance}

    @classmethod
    def from_dict(cls, d: Mapping) -> "ResultRecord":
        return cls(d["scenario"], d["model"], d.get("inputs", {}),
                   tuple(Observable.from_dict(o) for o in d.get("observables", [])),
                   d.get("provenance", ""))


def sort_records(records: Iterable[ResultRecord]) -> list[ResultRecord]:
    return sorted(records, key=lambda r: (r.scenario, r.model, json.dumps(r.to_dict(), sort_keys=True)))


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(float(x))


def to_csv(records: Sequence[ResultRecord]) -> str:
    rows = []
    for r in records:
        for o in r.observables:
            rows.append((r.scenario, r.model, o.name, _fmt(o.value), o.unit, _fmt(o.stderr), o.flag))
    rows.sort(key=lambda row: row[:3])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    w.writerows(rows)
    return buf.getvalue()


def to_jsonl(records: Sequence[ResultRecord]) -> str:
    return "".join(json.dumps(r.to_dict(), sort_keys=True) + "\n" for r in sort_records(records))


def parse_jsonl(text: str) -> list[ResultRecord]:
    return [ResultRecord.from_dict(json.loads(line)) for line in text.splitlines() if line.strip()]


def parse_csv(text: str) -> list[dict[str, str]]:
    return list(csv.DictReader(io.StringIO(text)))


def render(records: Sequence[ResultRecord], fmt: str) -> str:
    if fmt == "csv":
        return to_csv(records)
    if fmt == "jsonl":
        return to_jsonl(records)
    raise InvalidInputError(f"unknown format {fmt!r}")


def emit(records: Sequence[ResultRecord], fmt: str, path: str | None = None) -> str:
    """Serialize and write ``records``; returns the text. ``path=None`` writes nothing."""
    text = render(records, fmt)
    if path is not None:
        try:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise OSError(exc.errno, f"cannot write {path}: {exc.strerror}") from exc
    return text
