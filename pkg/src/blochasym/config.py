"""Run configuration files (YAML) shared by all CLI commands."""
from __future__ import annotations

import copy
from dataclasses import asdict, dataclass, field

import numpy as np
import yaml

from .errors import ConfigParse
from .lattice import LatticeBasis, make_lattice
from .potential import FourierPotential, cosine_potential, make_potential

FORMATS = ("csv", "json")


@dataclass
class RunConfig:
    basis: list = field(default_factory=lambda: [[1.0, 0.0], [0.0, 1.0]])
    potential: dict = field(default_factory=lambda: {"cosine": 0.1})
    constants: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    format: str = "csv"
    output: str | None = None
    workers: int | None = None

    def __post_init__(self):
        self.validate()

    def validate(self):
        try:
            b = np.asarray(self.basis, dtype=float)
        except (TypeError, ValueError) as exc:
            raise ConfigParse(f"field 'basis': {exc}") from exc
        if b.ndim != 2 or b.shape[0] != b.shape[1]:
            raise ConfigParse("field 'basis': expected a square matrix")
        if self.format not in FORMATS:
            raise ConfigParse(f"field 'format': expected one of {FORMATS}, got {self.format!r}")
        if not isinstance(self.potential, dict):
            raise ConfigParse("field 'potential': expected a mapping")
        for name, val in self.constants.items():
            if name.endswith("cap") and (not isinstance(val, int) or val <= 0):
                raise ConfigParse(f"field 'constants.{name}': caps must be positive integers")
        if self.workers is not None and (not isinstance(self.workers, int) or self.workers <= 0):
            raise ConfigParse("field 'workers': must be a positive integer")

    @property
    def dim(self) -> int:
        return len(self.basis)

    def lattice(self) -> LatticeBasis:
        return make_lattice(np.asarray(self.basis, dtype=float))

    def build_potential(self, lat: LatticeBasis | None = None) -> FourierPotential:
        lat = self.lattice() if lat is None else lat
        pot = self.potential
        if "cosine" in pot:
            return cosine_potential(lat, float(pot["cosine"]))
        rows = []
        for i, entry in enumerate(pot.get("entries", [])):
            try:
                rows.append((entry["k"], float(entry.get("re", 0.0)), float(entry.get("im", 0.0))))
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigParse(f"field 'potential.entries[{i}]': {exc}") from exc
        return make_potential(lat, rows)

    def to_dict(self) -> dict:
        return copy.deepcopy(asdict(self))

    def dump(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=True)

    def merged(self, **overrides) -> "RunConfig":
        """Copy with top-level fields and ``params`` entries replaced (None values skipped)."""
        d = self.to_dict()
        for k, v in overrides.items():
            if v is None:
                continue
            if k in d and k != "params":
                d[k] = v
            else:
                d["params"][k] = v
        return RunConfig(**d)


def parse_config(text: str) -> RunConfig:
    try:
        data = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigParse(f"malformed config{where}: {getattr(exc, 'problem', exc)}") from exc
    if not isinstance(data, dict):
        raise ConfigParse("config must be a mapping at top level")
    known = set(RunConfig.__dataclass_fields__)
    unknown = set(data) - known
    if unknown:
        raise ConfigParse(f"unknown field(s): {', '.join(sorted(unknown))}")
    for name in ("potential", "constants", "params"):
        if name in data and not isinstance(data[name], dict):
            raise ConfigParse(f"field '{name}': expected a mapping")
    return RunConfig(**data)


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
