"""JSON experiment configuration.

Example::

    {
      "dataset": {"name": "six_rankers"},
      "policies": [{"name": "RMED1"}, {"name": "RMED2", "alpha": 3}, {"name": "RUCB"}],
      "horizon": 100000,
      "runs": 100,
      "base_seed": 0,
      "output": "results"
    }

A dataset is either ``{"name": <builder>, ...params}`` or ``{"csv": <path>}``;
relative CSV paths resolve against the config file's directory. A list for
``c`` in an RMED policy expands into one policy per value.
"""
from __future__ import annotations

import dataclasses
import json
import re
from dataclasses import dataclass
from pathlib import Path

from .policies import RmedConfig, RucbConfig
from .preference import DATASETS, PreferenceMatrix, build, from_csv

RMED_DEFAULTS = {"c": 0.3, "eps": 0.01}
RMED2_ALPHA = 3.0
RUCB_ALPHA = 0.51

_POLICY_KEYS = {
    "RMED1": {"name", "label", "c", "eps", "paper_sign"},
    "RMED2": {"name", "label", "c", "eps", "alpha", "paper_sign"},
    "RMED2FH": {"name", "label", "c", "eps", "alpha", "paper_sign"},
    "RUCB": {"name", "label", "alpha"},
}


class ConfigError(ValueError):
    def __init__(self, errors: list[str]):
        self.errors = errors
        super().__init__("\n".join(errors))


@dataclass(frozen=True)
class PolicyEntry:
    label: str
    name: str
    params: dict

    def to_config(self, horizon: int) -> RmedConfig | RucbConfig:
        if self.name == "RUCB":
            return RucbConfig(alpha=self.params["alpha"])
        kw = dict(self.params)
        if self.name == "RMED2FH":
            kw["horizon"] = horizon
        return RmedConfig(variant=self.name, **kw)

    def to_dict(self) -> dict:
        return {"name": self.name, "label": self.label, **self.params}


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: dict
    policies: tuple[PolicyEntry, ...]
    horizon: int
    runs: int
    base_seed: int = 0
    output: str = "results"
    checkpoints: tuple[int, ...] | None = None
    base_dir: str = "."

    def to_dict(self) -> dict:
        d = {
            "dataset": dict(self.dataset),
            "policies": [p.to_dict() for p in self.policies],
            "horizon": self.horizon,
            "runs": self.runs,
            "base_seed": self.base_seed,
            "output": self.output,
        }
        if self.checkpoints is not None:
            d["checkpoints"] = list(self.checkpoints)
        return d

    def dataset_id(self) -> str:
        ds = self.dataset
        if "csv" in ds:
            return Path(ds["csv"]).stem
        params = "_".join(f"{k}{v}" for k, v in sorted(ds.items()) if k != "name")
        return ds["name"] + (f"_{params}" if params else "")

    def load_matrix(self) -> PreferenceMatrix:
        ds = self.dataset
        if "csv" in ds:
            path = Path(ds["csv"])
            if not path.is_absolute():
                path = Path(self.base_dir) / path
            return from_csv(path.read_text(encoding="utf-8"))
        params = {k: v for k, v in ds.items() if k != "name"}
        return build(ds["name"], **params)


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def _is_num(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _fmt(x) -> str:
    return format(x, "g")


def _parse_policy(i: int, raw, errors: list[str]) -> list[PolicyEntry]:
    where = f"policies[{i}]"
    if not isinstance(raw, dict):
        errors.append(f"{where}: expected an object")
        return []
    name = raw.get("name")
    if name not in _POLICY_KEYS:
        errors.append(f"{where}: name must be one of {sorted(_POLICY_KEYS)}, got {name!r}")
        return []
    unknown = set(raw) - _POLICY_KEYS[name]
    if unknown:
        errors.append(f"{where}: unknown keys {sorted(unknown)} for {name}")
    if name == "RUCB":
        alpha = raw.get("alpha", RUCB_ALPHA)
        if not _is_num(alpha) or not alpha > 0:
            errors.append(f"{where}: alpha must be a positive number")
            return []
        return [PolicyEntry(raw.get("label", name), name, {"alpha": float(alpha)})]

    params = {}
    for key, default in RMED_DEFAULTS.items():
        params[key] = raw.get(key, default)
    if name != "RMED1":
        params["alpha"] = raw.get("alpha", RMED2_ALPHA)
        if not _is_num(params["alpha"]) or not params["alpha"] > 0:
            errors.append(f"{where}: alpha must be a positive number")
            return []
        params["alpha"] = float(params["alpha"])
    paper_sign = raw.get("paper_sign", False)
    if not isinstance(paper_sign, bool):
        errors.append(f"{where}: paper_sign must be true or false")
    elif paper_sign:
        params["paper_sign"] = True
    if not _is_num(params["eps"]) or params["eps"] < 0:
        errors.append(f"{where}: eps must be a nonnegative number")
        return []
    params["eps"] = float(params["eps"])

    cs = params["c"]
    sweep = isinstance(cs, list)
    if not sweep:
        cs = [cs]
    if not cs or not all(_is_num(c) and c >= 0 for c in cs):
        errors.append(f"{where}: c must be a nonnegative number or a nonempty list of them")
        return []
    label = raw.get("label", name)
    if not isinstance(label, str) or not label:
        errors.append(f"{where}: label must be a nonempty string")
        return []
    out = []
    for c in cs:
        p = dict(params, c=float(c))
        out.append(PolicyEntry(f"{label}_c{_fmt(float(c))}" if sweep else label, name, p))
    return out


def parse_config(obj, base_dir: str = ".") -> ExperimentConfig:
    """Validate a decoded JSON object; every problem is reported in one ConfigError."""
    errors: list[str] = []
    if not isinstance(obj, dict):
        raise ConfigError(["config must be a JSON object"])
    unknown = set(obj) - {"dataset", "policies", "horizon", "runs", "base_seed", "output", "checkpoints"}
    if unknown:
        errors.append(f"unknown top-level keys {sorted(unknown)}")

    dataset = obj.get("dataset")
    if not isinstance(dataset, dict):
        errors.append("dataset: expected an object with 'name' or 'csv'")
        dataset = {}
    elif "csv" in dataset:
        if set(dataset) != {"csv"} or not isinstance(dataset["csv"], str):
            errors.append("dataset: a CSV dataset takes exactly one string key 'csv'")
    elif dataset.get("name") not in DATASETS:
        errors.append(f"dataset.name must be one of {sorted(DATASETS)}, got {dataset.get('name')!r}")
    else:
        info = DATASETS[dataset["name"]]
        extra = set(dataset) - {"name"} - set(info.params)
        if extra:
            errors.append(f"dataset: unknown parameters {sorted(extra)} for {info.name}")
        dataset = dict(dataset)
        for key, default in info.params.items():
            if key not in dataset:
                if default is None:
                    errors.append(f"dataset: {info.name} requires parameter {key!r}")
                else:
                    dataset[key] = default

    horizon = obj.get("horizon")
    if not _is_int(horizon) or horizon < 1:
        errors.append("horizon must be an integer >= 1")
    runs = obj.get("runs", 1)
    if not _is_int(runs) or runs < 1:
        errors.append("runs must be an integer >= 1")
    base_seed = obj.get("base_seed", 0)
    if not _is_int(base_seed) or not 0 <= base_seed < 2**64:
        errors.append("base_seed must be an integer in [0, 2^64)")
    output = obj.get("output", "results")
    if not isinstance(output, str) or not output:
        errors.append("output must be a nonempty path string")
    checkpoints = obj.get("checkpoints")
    if checkpoints is not None:
        if (
            not isinstance(checkpoints, list)
            or not checkpoints
            or not all(_is_int(c) and c >= 1 for c in checkpoints)
            or any(b <= a for a, b in zip(checkpoints, checkpoints[1:]))
        ):
            errors.append("checkpoints must be a strictly increasing list of positive integers")
        elif _is_int(horizon) and checkpoints[-1] > horizon:
            errors.append("checkpoints must not exceed the horizon")
        else:
            checkpoints = tuple(checkpoints)

    policies: list[PolicyEntry] = []
    raw_policies = obj.get("policies")
    if not isinstance(raw_policies, list) or not raw_policies:
        errors.append("policies must be a nonempty list")
    else:
        for i, raw in enumerate(raw_policies):
            policies.extend(_parse_policy(i, raw, errors))
    labels = [p.label for p in policies]
    dupes = sorted({x for x in labels if labels.count(x) > 1})
    if dupes:
        errors.append(f"duplicate policy labels {dupes}; set distinct 'label' fields")
    bad = [x for x in labels if not re.fullmatch(r"[A-Za-z0-9_.+-]+", x)]
    if bad:
        errors.append(f"policy labels may only use letters, digits and _.+-: {bad}")

    if not errors and _is_int(horizon):
        for p in policies:
            try:
                p.to_config(horizon)
            except ValueError as e:
                errors.append(f"policy {p.label}: {e}")

    if errors:
        raise ConfigError(errors)
    return ExperimentConfig(
        dataset=dataset,
        policies=tuple(policies),
        horizon=horizon,
        runs=runs,
        base_seed=base_seed,
        output=output,
        checkpoints=checkpoints,
        base_dir=base_dir,
    )


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError([f"{path}:{e.lineno}:{e.colno}: invalid JSON: {e.msg}"]) from None
    return parse_config(obj, base_dir=str(path.parent))


PRESETS = {
    # f(K) = c K^1.01 sweep on a small total-order dataset
    "c-sweep": {
        "dataset": {"name": "arithmetic", "k": 8},
        "policies": [{"name": "RMED1", "c": [0.0, 0.1, 0.3, 1.0]}],
        "horizon": 100000,
        "runs": 50,
        "base_seed": 0,
        "output": "results-c-sweep",
    },
    "six-rankers": {
        "dataset": {"name": "six_rankers"},
        "policies": [
            {"name": "RMED1"},
            {"name": "RMED2"},
            {"name": "RMED2FH"},
            {"name": "RUCB"},
        ],
        "horizon": 100000,
        "runs": 100,
        "base_seed": 0,
        "output": "results-six-rankers",
    },
    "cyclic": {
        "dataset": {"name": "cyclic"},
        "policies": [{"name": "RMED1"}, {"name": "RMED2"}, {"name": "RMED2FH"}, {"name": "RUCB"}],
        "horizon": 1000000,
        "runs": 50,
        "base_seed": 0,
        "output": "results-cyclic",
    },
}


def replace(cfg: ExperimentConfig, **changes) -> ExperimentConfig:
    return dataclasses.replace(cfg, **changes)
