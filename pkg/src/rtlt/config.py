"""Run configuration and provenance.

Config files are INI-style with one section per module; CLI flags
override file values. Every output artifact records the config verbatim
(its hash) so runs are reproducible.
"""

from __future__ import annotations

import configparser
import hashlib
import json
from dataclasses import asdict, dataclass, field, replace

DEFAULT_BASES = ("sog", "aig", "aimg", "xag")
DEFAULT_GROUP_WEIGHTS = (5.0, 2.0, 1.0, 0.5)


@dataclass(frozen=True)
class RunConfig:
    profile: str = "default"
    clock_period: float | None = None           # None -> take from labels
    bases: tuple[str, ...] = DEFAULT_BASES
    seed: int = 0
    liberty_path: str | None = None

    # cone-sampler
    beta: float = 0.5
    k_min: int = 2
    k_max: int = 32

    # boosted-tree learners
    n_trees: int = 100
    max_depth: int = 45
    learning_rate: float = 0.1
    min_samples_leaf: int = 5

    # pairwise ranker
    rank_n_trees: int = 100
    rank_max_depth: int = 30

    # bit-wise model family
    bitwise_model: str = "tree"                 # "tree" | "mlp"
    mlp_hidden: int = 512
    mlp_layers: int = 3
    mlp_epochs: int = 300
    mlp_lr: float = 1e-3

    # reporting
    group_weights: tuple[float, ...] = DEFAULT_GROUP_WEIGHTS

    def to_json_obj(self) -> dict:
        obj = asdict(self)
        obj["bases"] = list(self.bases)
        obj["group_weights"] = list(self.group_weights)
        return obj

    def config_hash(self) -> str:
        return hashlib.sha256(
            json.dumps(self.to_json_obj(), sort_keys=True).encode()).hexdigest()[:16]

    def with_overrides(self, **kwargs) -> "RunConfig":
        kwargs = {k: v for k, v in kwargs.items() if v is not None}
        if "bases" in kwargs and not isinstance(kwargs["bases"], tuple):
            kwargs["bases"] = tuple(kwargs["bases"])
        return replace(self, **kwargs)


_SECTION_FIELDS = {
    "run": ("profile", "clock_period", "seed", "liberty_path", "bases"),
    "sampler": ("beta", "k_min", "k_max"),
    "learner": ("n_trees", "max_depth", "learning_rate", "min_samples_leaf",
                "bitwise_model"),
    "rank": ("rank_n_trees", "rank_max_depth"),
    "mlp": ("mlp_hidden", "mlp_layers", "mlp_epochs", "mlp_lr"),
    "reporting": ("group_weights",),
}

_FLOAT_FIELDS = {"clock_period", "beta", "learning_rate", "mlp_lr"}
_INT_FIELDS = {"seed", "k_min", "k_max", "n_trees", "max_depth", "min_samples_leaf",
               "rank_n_trees", "rank_max_depth", "mlp_hidden", "mlp_layers",
               "mlp_epochs"}


def load_config(path: str) -> RunConfig:
    cp = configparser.ConfigParser()
    with open(path) as fh:
        cp.read_file(fh)
    kwargs = {}
    for section, names in _SECTION_FIELDS.items():
        if not cp.has_section(section):
            continue
        for name in names:
            if name not in cp[section]:
                continue
            raw = cp[section][name]
            if name == "bases":
                kwargs[name] = tuple(b.strip() for b in raw.split(",") if b.strip())
            elif name == "group_weights":
                kwargs[name] = tuple(float(x) for x in raw.split(","))
            elif name in _FLOAT_FIELDS:
                kwargs[name] = float(raw)
            elif name in _INT_FIELDS:
                kwargs[name] = int(raw)
            else:
                kwargs[name] = raw
    return RunConfig(**kwargs)


def file_sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def provenance_record(command: str, config: RunConfig, inputs: list[str],
                      outputs: list[str]) -> dict:
    return {
        "command": command,
        "config_hash": config.config_hash(),
        "config": config.to_json_obj(),
        "inputs": {p: file_sha256(p) for p in sorted(inputs)},
        "outputs": sorted(outputs),
    }


__all__ = ["RunConfig", "load_config", "file_sha256", "provenance_record",
           "DEFAULT_BASES", "DEFAULT_GROUP_WEIGHTS"]
