"""Model bundle: every trained head plus config and provenance, one JSON file.

Floats serialize via repr (shortest round-trip), so save/load preserves
predictions bit-exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from ..errors import CorruptModel, SchemaVersionMismatch
from .mlp import MlpModel
from .ranking import RankModel
from .trees import TreeEnsembleModel

MODEL_SCHEMA = "rtlt-model-1"


@dataclass
class ModelBundle:
    bitwise: dict[str, TreeEnsembleModel] = field(default_factory=dict)  # per basis
    bitwise_mlp: dict[str, MlpModel] = field(default_factory=dict)
    bit_ensemble: TreeEnsembleModel | None = None
    signal: TreeEnsembleModel | None = None
    rank: RankModel | None = None
    tns_head: TreeEnsembleModel | None = None
    wns_head: TreeEnsembleModel | None = None
    config: dict = field(default_factory=dict)
    delay_model_hash: str = ""
    bitwise_model_kind: str = "tree"   # "tree" | "mlp"

    def to_json_obj(self) -> dict:
        return {
            "schema": MODEL_SCHEMA,
            "bitwise": {b: m.to_json_obj() for b, m in sorted(self.bitwise.items())},
            "bitwise_mlp": {b: m.to_json_obj() for b, m in sorted(self.bitwise_mlp.items())},
            "bit_ensemble": self.bit_ensemble.to_json_obj() if self.bit_ensemble else None,
            "signal": self.signal.to_json_obj() if self.signal else None,
            "rank": self.rank.to_json_obj() if self.rank else None,
            "tns_head": self.tns_head.to_json_obj() if self.tns_head else None,
            "wns_head": self.wns_head.to_json_obj() if self.wns_head else None,
            "config": self.config,
            "delay_model_hash": self.delay_model_hash,
            "bitwise_model_kind": self.bitwise_model_kind,
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "ModelBundle":
        schema = obj.get("schema")
        if schema != MODEL_SCHEMA:
            raise SchemaVersionMismatch(
                f"model schema {schema!r} not supported (expected {MODEL_SCHEMA})")
        try:
            return cls(
                bitwise={b: TreeEnsembleModel.from_json_obj(m)
                         for b, m in obj["bitwise"].items()},
                bitwise_mlp={b: MlpModel.from_json_obj(m)
                             for b, m in obj.get("bitwise_mlp", {}).items()},
                bit_ensemble=(TreeEnsembleModel.from_json_obj(obj["bit_ensemble"])
                              if obj.get("bit_ensemble") else None),
                signal=(TreeEnsembleModel.from_json_obj(obj["signal"])
                        if obj.get("signal") else None),
                rank=RankModel.from_json_obj(obj["rank"]) if obj.get("rank") else None,
                tns_head=(TreeEnsembleModel.from_json_obj(obj["tns_head"])
                          if obj.get("tns_head") else None),
                wns_head=(TreeEnsembleModel.from_json_obj(obj["wns_head"])
                          if obj.get("wns_head") else None),
                config=dict(obj.get("config", {})),
                delay_model_hash=str(obj.get("delay_model_hash", "")),
                bitwise_model_kind=str(obj.get("bitwise_model_kind", "tree")),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise CorruptModel(f"malformed model bundle: {exc}") from exc

    def dumps(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True, indent=1) + "\n"


def save_model(bundle: ModelBundle, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(bundle.dumps())


def load_model(path: str) -> ModelBundle:
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise CorruptModel(f"model file is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise CorruptModel("model file does not hold a JSON object")
    return ModelBundle.from_json_obj(obj)


__all__ = ["MODEL_SCHEMA", "ModelBundle", "save_model", "load_model"]
