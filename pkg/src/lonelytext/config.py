"""Run configuration: one nested document covering every pipeline stage."""

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .errors import ContractError


@dataclass
class IngestSection:
    kind: str = "RT"
    threshold: float = 50.0
    tz_offset_hours: float = 0.0
    sent_only: bool = False
    messages_format: str = None


@dataclass
class PreprocessSection:
    stemmer: str = "porter"
    min_token_len: int = 2
    min_df: int = 2
    max_df: float = 0.95
    jargon: str = None
    stopwords: str = None
    max_repeat: int = 2


@dataclass
class FeatureSection:
    kind: str = "unigram"
    weighting: str = "tfidf"
    n_topics: int = 10


@dataclass
class LdaSection:
    alpha: float = None
    eta: float = None
    max_iter: int = 100
    tol: float = 1e-4
    restarts: int = 1


@dataclass
class SvmSection:
    C: float = 1.0
    cost_factor: object = "auto"
    max_epochs: int = 1000
    tol: float = 1e-3


@dataclass
class EvalSection:
    folds: int = 10
    stratified: bool = True
    group_by_participant: bool = False
    confidence: float = 0.95


@dataclass
class SweepSection:
    t_min: int = 5
    t_max: int = 200
    t_step: int = 5


@dataclass
class RunConfig:
    command: str = None
    seed: int = 0
    inputs: dict = field(default_factory=dict)
    ingest: IngestSection = field(default_factory=IngestSection)
    preprocess: PreprocessSection = field(default_factory=PreprocessSection)
    features: FeatureSection = field(default_factory=FeatureSection)
    lda: LdaSection = field(default_factory=LdaSection)
    svm: SvmSection = field(default_factory=SvmSection)
    eval: EvalSection = field(default_factory=EvalSection)
    sweep: SweepSection = field(default_factory=SweepSection)

    @classmethod
    def from_dict(cls, d):
        """Build from a nested mapping; unknown keys raise ContractError."""
        top = {f.name: f for f in fields(cls)}
        unknown = set(d) - set(top)
        if unknown:
            raise ContractError(f"unknown config keys: {', '.join(sorted(unknown))}")
        cfg = cls()
        for key, value in d.items():
            current = getattr(cfg, key)
            if hasattr(current, "__dataclass_fields__"):
                if not isinstance(value, dict):
                    raise ContractError(f"config section {key!r} must be a mapping")
                names = {f.name for f in fields(current)}
                bad = set(value) - names
                if bad:
                    raise ContractError(
                        f"unknown keys in section {key!r}: {', '.join(sorted(bad))}")
                for k, v in value.items():
                    setattr(current, k, v)
            else:
                setattr(cfg, key, value)
        return cfg

    @classmethod
    def load(cls, path):
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ContractError(f"{path}: invalid JSON config ({exc.msg})") from None
        if not isinstance(data, dict):
            raise ContractError(f"{path}: config must be a JSON object")
        return cls.from_dict(data)

    def to_dict(self):
        return asdict(self)

    def write(self, out_dir, name="resolved-config.json"):
        path = Path(out_dir) / name
        path.write_text(json.dumps(self.to_dict(), indent=1) + "\n", encoding="utf-8")
        return path
