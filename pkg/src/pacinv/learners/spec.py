"""Declarative learner descriptions used by the CLI and the experiment harness."""
from __future__ import annotations

from dataclasses import dataclass, field

from ..core import Problem
from ..exceptions import ParamOutOfRange
from . import estimators as est

KINDS = (
    "ERM", "DA", "ERM_INV", "OIG_INVARIANT", "OIG_RELAXED", "OIG_AGNOSTIC_WEAK", "OIG_ETA",
    "CONF_BOOSTED", "ALPHA_BOOST", "AGNOSTIC_COMPRESS", "ADAPTIVE_RELAXED", "ADAPTIVE_AGNOSTIC",
)


@dataclass(frozen=True)
class LearnerSpec:
    kind: str
    params: dict = field(default_factory=dict)
    label: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParamOutOfRange(f"unknown learner kind {self.kind!r}")
        tie = self.params.get("tie_rule", "first_index")
        if tie not in ("first_index", "uniform_random"):
            raise ParamOutOfRange(f"unknown tie rule {tie!r}")
        delta = self.params.get("delta")
        if delta is not None and not 0 < delta <= 1:
            raise ParamOutOfRange("delta must lie in (0, 1]")

    @property
    def name(self) -> str:
        if self.label:
            return self.label
        tie = self.params.get("tie_rule")
        return f"{self.kind}[{tie}]" if tie else self.kind

    @classmethod
    def from_dict(cls, doc: dict) -> LearnerSpec:
        doc = dict(doc)
        kind = doc.pop("kind")
        label = doc.pop("label", None)
        return cls(kind, doc, label)

    def to_dict(self) -> dict:
        out = {"kind": self.kind, **self.params}
        if self.label:
            out["label"] = self.label
        return out

    def build(self, problem: Problem, random_state=None):
        """A fresh unfitted estimator for ``problem``."""
        p = self.params
        k = self.kind
        if k in ("ERM", "DA", "ERM_INV"):
            cls = {"ERM": est.ERMClassifier, "DA": est.DAClassifier, "ERM_INV": est.ERMInvClassifier}[k]
            return cls(problem, p.get("tie_rule", "first_index"), random_state)
        if k == "OIG_INVARIANT":
            return est.OneInclusionClassifier(problem, "invariant")
        if k in ("OIG_RELAXED", "OIG_AGNOSTIC_WEAK"):
            return est.OneInclusionClassifier(problem, "orbit")
        if k == "OIG_ETA":
            return est.OneInclusionClassifier(problem, "eta", p["eta"])
        if k == "CONF_BOOSTED":
            inner = LearnerSpec.from_dict(p["inner"]).build(problem, random_state)
            return est.ConfidenceBoostedClassifier(inner, p.get("n_rounds", 1), p.get("round_size"),
                                                   p.get("validation_size", 0))
        if k == "ALPHA_BOOST":
            return est.AlphaBoostClassifier(problem, p.get("k"), p.get("rounds_cap"), random_state)
        if k == "AGNOSTIC_COMPRESS":
            return est.AgnosticCompressionClassifier(problem, p.get("k"), p.get("rounds_cap"), random_state)
        if k == "ADAPTIVE_RELAXED":
            return est.AdaptiveRelaxedClassifier(problem, p.get("delta"), p.get("split"), p.get("n_rounds", 1),
                                                 p.get("validation_size", 0), random_state)
        return est.AdaptiveAgnosticClassifier(problem, p.get("delta"), p.get("split"), p.get("k"), random_state)
