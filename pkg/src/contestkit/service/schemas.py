"""Request and response bodies for the HTTP facade.

Field names here are the wire contract; they mirror the library to_dict
outputs one-to-one so endpoint responses stay comparable to direct calls.
"""

from typing import Dict, List, Optional

from pydantic import BaseModel, Field


class ErrorBody(BaseModel):
    code: str
    message: str
    details: dict = Field(default_factory=dict)


class CaseSummary(BaseModel):
    case_id: str
    model_id: str
    feature_names: List[str]
    features: Dict[str, float]
    probability: float
    decision: int
    tau: float
    oracle_available: bool
    budget: int
    budget_remaining: int


class WhatIfBody(BaseModel):
    inputs: List[List[float]]


class WhatIfResult(BaseModel):
    probability: float
    decision: int


class WhatIfResponse(BaseModel):
    case_id: str
    results: List[WhatIfResult]
    budget_remaining: int


class WitnessModel(BaseModel):
    level: str
    x: List[float]
    model_value: float
    oracle_value: float


class NeighborhoodModel(BaseModel):
    center: List[float]
    epsilon: float
    norm: str
    scales: Optional[List[float]] = None


class ReportModel(BaseModel):
    normative: Optional[bool] = None
    epistemic: Optional[bool] = None
    somewhere_contestable: Optional[bool] = None
    somewhere_inaccurate: Optional[bool] = None
    witnesses: List[WitnessModel]
    neighborhood: NeighborhoodModel
    resolution: float
    tolerance: float


class HypothesisModel(BaseModel):
    name: str
    satisfied: bool
    value: Optional[float] = None


class VerdictModel(BaseModel):
    conflict_found: bool
    implied_level: str
    theorem_hypotheses: List[HypothesisModel]
    method: str
    assumption_disclaimer: str


class CounterfactualModel(BaseModel):
    x_c: List[float]
    changed_feature: int
    feature_name: Optional[str] = None
    old_value: float
    new_value: float
    distance: float
    decision_flip: List[int]


class SurrogateModel(BaseModel):
    weights: Dict[str, float]
    intercept: float
    local_faithfulness: float
    n_samples: int
    seed: int
    distribution: str


class ConditionModel(BaseModel):
    feature: int
    op: str
    threshold: float


class AnchorModel(BaseModel):
    rule: str
    conditions: List[ConditionModel]
    pinned_decision: int
    support: int
    precision: Optional[float] = None
    delta_slack: Optional[float] = None


class MultiplicityModel(BaseModel):
    theta_hat: float
    positive_fraction: float
    negative_fraction: float
    n: int


class MultiplicityResponse(BaseModel):
    case_id: str
    estimate: MultiplicityModel
    provenance: str
    caption: str


class CounterfactualBlock(BaseModel):
    suggestion: CounterfactualModel
    continuity_verdict: VerdictModel
    provenance: str


class SurrogateBlock(BaseModel):
    explanation: SurrogateModel
    monotonicity_verdict: Optional[VerdictModel] = None
    provenance: str


class AnchorBlock(BaseModel):
    anchor: AnchorModel
    reason_verdict: Optional[VerdictModel] = None
    provenance: str


class ReportBlock(BaseModel):
    report: ReportModel
    provenance: str


class EvidenceResponse(BaseModel):
    case_id: str
    report: Optional[ReportBlock] = None
    counterfactual: Optional[CounterfactualBlock] = None
    surrogate: Optional[SurrogateBlock] = None
    anchor: Optional[AnchorBlock] = None
    multiplicity: MultiplicityResponse


class ContestBody(BaseModel):
    features: Dict[str, float]
    proof: str = ""


class ContestResponse(BaseModel):
    case_id: str
    kind: str
    original_decision: int
    revised_decision: int
    epistemically_contestable: bool
    rationale: dict
