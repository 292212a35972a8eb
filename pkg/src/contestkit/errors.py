"""Error taxonomy shared by the library, the service, and the CLI."""


class ContestkitError(Exception):
    """Base class; `code` keys the service's JSON error bodies."""

    code = "error"

    def __init__(self, message: str, **details):
        super().__init__(message)
        self.message = message
        self.details = details


class SchemaError(ContestkitError):
    code = "schema_mismatch"


class DomainError(ContestkitError):
    code = "domain"


class ConfigurationError(ContestkitError):
    code = "configuration"


class StratificationError(ContestkitError):
    code = "stratification"


class EvaluationError(ContestkitError):
    code = "evaluation"


class DatasetMissingError(ContestkitError):
    code = "dataset_missing"


class RankDeficiencyError(ContestkitError):
    code = "rank_deficient"


class UnsupportedAnchorError(ContestkitError):
    code = "unsupported_anchor"


class HypothesisViolationError(ContestkitError):
    code = "hypothesis_violated"


class InfeasiblePerformanceError(ContestkitError):
    code = "infeasible_performance_level"


class QuotaExceededError(ContestkitError):
    code = "quota_exceeded"


class InvalidRequestError(ContestkitError):
    code = "invalid_request"


class UnknownCaseError(ContestkitError):
    code = "unknown_case"


class CapabilityError(ContestkitError):
    code = "capability"


class TotalEvidenceViolation(ContestkitError):
    code = "total_evidence_violation"
