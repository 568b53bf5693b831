"""Exception hierarchy for the workbench.

Every error raised by a public operation derives from :class:`EconAgentError`
so callers (in particular the tool-invocation boundary and the CLI) can catch
one base class and convert failures into structured outcomes instead of
crashes.
"""

from __future__ import annotations


class EconAgentError(Exception):
    """Base class for all workbench errors."""


# ---------------------------------------------------------------------------
# data / table errors
# ---------------------------------------------------------------------------


class EmptyFileError(EconAgentError):
    pass


class MalformedRowError(EconAgentError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class UnknownColumnError(EconAgentError):
    def __init__(self, name: str, table: str = ""):
        where = f" in table '{table}'" if table else ""
        super().__init__(f"unknown column '{name}'{where}")
        self.column = name


class NameCollisionError(EconAgentError):
    def __init__(self, name: str):
        super().__init__(f"column '{name}' already exists")
        self.column = name


class TooManyLevelsError(EconAgentError):
    def __init__(self, name: str, count: int, limit: int):
        super().__init__(f"column '{name}' has {count} levels (limit {limit})")


class NonCategoricalColumnError(EconAgentError):
    """Raised when a continuous real column is passed to the dummy encoder."""

    def __init__(self, name: str):
        super().__init__(
            f"column '{name}' is continuous; only categorical or integer-valued "
            "columns can be one-hot encoded"
        )
        self.column = name


class ArityMismatchError(EconAgentError):
    def __init__(self, transform: str, expected: int, got: int):
        super().__init__(f"transform '{transform}' needs {expected} source column(s), got {got}")


class EmptyReferenceSubsetError(EconAgentError):
    pass


# ---------------------------------------------------------------------------
# estimation errors
# ---------------------------------------------------------------------------


class EstimationError(EconAgentError):
    """Base for estimator failures."""


class RankDeficientError(EstimationError):
    def __init__(self, columns: list[str]):
        super().__init__(f"design matrix is rank deficient; collinear columns: {columns}")
        self.columns = columns


class TooFewRowsError(EstimationError):
    def __init__(self, n: int, needed: int):
        super().__init__(f"{n} complete rows, need at least {needed}")


class DegenerateFactorError(EstimationError):
    def __init__(self, name: str):
        super().__init__(f"fixed-effect factor '{name}' has a single level")


class NoVariationAfterDemeaningError(EstimationError):
    def __init__(self, columns: list[str]):
        super().__init__(
            f"regressors constant within fixed-effect groups: {columns}"
        )
        self.columns = columns


class SeparationError(EstimationError):
    def __init__(self) -> None:
        super().__init__("perfect separation detected (coefficient diverged during IRLS)")


class NonBinaryOutcomeError(EstimationError):
    def __init__(self, name: str):
        super().__init__(f"outcome '{name}' is not binary 0/1")


class NoConvergenceError(EstimationError):
    def __init__(self, iterations: int):
        super().__init__(f"no convergence after {iterations} iterations")
        self.iterations = iterations


class AllTrimmedError(EstimationError):
    def __init__(self) -> None:
        super().__init__("trimming removed every observation")


class EmptyGroupError(EstimationError):
    def __init__(self, which: str):
        super().__init__(f"{which} group is empty")


class UnderIdentifiedError(EstimationError):
    def __init__(self, n_endog: int, n_inst: int):
        super().__init__(
            f"{n_endog} endogenous regressor(s) but only {n_inst} instrument(s)"
        )


class NoTreatedUnitsError(EstimationError):
    def __init__(self) -> None:
        super().__init__("no unit has an adoption period; event study needs treated units")


class InsufficientSupportError(EstimationError):
    def __init__(self, side: str, n: int, needed: int):
        super().__init__(f"{side} of cutoff: {n} usable rows within bandwidth, need {needed}")
        self.side = side


class BandwidthNonpositiveError(EstimationError):
    def __init__(self, value: float):
        super().__init__(f"bandwidth must be positive, got {value}")


class ZeroFirstStageError(EstimationError):
    def __init__(self, jump: float):
        super().__init__(f"treatment probability jump at cutoff is {jump:.3g}; fuzzy design unidentified")


# ---------------------------------------------------------------------------
# tool registry errors
# ---------------------------------------------------------------------------


class ToolError(EconAgentError):
    """Base for tool registry failures."""


class DuplicateNameError(ToolError):
    def __init__(self, name: str):
        super().__init__(f"tool '{name}' already registered at the same or newer version")


class InvalidSchemaError(ToolError):
    pass


class MalformedSummaryError(ToolError):
    pass


class UnknownToolError(ToolError):
    def __init__(self, name: str):
        super().__init__(f"unknown tool '{name}'")


class ArgValidationError(ToolError):
    """Base for function-calling argument rejections."""


class MissingRequiredError(ArgValidationError):
    def __init__(self, name: str):
        super().__init__(f"missing required argument '{name}'")
        self.argument = name


class UnknownKeyError(ArgValidationError):
    def __init__(self, name: str):
        super().__init__(f"unknown argument '{name}'")
        self.argument = name


class KindMismatchError(ArgValidationError):
    def __init__(self, name: str, expected: str, got: str):
        super().__init__(f"argument '{name}' expects {expected}, got {got}")
        self.argument = name


# ---------------------------------------------------------------------------
# agent / harness errors
# ---------------------------------------------------------------------------


class UnknownBackendError(EconAgentError):
    def __init__(self, identity: str):
        super().__init__(f"cannot resolve chat backend '{identity}'")


class FixtureMismatchError(EconAgentError):
    """A scripted backend was driven out of its recorded order."""


class ArgsInvalidAfterRetriesError(EconAgentError):
    def __init__(self, tool: str, attempts: int, last_error: str):
        super().__init__(
            f"tool '{tool}' arguments still invalid after {attempts} attempts: {last_error}"
        )


class NoResultFoundError(EconAgentError):
    def __init__(self, message: str | None = None) -> None:
        super().__init__(
            message
            or "no JSON object with 'coefficient', 'standard_error' and 'p-value' found"
        )
