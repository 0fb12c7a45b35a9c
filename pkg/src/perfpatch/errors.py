"""Exception types raised across the pipeline."""


class PerfPatchError(Exception):
    """Base class for all pipeline errors."""


# corpus mining
class RepositoryUnreadable(PerfPatchError):
    pass


class BranchNotFound(PerfPatchError):
    pass


# source model
class UnparseableFile(PerfPatchError):
    pass


class AbstractionParseError(PerfPatchError):
    pass


# example construction
class FocalTooLarge(PerfPatchError):
    def __init__(self, signature: str, tokens: int, budget: int):
        super().__init__(f"focal method {signature} needs {tokens} tokens, budget is {budget}")
        self.signature = signature
        self.tokens = tokens
        self.budget = budget


# suggestion backends
class BackendFailure(PerfPatchError):
    def __init__(self, backend_id: str, message: str):
        super().__init__(f"[{backend_id}] {message}")
        self.backend_id = backend_id


class BackendTimeout(BackendFailure):
    pass


class MalformedResponse(BackendFailure):
    pass


# metrics
class TokenizationFailure(PerfPatchError):
    pass


# validation
class SpliceFailure(PerfPatchError):
    pass


class StageTimeout(PerfPatchError):
    def __init__(self, command: str, timeout: float, output: str = ""):
        super().__init__(f"command timed out after {timeout}s: {command}")
        self.command = command
        self.timeout = timeout
        self.output = output


class CommandNotFound(PerfPatchError):
    pass


# benchmark statistics
class DegenerateSample(PerfPatchError):
    pass


class SchemaError(PerfPatchError):
    def __init__(self, message: str, row: int | None = None, column: str | None = None):
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.row = row
        self.column = column


class UnitError(SchemaError):
    pass


class BenchmarkNameMismatch(PerfPatchError):
    def __init__(self, missing_in_candidate: list[str], missing_in_baseline: list[str]):
        super().__init__(
            f"benchmark names differ: missing in candidate {missing_in_candidate}, "
            f"missing in baseline {missing_in_baseline}"
        )
        self.missing_in_candidate = missing_in_candidate
        self.missing_in_baseline = missing_in_baseline


# orchestration
class ConfigError(PerfPatchError):
    pass


class StageFailed(PerfPatchError):
    def __init__(self, stage: str, message: str):
        super().__init__(f"stage {stage!r} failed: {message}")
        self.stage = stage
