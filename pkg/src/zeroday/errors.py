from __future__ import annotations


class ZerodayError(Exception):
    """Base for failures the command line maps onto an exit status."""

    exit_code: int = 1


class ConfigError(ZerodayError):
    """One or more problems with the run configuration.

    All problems found are carried together so they can be reported at once.
    """

    exit_code = 2

    def __init__(self, problems: list[str] | str):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("\n".join(f"- {p}" for p in self.problems))


class MissingArtifact(ConfigError):
    def __init__(self, path, producer: str):
        self.path = path
        self.producer = producer
        super().__init__(f"{path} does not exist; run `zeroday {producer}` first")


class FingerprintMismatch(ConfigError):
    def __init__(self, what: str, expected: str, found: str):
        self.expected = expected
        self.found = found
        super().__init__(
            f"{what} was produced from pipeline {found[:12]}, "
            f"but the current pipeline is {expected[:12]}"
        )


class DataError(ZerodayError):
    exit_code = 3


class NumericError(ZerodayError):
    exit_code = 4


class ConvergenceError(NumericError):
    def __init__(self, violation: float, iterations: int, nu: float | None = None):
        self.violation = violation
        self.iterations = iterations
        self.nu = nu
        where = f" (nu={nu})" if nu is not None else ""
        super().__init__(
            f"One-Class SVM did not converge{where} after {iterations} updates; "
            f"largest KKT violation {violation:.3g}"
        )
