"""Exception types shared across the package."""


class BenchBayesError(Exception):
    """Base class for every error raised by this package."""


class DomainError(BenchBayesError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class UnsupportedFamilyError(BenchBayesError):
    """The requested operation is not implemented for this distribution family."""


class FormatError(BenchBayesError):
    """A data stream does not match its documented schema."""


class RowError(FormatError):
    """A single data row is invalid. Carries the 1-based line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class UnknownLanguageError(BenchBayesError, KeyError):
    """A language is absent from the dataset."""


class EmptyComparisonError(BenchBayesError):
    """Two languages share no tasks, so there is nothing to compare."""


class PairingError(BenchBayesError):
    """Samples that must be paired by index have incompatible shapes."""


class DegenerateDataError(BenchBayesError):
    """The data carries no usable signal for the requested statistic."""


class NoPosteriorError(BenchBayesError):
    """Prior and likelihood assign zero probability everywhere."""


class SamplerInitError(BenchBayesError):
    """The target density is not finite at the sampler's starting point."""


class MixingError(BenchBayesError):
    """A chain accepted no proposals after warmup."""


class SingularDesignError(BenchBayesError):
    """The design matrix is rank deficient."""


class DiagnosticsError(BenchBayesError):
    """MCMC output failed the convergence gate. Carries the offending values."""

    def __init__(self, message: str, rhat=None, ess=None):
        super().__init__(message)
        self.rhat = rhat
        self.ess = ess


class PriorDataError(BenchBayesError):
    """A data-derived prior was requested without the data to derive it from."""


class DegeneratePriorError(BenchBayesError):
    """The derived prior would have zero width."""


class CycleError(BenchBayesError):
    """The faster-than relation contains a cycle. Carries the cycle."""

    def __init__(self, cycle):
        super().__init__("faster-than relation has a cycle: " + " -> ".join(cycle))
        self.cycle = tuple(cycle)


class InputError(BenchBayesError):
    """Records handed to a rendering routine violate its schema."""
