"""Exception hierarchy shared across the package."""


class FractalFramesError(Exception):
    """Base class for all package errors."""


class PreconditionError(FractalFramesError):
    """An input violates a documented precondition (bad matrix, repeated
    residues, infeasible search, ...). Maps to exit code 2 in the CLI."""


class CertificationError(PreconditionError):
    """A required numerical certificate (geometric decay, delta positivity)
    could not be established for the given input."""


class InternalCheckError(FractalFramesError):
    """A built-in consistency assertion failed; indicates a bug in the
    numerical kernels, not in the input."""
