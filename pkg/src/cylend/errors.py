"""Exception hierarchy.

Every error carries a short machine-readable ``reason`` so the CLI can
report it in its final status block.
"""


class CylendError(Exception):
    reason = "error"
    exit_code = 2


class DomainError(CylendError, ValueError):
    """Argument outside the domain of an operation."""

    reason = "domain"


class GeometryError(CylendError, ValueError):
    """Configuration that does not define a valid surface (tangent disks, ...)."""

    reason = "geometry"


class SingularEvaluationError(CylendError, ZeroDivisionError):
    reason = "singular_evaluation"


class DegenerateInputError(CylendError, ValueError):
    reason = "degenerate_input"


class DependentFamilyError(CylendError, ValueError):
    reason = "dependent_family"


class ProfileError(CylendError, ValueError):
    reason = "profile"


class MeshError(CylendError, RuntimeError):
    reason = "mesh"


class AssemblyError(CylendError, RuntimeError):
    reason = "assembly"


class AccuracyError(CylendError, RuntimeError):
    """Quadrature did not converge; ``best`` holds the last estimate."""

    reason = "accuracy"
    exit_code = 3

    def __init__(self, msg, best=None, error=None):
        super().__init__(msg)
        self.best = best
        self.error = error


class CertificateInfeasibleError(CylendError, RuntimeError):
    reason = "certificate_infeasible"
    exit_code = 3


class SolverError(CylendError, RuntimeError):
    reason = "solver"
    exit_code = 3

    def __init__(self, msg, residuals=None):
        super().__init__(msg)
        self.residuals = residuals


class ConfigError(CylendError, ValueError):
    reason = "config"
