"""Exception hierarchy.

Every error carries a ``module`` tag and a ``diagnostics`` dict so the
command-line front end can report where and why a computation stopped.
"""


class KleinianError(Exception):
    module = "g2kleinian"
    exit_code = 1

    def __init__(self, message, step=None, **diagnostics):
        super().__init__(message)
        self.step = step
        self.diagnostics = diagnostics

    def report(self) -> dict:
        out = {"error": type(self).__name__, "module": self.module, "message": str(self)}
        if self.step is not None:
            out["step"] = self.step
        if self.diagnostics:
            out["diagnostics"] = {k: _jsonable(v) for k, v in self.diagnostics.items()}
        return out


class InputError(KleinianError):
    """Malformed or out-of-domain input."""
    exit_code = 2


class DomainError(InputError):
    module = "cpoly"


class SubordinationError(InputError):
    module = "disks"


class ConvergenceError(KleinianError):
    """An iteration failed to reach its tolerance."""
    exit_code = 3


class RootFindingError(ConvergenceError):
    module = "cpoly"


class DiskHeuristicError(ConvergenceError):
    module = "disks"


class TowerError(ConvergenceError):
    module = "richelot"


class PeriodError(ConvergenceError):
    module = "periods"


class ThetaError(ConvergenceError):
    module = "thetaref"


class PolarSetError(InputError):
    module = "kleinian"


class CertificateError(KleinianError):
    """A numerical certificate (fit residual, round trip) failed."""
    exit_code = 4


class TransferFitError(CertificateError):
    module = "kleinian"


class AbelError(ConvergenceError):
    module = "abel"


def _jsonable(v):
    try:
        import numpy as np
        if isinstance(v, np.ndarray):
            v = v.tolist()
    except ImportError:  # pragma: no cover
        pass
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, float) or isinstance(v, int) or isinstance(v, str) or v is None:
        return v
    return repr(v)
