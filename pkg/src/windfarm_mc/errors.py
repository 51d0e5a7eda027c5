"""Exception types raised by the simulation modules."""


class ModelError(Exception):
    """Base class for model-level failures."""


class SingularTimescaleError(ModelError):
    """OU update called with a non-positive mean wind speed."""


class IntegrationDomainError(ModelError):
    """Drive train integrated at a rotor speed the mode machine should never allow."""


class CalibrationError(ModelError):
    """Power-coefficient calibration cannot reach the rated operating point."""


class ModelInconsistencyError(ModelError):
    """Steady-state equilibrium not bracketed; turbine parameters are inconsistent."""


class SimulationDivergedError(ModelError):
    """Simulation state became non-finite."""

    def __init__(self, t: float, mode: int, omega: float):
        self.t = t
        self.mode = mode
        self.omega = omega
        super().__init__(
            f"non-finite state at t={t:.1f}s (mode={mode}, omega={omega!r})"
        )
