"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid parameters or configuration. ``key`` names the offending entry."""

    def __init__(self, message, key=None):
        self.key = key
        super().__init__(f"{key}: {message}" if key else message)


class IntegrationFault(RuntimeError):
    """A non-finite value appeared during time stepping."""

    def __init__(self, time, unit, item, step=None):
        self.time = time
        self.unit = unit
        self.item = item
        self.step = step
        super().__init__(
            f"non-finite state at t={time:.6g} (unit {unit}, item {item + 1})"
        )
