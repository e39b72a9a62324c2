"""Exception types shared across the package.

Error kinds are stable strings so the CLI can emit machine-readable
failure reports and map them onto exit codes.
"""


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration (CLI exit code 1)."""

    kind = "config"

    def __init__(self, message, kind=None):
        super().__init__(message)
        if kind is not None:
            self.kind = kind


class DomainError(ValueError):
    """Inputs outside the admissible regime of an operation (CLI exit code 2)."""

    def __init__(self, message, kind="domain"):
        super().__init__(message)
        self.kind = kind


class BlowUpError(RuntimeError):
    """Time integration lost positivity or produced non-finite values (exit code 3).

    Carries the last good state so a caller can persist it for post-mortem.
    """

    kind = "blowup"

    def __init__(self, message, last_state=None, node=None, time=None):
        super().__init__(message)
        self.last_state = last_state
        self.node = node
        self.time = time


def subsonic_far_field(mach):
    return DomainError(
        f"far-field state is not supersonic (Mach = {mach:.6g} <= 1)",
        kind="subsonic_far_field",
    )
