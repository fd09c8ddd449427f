"""Exception types shared across the solver and the CLI."""


class ConfigError(Exception):
    """Invalid run configuration; message carries a section.key diagnostic."""


class MeshError(Exception):
    """Invalid mesh construction or adaptation request."""


class StateError(Exception):
    """Non-physical solver state (negative density or pressure).

    Carries the offending cell index and simulation time when known so a
    failed run can report where it went wrong.
    """

    def __init__(self, message, cell=None, time=None):
        super().__init__(message)
        self.cell = cell
        self.time = time
