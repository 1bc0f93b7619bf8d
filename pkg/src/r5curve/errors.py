"""Exception hierarchy.

Every error carries an ``exit_code`` used by the command line front end:
1 for bad input, 2 for a mathematical degeneracy or failed check, 3 for a
numerical failure.
"""


class R5CurveError(Exception):
    exit_code = 3

    def __init__(self, message, *, stage=None):
        super().__init__(message)
        self.stage = stage

    def __str__(self):
        msg = super().__str__()
        if self.stage:
            return f"[{self.stage}] {msg}"
        return msg


class InputError(R5CurveError):
    exit_code = 1


class ParseError(InputError):
    def __init__(self, message, offset):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset
        self.reason = message


class SceneError(InputError):
    pass


class OrderExceeded(R5CurveError):
    exit_code = 1


class DomainError(R5CurveError):
    pass


class SingularSystem(R5CurveError):
    pass


class NewtonDivergence(R5CurveError):
    def __init__(self, message, *, step_index=None, stage=None):
        super().__init__(message, stage=stage)
        self.step_index = step_index


class InsufficientTrace(R5CurveError):
    pass


class GeometryError(R5CurveError):
    """A hypothesis of the construction does not hold at the point."""

    exit_code = 2


class RankDeficient(GeometryError):
    def __init__(self, message, position, *, stage=None):
        super().__init__(message, stage=stage)
        self.position = position


class NotRegular(GeometryError):
    pass


class NonTransversal(GeometryError):
    pass


class PointMismatch(GeometryError):
    pass


class DegenerateFrenet(GeometryError):
    def __init__(self, message, level, *, stage=None):
        super().__init__(message, stage=stage)
        self.level = level
