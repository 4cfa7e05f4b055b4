class ParameterError(ValueError):
    """An argument is outside the domain an operation accepts."""


class ShapeError(ValueError):
    """Array or sequence shapes are incompatible."""


class DegenerateRangeError(ValueError):
    """An image has no dynamic range to normalise."""


class DataError(ValueError):
    """Input records are malformed or inconsistent."""


class IngestionError(DataError):
    """A record in an input file failed validation.

    ``record_id`` names the offending record so the message can point at it.
    """

    def __init__(self, message, record_id=None):
        super().__init__(message if record_id is None else f"{record_id}: {message}")
        self.record_id = record_id
