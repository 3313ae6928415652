"""Errors shared across modules."""


class DimensionMismatch(ValueError):
    pass


class LengthMismatch(ValueError):
    pass
