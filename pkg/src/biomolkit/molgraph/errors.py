"""Exceptions raised by the molecular graph layer."""


class MolGraphError(ValueError):
    """Base class for molecule parsing and graph construction errors."""


class InvalidGraph(MolGraphError):
    pass


class UnsupportedElement(MolGraphError):
    pass


# SELFIES


class SelfiesError(MolGraphError):
    pass


class EmptyInput(SelfiesError):
    pass


class UnbalancedBracket(SelfiesError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class CharacterOutsideBracket(SelfiesError):
    def __init__(self, char: str, position: int):
        super().__init__(f"character {char!r} outside brackets at position {position}")
        self.char = char
        self.position = position


class UnknownToken(SelfiesError):
    def __init__(self, token: str, position: int | None = None):
        where = "" if position is None else f" at token {position}"
        super().__init__(f"unknown SELFIES token {token!r}{where}")
        self.token = token
        self.position = position


class SelfiesEncodingError(SelfiesError):
    """Graph cannot be expressed under the SELFIES derivation constraints."""


# SMILES


class SmilesError(MolGraphError):
    pass


class SmilesSyntaxError(SmilesError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UnclosedRing(SmilesError):
    def __init__(self, label: int):
        super().__init__(f"ring bond {label} never closed")
        self.label = label


class UnclosedBranch(SmilesError):
    def __init__(self, position: int):
        super().__init__(f"branch opened at position {position} never closed")
        self.position = position


class UnsupportedFeature(SmilesError):
    def __init__(self, feature: str, position: int):
        super().__init__(f"unsupported SMILES feature {feature} at position {position}")
        self.feature = feature
        self.position = position
