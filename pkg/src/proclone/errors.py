"""Exception hierarchy shared by every module of the package."""


class ProcloneError(Exception):
    pass


class ParseError(ProcloneError):
    def __init__(self, message, line, column):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class ScopeError(ProcloneError):
    pass


class TypeCheckError(ProcloneError):
    def __init__(self, location, expected, found):
        super().__init__(f"at {location or '<root>'}: expected {expected}, found {found}")
        self.location = location
        self.expected = expected
        self.found = found


class GuardExceeded(ProcloneError):
    """A finite enumeration or reduction was refused because it exceeds a guard."""

    def __init__(self, what, size, guard):
        super().__init__(f"{what}: size {size} exceeds guard {guard}")
        self.what = what
        self.size = size
        self.guard = guard


class ArityMismatch(ProcloneError):
    pass


class ActionLawViolation(ProcloneError):
    def __init__(self, law, witness):
        super().__init__(f"{law} fails at {witness}")
        self.law = law
        self.witness = witness


class NotChurchTyped(ProcloneError):
    pass


class MissingRosterMember(ProcloneError):
    pass


class Unsupported(ProcloneError):
    pass


class ConfigError(ProcloneError):
    def __init__(self, message, location=None):
        super().__init__(f"{location}: {message}" if location else message)
        self.location = location
