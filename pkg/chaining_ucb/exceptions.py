class ChainingUcbError(Exception):
    """Base class for every error raised by the package."""


class InputError(ChainingUcbError, ValueError):
    pass


class NumericalError(ChainingUcbError, ArithmeticError):
    pass


class ConfigError(ChainingUcbError):
    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        self.key = key
        self.line = line
        location = ""
        if key is not None:
            location = f" (key '{key}'"
            location += f", line {line})" if line is not None else ")"
        self.message = message
        super().__init__(f"{message}{location}")

    def __reduce__(self):
        return ConfigError, (self.message, self.key, self.line)


class RunFailedError(ChainingUcbError):
    def __init__(self, message: str, seed: int):
        self.seed = seed
        self.message = message
        super().__init__(f"{message} (run seed {seed})")

    def __reduce__(self):
        return RunFailedError, (self.message, self.seed)
