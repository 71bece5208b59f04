"""Exception hierarchy. The CLI maps these onto exit codes."""


class TextureKitError(Exception):
    exit_code = 1


class ConfigError(TextureKitError, ValueError):
    exit_code = 2


class DataError(TextureKitError, ValueError):
    exit_code = 3


class UnusablePatchError(DataError):
    """Patch too small or degenerate for a texture operator."""


class ModelFormatError(DataError):
    pass


class NumericError(TextureKitError, ArithmeticError):
    exit_code = 4
