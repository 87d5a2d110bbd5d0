"""Exception types shared across the toolkit.

The CLI maps these onto distinct exit codes, so keep the split between
"the input is malformed" and "the input is valid but too short/small for
the requested analysis".
"""


class FormatError(ValueError):
    """Input file or configuration value is malformed or out of domain."""


class WavFormatError(FormatError):
    """WAV container is damaged or not a RIFF/WAVE file at all."""


class UnsupportedWavError(FormatError):
    """WAV file is well-formed but uses an encoding we do not read."""


class PreconditionError(ValueError):
    """Valid input that is too small or unsuitable for the operation."""
