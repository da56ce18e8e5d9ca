"""Exception types shared across the package.

Plain ``ValueError`` is used for ordinary invalid arguments; the classes
here exist where callers need to distinguish failure kinds (file parsing,
tensor shape chaining, model configs, benchmark environment).
"""


class FormatError(ValueError):
    """A serialized artifact (RTM file, checkpoint, manifest) failed to parse.

    The message names the offending field, e.g. "magic" or "payload length".
    """


class ShapeError(ValueError):
    """Tensor shapes passed to a layer operation do not chain."""


class ConfigError(ValueError):
    """A model configuration is structurally invalid (bad layer chain)."""


class BenchmarkError(RuntimeError):
    """The benchmark environment cannot produce trustworthy timings."""
