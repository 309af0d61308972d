"""Exception types shared across the package."""


class FatouLabError(Exception):
    """Base class for every error raised by fatoulab."""


class PrecisionExhausted(FatouLabError):
    """The working precision ran out before the requested depth."""

    def __init__(self, level: int, bits: int):
        super().__init__(f"precision exhausted at level {level} with {bits} bits")
        self.level = level
        self.bits = bits


class DepthExceeded(FatouLabError):
    """A quantity was requested beyond the computed depth."""


class ParabolicCase(FatouLabError):
    """alpha = 0: the fixed point sigma merges with 0."""


class OutsideDomain(FatouLabError):
    """Evaluation point outside the validated region of a map."""


class ZeroNotInImage(FatouLabError):
    """0 has no preimage under the exponential projection."""


class PoleHit(FatouLabError):
    """The covering map was evaluated at one of its poles."""


class BranchCutHit(FatouLabError):
    """The logarithm in the lifted map landed on its branch cut."""


class DomainExit(FatouLabError):
    """The projected point left the domain of the map."""


class Unreachable(FatouLabError):
    """An orbit did not land in the fundamental strip within the step budget."""


class InversionFailed(FatouLabError):
    """Newton inversion did not converge."""


class OutsideImageBand(FatouLabError):
    """A Fatou-coordinate value outside the band where the inverse is valid."""


class PullbackBranchLost(FatouLabError):
    """A backward branch could not be continued."""


class NoReturn(FatouLabError):
    """An orbit did not come back to the base band."""


class DiskTooLarge(FatouLabError):
    """Renormalization evaluated outside its validated disk."""


class ConfigError(FatouLabError):
    """Malformed configuration; carries the offending key and line when known."""

    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        where = []
        if key is not None:
            where.append(f"key '{key}'")
        if line is not None:
            where.append(f"line {line}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.key = key
        self.line = line
