"""Exception hierarchy shared by all deltaspec modules."""


class DeltaSpecError(Exception):
    """Base class for every error raised by deltaspec."""


class ConfigError(DeltaSpecError):
    """Invalid Hamiltonian configuration."""


class NonIncreasingSupport(ConfigError):
    pass


class ZeroBetaStrength(ConfigError):
    pass


class InfiniteAlphaStrength(ConfigError):
    pass


class ZeroAlpha(ConfigError):
    pass


class NonPositiveBeta(ConfigError):
    pass


class NonNegativeAlpha(ConfigError):
    pass


class NonPositiveSpacing(ConfigError):
    pass


class KindMismatch(DeltaSpecError):
    """Operation called on a configuration of the wrong interaction kind."""


class InsufficientSequence(DeltaSpecError):
    """A finite sequence is too short for the requested matrix size."""


class UnknownAsymptotics(DeltaSpecError):
    """A limit or series class could not be decided symbolically."""


class Inapplicable(DeltaSpecError):
    """A bound or identity whose hypotheses do not hold."""


class NegativeResult(DeltaSpecError):
    """An inertia formula produced a negative count (signals a bug)."""


class InternalInconsistency(DeltaSpecError):
    """Two verdicts for one configuration contradict each other."""


class RegularityMismatch(DeltaSpecError):
    """Test function lacks the regularity its quadratic form needs."""


class SuspectClustering(DeltaSpecError):
    """Two secular roots share one grid cell; increase grid_points."""


class SweepResolution(DeltaSpecError):
    """Energy sweep budget exhausted while tracking sign changes."""


class ConfigParse(DeltaSpecError):
    """Malformed JSON configuration document."""


class DecoupledBeyondWall(DeltaSpecError):
    """Propagation crossed a Neumann decoupling point (beta = inf)."""


class UnknownCommand(DeltaSpecError):
    """Command name outside the supported set."""
