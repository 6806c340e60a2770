class ThtError(Exception):
    """Base class for sampler, model and harness errors."""


class NonFiniteState(ThtError):
    """A position or velocity became NaN or infinite during integration."""


class DegeneratePair(NonFiniteState):
    """Two sensors coincide on an unobserved pair, so log(1 - 1) appears in the likelihood."""


class DegenerateBox(ThtError, ValueError):
    """A box coordinate has lo >= hi."""


class SingularGradient(ThtError, ValueError):
    """Gradient requested at a point where it is not defined."""


class PilotDiverged(ThtError):
    """Every pilot path of the tuning advisor blew up."""


class ConfigError(ThtError):
    """Experiment configuration could not be parsed or validated."""
