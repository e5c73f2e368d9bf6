"""Exception types shared across the package."""


class ArtInfluenceError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(ArtInfluenceError):
    """A file could not be parsed; carries the path and 1-based line number."""

    def __init__(self, path, line_no, message):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = str(path)
        self.line_no = line_no


class DimensionMismatch(ArtInfluenceError):
    """A vector's width differs from the expected dimensionality."""


class ReferentialError(ArtInfluenceError):
    """An identifier does not resolve, or a pair is self-referential."""


class TooManyDescriptors(ArtInfluenceError):
    """A painting exceeds the per-painting descriptor cap."""


class InsufficientData(ArtInfluenceError):
    """Fewer (distinct) data points than required."""


class DegenerateLabels(ArtInfluenceError):
    """A classification problem with fewer than two classes."""


class InsufficientSamples(ArtInfluenceError):
    """A class has fewer samples than the number of folds."""


class EmptyCorpus(ArtInfluenceError):
    """No non-empty documents supplied to the topic model."""


class EmptySet(ArtInfluenceError):
    """A painting set that must be non-empty is empty."""


class InvalidQ(ArtInfluenceError):
    """Percentile q outside (0, 100]."""


class InvalidK(ArtInfluenceError):
    """Neighbor count k outside its valid range."""


class DisconnectedGraph(ArtInfluenceError):
    """A graph expected to be connected is not."""


class EmptyGroundTruth(ArtInfluenceError):
    """Recall requested against an empty ground-truth list."""


class AllInfinite(ArtInfluenceError):
    """A matrix has no finite off-diagonal entry to anchor finitization."""


class InvalidInput(ArtInfluenceError):
    """An input matrix violates a structural precondition."""


class ConfigError(ArtInfluenceError):
    """An invalid run configuration (CLI exit code 2)."""
