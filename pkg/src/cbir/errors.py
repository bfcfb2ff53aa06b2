"""Exception types shared across the retrieval engine."""


class CbirError(Exception):
    """Base class for every error raised by this package."""


# --- image decoding and pixel operations ---

class UnsupportedFormat(CbirError):
    """Payload is not a format this build can decode."""


class CorruptPayload(CbirError):
    """Payload claims a supported format but cannot be parsed."""


class ConstantChannel(CbirError):
    """Channel has a single intensity value; no threshold separates it."""


class TooSmall(CbirError):
    """Input dimensions are below the operator's minimum support."""


# --- transforms and linear algebra ---

class OddLength(CbirError):
    """1D wavelet step needs an even-length signal."""


class LengthMismatch(CbirError):
    """Approximation and detail sequences differ in length."""


class NotSquare(CbirError):
    """Operation requires a square matrix."""


class NotDivisible(CbirError):
    """Matrix side is not divisible by 2**levels."""


class MalformedPyramid(CbirError):
    """Wavelet decomposition has inconsistent sub-band shapes."""


class NotPowerOfTwo(CbirError):
    """Radix-2 FFT requires power-of-two dimensions."""


class OddDims(CbirError):
    """Spectrum centering requires even dimensions."""


class NoConvergence(CbirError):
    """Eigenvalue iteration exceeded its sweep budget."""


# --- feature extraction ---

class OutOfRange(CbirError):
    """Channel values fall outside the 8-bit histogram range."""


class EmptyHistogram(CbirError):
    """Histogram has zero total count."""


class FeatureExtractionFailure(CbirError):
    """A feature pipeline failed on an otherwise valid image."""


class EmptyShape(CbirError):
    """No foreground skeleton exists; shape descriptor is undefined."""


# --- classifier ---

class MissingCategory(CbirError):
    """Training set lacks samples for a required category."""


class VersionMismatch(CbirError):
    """Serialized payload carries an unsupported version."""


class Corrupt(CbirError):
    """Serialized payload is malformed."""


# --- retrieval ---

class DimMismatch(CbirError):
    """Vectors have different lengths."""


class NegativeDistance(CbirError):
    """Distances must be non-negative."""


class EmptyCorpus(CbirError):
    """Normalization needs at least one enrolled record."""


class DuplicateFeedback(CbirError):
    """Feedback was already recorded for this (query, image) pair."""


class UnknownQuery(CbirError):
    """No query with this id exists."""


class UnknownImage(CbirError):
    """No image with this id exists."""


class UntrainedClassifier(CbirError):
    """No classifier weights are stored yet."""


class UnfittedNormalization(CbirError):
    """Corpus normalization has not been fitted yet."""


# --- persistence ---

class StoreError(CbirError):
    """Base class for persistence failures."""


class NotFound(StoreError):
    """Requested record or blob does not exist."""


class StoreFull(StoreError):
    """Backing storage is out of space."""


class StoreIOError(StoreError):
    """Store is closed or the underlying file cannot be accessed."""


# --- evaluation ---

class MissingLabels(CbirError):
    """Evaluation corpus lacks ground-truth labels."""
