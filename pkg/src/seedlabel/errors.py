"""Exception hierarchy shared by every seedlabel module.

Two tiers matter for the CLI: ``InputError`` subclasses map to exit code 2
(bad files, bad flags, violated preconditions), everything else derived from
``SeedLabelError`` maps to exit code 1 (runtime or model failures).
"""


class SeedLabelError(Exception):
    """Base class for all seedlabel errors."""

    exit_code = 1


class InputError(SeedLabelError):
    """Invalid user input or violated precondition (CLI exit code 2)."""

    exit_code = 2


# -- file / data model ----------------------------------------------------

class MalformedRow(InputError):
    """A CSV row has the wrong arity or a non-numeric/non-finite field."""


class DuplicateId(InputError):
    """The same instance id appears more than once."""


class EmptyFile(InputError):
    """A data file contains no usable rows."""


class UnknownId(InputError):
    """An id refers to an instance that does not exist in the pool."""


class EmptyLabelSet(InputError):
    """A label file contains no labels."""


class SingleClass(InputError):
    """Only one distinct label present; aggregation is vacuous."""


class IoFailure(SeedLabelError):
    """An OS-level read or write failed."""


# -- similarity -----------------------------------------------------------

class DimensionMismatch(InputError):
    """Two feature vectors have different dimensions."""


class ZeroVarianceVector(InputError):
    """Pearson similarity is undefined for a constant vector."""


class ZeroNormVector(InputError):
    """Cosine similarity is undefined for an all-zero vector."""


# -- subset selection -----------------------------------------------------

class AlreadySelected(InputError):
    """Marginal gain requested for an item already in the selected set."""


class NotPositiveDefinite(SeedLabelError):
    """Cholesky pivot or Schur complement is non-positive."""


class BudgetZero(InputError):
    """Selection budget must be at least 1."""


class BudgetExceedsPool(InputError):
    """Selection budget exceeds the number of pool instances."""


# -- labeling functions ---------------------------------------------------

class MissingFeatureRow(InputError):
    """An exemplar id has no feature row."""


class EmptyExemplarSet(InputError):
    """No exemplars were provided to build labeling functions from."""


# -- aggregation model ----------------------------------------------------

class NonFiniteDensity(SeedLabelError):
    """A score fell outside (0, 1); the upstream clamp is missing."""


class DivergedTraining(SeedLabelError):
    """The training objective became non-finite."""


# -- pipeline -------------------------------------------------------------

class UnfilledTemplate(InputError):
    """The annotation template has missing or empty labels."""


class MissingGroundTruth(InputError):
    """A predicted id has no ground-truth label."""
