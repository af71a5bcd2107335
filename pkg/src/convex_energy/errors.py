"""Exception types and resource guards shared by all modules."""

import os

# Refuse convolution passes above this many (partial-sum, element) merges.
DEFAULT_WORK_BUDGET = 10**9
# Dense coefficient arrays (Dirichlet backend, lattice sets).
DEFAULT_DEGREE_BUDGET = 2**27
# Brute-force oracle: hard limit on enumerated 2d-tuples, not overridable.
BRUTEFORCE_LIMIT = 10**8

BUDGET_ENV = "CE_BUDGET"


class ConvexEnergyError(Exception):
    exit_code = 4


class ValidationError(ConvexEnergyError, ValueError):
    """Malformed input: non-monotone sequence, unreadable file, bad config."""

    exit_code = 2


class DomainError(ConvexEnergyError, ValueError):
    """Argument outside the mathematical domain of an operation."""

    exit_code = 2


class ResourceError(ConvexEnergyError, RuntimeError):
    """A work or memory guard refused the computation."""

    exit_code = 3


class InvariantError(ConvexEnergyError, AssertionError):
    """An internal consistency check failed."""

    exit_code = 4


def budget(default):
    """Return the active budget: ``CE_BUDGET`` if set, else ``default``."""
    raw = os.environ.get(BUDGET_ENV)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(float(raw))
    except ValueError:
        raise ValidationError(f"{BUDGET_ENV}={raw!r} is not a number") from None
    if value <= 0:
        raise ValidationError(f"{BUDGET_ENV} must be positive, got {value}")
    return value
