"""Error types shared across the package."""


class DimensionError(ValueError):
    """Operands live on ground sets of different sizes."""


class SizeGuardError(ValueError):
    """A computation would exceed the configured enumeration bounds."""


class CrossingPartitionError(ValueError):
    """A noncrossing partition was required."""
