class PreconditionError(ValueError):
    """An operation was called with arguments outside its domain."""
