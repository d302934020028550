"""Exception types shared across the package."""


class TmwallError(Exception):
    """Base class for all package errors."""


class ZeroInverse(TmwallError, ZeroDivisionError):
    pass


class InsufficientPrecision(TmwallError, ValueError):
    pass


class OverlapMismatch(TmwallError, ValueError):
    """Two adjacent tiles disagree on their shared border."""

    def __init__(self, first: tuple[int, int], second: tuple[int, int]):
        self.first = first
        self.second = second
        super().__init__(f"border mismatch between tiles {first} and {second}")


class SizeLimit(TmwallError, ValueError):
    pass


class AllZero(TmwallError, ValueError):
    pass


class OutOfRange(TmwallError, ValueError):
    pass
