"""Exception and warning types raised by treeshift."""


class TreeShiftError(Exception):
    """Base class for all library errors."""


class TreeSpecError(TreeShiftError, ValueError):
    """A tree description does not define a valid rooted truncated tree."""


class CycleDetected(TreeSpecError):
    pass


class MultipleParents(TreeSpecError):
    pass


class NotConnected(TreeSpecError):
    pass


class InteriorLeaf(TreeSpecError):
    """A vertex above the truncation horizon has no stored child."""


class CapacityError(TreeShiftError):
    """Construction would exceed the configured vertex budget."""


class NotAnAncestor(TreeShiftError, ValueError):
    pass


class ZeroWeight(TreeShiftError, ValueError):
    pass


class WeightSpecError(TreeShiftError, ValueError):
    pass


class NotNormalized(TreeShiftError):
    """Child weights do not sum to one (or are not positive) where required."""


class HorizonTooShallow(TreeShiftError):
    """The truncation is too shallow for the requested quantity."""


class IncompleteSlices(TreeShiftError):
    """Depth slices below the horizon are not fully stored."""


class DivergentSeries(TreeShiftError):
    """A symbol's power series cannot be certified to converge at the radius."""


class BudgetExceeded(TreeShiftError):
    """Dense materialization requested for too many vertices."""


class NoConvergence(TreeShiftError):
    pass


class TruncationLoss(TreeShiftError):
    """A computation would need vertices beyond the stored horizon."""


class TruncationLossWarning(UserWarning):
    """Mass or contributions were dropped at the truncation frontier."""
