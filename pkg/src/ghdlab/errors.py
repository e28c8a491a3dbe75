"""Exception hierarchy shared across the workbench.

The CLI maps these onto process exit codes: bad parameters exit 2,
capacity problems exit 3, statistical infeasibility exits 4.
"""


class GhdLabError(Exception):
    """Base class for all workbench errors."""


class CapacityError(GhdLabError):
    """A dense computation would exceed the configured memory/size cap."""


class StatisticalInfeasibilityError(GhdLabError):
    """A requested estimate cannot be produced at any sample size."""


class RejectionFloorError(StatisticalInfeasibilityError):
    """Rejection sampling acceptance rate fell below the configured floor."""


class TailBoundInfeasibleError(StatisticalInfeasibilityError):
    """No tail-bound constant satisfies the required inequalities at this n."""


class ProtocolContractError(GhdLabError):
    """A protocol run violated its declared worst-case cost."""


class CertificateInfeasibleError(GhdLabError):
    """Corruption-certificate constants violate their feasibility condition."""


class DisjointnessError(GhdLabError):
    """A rectangle family required to be pairwise disjoint overlaps."""
