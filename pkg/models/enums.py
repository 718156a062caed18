from enum import IntEnum


class GammaVariant(IntEnum):
    LINEAR = 0
    TWO_THRESHOLD = 1


class BoundaryKind(IntEnum):
    """一维两点边值问题的混合边界组合"""
    DIRICHLET_NEUMANN = 0   # u(0)=给定值, u'(1)=0
    NEUMANN_DIRICHLET = 1   # u'(0)=0, u(1)=给定值


class EdgeKind(IntEnum):
    NEUMANN = 0
    DIRICHLET = 1


class PhiScheme(IntEnum):
    IMPLICIT = 0
    EXPLICIT = 1


class InitialShape(IntEnum):
    QUARTER_DISK = 0
    STRIPE = 1
    FULL = 2


class RunStatus(IntEnum):
    OK = 0
    FAILED = 1
