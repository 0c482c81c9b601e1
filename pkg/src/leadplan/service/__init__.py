from .app import create_app
from .state import ServiceLimits, ServingState, SnapshotStore

__all__ = ["create_app", "ServiceLimits", "ServingState", "SnapshotStore"]
