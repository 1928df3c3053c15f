from .app import create_app
from .session import ReplaySession

__all__ = ["ReplaySession", "create_app"]
