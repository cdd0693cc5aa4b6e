"""HTTP sidecar exposing models to the toxsteer engine."""

__version__ = "0.1.0"

from .app import BridgeConfig, create_app

__all__ = ["BridgeConfig", "create_app", "__version__"]
