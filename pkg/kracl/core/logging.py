import logging
from typing import Optional

from .config import Settings, settings as default_settings


def configure_logging(settings: Optional[Settings] = None) -> None:
    """Install a single stream handler on the ``kracl`` logger tree."""
    settings = settings or default_settings
    root = logging.getLogger("kracl")
    root.setLevel(settings.LOG_LEVEL.upper())
    if not root.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(settings.LOG_FORMAT))
        root.addHandler(handler)
    root.propagate = False
