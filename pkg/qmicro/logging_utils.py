"""Logging setup shared by the library and the command line."""

import logging

from rich.console import Console
from rich.logging import RichHandler

_CONFIGURED = False


def configure_logging(level: str = "WARNING") -> None:
    """
    Attach a rich handler writing to stderr to the ``qmicro`` logger tree.

    Args:
        level (str): Logging level name, e.g. ``"INFO"``.
    """
    global _CONFIGURED
    root = logging.getLogger("qmicro")
    root.setLevel(level.upper())
    if _CONFIGURED:
        return
    handler = RichHandler(
        console=Console(stderr=True), show_path=False, rich_tracebacks=False
    )
    handler.setFormatter(logging.Formatter("%(name)s: %(message)s"))
    root.addHandler(handler)
    root.propagate = False
    _CONFIGURED = True


def get_logger(name: str) -> logging.Logger:
    """Return a child of the ``qmicro`` logger."""
    if not name.startswith("qmicro"):
        name = f"qmicro.{name}"
    return logging.getLogger(name)
