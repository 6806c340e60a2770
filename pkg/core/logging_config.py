import logging

from pythonjsonlogger.json import JsonFormatter

from core.config import settings


def configure_logging(level: str | None = None, fmt: str | None = None) -> None:
    """Configures the root logger once, as text or as JSON lines."""
    level = (level or settings.log_level).upper()
    fmt = fmt or settings.log_format
    if fmt == "json":
        handler = logging.StreamHandler()
        handler.setFormatter(JsonFormatter("%(asctime)s %(levelname)s %(name)s %(message)s"))
        root = logging.getLogger()
        root.handlers[:] = [handler]
        root.setLevel(level)
    else:
        logging.basicConfig(level=level)
