import logging
import os

LOG_FORMAT = '%(asctime)s - %(levelname)s - %(message)s'


def setup_logging(level="INFO", log_file=None):
    """Configure the root logger once for a CLI run."""
    kwargs = {"level": getattr(logging, str(level).upper(), logging.INFO), "format": LOG_FORMAT, "force": True}
    if log_file:
        directory = os.path.dirname(log_file)
        if directory:
            os.makedirs(directory, exist_ok=True)
        kwargs["filename"] = log_file
    logging.basicConfig(**kwargs)
