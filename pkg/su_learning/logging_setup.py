"""
Logging Setup
Console logging for every command, optional timestamped log files, and JSON run logs
"""

import json
import logging
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Optional, Union

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

_NOISY_LOGGERS = ('joblib', 'matplotlib', 'numexpr')


def setup_logging(level: Union[str, int] = "INFO",
                  log_dir: Optional[Path] = None,
                  to_file: bool = False) -> Optional[Path]:
    """Configure the root logger; returns the log file path when file output is on"""
    handlers: list = [logging.StreamHandler()]
    log_filename = None

    if to_file:
        log_dir = Path(log_dir or "logs")
        log_dir.mkdir(parents=True, exist_ok=True)
        timestamp = datetime.now().strftime('%Y%m%d_%H%M%S')
        log_filename = log_dir / f"su_learning_{timestamp}.log"
        handlers.append(logging.FileHandler(log_filename, encoding='utf-8'))

    logging.basicConfig(level=level, format=LOG_FORMAT, handlers=handlers, force=True)

    # Suppress noisy loggers
    for name in _NOISY_LOGGERS:
        logging.getLogger(name).setLevel(logging.WARNING)

    return log_filename


def save_run_log(entry: Dict[str, Any], path: Union[str, Path]) -> Path:
    """Write a structured run record as JSON"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(entry, f, indent=2, ensure_ascii=False, default=str)

    logging.getLogger(__name__).info(f"Run log saved: {path}")
    return path
