import logging
from datetime import date, datetime, timedelta
from pathlib import Path

from hrgcheck.utils.config import MAX_LOG_DAYS, config, root_path

_logger = logging.getLogger("hrgcheck")


def format_log_dir_path() -> "Path":
    log_folder_path = root_path.joinpath(config["paths"]["logs_folder"])
    log_folder_path.mkdir(parents=True, exist_ok=True)
    return log_folder_path


def setup_logs(
    logger_name: "str",
    path: "Path",
    logger_filename: "str" = None,
):
    path.mkdir(exist_ok=True, parents=True)
    if logger_filename is None:
        logger_filename = logger_name

    filename = f"{logger_filename}_{str(date.today())}.log"

    logs_path = path.joinpath(filename)
    log = logging.getLogger(logger_name)
    for handler in log.handlers:
        if isinstance(handler, logging.FileHandler) and Path(handler.baseFilename) == logs_path.resolve():
            return

    fileh = logging.FileHandler(logs_path, "a", encoding="utf8")
    formatter = logging.Formatter(
        "%(asctime)s %(levelname)-8s [%(filename)s:%(funcName)s:%(lineno)d] %(message)s"
    )
    fileh.setFormatter(formatter)

    log.addHandler(fileh)
    log.setLevel(logging.DEBUG)


def clear_old_logs(folder_path: "Path", max_log_days: "int" = MAX_LOG_DAYS):
    last_date_keep_logs = date.today() - timedelta(days=max_log_days)
    for log_file in folder_path.rglob("*.log"):
        file_date = datetime.fromtimestamp(log_file.stat().st_mtime).date()
        if file_date < last_date_keep_logs:
            _logger.debug(f"{log_file.name} is over {max_log_days} days old, deleting.")
            log_file.unlink()
