from hrgcheck.utils.logs import setup_logs, clear_old_logs
