import logging
from os import getenv, makedirs, path
from datetime import datetime

DEFAULT_LOGS_DIR = 'logs'


def setup_logger(logger_name, level=None):
    logs_dir = getenv('PAGOF_LOG_DIR', DEFAULT_LOGS_DIR)
    makedirs(logs_dir, exist_ok=True)
    if level is None:
        level = getenv('PAGOF_LOG_LEVEL', 'INFO').upper()
    logger = logging.getLogger(logger_name)
    logger.setLevel(level)
    # Prevent duplicate handlers if called multiple times.
    '''
    One file per logger and day; worker processes started by joblib call this
    again and get their own handler, appending to the same file.
    '''
    if not logger.handlers:
        log_file = datetime.now().strftime(f'{logger_name}_%Y%m%d.log')
        fh = logging.FileHandler(path.join(logs_dir, log_file))
        formatter = logging.Formatter('%(asctime)s - %(levelname)s - [%(module)s] - %(message)s')
        fh.setFormatter(formatter)
        logger.addHandler(fh)
    return logger
