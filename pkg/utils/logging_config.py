# utils/logging_config.py - Structured Logging Configuration

import os
import logging
import logging.handlers
from datetime import datetime, timezone
from pathlib import Path
import json

EXTRA_FIELDS = ('event_type', 'details', 'metric_name', 'value', 'unit', 'tags', 'task')


class JSONFormatter(logging.Formatter):
    """Custom JSON formatter for structured logging"""

    def format(self, record):
        """Format log record as JSON"""
        log_entry = {
            'timestamp': datetime.now(timezone.utc).isoformat(),
            'level': record.levelname,
            'logger': record.name,
            'message': record.getMessage(),
            'module': record.module,
            'function': record.funcName,
            'line': record.lineno,
            'process_id': os.getpid(),
            'thread_id': record.thread,
        }

        if record.exc_info:
            log_entry['exception'] = self.formatException(record.exc_info)

        for field in EXTRA_FIELDS:
            if hasattr(record, field):
                log_entry[field] = getattr(record, field)

        return json.dumps(log_entry, default=str)


def _formatter(config):
    if config.LOG_FORMAT == 'json':
        return JSONFormatter()
    return logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')


def setup_logging(config):
    """Setup logging for a CLI process from a configuration class"""
    level = getattr(logging, str(config.LOG_LEVEL).upper(), logging.INFO)

    root_logger = logging.getLogger()
    root_logger.setLevel(level)
    root_logger.handlers.clear()

    performance_logger = logging.getLogger('performance')
    performance_logger.handlers.clear()
    performance_logger.setLevel(logging.INFO)
    performance_logger.propagate = False

    if config.LOG_TO_STDOUT:
        # stderr keeps stdout free for command output
        console_handler = logging.StreamHandler()
        console_handler.setLevel(level)
        console_handler.setFormatter(_formatter(config))
        root_logger.addHandler(console_handler)

        perf_console = logging.StreamHandler()
        perf_console.setLevel(max(level, logging.INFO))
        perf_console.setFormatter(_formatter(config))
        performance_logger.addHandler(perf_console)
    else:
        log_dir = Path(config.LOG_FOLDER)
        log_dir.mkdir(parents=True, exist_ok=True)

        app_handler = logging.handlers.RotatingFileHandler(
            log_dir / 'rotor.log',
            maxBytes=10 * 1024 * 1024,  # 10MB
            backupCount=5
        )
        app_handler.setLevel(level)
        app_handler.setFormatter(JSONFormatter())
        root_logger.addHandler(app_handler)

        error_handler = logging.handlers.RotatingFileHandler(
            log_dir / 'error.log',
            maxBytes=10 * 1024 * 1024,
            backupCount=5
        )
        error_handler.setLevel(logging.ERROR)
        error_handler.setFormatter(JSONFormatter())
        root_logger.addHandler(error_handler)

        performance_handler = logging.handlers.RotatingFileHandler(
            log_dir / 'performance.log',
            maxBytes=10 * 1024 * 1024,
            backupCount=5
        )
        performance_handler.setLevel(logging.INFO)
        performance_handler.setFormatter(JSONFormatter())
        performance_logger.addHandler(performance_handler)

    logging.getLogger(__name__).debug("Logging system initialized")


def log_performance_metric(metric_name, value, unit='ms', tags=None):
    """Log performance metrics"""
    performance_logger = logging.getLogger('performance')

    log_data = {
        'metric_name': metric_name,
        'value': value,
        'unit': unit,
        'tags': tags or {}
    }

    performance_logger.info("Performance Metric", extra=log_data)


def log_run_event(event_type, details, task=None):
    """Log run lifecycle events"""
    run_logger = logging.getLogger('run')

    log_data = {
        'event_type': event_type,
        'details': details
    }

    if task:
        log_data['task'] = task

    if event_type.endswith('failed'):
        run_logger.error(f"Run Event: {event_type}", extra=log_data)
    else:
        run_logger.info(f"Run Event: {event_type}", extra=log_data)
