"""Tests for logger configuration helpers."""

import logging

import pytest

from ctssim.utils import logger as logger_module


@pytest.fixture(autouse=True)
def restore_loggers():
    saved_global = logger_module._global_logger
    saved_named = dict(logger_module._named_loggers)
    yield
    logger_module._global_logger = saved_global
    logger_module._named_loggers.clear()
    logger_module._named_loggers.update(saved_named)


def test_get_logger_reuses_named_logger_without_duplicate_handlers():
    logger_module._global_logger = None
    logger_module._named_loggers.clear()

    logger_module.setup_logging(level=logging.DEBUG)

    first = logger_module.get_logger("ctssim.test_reuse")
    second = logger_module.get_logger("ctssim.test_reuse")

    assert first is second
    assert first.logger.propagate is False
    assert len(first.logger.handlers) == 1
    assert first.is_debug()


def test_setup_logging_moves_existing_loggers_to_new_level():
    logger_module._global_logger = None
    logger_module._named_loggers.clear()

    named = logger_module.get_logger("ctssim.test_level")
    assert named.logger.level == logging.INFO

    logger_module.setup_logging(level=logging.WARNING)

    assert named.logger.level == logging.WARNING
    assert not named.is_debug()


def test_log_file_receives_messages(tmp_path):
    log_file = tmp_path / "logs" / "run.log"
    sim_logger = logger_module.SimLogger("ctssim.test_file", log_file=log_file)

    sim_logger.info("route planned")
    for handler in sim_logger.logger.handlers:
        handler.flush()

    assert "route planned" in log_file.read_text()


def test_records_carry_simulated_time(tmp_path):
    log_file = tmp_path / "run.log"
    sim_logger = logger_module.SimLogger("ctssim.test_clock", log_file=log_file)

    sim_logger.info("before run")
    logger_module.set_sim_time(12.5)
    try:
        sim_logger.warning("emergency engaged")
    finally:
        logger_module.set_sim_time(None)
    for handler in sim_logger.logger.handlers:
        handler.flush()

    lines = log_file.read_text().splitlines()
    assert lines[0].endswith("[--] before run")
    assert lines[1].endswith("[t=12.500s] emergency engaged")


def test_file_logger_keeps_debug_when_console_is_quiet(tmp_path):
    sim_logger = logger_module.SimLogger(
        "ctssim.test_quiet", log_file=tmp_path / "run.log", level=logging.WARNING
    )

    assert sim_logger.console_level == logging.WARNING
    assert sim_logger.is_debug()

    sim_logger.set_level(logging.ERROR)
    assert sim_logger.console_level == logging.ERROR
    assert sim_logger.logger.level == logging.DEBUG
