import logging

import pytest

from hypoctrl.utils import PACKAGE_LOGGER, format_duration, setup_logger


@pytest.mark.parametrize(
    "seconds, expected",
    [(9.2, "9s"), (59.4, "59s"), (195.2, "3min15s"), (61, "1min01s"), (6000, "1h40min")],
)
def test_format_duration(seconds, expected):
    assert format_duration(seconds) == expected


def test_setup_logger_writes_file_and_replaces_handlers(tmp_path):
    log_file = tmp_path / "run.log"
    try:
        setup_logger(log_file, level="DEBUG")
        logger = setup_logger(log_file, level="DEBUG")
        assert len(logger.handlers) == 2

        logging.getLogger(f"{PACKAGE_LOGGER}.estimation").debug("📊 weight fitted")
        for handler in logger.handlers:
            handler.flush()
        assert "DEBUG - 📊 weight fitted" in log_file.read_text(encoding="utf-8")
    finally:
        for handler in logging.getLogger(PACKAGE_LOGGER).handlers:
            handler.close()
        logging.getLogger(PACKAGE_LOGGER).handlers.clear()


def test_setup_logger_console_only():
    try:
        logger = setup_logger()
        assert logger.name == PACKAGE_LOGGER
        assert logger.level == logging.INFO
        assert [type(h) for h in logger.handlers] == [logging.StreamHandler]
    finally:
        logging.getLogger(PACKAGE_LOGGER).handlers.clear()
