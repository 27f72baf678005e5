"""Tests for logging_config.py."""

import logging
import sys

import pytest

from gbcurv.logging_config import get_logger, resolve_log_level


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for name in ("GBCURV_DEBUG", "DEBUG", "GBCURV_LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)


class TestResolveLogLevel:
    """Test resolve_log_level."""

    def test_default_info(self):
        assert resolve_log_level() == logging.INFO

    @pytest.mark.parametrize("name", ["GBCURV_DEBUG", "DEBUG"])
    def test_debug(self, monkeypatch, name):
        """Either debug variable selects DEBUG."""
        monkeypatch.setenv(name, "1")
        assert resolve_log_level() == logging.DEBUG

    def test_named_level(self, monkeypatch):
        """GBCURV_LOG_LEVEL is case-insensitive."""
        monkeypatch.setenv("GBCURV_LOG_LEVEL", "warning")
        assert resolve_log_level() == logging.WARNING

    def test_unknown_level(self, monkeypatch):
        monkeypatch.setenv("GBCURV_LOG_LEVEL", "LOUD")
        with pytest.raises(ValueError, match="Unknown GBCURV_LOG_LEVEL"):
            resolve_log_level()


class TestGetLogger:
    """Test get_logger."""

    def test_single_stderr_handler(self):
        """Repeated calls reuse one stderr handler."""
        logger = get_logger("gbcurv.tests.handler")
        get_logger("gbcurv.tests.handler")
        assert len(logger.handlers) == 1
        assert logger.handlers[0].stream is sys.stderr
        assert not logger.propagate

    def test_level_applied(self, monkeypatch):
        monkeypatch.setenv("GBCURV_LOG_LEVEL", "ERROR")
        assert get_logger("gbcurv.tests.level").level == logging.ERROR
