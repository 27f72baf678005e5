"""Tests for config.py."""

import pytest

from gbcurv.config import (
    CATALOG_DEFAULTS,
    SUBCOMMANDS,
    TOLERANCES,
    check_routes_enabled,
    get_worker_count,
    parse_catalog_params,
)
from gbcurv.main import build_parser


class TestWorkerCount:
    """Test get_worker_count."""

    def test_unset_uses_cpu_count(self, monkeypatch):
        """Without GBCURV_THREADS the CPU count is used."""
        monkeypatch.delenv("GBCURV_THREADS", raising=False)
        monkeypatch.setattr("gbcurv.config.os.cpu_count", lambda: 6)
        assert get_worker_count() == 6

    def test_valid(self, monkeypatch):
        monkeypatch.setenv("GBCURV_THREADS", "3")
        assert get_worker_count() == 3

    @pytest.mark.parametrize("raw", ["many", "0", "-2"])
    def test_invalid(self, monkeypatch, raw):
        """Non-positive or non-integer values raise ValueError."""
        monkeypatch.setenv("GBCURV_THREADS", raw)
        with pytest.raises(ValueError, match="GBCURV_THREADS"):
            get_worker_count()


class TestCheckRoutes:
    """Test check_routes_enabled."""

    def test_explicit(self, monkeypatch):
        monkeypatch.setenv("GBCURV_CHECK_ROUTES", "1")
        assert check_routes_enabled()
        monkeypatch.setenv("GBCURV_CHECK_ROUTES", "0")
        assert not check_routes_enabled()

    def test_follows_debug(self, monkeypatch):
        """Unset, the cross-check follows debug mode."""
        monkeypatch.delenv("GBCURV_CHECK_ROUTES", raising=False)
        monkeypatch.delenv("DEBUG", raising=False)
        monkeypatch.setenv("GBCURV_DEBUG", "1")
        assert check_routes_enabled()
        monkeypatch.setenv("GBCURV_DEBUG", "0")
        assert not check_routes_enabled()


class TestParseCatalogParams:
    """Test parse_catalog_params."""

    def test_pairs(self):
        """Comma-separated pairs are typed."""
        assert parse_catalog_params(["r1=1,r2=0.5"]) == {"r1": 1, "r2": 0.5}

    def test_list_value(self):
        """Bare pieces extend the previous key into a list."""
        assert parse_catalog_params(["radii=1,2", "n=3"]) == {"radii": [1, 2], "n": 3}

    def test_string_value(self):
        assert parse_catalog_params(["expr=u1*u2"]) == {"expr": "u1*u2"}

    def test_empty_key(self):
        with pytest.raises(ValueError, match="Malformed"):
            parse_catalog_params(["=3"])

    def test_bare_first_piece(self):
        with pytest.raises(ValueError, match="key=value"):
            parse_catalog_params(["3"])


class TestConstants:
    """Consistency of the declared constants."""

    def test_subcommands_match_parser(self):
        """Every subcommand in config is wired into the CLI."""
        parser = build_parser()
        (subparsers,) = [a for a in parser._actions if a.dest == "command"]
        assert set(subparsers.choices) == set(SUBCOMMANDS)

    def test_tolerances_positive(self):
        assert all(value > 0 for value in TOLERANCES.values())

    def test_catalog_defaults_are_dicts(self):
        assert all(isinstance(value, dict) for value in CATALOG_DEFAULTS.values())
