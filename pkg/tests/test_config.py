from __future__ import annotations

import pytest

from flipdeck.config import load_settings
from flipdeck.errors import ConfigError


def test_defaults_without_file():
    settings = load_settings(None)
    assert settings.port == 8400
    assert settings.provider_kind == "digest"
    assert settings.pacing.alpha == 1.0


def test_file_values_parsed(tmp_path):
    conf = tmp_path / "conf"
    conf.write_text(
        "listen.port = 9100\n"
        "# a comment line\n"
        "pacing.alpha = 2.0\n"
        "storage.fsync = false   # trailing comment\n",
        encoding="utf-8",
    )
    settings = load_settings(conf)
    assert settings.port == 9100
    assert settings.pacing.alpha == 2.0
    assert settings.fsync is False


def test_env_overrides_file(tmp_path, monkeypatch):
    conf = tmp_path / "conf"
    conf.write_text("listen.port = 9100\n", encoding="utf-8")
    monkeypatch.setenv("FLIPDECK_LISTEN_PORT", "9200")
    monkeypatch.setenv("FLIPDECK_PACING_BETA", "0.25")
    settings = load_settings(conf)
    assert settings.port == 9200
    assert settings.pacing.beta == 0.25


def test_malformed_line_reports_position(tmp_path):
    conf = tmp_path / "conf"
    conf.write_text("listen.port = 9100\nwhat is this\n", encoding="utf-8")
    with pytest.raises(ConfigError, match=r"conf:2"):
        load_settings(conf)


def test_non_numeric_port_rejected(tmp_path):
    conf = tmp_path / "conf"
    conf.write_text("listen.port = default\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="integer"):
        load_settings(conf)


def test_invalid_pacing_params_rejected(tmp_path):
    conf = tmp_path / "conf"
    conf.write_text("pacing.beta = 1.5\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_settings(conf)


def test_http_provider_requires_url(tmp_path):
    conf = tmp_path / "conf"
    conf.write_text("provider.kind = http\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="provider.url"):
        load_settings(conf)


def test_missing_file_is_an_error(tmp_path):
    with pytest.raises(ConfigError, match="does not exist"):
        load_settings(tmp_path / "absent.conf")
