"""Service configuration: key=value files with FLIPDECK_ env overrides.

Example file::

    listen.host = 127.0.0.1
    listen.port = 8400
    storage.path = ./data/events.log
    provider.kind = digest        # digest | http
    provider.url =
    provider.key =
    provider.model =
    pacing.alpha = 1.0

Environment variables override file values: ``FLIPDECK_LISTEN_PORT=9000``
maps to ``listen.port``. Unknown keys and malformed lines fail with the
offending file line in the message.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .errors import BadParams, ConfigError
from .pacing import PacingParams

_DEFAULTS: dict[str, str] = {
    "listen.host": "127.0.0.1",
    "listen.port": "8400",
    "storage.path": "./flipdeck-data/events.log",
    "storage.fsync": "true",
    "storage.snapshot_every": "10000",
    "provider.kind": "digest",
    "provider.url": "",
    "provider.key": "",
    "provider.model": "",
    "ui.dir": "",
    "pacing.alpha": "1.0",
    "pacing.beta": "0.5",
    "pacing.theta_hi": "0.7",
    "pacing.theta_lo": "0.5",
    "pacing.lam": "0.5",
    "pacing.ssthresh": "8.0",
}


@dataclass
class Settings:
    host: str = "127.0.0.1"
    port: int = 8400
    storage_path: Path = Path("./flipdeck-data/events.log")
    fsync: bool = True
    snapshot_every: int = 10000
    provider_kind: str = "digest"
    provider_url: str = ""
    provider_key: str = ""
    provider_model: str = ""
    ui_dir: Optional[Path] = None
    pacing: PacingParams = field(default_factory=PacingParams)


def _parse_file(path: Path) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _DEFAULTS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = value.split("#", 1)[0].strip()
    return values


def _env_overrides() -> dict[str, str]:
    out: dict[str, str] = {}
    for key in _DEFAULTS:
        env_name = "FLIPDECK_" + key.replace(".", "_").upper()
        if env_name in os.environ:
            out[key] = os.environ[env_name]
    return out


def _to_int(values: dict[str, str], key: str, source: str) -> int:
    try:
        return int(values[key])
    except ValueError as exc:
        raise ConfigError(f"{source}: {key} must be an integer, got {values[key]!r}") from exc


def _to_float(values: dict[str, str], key: str, source: str) -> float:
    try:
        return float(values[key])
    except ValueError as exc:
        raise ConfigError(f"{source}: {key} must be a number, got {values[key]!r}") from exc


def load_settings(path: Optional[Path] = None) -> Settings:
    values = dict(_DEFAULTS)
    source = str(path) if path else "<defaults>"
    if path is not None:
        if not Path(path).exists():
            raise ConfigError(f"config file {path} does not exist")
        values.update(_parse_file(Path(path)))
    values.update(_env_overrides())

    pacing = PacingParams(
        alpha=_to_float(values, "pacing.alpha", source),
        beta=_to_float(values, "pacing.beta", source),
        theta_hi=_to_float(values, "pacing.theta_hi", source),
        theta_lo=_to_float(values, "pacing.theta_lo", source),
        lam=_to_float(values, "pacing.lam", source),
        ssthresh=_to_float(values, "pacing.ssthresh", source),
    )
    try:
        pacing.validate()
    except BadParams as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    if values["provider.kind"] not in ("digest", "http"):
        raise ConfigError(f"{source}: provider.kind must be digest or http")
    if values["provider.kind"] == "http" and not values["provider.url"]:
        raise ConfigError(f"{source}: provider.kind=http requires provider.url")
    return Settings(
        host=values["listen.host"],
        port=_to_int(values, "listen.port", source),
        storage_path=Path(values["storage.path"]),
        fsync=values["storage.fsync"].lower() in ("1", "true", "yes"),
        snapshot_every=_to_int(values, "storage.snapshot_every", source),
        provider_kind=values["provider.kind"],
        provider_url=values["provider.url"],
        provider_key=values["provider.key"],
        provider_model=values["provider.model"],
        ui_dir=Path(values["ui.dir"]) if values["ui.dir"] else None,
        pacing=pacing,
    )
