"""Service configuration: one JSON file plus environment-variable overrides."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional


class ConfigError(Exception):
    pass


ENV_PREFIX = "AQUA_"

_ENV_KEYS = {
    "AQUA_LISTEN": "listen",
    "AQUA_DATA_DIR": "data_dir",
    "AQUA_DROP_DIR": "drop_dir",
    "AQUA_INTER_ZONE_PENALTY": "inter_zone_penalty",
    "AQUA_POLL_INTERVAL": "poll_interval",
    "AQUA_STATIC_DIR": "static_dir",
}


@dataclass(frozen=True)
class ServiceConfig:
    listen_host: str = "127.0.0.1"
    listen_port: int = 8000
    data_dir: Path = Path("data")
    drop_dir: Optional[Path] = None
    inter_zone_penalty: float = 5.0
    poll_interval: float = 1.0
    static_dir: Optional[Path] = None

    @property
    def audit_path(self) -> Path:
        return self.data_dir / "audit.log"

    @property
    def registry_dir(self) -> Path:
        return self.data_dir / "registry"

    @property
    def kb_path(self) -> Path:
        return self.data_dir / "kb.txt"

    @property
    def media_dir(self) -> Path:
        return self.data_dir / "media"

    def effective_drop_dir(self) -> Path:
        return self.drop_dir if self.drop_dir is not None else self.data_dir / "dropbox"


def load_config(
    path: Optional[str | Path] = None,
    env: Optional[Mapping[str, str]] = None,
) -> ServiceConfig:
    """Read the config file (if any) and apply AQUA_* overrides on top."""
    env = os.environ if env is None else env
    raw: dict[str, object] = {}
    config_path = path or env.get("AQUA_CONFIG")
    if config_path:
        file_path = Path(config_path)
        if not file_path.exists():
            raise ConfigError(f"config file not found: {file_path}")
        try:
            raw = json.loads(file_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"bad config file {file_path}: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError(f"bad config file {file_path}: expected a JSON object")

    for env_key, config_key in _ENV_KEYS.items():
        if env_key in env:
            raw[config_key] = env[env_key]

    listen = str(raw.get("listen", "127.0.0.1:8000"))
    host, _, port_text = listen.partition(":")
    if not host or not port_text:
        raise ConfigError(f"bad listen address {listen!r}: expected host:port")
    try:
        port = int(port_text)
    except ValueError:
        raise ConfigError(f"bad listen port {port_text!r}") from None

    try:
        penalty = float(raw.get("inter_zone_penalty", 5.0))
        poll = float(raw.get("poll_interval", 1.0))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad numeric config value: {exc}") from None
    if penalty < 0:
        raise ConfigError("inter_zone_penalty must be non-negative")

    drop_dir = raw.get("drop_dir")
    static_dir = raw.get("static_dir")
    return ServiceConfig(
        listen_host=host,
        listen_port=port,
        data_dir=Path(str(raw.get("data_dir", "data"))),
        drop_dir=Path(str(drop_dir)) if drop_dir else None,
        inter_zone_penalty=penalty,
        poll_interval=poll,
        static_dir=Path(str(static_dir)) if static_dir else None,
    )
