"""Service configuration: TOML file plus THANKSD_* environment overrides."""

from __future__ import annotations

import os
from dataclasses import dataclass, field, fields

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .registry import DEFAULT_NPM_TEMPLATE, DEFAULT_PYPI_TEMPLATE

ENV_PREFIX = "THANKSD_"


class ConfigError(Exception):
    pass


@dataclass
class ServiceConfig:
    listen_host: str = "127.0.0.1"
    listen_port: int = 8420
    ledger_path: str = "data/thanks.ndjson"
    cache_dir: str = "data/cache"
    outbox_dir: str = "data/outbox"
    pypi_url_template: str = DEFAULT_PYPI_TEMPLATE
    npm_url_template: str = DEFAULT_NPM_TEMPLATE
    override_map_path: str | None = None
    registry_fixture_dir: str | None = None
    history_fixture_dir: str | None = None
    mail_host: str | None = None
    mail_port: int = 25
    mail_username: str | None = None
    mail_password: str | None = None
    mail_sender: str = "thanksd@localhost"
    window_days: int = 21
    resolver_parallelism: int = 4
    dispatch_parallelism: int = 2
    deny_list_path: str | None = None
    template_dir: str | None = None
    scan_body_limit: int = 1024 * 1024
    note_form_base_url: str = "http://127.0.0.1:8420"
    context_preamble: str = (
        "This message was generated by a self-hosted appreciation pipeline "
        "on behalf of anonymous users of your software."
    )

    def deny_list(self) -> frozenset[str]:
        if not self.deny_list_path:
            return frozenset()
        try:
            with open(self.deny_list_path, "r", encoding="utf-8") as fh:
                return frozenset(
                    line.strip()
                    for line in fh
                    if line.strip() and not line.strip().startswith("#")
                )
        except OSError as exc:
            raise ConfigError("cannot read deny list: %s" % exc) from exc

    def validate(self) -> None:
        if self.window_days <= 0:
            raise ConfigError("window_days must be positive")
        if self.scan_body_limit <= 0:
            raise ConfigError("scan_body_limit must be positive")
        for directory in (self.cache_dir, self.outbox_dir):
            try:
                os.makedirs(directory, exist_ok=True)
            except OSError as exc:
                raise ConfigError("cannot create %s: %s" % (directory, exc)) from exc
        parent = os.path.dirname(os.path.abspath(self.ledger_path))
        try:
            os.makedirs(parent, exist_ok=True)
        except OSError as exc:
            raise ConfigError("cannot create %s: %s" % (parent, exc)) from exc


_INT_FIELDS = {
    f.name for f in fields(ServiceConfig) if f.type in ("int", int)
}


def load_config(path: str | None = None, env: dict | None = None) -> ServiceConfig:
    """Build config from defaults, then the TOML file, then the environment.

    Every ServiceConfig field is a valid TOML key and has an environment
    override named THANKSD_<FIELD_UPPERCASED>.
    """
    env = os.environ if env is None else env
    values: dict = {}
    known = {f.name for f in fields(ServiceConfig)}
    if path is not None:
        try:
            with open(path, "rb") as fh:
                loaded = tomllib.load(fh)
        except (OSError, tomllib.TOMLDecodeError) as exc:
            raise ConfigError("cannot load config %s: %s" % (path, exc)) from exc
        for key, value in loaded.items():
            if key not in known:
                raise ConfigError("unknown config key: %s" % key)
            values[key] = value
    for name in known:
        env_key = ENV_PREFIX + name.upper()
        if env_key in env:
            raw = env[env_key]
            values[name] = int(raw) if name in _INT_FIELDS else raw
    try:
        config = ServiceConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    return config
