"""Configuration management for simulation scenarios."""

import dataclasses
import json
from pathlib import Path
from typing import Any, TypeVar

import jsonschema
import yaml

from ctssim.utils.logger import get_logger

SettingsT = TypeVar("SettingsT")


class ConfigurationError(Exception):
    """Exception raised for configuration errors."""

    pass


class SimConfig:
    """Scenario configuration with YAML loading and hierarchical merging."""

    def __init__(self, config_data: dict[str, Any], source: Path | None = None):
        """
        Initialize SimConfig.

        Args:
            config_data: Configuration dictionary
            source: File the configuration was read from, used to resolve
                relative map paths
        """
        self._data = config_data
        self.source = source
        self.logger = get_logger("ctssim.config")

    @classmethod
    def from_yaml(cls, path: str | Path) -> "SimConfig":
        """
        Load configuration from YAML file.

        Args:
            path: Path to YAML configuration file

        Returns:
            SimConfig instance

        Raises:
            ConfigurationError: If file cannot be loaded
        """
        path = Path(path)
        if not path.exists():
            raise ConfigurationError(f"Configuration file not found: {path}")

        try:
            with open(path, encoding="utf-8") as f:
                data = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ConfigurationError(f"Failed to parse YAML file {path}: {e}") from e

        if data is not None and not isinstance(data, dict):
            raise ConfigurationError(f"Top level of {path} must be a mapping")
        return cls(data or {}, source=path)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SimConfig":
        """
        Create configuration from dictionary.

        Args:
            data: Configuration dictionary

        Returns:
            SimConfig instance
        """
        return cls(data)

    @classmethod
    def load_with_defaults(
        cls,
        config_path: str | Path | None = None,
        user_config_path: str | Path | None = None,
    ) -> "SimConfig":
        """
        Load configuration with hierarchical merging.

        Load hierarchy: user config → runtime config. Values absent from both
        fall back to the dataclass defaults when the scenario is built.

        Args:
            config_path: Runtime (scenario) configuration file path
            user_config_path: User configuration file path
                (defaults to ~/.ctssim/config.yaml)

        Returns:
            SimConfig instance with merged configuration
        """
        logger = get_logger("ctssim.config")
        merged_data: dict[str, Any] = {}
        source = None

        if user_config_path is None:
            user_config_path = Path.home() / ".ctssim" / "config.yaml"

        if Path(user_config_path).exists():
            logger.debug(f"Loading user config from {user_config_path}")
            user_config = cls.from_yaml(user_config_path)
            merged_data = cls._deep_merge(merged_data, user_config._data)

        if config_path:
            logger.debug(f"Loading scenario config from {config_path}")
            runtime_config = cls.from_yaml(config_path)
            merged_data = cls._deep_merge(merged_data, runtime_config._data)
            source = runtime_config.source

        return cls(merged_data, source=source)

    @staticmethod
    def _deep_merge(base: dict[str, Any], override: dict[str, Any]) -> dict[str, Any]:
        """
        Deep merge two dictionaries.

        Args:
            base: Base dictionary
            override: Override dictionary

        Returns:
            Merged dictionary
        """
        result = base.copy()
        for key, value in override.items():
            if key in result and isinstance(result[key], dict) and isinstance(value, dict):
                result[key] = SimConfig._deep_merge(result[key], value)
            else:
                result[key] = value
        return result

    def get(self, key: str, default: Any = None) -> Any:
        """
        Get configuration value using dot notation.

        Args:
            key: Configuration key (supports dot notation, e.g., 'vehicle.k_max')
            default: Default value if key not found

        Returns:
            Configuration value or default
        """
        value: Any = self._data
        for k in key.split("."):
            if isinstance(value, dict) and k in value:
                value = value[k]
            else:
                return default
        return value

    def get_float(self, key: str, default: float) -> float:
        """
        Get a numeric configuration value.

        Raises:
            ConfigurationError: If the stored value is not a number
        """
        value = self.get(key, default)
        try:
            return float(value)
        except (TypeError, ValueError) as e:
            raise ConfigurationError(f"'{key}' must be a number, got: {value!r}") from e

    def get_section(
        self, section: str, settings_cls: type[SettingsT], ignore: tuple[str, ...] = ()
    ) -> SettingsT:
        """
        Build a numeric settings dataclass from the keys of one section.

        Fields missing from the section keep their dataclass default.

        Args:
            section: Top-level section name, e.g. ``vehicle``
            settings_cls: Frozen dataclass whose fields are all floats
            ignore: Keys of the section handled elsewhere

        Returns:
            settings_cls instance

        Raises:
            ConfigurationError: Section is not a mapping, has unknown keys or
                holds values the dataclass rejects
        """
        data = self.get(section) or {}
        if not isinstance(data, dict):
            raise ConfigurationError(f"'{section}' must be a mapping, got: {data!r}")

        names = {f.name for f in dataclasses.fields(settings_cls)}
        unknown = sorted(set(data) - names - set(ignore))
        if unknown:
            raise ConfigurationError(f"Unknown '{section}' settings: {', '.join(unknown)}")

        values = {
            name: self.get_float(f"{section}.{name}", 0.0) for name in names & set(data)
        }
        try:
            return settings_cls(**values)
        except ValueError as e:
            raise ConfigurationError(f"Invalid '{section}' settings: {e}") from e

    def resolve_path(self, value: str | Path) -> Path:
        """
        Resolve a path from the configuration relative to its source file.

        Args:
            value: Path as written in the configuration

        Returns:
            Absolute or source-relative path
        """
        path = Path(value)
        if path.is_absolute() or self.source is None:
            return path
        return self.source.parent / path

    def validate(self, schema_path: str | Path) -> bool:
        """
        Validate configuration against JSON schema.

        Args:
            schema_path: Path to JSON schema file

        Returns:
            True if validation passes

        Raises:
            ConfigurationError: If validation fails
        """
        schema_path = Path(schema_path)
        if not schema_path.exists():
            raise ConfigurationError(f"Schema file not found: {schema_path}")

        try:
            with open(schema_path, encoding="utf-8") as f:
                schema = json.load(f)
            jsonschema.validate(self._data, schema)
            self.logger.debug("Configuration validation passed")
            return True
        except json.JSONDecodeError as e:
            raise ConfigurationError(f"Failed to parse schema file: {e}") from e
        except jsonschema.ValidationError as e:
            where = ".".join(str(p) for p in e.absolute_path) or "<root>"
            raise ConfigurationError(
                f"Configuration validation failed at {where}: {e.message}"
            ) from e

    def __repr__(self) -> str:
        """String representation."""
        return f"SimConfig({self._data})"
