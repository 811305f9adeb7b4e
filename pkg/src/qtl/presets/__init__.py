"""Checked-in scenario presets, shipped as package data."""

import json
from importlib import resources

from qtl.core.exceptions import ConfigurationError
from qtl.core.schemas import ScenarioConfig, parse_scenario


def list_presets() -> list[str]:
    """Names of all bundled presets, sorted."""
    return sorted(
        entry.name.removesuffix(".json")
        for entry in resources.files(__name__).iterdir()
        if entry.name.endswith(".json")
    )


def load_preset(name: str) -> ScenarioConfig:
    """
    Load a bundled preset by name.

    Raises:
        ConfigurationError: If no preset of that name exists
    """
    resource = resources.files(__name__).joinpath(f"{name}.json")
    if not resource.is_file():
        raise ConfigurationError(
            f"Unknown preset '{name}'. Available: {', '.join(list_presets())}",
            details={"preset": name},
        )
    return parse_scenario(json.loads(resource.read_text(encoding="utf-8")))


__all__ = ["list_presets", "load_preset"]
