"""Configuration management for tom-sim."""

from .config_manager import ConfigManager, parse_seeds

__all__ = ["ConfigManager", "parse_seeds"]
