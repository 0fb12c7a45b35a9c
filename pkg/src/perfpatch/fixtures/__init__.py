"""Test fixtures shipped with the package."""
