"""Test package for repository tests."""
