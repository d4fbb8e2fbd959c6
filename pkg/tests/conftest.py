# -*- coding: utf-8 -*-
"""Shared fixtures: every test gets a fresh default configuration."""
import pytest

from src.expdyn.config import ExpDynConfig


@pytest.fixture
def config() -> ExpDynConfig:
    return ExpDynConfig()


@pytest.fixture
def fast_config() -> ExpDynConfig:
    """Smaller budgets for tests that classify many parameters."""
    return ExpDynConfig().with_overrides(n_max=4000, transient=500, p_max=64, samples=40)
