"""Command line exports"""

from .commands import AppRunCommand, DemoCommand, FixtureCommand, MwemCommand, Scenario
from .main import app

__all__ = ["AppRunCommand", "DemoCommand", "FixtureCommand", "MwemCommand", "Scenario", "app"]
