#!/usr/bin/env python3

from .main import app, configure_logging, main, run

__all__ = [
    "app",
    "configure_logging",
    "main",
    "run",
]
