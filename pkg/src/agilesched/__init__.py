"""Scheduling of observation and download tasks for agile Earth-observation satellites."""

__version__ = "0.1.0"
