"""Single-UAV access point placement over obstacle-rich venues."""

__version__ = "0.1.0"
