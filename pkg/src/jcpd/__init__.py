"""Joint contact plan design for a GNSS plus libration-point constellation."""

__version__ = "0.1.0"
