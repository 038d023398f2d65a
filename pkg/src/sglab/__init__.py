"""Sine-Gordon solitons on a dc-SQUID transmission line as analogue black holes."""

__version__ = "0.1.0"
