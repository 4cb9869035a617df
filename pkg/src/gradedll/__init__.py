"""Graded differential linear logic: proof kernel, cut elimination and two executable models."""

__version__ = "0.1.0"
