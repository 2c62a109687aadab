"""Certified kernelization: CNF encoders, reduction rules, extended-resolution witnesses."""

__version__ = "0.1.0"
