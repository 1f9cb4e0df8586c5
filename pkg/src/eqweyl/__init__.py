"""Equivariant Weyl laws and oscillatory-integral asymptotics for compact group actions."""

__version__ = "0.1.0"
