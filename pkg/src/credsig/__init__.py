"""Redactable and sanitizable signatures over canonicalized credential documents."""

from .primitives import group_params, keygen, KeyPair
from .document import canonicalize, make_template, Constraint, Template

__version__ = "0.1.0"
