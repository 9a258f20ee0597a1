"""Detection of sensitive operations hidden behind environment-probing branches."""

__version__ = "0.1.0"
