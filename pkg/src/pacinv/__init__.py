"""PAC learning under group invariances on finite instance spaces."""
__version__ = "0.1.0"
