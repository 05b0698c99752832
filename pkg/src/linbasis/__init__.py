"""linbasis: search for minimal linear Boolean inferences via relation webs."""

__version__ = "0.1.0"
