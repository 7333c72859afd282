"""Quality metadata toolkit built on daQ and the RDF Data Cube vocabulary."""

__version__ = "0.1.0"
