"""Convert QA-SRL 2.0 annotations into ordered OIE tuples and score OIE predictions."""

__version__ = "0.1.0"
