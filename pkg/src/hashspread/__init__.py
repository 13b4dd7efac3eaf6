"""Spatial and temporal hashtag diffusion metrics for geotagged microblog corpora."""

__version__ = "0.1.0"
