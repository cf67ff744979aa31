"""Tikhonov-regularized second-order primal-dual flows for bilinear saddle problems."""

__version__ = "0.1.0"
