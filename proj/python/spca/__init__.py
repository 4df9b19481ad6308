"""Robust first principal component via the product-norm M-estimator."""

from ._spca import *  # noqa: F401,F403
from ._spca import __doc__  # noqa: F401
