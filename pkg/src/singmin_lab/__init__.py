"""Monte Carlo laboratory for least singular values, condition numbers and
small-ball behaviour of random matrices with independent rows."""

__version__ = "0.1.0"
