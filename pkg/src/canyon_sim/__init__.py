"""Environment-conditioned stochastic channel simulator for street-canyon intersections."""

__version__ = "0.1.0"
