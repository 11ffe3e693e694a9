"""cvdyn: Gaussian dynamics of weakly coupled mechanical resonators."""
__version__ = "0.1.0"
