"""capergo: desk-scale verification of ergodic theorems for capacities
and upper probabilities, on finite spaces and interval dynamics."""

__version__ = "0.1.0"
