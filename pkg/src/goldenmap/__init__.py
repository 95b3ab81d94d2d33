"""Golden-mean dynamics of the birational family (x,y) -> (y(x+a)/(x-1), x+a-1)."""

__version__ = "0.1.0"
