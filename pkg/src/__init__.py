"""
Representation transfer across Block MDPs.
"""
__version__ = "0.1.0"
