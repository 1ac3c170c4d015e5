"""Exact calculus of constructible functions on towers of stratified
variety models: Euler-characteristic and Grothendieck-class homomorphisms,
pro-level measures, arc-space towers and motivic measures.

Exact values cross the boundary as strings; `as_fraction` and `as_int`
convert them.
"""

from fractions import Fraction

try:
    from ._prochern import *  # noqa: F401,F403
    from ._prochern import __version__  # noqa: F401
except ImportError:  # in-tree test runs put the extension on sys.path directly
    from _prochern import *  # noqa: F401,F403
    from _prochern import __version__  # noqa: F401


def as_fraction(value: str) -> Fraction:
    """Turn a rendered exact rational like '2/1' into a Fraction."""
    return Fraction(value)


def as_int(value: str) -> int:
    """Turn a rendered exact integer into an int."""
    return int(value)
