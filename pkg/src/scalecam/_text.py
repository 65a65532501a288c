"""Strict numeric token parsing for the text formats.

Python's float() and int() accept forms no writer here produces (``1_0``,
``infinity``, surrounding whitespace), which would let a corrupted file parse
silently.
"""
import re

_FLOAT = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?\Z")
_INT = re.compile(r"[+-]?\d+\Z")


def parse_float(token):
    """Return the float for a decimal token, or None if it is not one."""
    if not _FLOAT.match(token):
        return None
    return float(token)


def parse_int(token):
    if not _INT.match(token):
        return None
    return int(token)


def parse_uint(token):
    """Unsigned decimal integer without sign or leading zeros, or None."""
    if not re.fullmatch(r"0|[1-9]\d*", token):
        return None
    return int(token)
