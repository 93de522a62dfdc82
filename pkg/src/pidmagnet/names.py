"""NDN data names and their escaped text form.

A name is rendered as ``/`` followed by its components joined by ``/``.
Each component is percent-encoded with lowercase hex; only ASCII letters,
digits, ``-``, ``_`` and ``~`` stay literal.  ``.`` is always escaped so a
rendered name never contains a literal dot, which keeps the ``name.checksum``
payloads of ``urn:ndn`` exact topics unambiguous.
"""

from __future__ import annotations

import string
from dataclasses import dataclass

_LITERAL = frozenset((string.ascii_letters + string.digits + "-_~").encode())
_HEXDIGITS = frozenset(b"0123456789abcdefABCDEF")


class NdnNameError(ValueError):
    """Base class for NDN name errors."""


class EmptyName(NdnNameError):
    pass


class NotRooted(NdnNameError):
    pass


class BadEscape(NdnNameError):
    pass


@dataclass(frozen=True)
class NdnName:
    components: tuple[bytes, ...]

    def __post_init__(self):
        comps = tuple(bytes(c) for c in self.components)
        if not comps:
            raise EmptyName("an NDN name needs at least one component")
        object.__setattr__(self, "components", comps)

    @classmethod
    def from_parts(cls, *parts: str | bytes) -> NdnName:
        return cls(tuple(p.encode("utf-8") if isinstance(p, str) else p for p in parts))

    @classmethod
    def parse(cls, text: str) -> NdnName:
        return unescape_ndn_name(text)

    def __str__(self) -> str:
        return escape_ndn_name(self)


def _escape_component(component: bytes) -> str:
    return "".join(chr(b) if b in _LITERAL else "%%%02x" % b for b in component)


def _unescape_component(text: str) -> bytes:
    raw = text.encode("utf-8")
    out = bytearray()
    i = 0
    while i < len(raw):
        b = raw[i]
        if b == 0x25:  # '%'
            pair = raw[i + 1 : i + 3]
            if len(pair) != 2 or not all(c in _HEXDIGITS for c in pair):
                raise BadEscape(f"bad percent escape in name component {text!r}")
            out.append(int(pair, 16))
            i += 3
        else:
            out.append(b)
            i += 1
    return bytes(out)


def escape_ndn_name(name: NdnName) -> str:
    """Render *name* in canonical escaped text form."""
    if not name.components:
        raise EmptyName("an NDN name needs at least one component")
    return "/" + "/".join(_escape_component(c) for c in name.components)


def unescape_ndn_name(text: str) -> NdnName:
    """Parse an escaped name.  Uppercase hex escapes are accepted."""
    if not text.startswith("/"):
        raise NotRooted(f"NDN name must start with '/': {text!r}")
    return NdnName(tuple(_unescape_component(part) for part in text[1:].split("/")))
