"""Strict bencode codec.

Values map onto plain Python types: ``int``, ``bytes``, ``list`` and ``dict``
with ``bytes`` keys.  Decoding is strict (sorted unique keys, no leading
zeros, no trailing data) so that a decoded file re-encodes to the very same
octets, which the infohash relies on.
"""

from __future__ import annotations

from typing import Any, Union

BencodeValue = Union[int, bytes, list, dict]
Path = tuple  # dictionary keys (bytes) and list indices (int) from the root

MAX_DEPTH = 256


class BencodeError(ValueError):
    """Base class for bencode decoding errors."""


class Truncated(BencodeError):
    pass


class InvalidPrefix(BencodeError):
    pass


class UnsortedKeys(BencodeError):
    pass


class LeadingZeroInteger(BencodeError):
    pass


class TrailingData(BencodeError):
    pass


class _Decoder:
    def __init__(self, data: bytes):
        self.data = data
        self.spans: dict[Path, tuple[int, int]] = {}

    def _peek(self, pos: int) -> int:
        if pos >= len(self.data):
            raise Truncated(f"input ends at offset {pos}")
        return self.data[pos]

    def _digits(self, pos: int, terminator: int, signed: bool) -> tuple[int, int]:
        end = self.data.find(bytes([terminator]), pos)
        if end < 0:
            raise Truncated(f"unterminated number at offset {pos}")
        text = self.data[pos:end]
        body = text[1:] if signed and text[:1] == b"-" else text
        if not body or not body.isdigit():
            raise InvalidPrefix(f"bad number {text!r} at offset {pos}")
        if (len(body) > 1 and body[:1] == b"0") or text == b"-0":
            raise LeadingZeroInteger(f"non-canonical number {text!r} at offset {pos}")
        return int(text), end + 1

    def value(self, pos: int, path: Path) -> tuple[Any, int]:
        if len(path) > MAX_DEPTH:
            raise BencodeError("nesting too deep")
        c = self._peek(pos)
        if c == 0x69:  # i
            return self._digits(pos + 1, 0x65, signed=True)
        if 0x30 <= c <= 0x39:
            return self._string(pos)
        if c == 0x6C:  # l
            items = []
            pos += 1
            while self._peek(pos) != 0x65:
                item, pos = self.value(pos, path + (len(items),))
                items.append(item)
            return items, pos + 1
        if c == 0x64:  # d
            out: dict[bytes, Any] = {}
            prev = None
            pos += 1
            while self._peek(pos) != 0x65:
                if not 0x30 <= self._peek(pos) <= 0x39:
                    raise InvalidPrefix(f"dictionary key at offset {pos} is not a byte string")
                key, pos = self._string(pos)
                if prev is not None and key <= prev:
                    raise UnsortedKeys(f"key {key!r} at offset {pos} is out of order")
                start = pos
                out[key], pos = self.value(pos, path + (key,))
                self.spans[path + (key,)] = (start, pos)
                prev = key
            return out, pos + 1
        raise InvalidPrefix(f"unexpected byte {bytes([c])!r} at offset {pos}")

    def _string(self, pos: int) -> tuple[bytes, int]:
        length, pos = self._digits(pos, 0x3A, signed=False)
        if pos + length > len(self.data):
            raise Truncated(f"byte string of length {length} runs past the end")
        return self.data[pos : pos + length], pos + length


def decode_with_spans(data: bytes) -> tuple[BencodeValue, dict[Path, tuple[int, int]]]:
    """Decode *data* and return ``(value, spans)``.

    ``spans`` maps the path of every dictionary value to its ``(start, end)``
    octet range in *data*.
    """
    data = bytes(data)
    dec = _Decoder(data)
    value, end = dec.value(0, ())
    if end != len(data):
        raise TrailingData(f"{len(data) - end} trailing bytes after offset {end}")
    return value, dec.spans


def decode_bencode(data: bytes) -> BencodeValue:
    return decode_with_spans(data)[0]


def _encode(value: Any, out: list[bytes]) -> None:
    if isinstance(value, bool):
        raise TypeError("booleans have no bencode form")
    if isinstance(value, int):
        out.append(b"i%de" % value)
    elif isinstance(value, (bytes, bytearray)):
        out.append(b"%d:" % len(value))
        out.append(bytes(value))
    elif isinstance(value, str):
        _encode(value.encode("utf-8"), out)
    elif isinstance(value, (list, tuple)):
        out.append(b"l")
        for item in value:
            _encode(item, out)
        out.append(b"e")
    elif isinstance(value, dict):
        out.append(b"d")
        keys = [k.encode("utf-8") if isinstance(k, str) else bytes(k) for k in value]
        if len(set(keys)) != len(keys):
            raise ValueError("dictionary keys collide after UTF-8 encoding")
        for key, item in sorted(zip(keys, value.values()), key=lambda kv: kv[0]):
            _encode(key, out)
            _encode(item, out)
        out.append(b"e")
    else:
        raise TypeError(f"cannot bencode {type(value).__name__}")


def encode_bencode(value: BencodeValue) -> bytes:
    """Canonical encoding; ``str`` is accepted and written as UTF-8."""
    out: list[bytes] = []
    _encode(value, out)
    return b"".join(out)
