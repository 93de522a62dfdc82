"""Torrent metainfo ingestion: infohash and torrent to magnet conversion."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from .bencode import BencodeError, decode_with_spans
from .magnet import Btih, MagnetLink


class TorrentError(ValueError):
    pass


class NoInfoDict(TorrentError):
    pass


class MissingName(TorrentError):
    pass


class InvalidTorrent(TorrentError):
    pass


@dataclass(frozen=True)
class TorrentMetainfo:
    info_span: tuple[int, int]
    name: str
    total_length: int
    piece_length: int
    trackers: tuple[str, ...]
    infohash: bytes


def _info_span(source: bytes) -> tuple[dict, dict, tuple[int, int]]:
    root, spans = decode_with_spans(source)
    if not isinstance(root, dict) or not isinstance(root.get(b"info"), dict):
        raise NoInfoDict("metainfo has no info dictionary")
    return root, root[b"info"], spans[(b"info",)]


def compute_infohash(source: bytes) -> bytes:
    """SHA-1 over the info dictionary exactly as it appears in *source*."""
    _, _, (start, end) = _info_span(source)
    return hashlib.sha1(source[start:end]).digest()


def _text(value, field: str) -> str:
    if not isinstance(value, bytes):
        raise InvalidTorrent(f"{field} is not a byte string")
    try:
        return value.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise InvalidTorrent(f"{field} is not valid UTF-8") from exc


def _length(value, field: str) -> int:
    if not isinstance(value, int) or value < 0:
        raise InvalidTorrent(f"{field} must be a non-negative integer")
    return value


def _trackers(root: dict) -> tuple[str, ...]:
    urls: list[str] = []
    if b"announce" in root:
        urls.append(_text(root[b"announce"], "announce"))
    tiers = root.get(b"announce-list", [])
    if not isinstance(tiers, list):
        raise InvalidTorrent("announce-list is not a list")
    for tier in tiers:
        if not isinstance(tier, list):
            raise InvalidTorrent("announce-list tier is not a list")
        urls.extend(_text(u, "announce-list entry") for u in tier)
    return tuple(dict.fromkeys(urls))


def read_metainfo(source: bytes) -> TorrentMetainfo:
    """Decode torrent *source* and pull out the fields a magnet link needs."""
    source = bytes(source)
    try:
        root, info, span = _info_span(source)
    except BencodeError as exc:
        raise InvalidTorrent(f"not a bencoded torrent: {exc}") from exc

    if b"name" not in info:
        raise MissingName("info dictionary has no name")
    name = _text(info[b"name"], "name")

    if b"files" in info:
        files = info[b"files"]
        if not isinstance(files, list) or not files:
            raise InvalidTorrent("files must be a non-empty list")
        total = 0
        for entry in files:
            if not isinstance(entry, dict) or b"length" not in entry:
                raise InvalidTorrent("file entry without length")
            total += _length(entry[b"length"], "file length")
    elif b"length" in info:
        total = _length(info[b"length"], "length")
    else:
        raise InvalidTorrent("info dictionary has neither length nor files")
    if total <= 0:
        raise InvalidTorrent("torrent payload is empty")

    piece_length = info.get(b"piece length")
    if not isinstance(piece_length, int) or piece_length <= 0:
        raise InvalidTorrent("piece length must be a positive integer")

    return TorrentMetainfo(
        info_span=span,
        name=name,
        total_length=total,
        piece_length=piece_length,
        trackers=_trackers(root),
        infohash=hashlib.sha1(source[span[0] : span[1]]).digest(),
    )


def torrent_to_magnet(source: bytes, include_trackers: bool = False) -> MagnetLink:
    """Build a magnet link for a torrent.

    Trackers are left out unless asked for, since DHT lookups only need the
    infohash.
    """
    meta = read_metainfo(source)
    return MagnetLink(
        xts=(Btih(meta.infohash),),
        display_name=meta.name,
        exact_length=meta.total_length,
        trackers=meta.trackers if include_trackers else (),
    )
