"""Magnet link data model, parser and canonical serializer.

Supported keys are ``xt`` (also the indexed ``xt.1``, ``xt.2`` form), ``dn``,
``xl``, ``tr``, ``as`` and ``kt``.  Anything else is kept verbatim in
``unknown_params`` so that links survive a parse/serialize cycle.

Exact topics are typed.  Besides the usual content hashes (``btih``,
``sha1``, ``tree:tiger``, ``kzhash``) two NDN namespaces are understood::

    urn:ndn:<escaped data name>.<sha256 hex>
    urn:ndnsec:<base64url signature>.<escaped certificate data name>

``uid:ndn`` / ``uid:ndnsec`` are accepted as input aliases.  Output always
uses the ``urn:`` form.
"""

from __future__ import annotations

import base64
import binascii
import re
import string
from dataclasses import dataclass, field
from typing import Union
from urllib.parse import unquote_plus

from .names import NdnName, NdnNameError, escape_ndn_name, unescape_ndn_name

_UNRESERVED = frozenset((string.ascii_letters + string.digits + "-._~").encode())
_NID = re.compile(r"^[a-z0-9][a-z0-9-]*$")
_HEX = re.compile(r"[0-9a-fA-F]*")
_XT_INDEXED = re.compile(r"^xt\.(\d+)$")
_RECOGNIZED = {"xt", "dn", "xl", "tr", "as", "kt"}


class MagnetError(ValueError):
    """Base class for magnet parsing errors."""


class MissingScheme(MagnetError):
    pass


class NoExactTopic(MagnetError):
    pass


class MalformedXt(MagnetError):
    pass


class BadLength(MagnetError):
    pass


def percent_encode(text: str, safe: str = "") -> str:
    """Percent-encode UTF-8 *text* with lowercase hex, keeping unreserved chars."""
    keep = _UNRESERVED | frozenset(safe.encode("ascii"))
    return "".join(chr(b) if b in keep else "%%%02x" % b for b in text.encode("utf-8"))


def _decode(raw: str) -> str:
    try:
        return unquote_plus(raw, errors="strict")
    except UnicodeDecodeError as exc:
        raise MagnetError(f"value is not valid UTF-8 after percent-decoding: {raw!r}") from exc


# -- exact topics ------------------------------------------------------------


def _hex_digest(payload: str, size: int, label: str) -> bytes:
    if len(payload) != 2 * size:
        raise MalformedXt(f"{label} digest must be {2 * size} hex characters, got {len(payload)}")
    if not _HEX.fullmatch(payload):
        raise MalformedXt(f"{label} digest is not hex: {payload!r}")
    return bytes.fromhex(payload)


def _b32_digest(payload: str, label: str) -> bytes:
    padded = payload.upper() + "=" * (-len(payload) % 8)
    try:
        return base64.b32decode(padded)
    except (binascii.Error, ValueError) as exc:
        raise MalformedXt(f"{label} digest is not base32: {payload!r}") from exc


def _b32_text(digest: bytes) -> str:
    return base64.b32encode(digest).decode("ascii").rstrip("=")


def _check_len(digest: bytes, size: int, label: str) -> bytes:
    digest = bytes(digest)
    if len(digest) != size:
        raise MalformedXt(f"{label} digest must be {size} bytes, got {len(digest)}")
    return digest


@dataclass(frozen=True)
class Btih:
    """BitTorrent infohash (v1, SHA-1 of the bencoded info dictionary)."""

    digest: bytes

    def __post_init__(self):
        object.__setattr__(self, "digest", _check_len(self.digest, 20, "btih"))

    @property
    def hex(self) -> str:
        return self.digest.hex()


@dataclass(frozen=True)
class Sha1:
    digest: bytes

    def __post_init__(self):
        object.__setattr__(self, "digest", _check_len(self.digest, 20, "sha1"))


@dataclass(frozen=True)
class TigerTree:
    digest: bytes

    def __post_init__(self):
        object.__setattr__(self, "digest", _check_len(self.digest, 24, "tiger tree"))


@dataclass(frozen=True)
class Kzhash:
    digest: bytes

    def __post_init__(self):
        if not self.digest:
            raise MalformedXt("kzhash digest is empty")
        object.__setattr__(self, "digest", bytes(self.digest))


@dataclass(frozen=True)
class Ndn:
    """NDN data name plus the SHA-256 checksum that goes with it.

    Whether the checksum covers the name or the named content is left to
    the producer; ``ndn_access`` treats it as the content checksum.
    """

    data_name: NdnName
    checksum: bytes

    def __post_init__(self):
        object.__setattr__(self, "checksum", _check_len(self.checksum, 32, "ndn checksum"))


@dataclass(frozen=True)
class NdnSec:
    """Content signature and the data name of the signer's certificate."""

    signature: bytes
    cert_data_name: NdnName

    def __post_init__(self):
        object.__setattr__(self, "signature", bytes(self.signature))


_KNOWN_NIDS = {"btih", "sha1", "kzhash", "ndn", "ndnsec"}


@dataclass(frozen=True)
class UnknownXt:
    namespace: str
    payload: str

    def __post_init__(self):
        if not _NID.match(self.namespace):
            raise MalformedXt(f"bad URN namespace {self.namespace!r}")
        if self.namespace in _KNOWN_NIDS or (
            self.namespace == "tree" and self.payload.lower().startswith("tiger:")
        ):
            raise MalformedXt(f"namespace {self.namespace!r} has a dedicated type")


XtEntry = Union[Btih, Sha1, TigerTree, Kzhash, Ndn, NdnSec, UnknownXt]


def _b64url_decode(text: str) -> bytes:
    if not re.fullmatch(r"[A-Za-z0-9_-]*={0,2}", text):
        raise MalformedXt(f"signature is not base64url: {text!r}")
    try:
        return base64.urlsafe_b64decode(text.rstrip("=") + "=" * (-len(text.rstrip("=")) % 4))
    except (binascii.Error, ValueError) as exc:
        raise MalformedXt(f"signature is not base64url: {text!r}") from exc


def _b64url_encode(data: bytes) -> str:
    return base64.urlsafe_b64encode(data).decode("ascii").rstrip("=")


def _ndn_name_text(text: str) -> NdnName:
    # still percent-encoded as a whole when the caller did not decode the xt value
    if not text.startswith("/"):
        text = _decode(text)
    try:
        return unescape_ndn_name(text)
    except NdnNameError as exc:
        raise MalformedXt(f"bad NDN data name {text!r}: {exc}") from exc


def _split_rightmost_dot(payload: str, label: str) -> tuple[str, str]:
    head, dot, tail = payload.rpartition(".")
    if not dot:
        raise MalformedXt(f"{label} payload needs a '.' separator: {payload!r}")
    return head, tail


def parse_xt(urn_text: str) -> XtEntry:
    """Parse the value of a single ``xt`` key into a typed entry."""
    lowered = urn_text.lower()
    if lowered.startswith("uid:ndnsec"):
        rest = urn_text[len("uid:ndnsec"):]
        return _parse_ndnsec(rest[1:] if rest.startswith(":") else rest)
    if lowered.startswith("uid:ndn"):
        rest = urn_text[len("uid:ndn"):]
        return _parse_ndn(rest[1:] if rest.startswith(":") else rest)
    if not lowered.startswith("urn:"):
        raise MalformedXt(f"exact topic must be a URN: {urn_text!r}")
    nid, colon, payload = urn_text[4:].partition(":")
    if not colon:
        raise MalformedXt(f"URN has no namespace-specific part: {urn_text!r}")
    nid = nid.lower()
    if nid == "btih":
        if len(payload) == 32:
            return Btih(_check_len(_b32_digest(payload, "btih"), 20, "btih"))
        return Btih(_hex_digest(payload, 20, "btih"))
    if nid == "sha1":
        if len(payload) == 40:
            return Sha1(_hex_digest(payload, 20, "sha1"))
        if len(payload) != 32:
            raise MalformedXt(f"sha1 digest must be 32 base32 or 40 hex characters: {payload!r}")
        return Sha1(_b32_digest(payload, "sha1"))
    if nid == "tree" and payload.lower().startswith("tiger:"):
        digest = payload[len("tiger:"):]
        if len(digest) != 39:
            raise MalformedXt(f"tiger tree digest must be 39 base32 characters: {digest!r}")
        return TigerTree(_b32_digest(digest, "tiger tree"))
    if nid == "kzhash":
        if not payload or len(payload) % 2:
            raise MalformedXt(f"kzhash digest must be non-empty hex: {payload!r}")
        return Kzhash(_hex_digest(payload, len(payload) // 2, "kzhash"))
    if nid == "ndn":
        return _parse_ndn(payload)
    if nid == "ndnsec":
        return _parse_ndnsec(payload)
    return UnknownXt(nid, payload)


def _parse_ndn(payload: str) -> Ndn:
    name, checksum = _split_rightmost_dot(payload, "ndn")
    return Ndn(_ndn_name_text(name), _hex_digest(checksum, 32, "ndn checksum"))


def _parse_ndnsec(payload: str) -> NdnSec:
    sig, sep, cert = payload.partition(".")
    if not sep:
        raise MalformedXt(f"ndnsec payload needs a '.' separator: {payload!r}")
    return NdnSec(_b64url_decode(sig), _ndn_name_text(cert))


def serialize_xt(entry: XtEntry) -> str:
    """Render *entry* as an xt value, before query-level percent-encoding."""
    if isinstance(entry, Btih):
        return "urn:btih:" + entry.digest.hex()
    if isinstance(entry, Sha1):
        return "urn:sha1:" + _b32_text(entry.digest)
    if isinstance(entry, TigerTree):
        return "urn:tree:tiger:" + _b32_text(entry.digest)
    if isinstance(entry, Kzhash):
        return "urn:kzhash:" + entry.digest.hex()
    if isinstance(entry, Ndn):
        return f"urn:ndn:{escape_ndn_name(entry.data_name)}.{entry.checksum.hex()}"
    if isinstance(entry, NdnSec):
        cert = escape_ndn_name(entry.cert_data_name)
        return f"urn:ndnsec:{_b64url_encode(entry.signature)}.{cert}"
    if isinstance(entry, UnknownXt):
        return f"urn:{entry.namespace}:{entry.payload}"
    raise TypeError(f"not an exact topic: {entry!r}")


# -- links -------------------------------------------------------------------


@dataclass(frozen=True)
class MagnetLink:
    xts: tuple[XtEntry, ...]
    display_name: str | None = None
    exact_length: int | None = None
    trackers: tuple[str, ...] = ()
    acceptable_sources: tuple[str, ...] = ()
    keywords: tuple[str, ...] = ()
    unknown_params: tuple[tuple[str, str], ...] = field(default=())

    def __post_init__(self):
        for name in ("xts", "trackers", "acceptable_sources", "keywords"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        object.__setattr__(
            self, "unknown_params", tuple((k, v) for k, v in self.unknown_params)
        )
        if not self.xts:
            raise NoExactTopic("a magnet link needs at least one exact topic")
        if self.exact_length is not None and (
            isinstance(self.exact_length, bool) or self.exact_length < 0
        ):
            raise BadLength(f"exact length must be a non-negative integer: {self.exact_length!r}")
        for key, raw in self.unknown_params:
            if not key or key in _RECOGNIZED or _XT_INDEXED.match(key):
                raise MagnetError(f"{key!r} is not an unknown parameter key")
            if any(c in key for c in "&=#") or any(c in raw for c in "&#"):
                raise MagnetError(f"unknown parameter {key!r} cannot be carried verbatim")

    def __str__(self) -> str:
        return serialize_magnet(self)

    def first(self, kind: type) -> XtEntry | None:
        """Return the first exact topic of the given type, if any."""
        return next((xt for xt in self.xts if isinstance(xt, kind)), None)


def parse_magnet(text: str) -> MagnetLink:
    """Parse magnet link text.

    Raises a :class:`MagnetError` subclass on malformed input; unknown xt
    namespaces are returned as :class:`UnknownXt` rather than rejected.
    """
    if not text.startswith("magnet:?"):
        raise MissingScheme(f"not a magnet link: {text[:40]!r}")
    query = text[len("magnet:?"):].partition("#")[0]

    plain: list[XtEntry] = []
    indexed: dict[int, XtEntry] = {}
    singles: dict[str, str] = {}
    lists: dict[str, list[str]] = {"tr": [], "as": [], "kt": []}
    unknown: list[tuple[str, str]] = []

    for part in query.split("&"):
        if not part:
            continue
        key, _, raw = part.partition("=")
        m = _XT_INDEXED.match(key)
        if key == "xt":
            plain.append(parse_xt(_decode(raw)))
        elif m:
            idx = int(m.group(1))
            if idx in indexed:
                raise MalformedXt(f"duplicate indexed exact topic xt.{idx}")
            indexed[idx] = parse_xt(_decode(raw))
        elif key in ("dn", "xl"):
            if key in singles:
                raise MagnetError(f"duplicate {key!r} parameter")
            singles[key] = _decode(raw)
        elif key in lists:
            lists[key].append(_decode(raw))
        else:
            unknown.append((key, raw))

    xts = plain + [indexed[i] for i in sorted(indexed)]
    if not xts:
        raise NoExactTopic("magnet link has no xt parameter")

    exact_length = None
    if "xl" in singles:
        if not re.fullmatch(r"[0-9]+", singles["xl"]):
            raise BadLength(f"xl must be a non-negative integer: {singles['xl']!r}")
        exact_length = int(singles["xl"])

    return MagnetLink(
        xts=tuple(xts),
        display_name=singles.get("dn"),
        exact_length=exact_length,
        trackers=tuple(lists["tr"]),
        acceptable_sources=tuple(lists["as"]),
        keywords=tuple(lists["kt"]),
        unknown_params=tuple(unknown),
    )


def serialize_magnet(link: MagnetLink) -> str:
    """Canonical text: xt*, dn, xl, tr*, as*, kt*, then unknown parameters."""
    params = ["xt=" + percent_encode(serialize_xt(xt), safe=":") for xt in link.xts]
    if link.display_name is not None:
        params.append("dn=" + percent_encode(link.display_name))
    if link.exact_length is not None:
        params.append(f"xl={link.exact_length}")
    params += ["tr=" + percent_encode(u) for u in link.trackers]
    params += ["as=" + percent_encode(u) for u in link.acceptable_sources]
    params += ["kt=" + percent_encode(k) for k in link.keywords]
    params += [f"{k}={v}" for k, v in link.unknown_params]
    return "magnet:?" + "&".join(params)
