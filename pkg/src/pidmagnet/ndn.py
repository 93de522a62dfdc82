"""NDN access information and its JSON container.

The container is a UTF-8 JSON object::

    {"data_name": "/gwdg/ds/1",
     "checksum_sha256": "<64 hex chars>",
     "signature": "<base64url>",          # optional
     "cert_data_name": "/keys/alice"}     # optional, paired with signature

Signatures are carried as opaque octets; nothing here verifies them.
"""

from __future__ import annotations

import base64
import binascii
import json
import re
from dataclasses import dataclass

from .magnet import MagnetLink, Ndn, NdnSec
from .names import NdnName, NdnNameError, unescape_ndn_name


class NdnAccessError(ValueError):
    pass


class MissingField(NdnAccessError):
    pass


class BadChecksumLength(NdnAccessError):
    pass


class OrphanSignature(NdnAccessError):
    pass


class NoNdnEntry(NdnAccessError):
    pass


@dataclass(frozen=True)
class NdnAccessInfo:
    data_name: NdnName
    content_checksum: bytes
    signature: bytes | None = None
    cert_data_name: NdnName | None = None

    def __post_init__(self):
        if len(self.content_checksum) != 32:
            raise BadChecksumLength(
                f"content checksum must be 32 bytes, got {len(self.content_checksum)}"
            )
        if (self.signature is None) != (self.cert_data_name is None):
            raise OrphanSignature("signature and cert_data_name must be given together")

    @property
    def verifiable(self) -> bool:
        return self.signature is not None


def _b64url(text: str) -> bytes:
    stripped = text.rstrip("=")
    if not re.fullmatch(r"[A-Za-z0-9_-]*", stripped):
        raise NdnAccessError("signature is not base64url")
    try:
        return base64.urlsafe_b64decode(stripped + "=" * (-len(stripped) % 4))
    except (binascii.Error, ValueError) as exc:
        raise NdnAccessError("signature is not base64url") from exc


def _name(obj: dict, key: str) -> NdnName:
    value = obj[key]
    if not isinstance(value, str):
        raise NdnAccessError(f"{key} must be a string")
    try:
        return unescape_ndn_name(value)
    except NdnNameError as exc:
        raise NdnAccessError(f"{key}: {exc}") from exc


def parse_ndn_access(json_text: str | bytes) -> NdnAccessInfo:
    try:
        obj = json.loads(json_text)
    except (ValueError, UnicodeDecodeError) as exc:
        raise NdnAccessError(f"container is not JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise NdnAccessError("container must be a JSON object")
    for key in ("data_name", "checksum_sha256"):
        if key not in obj:
            raise MissingField(f"missing field {key!r}")

    checksum = obj["checksum_sha256"]
    if not isinstance(checksum, str) or not re.fullmatch(r"[0-9a-fA-F]*", checksum):
        raise NdnAccessError("checksum_sha256 must be a hex string")
    if len(checksum) != 64:
        raise BadChecksumLength(f"checksum_sha256 must be 64 hex characters, got {len(checksum)}")

    has_sig, has_cert = "signature" in obj, "cert_data_name" in obj
    if has_sig != has_cert:
        raise OrphanSignature("signature and cert_data_name must be given together")
    signature = cert = None
    if has_sig:
        if not isinstance(obj["signature"], str):
            raise NdnAccessError("signature must be a string")
        signature = _b64url(obj["signature"])
        cert = _name(obj, "cert_data_name")

    return NdnAccessInfo(_name(obj, "data_name"), bytes.fromhex(checksum), signature, cert)


def dump_ndn_access(info: NdnAccessInfo) -> str:
    """Inverse of :func:`parse_ndn_access`."""
    obj = {"data_name": str(info.data_name), "checksum_sha256": info.content_checksum.hex()}
    if info.signature is not None:
        obj["signature"] = base64.urlsafe_b64encode(info.signature).decode("ascii").rstrip("=")
        obj["cert_data_name"] = str(info.cert_data_name)
    return json.dumps(obj)


def ndn_to_magnet(info: NdnAccessInfo) -> MagnetLink:
    xts = [Ndn(info.data_name, info.content_checksum)]
    if info.signature is not None:
        xts.append(NdnSec(info.signature, info.cert_data_name))
    last = info.data_name.components[-1].decode("utf-8", errors="replace")
    return MagnetLink(xts=tuple(xts), display_name=last or None)


def extract_ndn_from_magnet(link: MagnetLink) -> NdnAccessInfo:
    """Rebuild access info from the first ``ndn`` and ``ndnsec`` exact topics."""
    ndn = link.first(Ndn)
    if ndn is None:
        raise NoNdnEntry("magnet link carries no urn:ndn exact topic")
    sec = link.first(NdnSec)
    if sec is None:
        return NdnAccessInfo(ndn.data_name, ndn.checksum)
    return NdnAccessInfo(ndn.data_name, ndn.checksum, sec.signature, sec.cert_data_name)
