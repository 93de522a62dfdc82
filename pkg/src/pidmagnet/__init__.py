"""Persistent identifiers with location-independent resolution targets.

PIDs are kept in an emulated Handle store whose ``MAGNET`` values carry
BitTorrent or NDN access information as magnet links.
"""

from .magnet import (
    Btih,
    Kzhash,
    MagnetError,
    MagnetLink,
    Ndn,
    NdnSec,
    Sha1,
    TigerTree,
    UnknownXt,
    parse_magnet,
    parse_xt,
    serialize_magnet,
)
from .names import NdnName, escape_ndn_name, unescape_ndn_name
from .ndn import NdnAccessInfo, extract_ndn_from_magnet, ndn_to_magnet, parse_ndn_access
from .store import HandleRecord, HandleStore, HandleValue, ResolutionKind, ResolutionResult
from .torrent import compute_infohash, read_metainfo, torrent_to_magnet
from .transfer import ChunkPlan, compare, estimate_parallel, estimate_serial

__version__ = "0.1.0"

__all__ = [
    "Btih", "Kzhash", "MagnetError", "MagnetLink", "Ndn", "NdnSec", "Sha1", "TigerTree",
    "UnknownXt", "parse_magnet", "parse_xt", "serialize_magnet",
    "NdnName", "escape_ndn_name", "unescape_ndn_name",
    "NdnAccessInfo", "extract_ndn_from_magnet", "ndn_to_magnet", "parse_ndn_access",
    "HandleRecord", "HandleStore", "HandleValue", "ResolutionKind", "ResolutionResult",
    "compute_infohash", "read_metainfo", "torrent_to_magnet",
    "ChunkPlan", "compare", "estimate_parallel", "estimate_serial",
]
