"""Emulated local Handle service: typed, indexed PID values in a journal.

The journal is line-delimited JSON.  The first line is a header carrying
the format version; every later line is either a prefix registration or a
full snapshot of one record.  Opening a store replays the journal, keeps
the last snapshot per handle and rewrites the file in compacted form.  A
torn final line (crash mid-append) is dropped on replay.
"""

from __future__ import annotations

import base64
import enum
import json
import logging
import os
import re
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from .magnet import MagnetError, parse_magnet

logger = logging.getLogger(__name__)

JOURNAL_FORMAT = "pidmagnet-journal"
JOURNAL_VERSION = 1
MAX_VALUE_LENGTH = 2**32 - 1

_PREFIX = re.compile(r"^[0-9]+(\.[0-9]+)*$")


class HandleError(Exception):
    """Base class for store errors."""


class UnknownPrefix(HandleError):
    pass


class DuplicatePrefix(HandleError):
    pass


class DuplicateHandle(HandleError):
    pass


class InvalidValue(HandleError):
    pass


class InvalidPid(HandleError):
    pass


class NotFound(HandleError):
    pass


class NoTarget(HandleError):
    pass


class JournalError(HandleError):
    pass


@dataclass(frozen=True)
class HandleValue:
    index: int
    type_name: str
    data: bytes
    timestamp: int = 0

    def __post_init__(self):
        if isinstance(self.data, str):
            object.__setattr__(self, "data", self.data.encode("utf-8"))
        if isinstance(self.index, bool) or not isinstance(self.index, int) or self.index < 1:
            raise InvalidValue(f"value index must be a positive integer, got {self.index!r}")
        if not self.type_name:
            raise InvalidValue("value type must not be empty")
        if len(self.data) > MAX_VALUE_LENGTH:
            raise InvalidValue("value data does not fit a 4-byte length")

    @property
    def text(self) -> str:
        return self.data.decode("utf-8")

    def to_json(self) -> dict:
        out = {"index": self.index, "type": self.type_name, "timestamp": self.timestamp}
        try:
            out["data"] = self.data.decode("utf-8")
        except UnicodeDecodeError:
            out["data_b64"] = base64.b64encode(self.data).decode("ascii")
        return out

    @classmethod
    def from_json(cls, obj: dict) -> HandleValue:
        if "data_b64" in obj:
            data = base64.b64decode(obj["data_b64"], validate=True)
        else:
            data = obj["data"].encode("utf-8")
        return cls(obj["index"], obj["type"], data, obj.get("timestamp", 0))


def split_pid(pid: str) -> tuple[str, str]:
    prefix, slash, suffix = pid.partition("/")
    if not slash or not _PREFIX.match(prefix) or not suffix or "/" in suffix:
        raise InvalidPid(f"malformed PID {pid!r}")
    return prefix, suffix


@dataclass(frozen=True)
class HandleRecord:
    prefix: str
    suffix: str
    values: tuple[HandleValue, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(sorted(self.values, key=lambda v: v.index)))
        if not _PREFIX.match(self.prefix):
            raise InvalidPid(f"malformed prefix {self.prefix!r}")
        if not self.suffix or "/" in self.suffix:
            raise InvalidPid(f"malformed suffix {self.suffix!r}")
        indices = [v.index for v in self.values]
        if len(set(indices)) != len(indices):
            raise InvalidValue("value indices must be unique within a record")
        for type_name in ("MAGNET", "URL"):
            if sum(v.type_name == type_name for v in self.values) > 1:
                raise InvalidValue(f"a record holds at most one {type_name} value")
        for v in self.values:
            if v.type_name in ("MAGNET", "URL"):
                try:
                    text = v.text
                except UnicodeDecodeError as exc:
                    raise InvalidValue(f"{v.type_name} value is not UTF-8") from exc
                if v.type_name == "MAGNET":
                    try:
                        parse_magnet(text)
                    except MagnetError as exc:
                        raise InvalidValue(f"MAGNET value is not a magnet link: {exc}") from exc

    @property
    def pid(self) -> str:
        return f"{self.prefix}/{self.suffix}"

    def value_of(self, type_name: str) -> HandleValue | None:
        return next((v for v in self.values if v.type_name == type_name), None)

    def to_json(self) -> dict:
        return {
            "pid": self.pid,
            "values": [v.to_json() for v in self.values],
        }

    @classmethod
    def from_json(cls, obj: dict) -> HandleRecord:
        prefix, suffix = split_pid(obj["pid"])
        return cls(prefix, suffix, tuple(HandleValue.from_json(v) for v in obj["values"]))


class ResolutionKind(enum.Enum):
    MAGNET = "MAGNET"
    URL = "URL"


@dataclass(frozen=True)
class ResolutionResult:
    kind: ResolutionKind
    target: str

    def __post_init__(self):
        if self.kind is ResolutionKind.MAGNET:
            parse_magnet(self.target)


@dataclass
class HandleStore:
    """Thread-safe PID store, optionally backed by a journal file.

    Readers never take the lock: records are immutable and swapped in whole,
    so a reader sees either the old or the new record.
    """

    path: Path | str | None = None
    fsync: bool = True
    clock: object = time.time
    _records: dict[str, HandleRecord] = field(default_factory=dict, repr=False)
    _prefixes: set[str] = field(default_factory=set, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)
    _fh: object = field(default=None, repr=False)

    def __post_init__(self):
        if self.path is not None:
            self.path = Path(self.path)
            self._load()

    # -- journal -------------------------------------------------------------

    def _load(self) -> None:
        if self.path.exists():
            lines = self.path.read_bytes().split(b"\n")
            if lines and lines[-1] == b"":
                lines.pop()
            if lines:
                header = json.loads(lines[0])
                if header.get("format") != JOURNAL_FORMAT or header.get("version") != JOURNAL_VERSION:
                    raise JournalError(f"{self.path} is not a version {JOURNAL_VERSION} journal")
            for n, line in enumerate(lines[1:], start=2):
                try:
                    entry = json.loads(line)
                except ValueError:
                    if n == len(lines):
                        logger.warning("dropping torn last journal line in %s", self.path)
                        break
                    raise JournalError(f"{self.path}:{n}: corrupt journal line") from None
                if entry["op"] == "prefix":
                    self._prefixes.add(entry["prefix"])
                elif entry["op"] == "put":
                    record = HandleRecord.from_json(entry["record"])
                    self._records[record.pid] = record
                else:
                    raise JournalError(f"{self.path}:{n}: unknown op {entry['op']!r}")
        self._compact()

    def _compact(self) -> None:
        tmp = self.path.with_name(self.path.name + ".tmp")
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(json.dumps({"format": JOURNAL_FORMAT, "version": JOURNAL_VERSION}) + "\n")
            for prefix in sorted(self._prefixes):
                fh.write(_line({"op": "prefix", "prefix": prefix}))
            for pid in sorted(self._records):
                fh.write(_line({"op": "put", "record": self._records[pid].to_json()}))
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, self.path)
        self._fh = open(self.path, "a", encoding="utf-8")

    def _append(self, entry: dict) -> None:
        if self._fh is None:
            return
        self._fh.write(_line(entry))
        self._fh.flush()
        if self.fsync:
            os.fsync(self._fh.fileno())

    def close(self) -> None:
        with self._lock:
            if self._fh is not None:
                self._fh.close()
                self._fh = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    # -- operations ----------------------------------------------------------

    @property
    def prefixes(self) -> frozenset[str]:
        return frozenset(self._prefixes)

    def register_prefix(self, prefix: str) -> None:
        if not _PREFIX.match(prefix):
            raise InvalidPid(f"malformed prefix {prefix!r}")
        with self._lock:
            if prefix in self._prefixes:
                raise DuplicatePrefix(f"prefix {prefix} is already registered")
            self._append({"op": "prefix", "prefix": prefix})
            self._prefixes.add(prefix)

    def _stamp(self, values) -> tuple[HandleValue, ...]:
        now = int(self.clock())
        return tuple(HandleValue(v.index, v.type_name, v.data, now) for v in values)

    def _put(self, record: HandleRecord) -> None:
        self._append({"op": "put", "record": record.to_json()})
        self._records[record.pid] = record

    def create_handle(self, prefix: str, suffix: str | None, values) -> HandleRecord:
        """Create a record; a random UUID suffix is minted when none is given."""
        with self._lock:
            if prefix not in self._prefixes:
                raise UnknownPrefix(f"prefix {prefix} is not served here")
            if suffix is None:
                suffix = str(uuid.uuid4())
            record = HandleRecord(prefix, suffix, self._stamp(values))
            if record.pid in self._records:
                raise DuplicateHandle(f"{record.pid} already exists")
            self._put(record)
            return record

    def update_handle(self, pid: str, values) -> HandleRecord:
        """Replace values with matching indices and append the others."""
        with self._lock:
            old = self._get(pid)
            merged = {v.index: v for v in old.values}
            merged.update((v.index, v) for v in self._stamp(values))
            record = HandleRecord(old.prefix, old.suffix, tuple(merged.values()))
            self._put(record)
            return record

    def _get(self, pid: str) -> HandleRecord:
        split_pid(pid)
        try:
            return self._records[pid]
        except KeyError:
            raise NotFound(f"{pid} does not exist") from None

    def get_handle(self, pid: str) -> HandleRecord:
        return self._get(pid)

    def __contains__(self, pid: str) -> bool:
        return pid in self._records

    def __len__(self) -> int:
        return len(self._records)

    def pids(self) -> list[str]:
        return sorted(self._records)

    def resolve_typed(self, pid: str, type_name: str) -> ResolutionResult:
        value = self._get(pid).value_of(type_name)
        if value is None:
            raise NoTarget(f"{pid} has no {type_name} value")
        return ResolutionResult(ResolutionKind(type_name), value.text)

    def resolve_default(self, pid: str) -> ResolutionResult:
        """MAGNET value when present, otherwise the URL value."""
        record = self._get(pid)
        for kind in (ResolutionKind.MAGNET, ResolutionKind.URL):
            value = record.value_of(kind.value)
            if value is not None:
                return ResolutionResult(kind, value.text)
        raise NoTarget(f"{pid} has neither a MAGNET nor a URL value")


def _line(entry: dict) -> str:
    return json.dumps(entry, ensure_ascii=False, separators=(",", ":")) + "\n"
