"""Regenerate the reference torrents with libtorrent.

Run from this directory: ``python make_fixtures.py``. Writes the .torrent
files plus ``infohashes.json`` holding the infohash libtorrent reports for
each one.
"""

import json
import os
import tempfile

import libtorrent as lt


def _make(root, name, trackers, piece_size, comment):
    fs = lt.file_storage()
    lt.add_files(fs, os.path.join(root, name))
    t = lt.create_torrent(fs, piece_size, flags=lt.create_torrent.v1_only)
    for tier, url in enumerate(trackers):
        t.add_tracker(url, tier)
    if comment:
        t.set_comment(comment)
    t.set_creator("libtorrent fixture")
    lt.set_piece_hashes(t, root)
    return lt.bencode(t.generate())


def main():
    reported = {}
    with tempfile.TemporaryDirectory() as root:
        with open(os.path.join(root, "hello.txt"), "wb") as fh:
            fh.write(b"hello persistent world\n")
        os.mkdir(os.path.join(root, "dataset"))
        for i, size in enumerate([70000, 1234, 16384 * 3]):
            with open(os.path.join(root, "dataset", f"part{i}.bin"), "wb") as fh:
                fh.write(bytes((i * 31 + j) % 251 for j in range(size)))
        with open(os.path.join(root, "v1.0 notes.md"), "wb") as fh:
            fh.write("Überblick: ndn + bittorrent\n".encode() * 500)

        specs = [
            ("single.torrent", "hello.txt", [], 16384, None),
            ("multi.torrent", "dataset",
             ["udp://tracker.example.org:6969/announce",
              "http://tracker.example.net/announce"], 32768, "multi-file fixture"),
            ("dotted.torrent", "v1.0 notes.md",
             ["http://tracker.example.org/announce"], 16384, None),
        ]
        for fname, src, trackers, piece, comment in specs:
            data = _make(root, src, trackers, piece, comment)
            with open(fname, "wb") as fh:
                fh.write(data)
            info = lt.torrent_info(lt.bdecode(data))
            reported[fname] = {
                "infohash": str(info.info_hash()),
                "name": info.name(),
                "total_size": info.total_size(),
            }
    with open("infohashes.json", "w") as fh:
        json.dump(reported, fh, indent=2, sort_keys=True)
        fh.write("\n")


if __name__ == "__main__":
    main()
