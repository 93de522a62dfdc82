import json
import subprocess
import sys

import pytest

from conftest import FIXTURES, MINIMAL_INFOHASH
from pidmagnet.cli import main

CHECKSUM = "ab" * 32


@pytest.fixture
def run(capsys):
    def _run(*argv):
        code = main(list(argv))
        out, err = capsys.readouterr()
        return code, out, err

    return _run


def test_torrent_infohash(run, tmp_path, minimal_torrent, reference_torrents):
    path = tmp_path / "m.torrent"
    path.write_bytes(minimal_torrent)
    assert run("torrent", "infohash", str(path)) == (0, MINIMAL_INFOHASH + "\n", "")
    meta = json.loads((FIXTURES / "infohashes.json").read_text())
    code, out, _ = run("torrent", "infohash", str(FIXTURES / "multi.torrent"))
    assert out.strip() == meta["multi.torrent"]["infohash"]


def test_torrent_to_magnet(run, tmp_path, minimal_torrent):
    path = tmp_path / "m.torrent"
    path.write_bytes(minimal_torrent)
    assert run("torrent", "to-magnet", str(path))[1].strip() == (
        f"magnet:?xt=urn:btih:{MINIMAL_INFOHASH}&dn=a&xl=5")


def test_estimate(run):
    assert run("estimate", "parallel", "--tr", "0.01", "--tb", "1", "--chunk", "50:10", "--chunk", "50:5")[1] == "11.01\n"
    assert run("estimate", "serial", "--tr", "0.01", "--chunk", "50:10", "--chunk", "50:5")[1] == "15.01\n"
    assert run("estimate", "compare", "--tb", "1", "--chunk", "50:10", "--chunk", "50:5")[1] == "4.0\n"


def test_estimate_errors(run):
    with pytest.raises(SystemExit) as exc:
        run("estimate", "parallel", "--chunk", "50")
    assert exc.value.code == 2
    code, _, err = run("estimate", "serial", "--chunk", "0:1")
    assert code == 1 and "error" in err


def test_magnet_parse_errors(run):
    code, out, err = run("magnet", "parse", "not-a-magnet")
    assert code == 1 and out == "" and "not a magnet link" in err


def test_magnet_parse_make_inverse(run, tmp_path):
    text = "magnet:?xt=urn:btih:" + "a" * 40 + "&dn=a%20b&xl=3&tr=udp%3a%2f%2ft&kt=k&ws=x"
    code, out, _ = run("magnet", "parse", text)
    assert code == 0
    (tmp_path / "l.json").write_text(out)
    assert run("magnet", "make", "--from-json", str(tmp_path / "l.json"))[1].strip() == text
    code, out, _ = run("magnet", "make", "--xt", "urn:btih:" + "a" * 40, "--dn", "a b", "--xl", "3")
    assert out.strip() == "magnet:?xt=urn:btih:" + "a" * 40 + "&dn=a%20b&xl=3"


def test_ndn_inverse(run, tmp_path):
    container = {"data_name": "/gwdg/ds/1", "checksum_sha256": CHECKSUM,
                 "signature": "c2lnIQ", "cert_data_name": "/keys/alice"}
    (tmp_path / "n.json").write_text(json.dumps(container))
    code, link, _ = run("ndn", "to-magnet", str(tmp_path / "n.json"))
    assert code == 0 and "xt=urn:ndnsec:c2lnIQ.%2fkeys%2falice" in link
    code, out, _ = run("ndn", "from-magnet", link.strip())
    assert json.loads(out) == container


def test_pid_lifecycle(run, tmp_path):
    store = str(tmp_path / "pids.journal")
    magnet = "magnet:?xt=urn:btih:" + "a" * 40
    assert run("pid", "register", "11022", "--store", store)[0] == 0
    assert run("pid", "create", "11022", "--suffix", "t", "--url", "http://a", "--store", store)[1] == "11022/t\n"
    assert run("pid", "resolve", "11022/t", "--store", store)[1] == "http://a\n"
    code, out, _ = run("pid", "update", "11022/t", "--magnet", magnet, "--start-index", "2", "--store", store)
    assert code == 0 and len(json.loads(out)["values"]) == 2
    assert run("pid", "resolve", "11022/t", "--store", store)[1] == magnet + "\n"
    assert run("pid", "resolve", "11022/t", "--type", "URL", "--store", store)[1] == "http://a\n"
    assert run("--pretty", "pid", "resolve", "11022/t", "--store", store)[1] == f"MAGNET\t{magnet}\n"
    code, out, _ = run("pid", "get", "11022/t", "--store", store)
    assert json.loads(out)["pid"] == "11022/t"
    code, _, err = run("pid", "get", "11022/none", "--store", store)
    assert code == 1 and "does not exist" in err
    code, _, err = run("pid", "create", "999", "--url", "http://a", "--store", store)
    assert code == 1


def test_stats_lengths(run, tmp_path):
    (tmp_path / "lines.txt").write_text("a\nbb\nccc\ndddd\neeeee\n")
    code, out, _ = run("stats", "lengths", str(tmp_path / "lines.txt"))
    assert out.splitlines() == ["count,min,q1,median,q3,p95,max,mean", "5,1,2,3,4,5,5,3.0"]


def test_bench_latency(run, tmp_path):
    out_path = tmp_path / "lat.csv"
    code, _, _ = run("bench", "latency", "--sizes", "32,64,128", "--trials", "5", "--out", str(out_path))
    assert code == 0
    rows = out_path.read_text().splitlines()
    assert rows[0] == "size,trials,mean_s,median_s" and len(rows) == 4


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "pidmagnet", "estimate", "serial", "--chunk", "1:1"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout == "1.0\n"
    proc = subprocess.run([sys.executable, "-m", "pidmagnet"], capture_output=True, text=True)
    assert proc.returncode == 2
