import http.client
import json
import threading

import pytest

from conftest import MINIMAL_INFOHASH
from pidmagnet.magnet import Btih, Ndn, NdnSec, parse_magnet
from pidmagnet.service import ServiceConfig, make_server
from pidmagnet.store import HandleStore, HandleValue

TOKEN = "s3cret"
CHECKSUM = "ab" * 32
MAGNET = "magnet:?xt=urn:btih:" + "a" * 40 + "&dn=x"


class Client:
    def __init__(self, port):
        self.port = port

    def __call__(self, method, path, body=None, token=TOKEN, headers=None):
        conn = http.client.HTTPConnection("127.0.0.1", self.port, timeout=10)
        hdrs = dict(headers or {})
        if token:
            hdrs["Authorization"] = f"Bearer {token}"
        if isinstance(body, (dict, list)):
            body = json.dumps(body).encode()
        conn.request(method, path, body=body, headers=hdrs)
        resp = conn.getresponse()
        payload = resp.read()
        conn.close()
        return resp, payload


@pytest.fixture
def served(tmp_path):
    store = HandleStore(tmp_path / "journal", fsync=False)
    store.register_prefix("11022")
    server = make_server(store, TOKEN)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield store, Client(server.server_address[1])
    server.shutdown()
    server.server_close()
    store.close()


def test_resolve_magnet_and_url(served):
    store, client = served
    store.create_handle("11022", "t1", [HandleValue(1, "MAGNET", MAGNET), HandleValue(2, "URL", "http://a.example/x")])
    store.create_handle("11022", "t2", [HandleValue(1, "URL", "http://a.example/y")])
    resp, _ = client("GET", "/11022/t1")
    assert resp.status == 303 and resp.getheader("Location") == MAGNET
    resp, _ = client("GET", "/11022/t2")
    assert resp.status == 303 and resp.getheader("Location") == "http://a.example/y"
    resp, _ = client("GET", "/11022/t1?type=URL")
    assert resp.getheader("Location") == "http://a.example/x"
    resp, _ = client("GET", "/11022/t1?type=magnet")
    assert resp.getheader("Location") == MAGNET


def test_resolve_errors(served):
    store, client = served
    store.create_handle("11022", "t2", [HandleValue(1, "URL", "http://a")])
    assert client("GET", "/11022/absent")[0].status == 404
    assert client("GET", "/11022/t2?type=MAGNET")[0].status == 404
    assert client("GET", "/11022/t2?type=EMAIL")[0].status == 400
    assert client("GET", "/nonsense")[0].status == 400
    assert client("GET", "/abc/def")[0].status == 400
    assert client("GET", "/11022/a/b")[0].status == 400
    assert client("GET", "/999/x")[0].status == 404


def test_noredirect_lists_values(served):
    store, client = served
    store.create_handle("11022", "t1", [HandleValue(1, "MAGNET", MAGNET), HandleValue(2, "URL", "http://a")])
    resp, body = client("GET", "/11022/t1?noredirect=1")
    assert resp.status == 200
    assert resp.getheader("Content-Type") == "application/json"
    doc = json.loads(body)
    assert doc["pid"] == "11022/t1"
    assert [(v["index"], v["type"], v["data"]) for v in doc["values"]] == [
        (1, "MAGNET", MAGNET), (2, "URL", "http://a")]


def test_mint_from_torrent(served, minimal_torrent):
    _, client = served
    resp, body = client("POST", "/11022/from-torrent", minimal_torrent)
    assert resp.status == 201
    doc = json.loads(body)
    assert doc["magnet"] == f"magnet:?xt=urn:btih:{MINIMAL_INFOHASH}&dn=a&xl=5"
    resp, _ = client("GET", "/" + doc["pid"], token=None)
    assert resp.status == 303
    assert parse_magnet(resp.getheader("Location")).xts == (Btih(bytes.fromhex(MINIMAL_INFOHASH)),)


def test_mint_from_torrent_errors(served, minimal_torrent):
    _, client = served
    assert client("POST", "/11022/from-torrent", b"garbage")[0].status == 400
    assert client("POST", "/11022/from-torrent", minimal_torrent, token=None)[0].status == 401
    assert client("POST", "/11022/from-torrent", minimal_torrent, token="wrong")[0].status == 401
    assert client("POST", "/999/from-torrent", minimal_torrent)[0].status == 404


def test_mint_from_ndn(served):
    _, client = served
    resp, body = client("POST", "/11022/from-ndn", {"data_name": "/gwdg/ds/1", "checksum_sha256": CHECKSUM})
    assert resp.status == 201
    link = parse_magnet(json.loads(body)["magnet"])
    assert [type(x) for x in link.xts] == [Ndn]

    resp, body = client("POST", "/11022/from-ndn", {
        "data_name": "/gwdg/ds/1", "checksum_sha256": CHECKSUM,
        "signature": "c2lnIQ", "cert_data_name": "/keys/alice"})
    assert resp.status == 201
    link = parse_magnet(json.loads(body)["magnet"])
    assert [type(x) for x in link.xts] == [Ndn, NdnSec]

    bad = {"data_name": "/x", "checksum_sha256": "abcd"}
    assert client("POST", "/11022/from-ndn", bad)[0].status == 400
    assert client("POST", "/11022/from-ndn", bad, token=None)[0].status == 401


def test_put_values(served):
    store, client = served
    resp, body = client("PUT", "/11022/p1", {"values": [{"type": "URL", "data": "http://a"}]})
    assert resp.status == 201
    resp, _ = client("GET", "/11022/p1")
    assert resp.getheader("Location") == "http://a"
    resp, body = client("PUT", "/11022/p1", {"values": [{"type": "MAGNET", "data": MAGNET}]})
    assert resp.status == 200
    assert [v["index"] for v in json.loads(body)["values"]] == [1, 2]
    resp, _ = client("GET", "/11022/p1")
    assert resp.getheader("Location") == MAGNET
    # a value without index replaces the value of the same type
    client("PUT", "/11022/p1", {"values": [{"type": "URL", "data": "http://b"}]})
    assert store.get_handle("11022/p1").value_of("URL").index == 1
    assert client("GET", "/11022/p1?type=URL")[0].getheader("Location") == "http://b"


def test_put_errors(served):
    _, client = served
    good = {"values": [{"type": "URL", "data": "http://a"}]}
    assert client("PUT", "/11022/p", good, token="bad")[0].status == 401
    assert client("PUT", "/11022/p", good, token=None)[0].status == 401
    assert client("PUT", "/11022/p", b"{")[0].status == 400
    assert client("PUT", "/11022/p", {"values": []})[0].status == 400
    assert client("PUT", "/11022/p", {"values": [{"type": "MAGNET", "data": "nope"}]})[0].status == 400
    assert client("PUT", "/999/p", good)[0].status == 404


def test_non_ascii_url_location(served):
    store, client = served
    store.create_handle("11022", "u", [HandleValue(1, "URL", "http://a.example/dé j")])
    resp, _ = client("GET", "/11022/u")
    assert resp.getheader("Location") == "http://a.example/d%C3%A9%20j"


def test_get_is_read_only(served, tmp_path):
    store, client = served
    store.create_handle("11022", "t1", [HandleValue(1, "MAGNET", MAGNET)])
    before = (tmp_path / "journal").read_bytes()
    for path in ("/11022/t1", "/11022/t1?type=URL", "/11022/t1?noredirect=1", "/11022/zz", "/bad"):
        client("GET", path)
    assert (tmp_path / "journal").read_bytes() == before


def test_config_requires_token_and_prefix():
    with pytest.raises(ValueError):
        ServiceConfig(token=None)
    with pytest.raises(ValueError):
        ServiceConfig(token="x", prefixes=())
    assert ServiceConfig.from_env(token="x", port=1).port == 1
