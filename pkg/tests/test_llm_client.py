import json
import logging
import threading
import time

import httpx
import pytest

from plansearch.errors import RateLimited, ReplayMiss, TransportError
from plansearch.llm_client import ChatClient, ClientConfig, ClientMode, ReplayCache, request_digest

SECRET = "sk-test-never-print-me"


def reply(text):
    return httpx.Response(200, json={"choices": [{"message": {"role": "assistant", "content": text}}]})


class Server:
    """Scripted stub of a chat-completions endpoint."""

    def __init__(self, *responses):
        self.responses = list(responses)
        self.requests = []

    def __call__(self, request):
        self.requests.append(request)
        item = self.responses.pop(0) if self.responses else reply("ok")
        if isinstance(item, Exception):
            raise item
        return item


def client(server, tmp_path=None, mode=ClientMode.LIVE, **kw):
    cache = str(tmp_path / "cache.jsonl") if tmp_path is not None else None
    config = ClientConfig(model="test-model", mode=mode, cache_path=cache, api_key_env="PLANSEARCH_TEST_KEY", **kw)
    return ChatClient(config, transport=httpx.MockTransport(server), sleep=lambda s: None)


@pytest.fixture(autouse=True)
def secret_key(monkeypatch):
    monkeypatch.setenv("PLANSEARCH_TEST_KEY", SECRET)


def test_live_request_shape():
    server = Server(reply("Step 1:ans = exist(all_obj)"))
    assert client(server).complete("hello") == "Step 1:ans = exist(all_obj)"
    (req,) = server.requests
    body = json.loads(req.content)
    assert body["temperature"] == 1.0
    assert body["model"] == "test-model"
    assert body["messages"] == [{"role": "user", "content": "hello"}]
    assert req.url.path.endswith("/chat/completions")
    assert req.headers["authorization"] == f"Bearer {SECRET}"
    assert SECRET not in req.content.decode()


def test_retries_then_succeeds():
    slept = []
    server = Server(httpx.Response(503), httpx.ConnectError("down"), reply("fine"))
    c = client(server, backoff_base=0.5)
    c._sleep = slept.append
    assert c.complete("x") == "fine"
    assert slept == [0.5, 1.0]
    assert len(server.requests) == 3


def test_rate_limit_propagates_after_retries():
    server = Server(*[httpx.Response(429)] * 4)
    with pytest.raises(RateLimited):
        client(server, max_retries=3).complete("x")
    assert len(server.requests) == 4


def test_transport_error_after_retries():
    server = Server(*[httpx.Response(500)] * 3)
    with pytest.raises(TransportError):
        client(server, max_retries=2).complete("x")


def test_client_error_is_not_retried():
    server = Server(httpx.Response(401))
    with pytest.raises(TransportError):
        client(server).complete("x")
    assert len(server.requests) == 1


def test_malformed_body():
    with pytest.raises(TransportError):
        client(Server(httpx.Response(200, json={"nope": 1}))).complete("x")


def test_record_then_replay(tmp_path):
    server = Server(reply("recorded answer"))
    assert client(server, tmp_path, ClientMode.RECORD).complete("prompt A") == "recorded answer"
    assert client(server, tmp_path, ClientMode.RECORD).complete("prompt A") == "recorded answer"
    assert len(server.requests) == 1  # second record-mode call hit the cache

    def no_network(request):
        raise AssertionError("replay mode touched the network")

    replay = client(no_network, tmp_path, ClientMode.REPLAY)
    assert replay.complete("prompt A") == "recorded answer"
    with pytest.raises(ReplayMiss):
        replay.complete("prompt B")


def test_replay_needs_cache_path():
    with pytest.raises(ValueError):
        ClientConfig(model="m", mode=ClientMode.REPLAY)


def test_digest_covers_model_temperature_and_messages():
    msgs = [{"role": "user", "content": "a"}]
    base = request_digest("m", 1.0, msgs)
    assert base == request_digest("m", 1.0, [{"content": "a", "role": "user"}])
    assert base != request_digest("m2", 1.0, msgs)
    assert base != request_digest("m", 0.5, msgs)
    assert base != request_digest("m", 1.0, [{"role": "user", "content": "b"}])


def test_cache_is_append_only(tmp_path):
    cache = ReplayCache(tmp_path / "c.jsonl")
    cache.append("d1", "one")
    cache.append("d1", "changed")
    cache.append("d2", "two")
    lines = (tmp_path / "c.jsonl").read_text().splitlines()
    assert [json.loads(l) for l in lines] == [{"digest": "d1", "response": "one"}, {"digest": "d2", "response": "two"}]
    assert ReplayCache(tmp_path / "c.jsonl").get("d1") == "one"


def test_credential_never_logged(caplog, tmp_path):
    caplog.set_level(logging.DEBUG)
    server = Server(httpx.Response(503), reply("ok"))
    client(server, tmp_path, ClientMode.RECORD).complete("x")
    assert SECRET not in caplog.text
    assert SECRET not in (tmp_path / "cache.jsonl").read_text()


def test_in_flight_limit():
    active, peak, lock = [0], [0], threading.Lock()

    def slow(request):
        with lock:
            active[0] += 1
            peak[0] = max(peak[0], active[0])
        time.sleep(0.02)
        with lock:
            active[0] -= 1
        return reply("ok")

    c = client(slow, max_in_flight=2)
    threads = [threading.Thread(target=c.complete, args=(f"p{i}",)) for i in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert peak[0] <= 2
