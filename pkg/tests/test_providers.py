import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from confctx.providers import (
    AuthError,
    ChatMessage,
    HttpProvider,
    MalformedScript,
    ProviderConfig,
    ProviderKind,
    ProviderTimeout,
    RateLimited,
    Role,
    ScriptExhausted,
    ScriptedProvider,
    TransportError,
    load_script,
    make_provider,
    script_from_dict,
)

SECRET = "sk-test-SENTINEL-8c1f"
MSGS = [ChatMessage(Role.SYSTEM, "sys"), ChatMessage(Role.USER, "hello")]


def test_message_validation():
    with pytest.raises(ValueError):
        ChatMessage(Role.USER, "")
    p = ScriptedProvider(default="x")
    with pytest.raises(ValueError):
        p.complete([])
    with pytest.raises(ValueError):
        p.complete([ChatMessage(Role.USER, "hi")])


def test_scripted_order_rules_default():
    p = ScriptedProvider(
        responses=["first", {"action": "verdict"}],
        rules=[{"contains": "needle", "respond": "ruled"}],
        default="fallback",
    )
    assert p.complete(MSGS) == "first"
    assert json.loads(p.complete(MSGS)) == {"action": "verdict"}
    assert p.complete(MSGS + [ChatMessage(Role.USER, "a needle here")]) == "ruled"
    assert p.complete(MSGS) == "fallback"
    assert len(p.calls) == 4


def test_scripted_exhausted():
    p = ScriptedProvider(responses=["one"])
    p.complete(MSGS)
    with pytest.raises(ScriptExhausted):
        p.complete(MSGS)


def test_script_loading(tmp_path):
    f = tmp_path / "s.json"
    f.write_text(json.dumps({"responses": ["a"], "default": "b"}))
    p = load_script(f)
    assert [p.complete(MSGS), p.complete(MSGS)] == ["a", "b"]
    f.write_text("not json")
    with pytest.raises(MalformedScript):
        load_script(f)
    with pytest.raises(MalformedScript):
        script_from_dict({"rules": [{"respond": "x"}]})
    with pytest.raises(MalformedScript):
        script_from_dict([])
    cfg = ProviderConfig(ProviderKind.SCRIPTED, script_path=str(tmp_path / "missing.json"))
    with pytest.raises(MalformedScript):
        make_provider(cfg)


def test_config_validation():
    with pytest.raises(ValueError):
        ProviderConfig(ProviderKind.HTTP, endpoint_url="http://x")
    with pytest.raises(ValueError):
        ProviderConfig(ProviderKind.SCRIPTED)
    with pytest.raises(ValueError):
        ProviderConfig(ProviderKind.SCRIPTED, script_path="a", endpoint_url="http://x")


class Stub:
    """A tiny chat-completions server whose replies are queued per test."""

    def __init__(self):
        self.queue = []
        self.requests = []
        stub = self

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self):
                body = self.rfile.read(int(self.headers["Content-Length"]))
                stub.requests.append((self.path, dict(self.headers), json.loads(body)))
                status, payload, delay = stub.queue.pop(0) if stub.queue else (200, "ok", 0)
                if delay:
                    threading.Event().wait(delay)
                data = json.dumps({"choices": [{"message": {"role": "assistant", "content": payload}}]}).encode()
                if status != 200:
                    data = b'{"error": "nope"}'
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

            def log_message(self, *args):
                pass

        self.server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.url = f"http://127.0.0.1:{self.server.server_address[1]}"
        threading.Thread(target=self.server.serve_forever, daemon=True).start()

    def close(self):
        self.server.shutdown()
        self.server.server_close()


@pytest.fixture
def stub():
    s = Stub()
    yield s
    s.close()


def http(stub, monkeypatch, **kw):
    monkeypatch.setenv("TEST_KEY_ENV", SECRET)
    cfg = ProviderConfig(ProviderKind.HTTP, endpoint_url=stub.url, model_name="m1", api_key_env="TEST_KEY_ENV", **kw)
    p = HttpProvider(cfg)
    p.backoff_base = 0.01
    return p


def test_http_request_shape(stub, monkeypatch):
    p = http(stub, monkeypatch)
    stub.queue.append((200, "the reply", 0))
    assert p.complete(MSGS) == "the reply"
    path, headers, body = stub.requests[0]
    assert path == "/v1/chat/completions"
    assert headers["Authorization"] == f"Bearer {SECRET}"
    assert body == {
        "model": "m1",
        "messages": [{"role": "system", "content": "sys"}, {"role": "user", "content": "hello"}],
        "temperature": 0.0,
    }


def test_http_retries_then_succeeds(stub, monkeypatch):
    p = http(stub, monkeypatch)
    stub.queue += [(429, "", 0), (503, "", 0), (200, "fine", 0)]
    assert p.complete(MSGS) == "fine"
    assert len(stub.requests) == 3


def test_http_gives_up(stub, monkeypatch):
    p = http(stub, monkeypatch)
    stub.queue += [(429, "", 0)] * 3
    with pytest.raises(RateLimited):
        p.complete(MSGS)
    stub.queue += [(500, "", 0)] * 3
    with pytest.raises(TransportError):
        p.complete(MSGS)
    assert len(stub.requests) == 6


def test_http_auth_error_does_not_retry_or_leak(stub, monkeypatch):
    p = http(stub, monkeypatch)
    stub.queue.append((401, "", 0))
    with pytest.raises(AuthError) as info:
        p.complete(MSGS)
    assert len(stub.requests) == 1
    assert SECRET not in str(info.value)
    assert SECRET not in repr(p.__dict__) and SECRET not in repr(p.config)


def test_http_timeout(stub, monkeypatch):
    p = http(stub, monkeypatch, timeout=0.2)
    stub.queue.append((200, "late", 1.0))
    with pytest.raises(ProviderTimeout):
        p.complete(MSGS)


def test_http_unreachable(monkeypatch):
    monkeypatch.delenv("PROVIDER_API_KEY", raising=False)
    cfg = ProviderConfig(ProviderKind.HTTP, endpoint_url="http://127.0.0.1:9", model_name="m")
    with pytest.raises(TransportError):
        HttpProvider(cfg).complete(MSGS)


def test_url_normalisation():
    def url(base):
        return HttpProvider(ProviderConfig(ProviderKind.HTTP, endpoint_url=base, model_name="m")).url

    assert url("http://h:1") == "http://h:1/v1/chat/completions"
    assert url("http://h:1/v1/") == "http://h:1/v1/chat/completions"
    assert url("http://h:1/v1/chat/completions") == "http://h:1/v1/chat/completions"


def test_no_key_no_header(stub, monkeypatch):
    monkeypatch.delenv("PROVIDER_API_KEY", raising=False)
    p = HttpProvider(ProviderConfig(ProviderKind.HTTP, endpoint_url=stub.url, model_name="m"))
    p.complete(MSGS)
    assert "Authorization" not in stub.requests[0][1]
