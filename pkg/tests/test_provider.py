import json
import threading

import httpx
import pytest

from occamix.fixtures import FIXTURE_TASKS, FIXTURES, builtin_task_path, fixture_records
from occamix.provider import (AuthError, DuplicateId, EmptyPool, FileSource, NetworkError,
                              ProgramParseError, RemoteSource, ResponseCache, ScriptedSource,
                              UnknownFixture, cache_key, fetch_remote_pool, load_pool,
                              objects_text, parse_response, pool_hash, resolve_pool, scripted_pool)
from occamix.tasks import evaluate_task, load_task

SIX = fixture_records("task_a_6")


def write_pool(tmp_path, records):
    p = tmp_path / "pool.json"
    p.write_text(json.dumps(records))
    return p


class TestFileSource:
    def test_six(self, tmp_path):
        assert len(load_pool(write_pool(tmp_path, SIX))) == 6

    def test_bad_program(self, tmp_path):
        recs = SIX[:2] + [{"id": "oops", "description": "d", "program": "teleport()"}]
        with pytest.raises(ProgramParseError) as info:
            load_pool(write_pool(tmp_path, recs))
        assert info.value.hypothesis_id == "oops"

    def test_empty(self, tmp_path):
        with pytest.raises(EmptyPool):
            load_pool(write_pool(tmp_path, []))

    def test_duplicate(self, tmp_path):
        with pytest.raises(DuplicateId):
            load_pool(write_pool(tmp_path, SIX + SIX[:1]))

    def test_resolve(self, tmp_path):
        assert len(resolve_pool(FileSource(str(write_pool(tmp_path, SIX))))) == 6


class TestScripted:
    @pytest.mark.parametrize("fid, n", [("task_c_20", 20), ("task_a_6", 6), ("task_b_6", 6),
                                        ("clean_single", 1)])
    def test_counts(self, fid, n):
        assert len(resolve_pool(ScriptedSource(fid))) == n

    def test_unknown(self):
        with pytest.raises(UnknownFixture):
            scripted_pool("nope")

    @pytest.mark.parametrize("fid", sorted(FIXTURES))
    def test_runs_on_its_task(self, fid):
        r = evaluate_task(load_task(builtin_task_path(FIXTURE_TASKS[fid])), scripted_pool(fid))
        assert abs(r.solomonoff.weights.sum() - 1) < 1e-9

    def test_pool_hash_stable(self):
        assert pool_hash(scripted_pool("task_a_6")) == pool_hash(scripted_pool("task_a_6"))
        assert pool_hash(scripted_pool("task_a_6")) != pool_hash(scripted_pool("task_b_6"))


def chat_reply(records):
    return {"choices": [{"message": {"role": "assistant", "content": json.dumps(records)}}]}


class Counter:
    def __init__(self, handler):
        self.calls = 0
        self.handler = handler
        self.lock = threading.Lock()

    def __call__(self, request):
        with self.lock:
            self.calls += 1
        return self.handler(request)


@pytest.fixture
def task():
    return load_task(builtin_task_path("task_a"))


SOURCE = RemoteSource("http://llm.invalid/v1/chat/completions", "test-model", 6)


class TestRemote:
    def test_cache_hit_skips_network(self, tmp_path, task):
        counter = Counter(lambda req: httpx.Response(200, json=chat_reply(SIX)))
        client = httpx.Client(transport=httpx.MockTransport(counter))
        cache = ResponseCache(tmp_path)
        first = fetch_remote_pool(task, SOURCE, cache, client=client, api_key="k")
        second = fetch_remote_pool(task, SOURCE, cache, client=client, api_key="k")
        assert counter.calls == 1 and first == second and len(first) == 6
        # a fresh cache object over the same directory also hits
        third = fetch_remote_pool(task, SOURCE, ResponseCache(tmp_path), client=client)
        assert counter.calls == 1 and third == first

    def test_request_shape(self, tmp_path, task):
        seen = {}

        def handler(req):
            seen["body"] = json.loads(req.content)
            seen["auth"] = req.headers.get("authorization")
            return httpx.Response(200, json=chat_reply(SIX))

        client = httpx.Client(transport=httpx.MockTransport(handler))
        fetch_remote_pool(task, SOURCE, ResponseCache(tmp_path), client=client, api_key="sekret")
        assert seen["body"]["model"] == "test-model" and seen["body"]["temperature"] == 0
        assert seen["auth"] == "Bearer sekret"
        for f in tmp_path.iterdir():
            assert "sekret" not in f.read_text()

    def test_malformed_record_skipped(self):
        recs = SIX[:5] + [{"id": "x", "description": "d", "program": "nonsense("}]
        pool, warnings = parse_response(json.dumps(recs))
        assert len(pool) == 5 and len(warnings) == 1

    def test_fenced_response(self):
        pool, _ = parse_response("Here you go:\n```json\n" + json.dumps(SIX) + "\n```")
        assert len(pool) == 6

    def test_unreachable(self, tmp_path, task):
        def handler(req):
            raise httpx.ConnectError("down", request=req)

        counter = Counter(handler)
        client = httpx.Client(transport=httpx.MockTransport(counter))
        with pytest.raises(NetworkError):
            fetch_remote_pool(task, SOURCE, ResponseCache(tmp_path), client=client)
        assert counter.calls == 3
        assert list(tmp_path.glob("*.json")) == []

    def test_auth(self, tmp_path, task):
        client = httpx.Client(transport=httpx.MockTransport(lambda r: httpx.Response(401)))
        with pytest.raises(AuthError):
            fetch_remote_pool(task, SOURCE, ResponseCache(tmp_path), client=client)

    def test_concurrent_single_request(self, tmp_path, task):
        counter = Counter(lambda req: httpx.Response(200, json=chat_reply(SIX)))
        client = httpx.Client(transport=httpx.MockTransport(counter))
        cache = ResponseCache(tmp_path)
        threads = [threading.Thread(target=fetch_remote_pool, args=(task, SOURCE, cache),
                                    kwargs={"client": client}) for _ in range(8)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert counter.calls == 1

    def test_cache_key(self, task):
        text = objects_text(task)
        assert cache_key(text, "m", 6) == cache_key(text, "m", 6)
        assert cache_key(text, "m", 6) != cache_key(text, "m", 7)
        assert cache_key(text, "m", 6) != cache_key(text, "other", 6)
        assert cache_key(text, "m", 6, "v1") != cache_key(text, "m", 6, "v2")

    def test_remote_n_validated(self):
        with pytest.raises(ValueError):
            RemoteSource("http://x", "m", 0)
