import time

from fastapi.testclient import TestClient

from querytagger.core import validate_bio, entity_surfaces
from querytagger.model_io import load_model
from querytagger.service import create_app


def client_for(fixture_model, **kwargs):
    return TestClient(create_app(load_model(fixture_model.model_path), **kwargs))


class TestTagEndpoint:
    def test_canonical_example(self, fixture_model):
        client = client_for(fixture_model)
        resp = client.post("/tag", json={"query": "LG washer mini"})
        assert resp.status_code == 200
        body = resp.json()
        assert body == {
            "query": "LG washer mini",
            "tokens": ["lg", "washer", "mini"],
            "labels": ["B-BRD", "B-PRD", "O"],
            "brand": ["lg"],
            "product": ["washer"],
        }

    def test_empty_query_rejected(self, fixture_model):
        client = client_for(fixture_model)
        resp = client.post("/tag", json={"query": ""})
        assert resp.status_code == 400
        assert resp.json()["detail"] == "empty query"

    def test_all_punctuation_query_rejected(self, fixture_model):
        client = client_for(fixture_model)
        assert client.post("/tag", json={"query": "!!!"}).status_code == 400

    def test_missing_field_rejected(self, fixture_model):
        client = client_for(fixture_model)
        assert client.post("/tag", json={"nope": "x"}).status_code == 422

    def test_malformed_body_rejected(self, fixture_model):
        client = client_for(fixture_model)
        resp = client.post(
            "/tag", content=b"not json", headers={"content-type": "application/json"}
        )
        assert 400 <= resp.status_code < 500

    def test_guard_words_yield_no_entities(self, fixture_model):
        client = client_for(fixture_model)
        body = client.post("/tag", json={"query": "no without for"}).json()
        assert body["brand"] == []
        assert body["product"] == []

    def test_labels_valid_and_consistent_with_arrays(self, fixture_model):
        client = client_for(fixture_model)
        for query in ("LG washer mini", "cheap dryer", "behr paint", "zorb thing"):
            body = client.post("/tag", json={"query": query}).json()
            validate_bio(body["labels"])
            brand, product = entity_surfaces(body["tokens"], body["labels"])
            assert (brand, product) == (body["brand"], body["product"])

    def test_token_cap_truncates(self, fixture_model):
        client = client_for(fixture_model, token_cap=4)
        body = client.post("/tag", json={"query": "lg " * 40}).json()
        assert len(body["tokens"]) == 4

    def test_stateless_repeats_identical(self, fixture_model):
        client = client_for(fixture_model)
        queries = ["LG washer mini", "cheap dryer", "behr paint discount"] * 10
        first = [client.post("/tag", json={"query": query}).json() for query in queries]
        second = [client.post("/tag", json={"query": query}).json() for query in queries]
        assert first == second


class TestHealthEndpoint:
    def test_reports_version_and_fingerprint(self, fixture_model):
        client = client_for(fixture_model)
        body = client.get("/health").json()
        assert body["status"] == "ok"
        assert body["format_version"] == 1
        assert body["catalog_fingerprint"] == fixture_model.fingerprint


def test_informational_latency_report(fixture_model):
    # Not a gate: prints the measured p99 tag latency for this machine.
    client = client_for(fixture_model)
    samples = []
    for _ in range(200):
        start = time.perf_counter()
        client.post("/tag", json={"query": "LG washer mini"})
        samples.append(time.perf_counter() - start)
    samples.sort()
    p99 = samples[int(len(samples) * 0.99) - 1] * 1000
    print(f"\n[bench] p99 tag latency via test client: {p99:.2f} ms")
