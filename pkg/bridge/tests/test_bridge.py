import hashlib
import json
import math
import socket
import threading
import time
from pathlib import Path

import numpy as np
import pytest
from fastapi.testclient import TestClient

from toxsteer_bridge import BridgeConfig, create_app

REPO_DATA = Path(__file__).resolve().parents[2] / "data"
LEXICON_PATH = REPO_DATA / "lexicon.tsv"

SENTENCE_LOW = ("Over the past few years across Western nations, there have been "
                "several attempts by 'Progressives' to gain power.")
SENTENCE_HIGH = ("Zoomers are inexperienced, idealistic do-gooders who are woke, and "
                 "Boomers are world destroyers who consume everything without "
                 "thinking, and will be the death of us all.")


@pytest.fixture(scope="module")
def ngram_artifact(tmp_path_factory):
    """A tiny hand-written artifact in the engine's documented format."""
    payload = {
        "format": "toxsteer-ngram",
        "version": 1,
        "order": 2,
        "alpha": 0.1,
        "vocabulary": ["</s>", "<unk>", "alpha", "beta", "gamma"],
        "counts": {
            "<s>": {"alpha": 2, "beta": 1},
            "alpha": {"beta": 3},
            "beta": {"alpha": 1, "gamma": 1, "</s>": 1},
            "gamma": {"</s>": 1},
        },
    }
    path = tmp_path_factory.mktemp("artifact") / "model.json"
    path.write_text(json.dumps(payload), encoding="utf-8")
    return path


@pytest.fixture(scope="module")
def client(ngram_artifact):
    config = BridgeConfig(lm=f"ngram:{ngram_artifact}",
                          toxicity=f"lexicon:{LEXICON_PATH}",
                          metric="overlap:")
    return TestClient(create_app(config))


@pytest.fixture(scope="module")
def bare_client():
    return TestClient(create_app(BridgeConfig()))


class TestHealth:
    def test_always_present(self, bare_client):
        body = bare_client.get("/health").json()
        assert body["v"] == 1
        assert body["status"] == "ok"
        assert body["endpoints"] == {"logits": False, "tokenize": True,
                                     "toxicity": False, "comet": False}

    def test_reports_configured_endpoints(self, client):
        body = client.get("/health").json()
        assert body["endpoints"]["logits"] is True
        assert body["endpoints"]["toxicity"] is True
        assert body["endpoints"]["comet"] is True


class TestTokenize:
    def test_word_tokens(self, client):
        body = client.post("/tokenize", json={"text": "The Crowd, shouts!"}).json()
        assert body["tokens"] == ["the", "crowd", "shouts"]
        assert body["v"] == 1

    def test_vocab_hash_follows_lm(self, client, bare_client, ngram_artifact):
        with_lm = client.post("/tokenize", json={"text": "x"}).json()
        vocab = json.loads(ngram_artifact.read_text())["vocabulary"]
        expected = hashlib.sha256("\n".join(vocab).encode("utf-8")).hexdigest()
        assert with_lm["vocab_hash"] == expected
        without = bare_client.post("/tokenize", json={"text": "x"}).json()
        assert without["vocab_hash"] is None


class TestLogits:
    def test_normalized_for_empty_prefix(self, client):
        body = client.post("/logits", json={"prefix_tokens": []}).json()
        total = np.logaddexp.reduce(np.array(body["log_probs"]))
        assert abs(float(total)) <= 1e-6
        assert len(body["log_probs"]) == 5

    @pytest.mark.parametrize("prefix", [["alpha"], ["beta"], ["alpha", "beta"],
                                        ["gamma", "gamma"]])
    def test_normalized_for_prefixes(self, client, prefix):
        body = client.post("/logits", json={"prefix_tokens": prefix}).json()
        total = np.logaddexp.reduce(np.array(body["log_probs"]))
        assert abs(float(total)) <= 1e-6

    def test_deterministic(self, client):
        a = client.post("/logits", json={"prefix_tokens": ["alpha"]}).json()
        b = client.post("/logits", json={"prefix_tokens": ["alpha"]}).json()
        assert a == b

    def test_vocab_hash_stable_and_documented(self, client, ngram_artifact):
        vocab = json.loads(ngram_artifact.read_text())["vocabulary"]
        expected = hashlib.sha256("\n".join(vocab).encode("utf-8")).hexdigest()
        body = client.post("/logits", json={"prefix_tokens": []}).json()
        assert body["vocab_hash"] == expected

    def test_known_smoothed_value(self, client):
        # count(alpha -> beta) = 3 of 3, alpha 0.1, V = 5
        body = client.post("/logits", json={"prefix_tokens": ["alpha"]}).json()
        p_beta = math.exp(body["log_probs"][3])
        assert p_beta == pytest.approx((3 + 0.1) / (3 + 0.1 * 5), rel=1e-9)

    def test_unknown_token_is_400(self, client):
        response = client.post("/logits", json={"prefix_tokens": ["nope"]})
        assert response.status_code == 400
        assert "nope" in response.json()["detail"]

    def test_prefix_text_maps_oov_to_unk(self, client):
        by_text = client.post("/logits", json={"prefix_text": "Alpha zzz"}).json()
        by_tokens = client.post("/logits",
                                json={"prefix_tokens": ["alpha", "<unk>"]}).json()
        assert by_text == by_tokens

    def test_missing_prefix_is_422(self, client):
        assert client.post("/logits", json={}).status_code == 422

    def test_unconfigured_is_503(self, bare_client):
        response = bare_client.post("/logits", json={"prefix_tokens": []})
        assert response.status_code == 503


class TestToxicity:
    def test_in_range_and_deterministic(self, client):
        first = client.post("/toxicity", json={"text": "a perfectly calm note"}).json()
        second = client.post("/toxicity", json={"text": "a perfectly calm note"}).json()
        assert 0.0 <= first["toxicity"] <= 1.0
        assert first == second

    def test_charged_sentence_ordering(self, client):
        low = client.post("/toxicity", json={"text": SENTENCE_LOW}).json()["toxicity"]
        high = client.post("/toxicity", json={"text": SENTENCE_HIGH}).json()["toxicity"]
        assert high > low

    def test_empty_text_is_400(self, client):
        assert client.post("/toxicity", json={"text": ""}).status_code == 400
        assert client.post("/toxicity", json={"text": "   "}).status_code == 400

    def test_unconfigured_is_503(self, bare_client):
        response = bare_client.post("/toxicity", json={"text": "x"})
        assert response.status_code == 503


class TestComet:
    def test_identical_everything_scores_top(self, client):
        body = client.post("/comet", json={"source": "the crowd stays calm",
                                           "candidate": "the crowd stays calm",
                                           "reference": "the crowd stays calm"}).json()
        assert body["score"] == pytest.approx(1.0)

    def test_unrelated_candidate_scores_lower(self, client):
        related = client.post("/comet", json={"source": "the crowd stays calm",
                                              "candidate": "the crowd is calm",
                                              "reference": "the crowd stays calm"}).json()
        unrelated = client.post("/comet", json={"source": "the crowd stays calm",
                                                "candidate": "bananas orbit jupiter",
                                                "reference": "the crowd stays calm"}).json()
        assert unrelated["score"] < related["score"]

    def test_deterministic(self, client):
        payload = {"source": "a", "candidate": "b", "reference": "c"}
        assert client.post("/comet", json=payload).json() == \
            client.post("/comet", json=payload).json()

    def test_unconfigured_is_503(self, bare_client):
        response = bare_client.post("/comet", json={"source": "a", "candidate": "b",
                                                    "reference": "c"})
        assert response.status_code == 503


class TestSchema:
    def test_every_response_carries_version(self, client):
        assert client.get("/health").json()["v"] == 1
        assert client.post("/tokenize", json={"text": "x"}).json()["v"] == 1
        assert client.post("/logits", json={"prefix_tokens": []}).json()["v"] == 1
        assert client.post("/toxicity", json={"text": "x"}).json()["v"] == 1
        assert client.post("/comet", json={"source": "a", "candidate": "a",
                                           "reference": "a"}).json()["v"] == 1

    def test_malformed_body_is_422(self, client):
        assert client.post("/toxicity", json={"nope": 1}).status_code == 422
        assert client.post("/comet", json={"source": "a"}).status_code == 422


class TestOverHTTP:
    """Smoke test over a real socket: the wire contract the engine consumes."""

    def test_uvicorn_roundtrip(self, ngram_artifact):
        import requests
        import uvicorn

        with socket.socket() as sock:
            sock.bind(("127.0.0.1", 0))
            port = sock.getsockname()[1]

        config = BridgeConfig(lm=f"ngram:{ngram_artifact}",
                              toxicity=f"lexicon:{LEXICON_PATH}")
        server = uvicorn.Server(uvicorn.Config(create_app(config), host="127.0.0.1",
                                               port=port, log_level="error"))
        thread = threading.Thread(target=server.run, daemon=True)
        thread.start()
        try:
            base = f"http://127.0.0.1:{port}"
            for _ in range(100):
                try:
                    if requests.get(f"{base}/health", timeout=0.5).ok:
                        break
                except requests.RequestException:
                    time.sleep(0.05)
            else:
                pytest.fail("bridge did not come up")

            body = requests.post(f"{base}/logits",
                                 json={"prefix_tokens": ["alpha"]}, timeout=5).json()
            total = np.logaddexp.reduce(np.array(body["log_probs"]))
            assert abs(float(total)) <= 1e-6
            tox = requests.post(f"{base}/toxicity",
                                json={"text": "calm words"}, timeout=5).json()
            assert 0.0 <= tox["toxicity"] <= 1.0
        finally:
            server.should_exit = True
            thread.join(timeout=5)
