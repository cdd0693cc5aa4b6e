import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np
import pytest

from toxsteer import (CalibrationConfig, LexiconScorer, MockBackend,
                      SamplerConfig, Vocabulary, train_ngram)
from toxsteer.toydata import synthetic_corpus, toy_lexicon


@pytest.fixture(scope="session")
def lexicon():
    return toy_lexicon()


@pytest.fixture(scope="session")
def scorer(lexicon):
    return LexiconScorer(lexicon)


@pytest.fixture(scope="session")
def toy_model(lexicon):
    corpus = synthetic_corpus(lexicon, n_sentences=220, seed=0,
                              max_neutral=160, max_toxic=60)
    return train_ngram(corpus, order=2, alpha=0.1)


@pytest.fixture
def tiny_vocab():
    return Vocabulary(["alpha", "beta", "gamma"])


@pytest.fixture
def uniform_backend(tiny_vocab):
    return MockBackend.uniform(tiny_vocab)


def make_calibration(**kwargs):
    return CalibrationConfig(**kwargs)


def make_sampler(**kwargs):
    kwargs.setdefault("rng_seed", 0)
    return SamplerConfig(**kwargs)


class _StubHandler(BaseHTTPRequestHandler):
    """Programmable JSON endpoint: the test sets server.responses[path] to a
    callable(payload) -> (status, body_dict) or a constant (status, body)."""

    def do_POST(self):
        length = int(self.headers.get("Content-Length", 0))
        payload = json.loads(self.rfile.read(length) or b"{}")
        spec = self.server.responses.get(self.path)
        self.server.requests.append((self.path, payload))
        if spec is None:
            status, body = 404, {"error": "no such endpoint"}
        elif callable(spec):
            status, body = spec(payload)
        else:
            status, body = spec
        data = json.dumps(body).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, *args):
        pass


class StubServer:
    def __init__(self):
        self.httpd = ThreadingHTTPServer(("127.0.0.1", 0), _StubHandler)
        self.httpd.responses = {}
        self.httpd.requests = []
        self.thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)
        self.thread.start()

    @property
    def url(self):
        host, port = self.httpd.server_address
        return f"http://{host}:{port}"

    def respond(self, path, spec):
        self.httpd.responses[path] = spec

    @property
    def requests(self):
        return self.httpd.requests

    def close(self):
        self.httpd.shutdown()
        self.httpd.server_close()


@pytest.fixture
def stub_server():
    server = StubServer()
    yield server
    server.close()


def assert_prob_vector(vec):
    vec = np.asarray(vec)
    assert np.all(vec >= 0)
    assert abs(float(vec.sum()) - 1.0) < 1e-9
