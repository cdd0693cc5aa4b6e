"""End-to-end: the engine generates through a live bridge over HTTP.

Skipped when the engine package is not installed; the bridge itself never
imports it (the wire and file formats are the only coupling).
"""

import socket
import threading
import time
from pathlib import Path

import pytest

toxsteer = pytest.importorskip("toxsteer")

import numpy as np
import requests
import uvicorn

from toxsteer_bridge import BridgeConfig, create_app

REPO_DATA = Path(__file__).resolve().parents[2] / "data"


@pytest.fixture(scope="module")
def live_bridge(tmp_path_factory):
    corpus = (REPO_DATA / "corpus.txt").read_text(encoding="utf-8").splitlines()
    model = toxsteer.train_ngram(corpus, order=2, alpha=0.1)
    artifact = tmp_path_factory.mktemp("bridge") / "model.json"
    model.save(artifact)

    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        port = sock.getsockname()[1]
    config = BridgeConfig(lm=f"ngram:{artifact}",
                          toxicity=f"lexicon:{REPO_DATA / 'lexicon.tsv'}",
                          metric="overlap:")
    server = uvicorn.Server(uvicorn.Config(create_app(config), host="127.0.0.1",
                                           port=port, log_level="error"))
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    base = f"http://127.0.0.1:{port}"
    for _ in range(100):
        try:
            if requests.get(f"{base}/health", timeout=0.5).ok:
                break
        except requests.RequestException:
            time.sleep(0.05)
    else:
        pytest.fail("bridge did not come up")
    yield base, model.vocabulary
    server.should_exit = True
    thread.join(timeout=5)


def test_remote_backend_generates_through_bridge(live_bridge):
    base, vocabulary = live_bridge
    backend = toxsteer.RemoteBackend(base, vocabulary)
    scorer = toxsteer.RemoteScorer(base)
    config = toxsteer.CalibrationConfig(objective1=True, objective2=True,
                                        objective3=True)
    session = toxsteer.new_session("the media hate everything", scorer, config,
                                   toxsteer.SamplerConfig(rng_seed=3), set_size=2)
    result = toxsteer.generate_set(session, backend, scorer, k=2, max_len=6,
                                   rng=np.random.default_rng(3))
    assert len(result) == 2
    assert all(0.0 <= i.toxicity <= 1.0 for i in result.interpretations)
    assert all(i.text for i in result.interpretations)


def test_vocab_mismatch_refused_end_to_end(live_bridge):
    base, _ = live_bridge
    wrong_vocab = toxsteer.Vocabulary(["only", "two"])
    backend = toxsteer.RemoteBackend(base, wrong_vocab)
    with pytest.raises(toxsteer.ContractViolation, match="vocabulary"):
        backend.next_scores([])


def test_comet_column_passthrough(live_bridge):
    base, _ = live_bridge
    from toxsteer.bridge_client import comet_scorer
    comet = comet_scorer(base)
    top = comet("a b c", "a b c", "a b c")
    low = comet("a b c", "x y z", "a b c")
    assert top == pytest.approx(1.0)
    assert low < top
