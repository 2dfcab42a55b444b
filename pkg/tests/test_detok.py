from __future__ import annotations

import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

import fixtures
from geckit.corpus import Corpus, SentencePair
from geckit.detok import (
    DETOK_PROMPT,
    DetokError,
    DetokOutcome,
    HttpChatClient,
    LlmConfig,
    LlmTransportError,
    build_report,
    detokenize_corpus,
    llm_detokenize,
    load_outcomes,
    rule_detokenize,
    save_outcomes,
    spaces_only_diff,
)


@pytest.mark.parametrize(
    "tokens, expected",
    [
        (["Hello", ",", "world", "!"], "Hello, world!"),
        (["He", "is", "n't", "here", "."], "He isn't here."),
        (["I", "'ll", "go", ";", "you", "'re", "not", "."], "I'll go; you're not."),
        (['"', 'really', '"', "?"], '"really"?'),
        (["(", "yes", ")", "[", "no", "]"], "(yes) [no]"),
        (["50", "%", "and", "$", "5"], "50% and $5"),
        (["one", ":", "two"], "one: two"),
        (["€", "10", ",", "please"], "€10, please"),
        ([], ""),
        (["single"], "single"),
    ],
)
def test_rule_detokenize_cases(tokens, expected):
    assert rule_detokenize(tokens) == expected


def test_rule_detokenize_quote_parity():
    tokens = ['"', 'a', '"', 'b', '"', 'c', '"']
    assert rule_detokenize(tokens) == '"a" b "c"'


def test_rule_detokenize_full_sentence():
    tokens = 'He is n\'t here , " really " ( yes ) 50 % $ 5 .'.split()
    assert rule_detokenize(tokens) == 'He isn\'t here, "really" (yes) 50% $5.'


@given(st.lists(st.text(
    alphabet=st.characters(blacklist_categories=("Zs", "Cc", "Cs")),
    min_size=1, max_size=6,
), max_size=12))
def test_rule_detokenize_only_moves_whitespace(tokens):
    out = rule_detokenize(tokens)
    assert "".join(out.split()) == "".join("".join(tokens).split())


def test_spaces_only_diff():
    assert spaces_only_diff("a b c", "ab c")
    assert spaces_only_diff("a b", "a\tb")
    assert not spaces_only_diff("a b", "a c")
    assert not spaces_only_diff("a b", "a b.")


def test_prompt_wording_is_fixed():
    assert DETOK_PROMPT.startswith(
        "You will receive two texts: source text and corrected text."
    )
    assert "Your task is to remove/add proper spaces to the corrected text." in DETOK_PROMPT
    assert DETOK_PROMPT.endswith("Only change spaces, you must not change punctuation.")
    filled = DETOK_PROMPT.format(source="SRC", target="TRG")
    assert "Source text: SRC\n" in filled
    assert "Corrected text: TRG\n" in filled


class FakeResponse:
    def __init__(self, status_code=200, body=None):
        self.status_code = status_code
        self._body = body if body is not None else {}

    def json(self):
        return self._body

    def raise_for_status(self):
        import requests

        if self.status_code >= 400:
            raise requests.HTTPError(f"{self.status_code}")


class FakeSession:
    def __init__(self, responses):
        self.responses = list(responses)
        self.calls = []

    def post(self, url, json=None, headers=None, timeout=None):
        self.calls.append({"url": url, "json": json, "headers": headers})
        item = self.responses.pop(0)
        if isinstance(item, Exception):
            raise item
        return item


def _completion_body(text):
    return {"choices": [{"message": {"content": text}}]}


def _config(**kwargs):
    defaults = dict(endpoint="http://llm.test/v1", model="fixer", retries=2, backoff=0.0)
    defaults.update(kwargs)
    return LlmConfig(**defaults)


def test_http_client_sends_chat_payload_and_auth():
    session = FakeSession([FakeResponse(body=_completion_body("ok"))])
    client = HttpChatClient(_config(token="sekrit"), session=session)
    assert client.complete("fix this") == "ok"
    call = session.calls[0]
    assert call["url"] == "http://llm.test/v1"
    assert call["json"]["model"] == "fixer"
    assert call["json"]["temperature"] == 0.0
    assert call["json"]["messages"] == [{"role": "user", "content": "fix this"}]
    assert call["headers"]["Authorization"] == "Bearer sekrit"


def test_http_client_omits_auth_without_token():
    session = FakeSession([FakeResponse(body=_completion_body("ok"))])
    HttpChatClient(_config(), session=session).complete("x")
    assert "Authorization" not in session.calls[0]["headers"]


def test_http_client_retries_server_errors():
    import requests

    session = FakeSession([
        FakeResponse(status_code=503),
        requests.ConnectionError("down"),
        FakeResponse(body=_completion_body("recovered")),
    ])
    client = HttpChatClient(_config(), session=session)
    assert client.complete("x") == "recovered"
    assert len(session.calls) == 3


def test_http_client_gives_up_after_retries():
    session = FakeSession([FakeResponse(status_code=500)] * 3)
    client = HttpChatClient(_config(), session=session)
    with pytest.raises(LlmTransportError, match="3 attempts"):
        client.complete("x")


def test_http_client_rejects_malformed_body():
    session = FakeSession([FakeResponse(body={"choices": []})])
    client = HttpChatClient(_config(), session=session)
    with pytest.raises(DetokError, match="malformed"):
        client.complete("x")


class EchoClient:
    def __init__(self, reply):
        self.reply = reply
        self.prompts = []

    def complete(self, prompt):
        self.prompts.append(prompt)
        return self.reply


def test_llm_detokenize_rejects_empty_completion():
    with pytest.raises(DetokError, match="empty"):
        llm_detokenize(EchoClient("   "), "src", "t r g")


def _tok_corpus(targets, sources=None):
    sources = sources or targets
    return Corpus("tok", [
        SentencePair(id=f"tok:{i}", source=s, target=t, tokenized=True)
        for i, (s, t) in enumerate(zip(sources, targets))
    ])


def test_detokenize_corpus_rules_only():
    corpus = _tok_corpus(["Hello , world !", "He is n't here ."])
    out, outcomes = detokenize_corpus(corpus)
    assert [p.target for p in out.pairs] == ["Hello, world!", "He isn't here."]
    assert all(not p.tokenized for p in out.pairs)
    assert all(not p.modified_by_detok for p in out.pairs)
    assert all(o.llm_text is None and not o.modified for o in outcomes)
    assert [o.final_text for o in outcomes] == [p.target for p in out.pairs]


def test_detokenize_corpus_requires_tokenized_pairs():
    corpus = Corpus("raw", [SentencePair(id="r:0", source="a", target="a")])
    with pytest.raises(DetokError, match="not tokenized"):
        detokenize_corpus(corpus)


def test_detokenize_corpus_flags_llm_rewrites():
    client = fixtures.StubDetokClient(garble={"w1"})
    corpus = _tok_corpus(["a w1 b .", "a w2 b ."])
    out, outcomes = detokenize_corpus(corpus, client=client)
    assert outcomes[0].modified and not outcomes[1].modified
    assert out.pairs[0].modified_by_detok and not out.pairs[1].modified_by_detok
    assert out.pairs[0].target.endswith("garbled")
    assert out.pairs[1].target == "a w2 b."


def test_detokenize_corpus_parallel_keeps_order():
    client = fixtures.StubDetokClient()
    targets = [f"t{i} x ." for i in range(40)]
    corpus = _tok_corpus(targets)
    serial, _ = detokenize_corpus(corpus, client=client, jobs=1)
    parallel, outcomes = detokenize_corpus(corpus, client=client, jobs=3)
    assert [p.id for p in parallel.pairs] == [p.id for p in corpus.pairs]
    assert [p.target for p in parallel.pairs] == [p.target for p in serial.pairs]
    assert [o.pair_id for o in outcomes] == [p.id for p in corpus.pairs]


class FailingClient:
    def complete(self, prompt):
        raise DetokError("boom")


def test_detokenize_corpus_errors_name_the_pair():
    corpus = _tok_corpus(["a b ."])
    with pytest.raises(DetokError, match="pair tok:0"):
        detokenize_corpus(corpus, client=FailingClient())


def test_outcomes_round_trip(tmp_path):
    outcomes = [
        DetokOutcome("a:0", "rule text", None, False),
        DetokOutcome("a:1", "rule", "llm text", True),
    ]
    path = tmp_path / "out.jsonl"
    save_outcomes(outcomes, path)
    assert load_outcomes(path) == outcomes
    lines = path.read_text().splitlines()
    assert json.loads(lines[0])["llm_text"] is None


def test_build_report_counts_and_classifies():
    corpus = _tok_corpus(["a w1 b .", "a w2 b .", "a w3 b ."])
    client = fixtures.StubDetokClient(garble={"w1"})
    out, outcomes = detokenize_corpus(corpus, client=client)
    report = build_report(outcomes, corpus.pairs)
    assert report.n_total == 3
    assert report.n_modified == 1
    assert report.modified_ratio == pytest.approx(1 / 3)
    assert report.op_stats is not None
    assert report.op_stats.m > 0  # " garbled" appended, classified as missing


def test_build_report_without_modifications_has_no_op_stats():
    corpus = _tok_corpus(["a b ."])
    _, outcomes = detokenize_corpus(corpus)
    report = build_report(outcomes, corpus.pairs)
    assert report.n_modified == 0
    assert report.op_stats is None
    assert report.to_record()["op_stats"] is None
