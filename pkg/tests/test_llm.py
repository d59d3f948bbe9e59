from __future__ import annotations

import json
import os

import httpx
import pytest
from langchain_core.messages import AIMessage, HumanMessage, SystemMessage

from retrocollab.llm import (
    BackendConfig,
    BackendError,
    BackendScope,
    LocalCriticModel,
    MalformedResponseError,
    PromptTooLongError,
    ReplayChatModel,
    ReplayMismatchError,
    ScriptedChatModel,
    ScriptEntry,
    ScriptExhaustedError,
    ScriptFile,
    build_chat_model,
    complete,
    completion_digest,
    request_fingerprint,
)
from retrocollab.memory import LongTermMemory, RoundRecord, TranscriptTurn, construct_prompt
from retrocollab.validation.findings import Finding, ValidationReport


def _messages(text: str = "Who moves first?") -> list:
    return [SystemMessage(content="You are Alice."), HumanMessage(content=text)]


def _chat_completion(content: str) -> dict:
    return {
        "id": "chatcmpl-1",
        "object": "chat.completion",
        "created": 0,
        "model": "planner",
        "choices": [
            {
                "index": 0,
                "message": {"role": "assistant", "content": content},
                "finish_reason": "stop",
            }
        ],
        "usage": {"prompt_tokens": 3, "completion_tokens": 2, "total_tokens": 5},
    }


def _http_config(**overrides) -> BackendConfig:
    fields = {
        "kind": "http",
        "base_url": "http://testserver/v1",
        "model_name": "planner",
        "max_tokens": 64,
        "max_retries": 0,
    }
    return BackendConfig(**{**fields, **overrides})


def test_scripted_model_serves_entries_in_order():
    model = ScriptedChatModel.from_responses(["first", "second"])
    assert complete(model, _messages()) == "first"
    assert complete(model, _messages()) == "second"
    assert model.remaining == 0
    with pytest.raises(ScriptExhaustedError):
        complete(model, _messages())


def test_scripted_match_waits_for_its_prompt():
    model = ScriptedChatModel(
        entries=[
            ScriptEntry(response="fixed plan", match="collides with"),
            ScriptEntry(response="opening move"),
        ]
    )
    assert complete(model, _messages()) == "opening move"
    assert complete(model, _messages("Alice collides with Bob")) == "fixed plan"


def test_scripted_model_loads_from_file(tmp_path):
    path = tmp_path / "script.json"
    path.write_text(ScriptFile(entries=[ScriptEntry(response="hi")]).model_dump_json())
    model = build_chat_model(BackendConfig(kind="scripted", script_path=path))
    assert complete(model, _messages()) == "hi"


def test_complete_rejects_bad_requests():
    model = ScriptedChatModel.from_responses(["unused"])
    with pytest.raises(ValueError):
        complete(model, [SystemMessage(content="only a system turn")])
    with pytest.raises(PromptTooLongError):
        complete(model, _messages(), max_prompt_chars=5)
    assert model.remaining == 1


def test_blank_completion_is_malformed():
    with pytest.raises(MalformedResponseError):
        complete(ScriptedChatModel.from_responses(["   "]), _messages())


def test_http_backend_speaks_chat_completions():
    requests: list[httpx.Request] = []

    def handler(request: httpx.Request) -> httpx.Response:
        requests.append(request)
        return httpx.Response(200, json=_chat_completion("Alice: I take cube_red."))

    with httpx.Client(transport=httpx.MockTransport(handler)) as client:
        model = build_chat_model(_http_config(), http_client=client)
        answer = complete(model, _messages())

    assert answer == "Alice: I take cube_red."
    assert len(requests) == 1
    assert requests[0].url.path == "/v1/chat/completions"
    body = json.loads(requests[0].content)
    assert body["model"] == "planner"
    assert body["temperature"] == 0.0
    assert [m["role"] for m in body["messages"]] == ["system", "user"]
    assert body["messages"][1]["content"] == "Who moves first?"
    assert body.get("max_tokens", body.get("max_completion_tokens")) == 64


def test_http_errors_become_backend_errors():
    def handler(request: httpx.Request) -> httpx.Response:
        return httpx.Response(500, json={"error": {"message": "model overloaded"}})

    with httpx.Client(transport=httpx.MockTransport(handler)) as client:
        model = build_chat_model(_http_config(), http_client=client)
        with pytest.raises(BackendError):
            complete(model, _messages())


def test_connection_failures_become_backend_errors():
    def handler(request: httpx.Request) -> httpx.Response:
        raise httpx.ConnectError("connection refused", request=request)

    with httpx.Client(transport=httpx.MockTransport(handler)) as client:
        model = build_chat_model(_http_config(), http_client=client)
        with pytest.raises(BackendError):
            complete(model, _messages())


def test_transient_server_errors_are_retried():
    requests: list[httpx.Request] = []

    def handler(request: httpx.Request) -> httpx.Response:
        requests.append(request)
        if len(requests) == 1:
            return httpx.Response(
                503, headers={"retry-after-ms": "1"}, json={"error": {"message": "warming up"}}
            )
        return httpx.Response(200, json=_chat_completion("Bob: I wait."))

    with httpx.Client(transport=httpx.MockTransport(handler)) as client:
        model = build_chat_model(_http_config(max_retries=2), http_client=client)
        answer = complete(model, _messages())

    assert answer == "Bob: I wait."
    assert len(requests) == 2


def test_body_without_choices_is_a_backend_error():
    body = {**_chat_completion("unused"), "choices": None}

    def handler(request: httpx.Request) -> httpx.Response:
        return httpx.Response(200, json=body)

    with httpx.Client(transport=httpx.MockTransport(handler)) as client:
        model = build_chat_model(_http_config(), http_client=client)
        with pytest.raises(BackendError):
            complete(model, _messages())


def test_http_backends_need_an_endpoint():
    with pytest.raises(ValueError):
        BackendConfig(kind="http", model_name="planner")


def test_oracle_backend_scripts_the_planner():
    scope = BackendScope(channel="llm1", task_id="move_rope", seed=0)
    model = build_chat_model(BackendConfig(kind="oracle"), episode=scope)
    assert isinstance(model, ScriptedChatModel)
    assert model.remaining == 2
    first = complete(model, _messages())
    assert first.startswith("Alice: I propose")
    assert "\nEXECUTE\nNAME Alice ACTION PICK rope_l" in first

    critic = build_chat_model(BackendConfig(kind="oracle"), episode=BackendScope(channel="llm2"))
    assert isinstance(critic, LocalCriticModel)
    with pytest.raises(ValueError):
        build_chat_model(BackendConfig(kind="oracle"), episode=BackendScope(channel="llm1"))


def _write_transcript(path, events):
    path.write_text("".join(json.dumps(event) + "\n" for event in events), encoding="utf-8")


def _completion_event(messages, text, *, channel="llm1", digest=None):
    fingerprint = request_fingerprint(messages)
    return {
        "episode": "e",
        "t": 0,
        "k": 0,
        "event": "completion",
        "backend": channel,
        "fingerprint": fingerprint,
        "digest": digest or completion_digest(fingerprint, text),
        "text": text,
    }


def test_replay_serves_recorded_completions(tmp_path):
    path = tmp_path / "episode.jsonl"
    messages = _messages()
    _write_transcript(
        path,
        [
            {"episode": "e", "t": 0, "k": None, "event": "episode_start"},
            _completion_event(messages, "recorded answer"),
            _completion_event(messages, "critic answer", channel="llm2"),
        ],
    )
    model = ReplayChatModel(transcript_path=path, channel="llm1")
    assert complete(model, messages) == "recorded answer"
    with pytest.raises(ReplayMismatchError):
        complete(model, messages)


def test_replay_detects_a_different_request(tmp_path):
    path = tmp_path / "episode.jsonl"
    _write_transcript(path, [_completion_event(_messages(), "recorded answer")])
    model = ReplayChatModel(transcript_path=path, channel="llm1")
    with pytest.raises(ReplayMismatchError):
        complete(model, _messages("Something else?"))


def test_replay_detects_an_edited_completion(tmp_path):
    path = tmp_path / "episode.jsonl"
    messages = _messages()
    event = _completion_event(messages, "recorded answer")
    event["text"] = "edited answer"
    _write_transcript(path, [event])
    model = ReplayChatModel(transcript_path=path, channel="llm1")
    with pytest.raises(ReplayMismatchError):
        complete(model, messages)


def test_replay_reraises_a_recorded_backend_failure(tmp_path):
    path = tmp_path / "episode.jsonl"
    _write_transcript(
        path,
        [
            {
                "episode": "e",
                "t": 0,
                "k": None,
                "event": "backend_error",
                "backend": "llm1",
                "detail": "ConnectError: connection refused",
            }
        ],
    )
    model = ReplayChatModel(transcript_path=path, channel="llm1")
    with pytest.raises(BackendError, match="connection refused"):
        complete(model, _messages())


def test_fingerprint_depends_on_roles_and_content():
    base = request_fingerprint(_messages())
    assert base == request_fingerprint(_messages())
    assert base != request_fingerprint(_messages("Who moves second?"))
    swapped = [HumanMessage(content="You are Alice."), HumanMessage(content="Who moves first?")]
    assert base != request_fingerprint(swapped)
    assert base != request_fingerprint([*_messages()[:1], AIMessage(content="Who moves first?")])


def _critic_round() -> RoundRecord:
    finding = Finding(agent="Alice", micro_step=1, kind="collision", other="Bob")
    return RoundRecord(
        round_index=0,
        transcript=[TranscriptTurn(agent="Alice", message="Alice: EXECUTE")],
        validation=ValidationReport.from_findings([finding]),
    )


def test_local_critic_reads_the_validation_feedback(task, templates):
    spec, _ = task("sort_cubes")
    record = _critic_round()
    model = LocalCriticModel()

    critic_prompt = construct_prompt(
        None, spec.goal, LongTermMemory(), "critic", spec, short_term=record, templates=templates
    )
    critique = complete(
        model, [SystemMessage(content=critic_prompt.rendered), HumanMessage(content="Critique.")]
    )
    assert critique.startswith("The plan agreed upon failed validation:")
    assert "Agent Alice collides with Agent Bob" in critique

    proposer_prompt = construct_prompt(
        None,
        spec.goal,
        LongTermMemory(),
        "proposer",
        spec,
        short_term=record,
        critique=critique,
        templates=templates,
    )
    proposal = complete(
        model, [SystemMessage(content=proposer_prompt.rendered), HumanMessage(content="Propose.")]
    )
    assert proposal.startswith("Agent Alice should revise its action and path")
    assert "Agent Bob should revise" in proposal


@pytest.mark.skipif(
    not os.environ.get("RETROCOLLAB_LIVE_BASE_URL"),
    reason="set RETROCOLLAB_LIVE_BASE_URL and RETROCOLLAB_LIVE_MODEL to reach a real server",
)
def test_live_server_answers():
    config = BackendConfig(
        kind="http",
        base_url=os.environ["RETROCOLLAB_LIVE_BASE_URL"],
        model_name=os.environ.get("RETROCOLLAB_LIVE_MODEL", "llama-3.1-8b-instruct"),
        max_tokens=16,
    )
    assert complete(build_chat_model(config), _messages("Reply with one word."))
