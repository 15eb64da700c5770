from __future__ import annotations

import pytest

from chatedit.errors import ScriptExhausted
from chatedit.gateway import (
    ChatMessage,
    ChatRequest,
    RecordingBackend,
    ScriptEntry,
    ScriptFixture,
    ScriptedBackend,
    complete,
    make_request,
    scripted_from_pairs,
)
from chatedit.tokens import count_tokens


def _request(user: str, system: str = "sys") -> ChatRequest:
    return make_request(system, user)


def test_fixture_lookup_returns_scripted_text():
    backend = scripted_from_pairs(
        [("open my eyes", "Functions: [Open Eyes]\nAnalysis: opening them.")]
    )
    result = complete(_request("please open my eyes"), backend)
    assert result.text.startswith("Functions: [Open Eyes]")
    assert result.source == "scripted"


def test_empty_messages_violate_invariant():
    with pytest.raises(ValueError):
        ChatRequest(messages=())


def test_first_message_must_be_system():
    with pytest.raises(ValueError):
        ChatRequest(messages=(ChatMessage("user", "hi"),))


def test_unknown_role_rejected():
    with pytest.raises(ValueError):
        ChatMessage("tool", "x")


def test_determinism_sweep_1000_identical_requests():
    backend = scripted_from_pairs([("hello", "Functions: [A]\nAnalysis: hi")])
    request = _request("hello")
    results = {complete(request, backend) for _ in range(1000)}
    assert len(results) == 1


def test_first_match_in_order_wins():
    backend = scripted_from_pairs([("eyes", "first"), ("open my eyes", "second")])
    assert complete(_request("open my eyes"), backend).text == "first"


def test_no_match_raises_script_exhausted():
    backend = scripted_from_pairs([("alpha", "a")])
    with pytest.raises(ScriptExhausted):
        complete(_request("beta"), backend)


def test_strict_mode_consumes_entries_in_order():
    fixture = ScriptFixture(
        entries=[ScriptEntry("one", "r1"), ScriptEntry("two", "r2")], strict=True
    )
    backend = ScriptedBackend(fixture)
    assert complete(_request("one"), backend).text == "r1"
    assert complete(_request("two"), backend).text == "r2"
    with pytest.raises(ScriptExhausted):
        complete(_request("three"), backend)


def test_strict_mode_rejects_out_of_order_request():
    fixture = ScriptFixture(
        entries=[ScriptEntry("one", "r1"), ScriptEntry("two", "r2")], strict=True
    )
    backend = ScriptedBackend(fixture)
    with pytest.raises(ScriptExhausted):
        complete(_request("two"), backend)


def test_scripted_token_accounting_uses_default_counter():
    backend = scripted_from_pairs([("msg", "reply text")])
    request = _request("msg", system="sys prompt")
    result = complete(request, backend)
    assert result.prompt_tokens == count_tokens("sys prompt") + count_tokens("msg")
    assert result.completion_tokens == count_tokens("reply text")
    assert result.total_tokens == result.prompt_tokens + result.completion_tokens


def test_request_log_records_every_request():
    backend = scripted_from_pairs([("m", "r")])
    complete(_request("m1 m"), backend)
    complete(_request("m2 m"), backend)
    assert [r.last_user_message() for r in backend.request_log] == ["m1 m", "m2 m"]


def test_regex_matcher():
    fixture = ScriptFixture(entries=[ScriptEntry(r"open (my|his) eyes", "ok", "regex")])
    backend = ScriptedBackend(fixture)
    assert complete(_request("please open his eyes"), backend).text == "ok"


def test_fixture_file_round_trip(tmp_path):
    fixture = ScriptFixture(
        entries=[ScriptEntry("q1", "a1"), ScriptEntry("q2", "a2", "regex")], strict=True
    )
    path = tmp_path / "fixture.json"
    fixture.save(path)
    loaded = ScriptFixture.load(path)
    assert loaded == fixture


def test_record_and_replay_byte_identical(tmp_path):
    inner = scripted_from_pairs([("alpha", "res-a"), ("beta", "res-b")])
    recorder = RecordingBackend(inner)
    first = [complete(_request(m), recorder).text for m in ("alpha", "beta", "alpha")]

    path = tmp_path / "transcript.json"
    recorder.write(path)
    replay = ScriptedBackend(ScriptFixture.load(path))
    second = [complete(_request(m), replay).text for m in ("alpha", "beta", "alpha")]
    assert first == second


def test_replayed_transcript_drives_dispatcher_to_identical_plans(tmp_path, registry):
    from chatedit.dispatch import plan_invocation

    instruction = "i want an orange lipstick"
    live_stand_in = ScriptedBackend(
        ScriptFixture(
            entries=[
                ScriptEntry(instruction, "Functions: [Lipstick Coloring]\nAnalysis: a shade fits."),
                ScriptEntry(instruction, "Functions: [Pure Orange]\nAnalysis: orange it is."),
            ],
            strict=True,
        )
    )
    recorder = RecordingBackend(live_stand_in)
    first_plan = plan_invocation(instruction, registry, recorder)

    path = tmp_path / "transcript.json"
    recorder.write(path)
    replay = ScriptedBackend(ScriptFixture.load(path))
    second_plan = plan_invocation(instruction, registry, replay)

    assert second_plan.resolved_names() == first_plan.resolved_names()
    assert second_plan.token_usage == first_plan.token_usage
    assert second_plan.analysis == first_plan.analysis


def test_recording_off_writes_no_file(tmp_path):
    # without a recording wrapper nothing is ever persisted
    backend = scripted_from_pairs([("m", "r")])
    complete(_request("m"), backend)
    assert list(tmp_path.iterdir()) == []


def test_make_request_assembles_history():
    request = make_request("sys", "now", history=["earlier one", "earlier two"])
    roles = [m.role for m in request.messages]
    assert roles == ["system", "user", "user", "user"]
    assert request.last_user_message() == "now"
    assert request.temperature == 0.0
