from __future__ import annotations

import random
import threading

import numpy as np
import pytest

from chatedit.errors import DecodeError, NothingToUndo, SessionError, SizeLimit
from chatedit.gateway import scripted_from_pairs
from chatedit.imaging import RasterImage, adjust_brightness
from chatedit.parsing import ParsedResponse, render_canonical
from chatedit.session import RuntimeDeps, SessionStore, run_turn, set_mask, undo, upload

from conftest import random_image


def reply(names, analysis="done."):
    return render_canonical(ParsedResponse(tuple(names), analysis))


def make_deps(registry, catalog, pairs) -> RuntimeDeps:
    return RuntimeDeps(registry=registry, backend=scripted_from_pairs(pairs), catalog=catalog)


@pytest.fixture
def store():
    return SessionStore()


def uploaded_session(store, rng, h=8, w=8):
    session = store.create()
    upload(session, random_image(rng, h, w).to_png_bytes())
    return session


def test_turn_pushes_image_and_returns_reply(registry, catalog, store, rng):
    session = uploaded_session(store, rng)
    deps = make_deps(registry, catalog, [("open my eyes", reply(["Open Eyes"], "opened!"))])
    outcome = run_turn(session, "can u open my eyes", deps)
    assert session.stack_depth() == 2
    assert outcome.reply == "opened!"
    assert session.history[-1].functions == ("Open Eyes",)
    assert session.token_total == outcome.plan.token_usage > 0


def test_failed_invocation_leaves_stack_but_consumes_tokens(registry, catalog, store, rng):
    session = uploaded_session(store, rng)
    deps = make_deps(
        registry, catalog,
        [("gibberish", "no format here"), ("did not follow the required format", "still none")],
    )
    before_stack = session.stack_depth()
    outcome = run_turn(session, "please do gibberish", deps)
    assert session.stack_depth() == before_stack  # image untouched
    assert "could not work out" in outcome.reply
    assert session.token_total > 0  # tokens spent even on failure
    assert session.history[-1].ok is False


def test_two_turns_accumulate_token_totals(registry, catalog, store, rng):
    session = uploaded_session(store, rng)
    deps = make_deps(
        registry, catalog,
        [("brighter", reply(["Whiten Skin"])), ("enhance", reply(["Image Enhancement"]))],
    )
    first = run_turn(session, "brighter please", deps)
    second = run_turn(session, "enhance it", deps)
    assert session.token_total == first.plan.token_usage + second.plan.token_usage


def test_undo_returns_previous_version(registry, catalog, store, rng):
    session = uploaded_session(store, rng)
    original = session.current_image()
    deps = make_deps(registry, catalog, [("brighter", reply(["Whiten Skin"]))])
    run_turn(session, "brighter", deps)
    previous = undo(session)
    assert previous.same_pixels(original)
    assert session.stack_depth() == 1


def test_undo_at_original_raises(store, rng):
    session = uploaded_session(store, rng)
    with pytest.raises(NothingToUndo):
        undo(session)


def test_edit_undo_edit_is_bit_exact(registry, catalog, store, rng):
    session = uploaded_session(store, rng)
    deps = make_deps(registry, catalog, [("brighter", reply(["Whiten Skin"]))])
    first = run_turn(session, "brighter", deps).image
    undo(session)
    second = run_turn(session, "brighter", deps).image
    assert first.same_pixels(second)


def test_turn_without_upload_rejected(registry, catalog, store):
    session = store.create()
    deps = make_deps(registry, catalog, [("x", reply(["Open Eyes"]))])
    with pytest.raises(SessionError):
        run_turn(session, "x", deps)


def test_upload_resets_stack_preserves_history(registry, catalog, store, rng):
    session = uploaded_session(store, rng)
    deps = make_deps(registry, catalog, [("brighter", reply(["Whiten Skin"]))])
    run_turn(session, "brighter", deps)
    assert session.stack_depth() == 2
    upload(session, random_image(rng, 6, 6).to_png_bytes())
    assert session.stack_depth() == 1
    assert len(session.history) == 1


def test_upload_corrupt_bytes(store):
    session = store.create()
    with pytest.raises(DecodeError):
        upload(session, b"definitely not a png")


def test_upload_size_limit(store, rng):
    session = store.create()
    raw = random_image(rng, 64, 64).to_png_bytes()
    with pytest.raises(SizeLimit):
        upload(session, raw, size_limit=10)


def test_mask_feeds_masked_executors(registry, catalog, store, rng):
    session = uploaded_session(store, rng)
    image = session.current_image()
    bits = np.zeros((8, 8), dtype=bool)
    bits[:4] = True
    from chatedit.imaging import BinaryMask

    set_mask(session, BinaryMask(bits))
    deps = make_deps(registry, catalog, [("brighter", reply(["Whiten Skin"]))])
    outcome = run_turn(session, "brighter", deps)
    expected = adjust_brightness(image, BinaryMask(bits), 1)
    assert outcome.image.same_pixels(expected)


def test_stack_length_law_over_random_interleavings(registry, catalog, store, rng):
    # after n successful turns and u undos (u <= n applied when legal),
    # stack length is 1 + n - u
    rnd = random.Random(7)
    session = uploaded_session(store, rng)
    deps = make_deps(registry, catalog, [("brighter", reply(["Whiten Skin"]))])
    n = u = 0
    for _ in range(50):
        if rnd.random() < 0.5:
            run_turn(session, "brighter", deps)
            n += 1
        else:
            try:
                undo(session)
                u += 1
            except NothingToUndo:
                assert session.stack_depth() == 1
        assert session.stack_depth() == 1 + n - u


def test_failure_atomicity_under_injected_parse_failures(registry, catalog, store, rng):
    rnd = random.Random(13)
    session = uploaded_session(store, rng)
    good = make_deps(registry, catalog, [("brighter", reply(["Whiten Skin"]))])
    bad = make_deps(
        registry, catalog,
        [("brighter", "nope"), ("did not follow the required format", "still nope")],
    )
    expected_depth = 1
    for _ in range(30):
        if rnd.random() < 0.5:
            run_turn(session, "brighter", good)
            expected_depth += 1
        else:
            tokens_before = session.token_total
            run_turn(session, "brighter", bad)
            bad.backend.reset()  # replay the same two-entry script next time
            assert session.token_total > tokens_before
        assert session.stack_depth() == expected_depth


def test_sessions_are_isolated_under_concurrent_turns(registry, catalog, store, rng):
    sessions = [uploaded_session(store, rng) for _ in range(4)]
    baselines = [s.current_image() for s in sessions]
    deps = make_deps(registry, catalog, [("brighter", reply(["Whiten Skin"]))])
    turns_each = 5
    errors: list[Exception] = []

    def worker(session):
        try:
            for _ in range(turns_each):
                run_turn(session, "brighter", deps)
        except Exception as exc:  # pragma: no cover
            errors.append(exc)

    threads = [threading.Thread(target=worker, args=(s,)) for s in sessions]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert not errors
    for session, baseline in zip(sessions, baselines):
        assert session.stack_depth() == 1 + turns_each
        assert session.image_stack[0].same_pixels(baseline)
        assert len(session.history) == turns_each


def test_snapshot_save_and_load_round_trip(registry, catalog, rng, tmp_path):
    store = SessionStore(snapshot_dir=tmp_path)
    session = store.create()
    upload(session, random_image(rng, 8, 8).to_png_bytes())
    deps = make_deps(registry, catalog, [("brighter", reply(["Whiten Skin"]))])
    run_turn(session, "brighter", deps)
    store.save_snapshot(session)

    fresh_store = SessionStore(snapshot_dir=tmp_path)
    restored = fresh_store.load_snapshot(session.id)
    assert restored.stack_depth() == 2
    assert restored.token_total == session.token_total
    assert restored.history[0].instruction == "brighter"
    for a, b in zip(restored.image_stack, session.image_stack):
        assert a.same_pixels(b)


def test_store_eviction_by_idle_ttl(store, rng):
    session = uploaded_session(store, rng)
    assert store.evict_idle(ttl_seconds=3600) == 0
    session.updated -= 7200
    assert store.evict_idle(ttl_seconds=3600) == 1
    with pytest.raises(SessionError):
        store.get(session.id)
