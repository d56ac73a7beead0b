"""Session editing: conservation, precedence, undo, replay, persistence."""

from __future__ import annotations

import json
import random

import pytest

from writelens.errors import (
    CorruptFile,
    KOutOfRange,
    SchemaVersionMismatch,
    UnknownAuthor,
    UnknownCluster,
)
from writelens.ingest import AuthorId, Role
from writelens.session import (
    SINGLETONS,
    add_cluster,
    apply_summary,
    delete_cluster,
    edit_text,
    init_session,
    load_session,
    move_author,
    replay,
    save_session,
    set_k,
    undo,
)

from .conftest import AS, NT, PS, W, WC, WE, make_collection
from .test_consensus import DISAGREEMENT_FIXTURE


@pytest.fixture
def collection():
    return make_collection(DISAGREEMENT_FIXTURE)


@pytest.fixture
def state(collection):
    return init_session(collection, session_id="s1", dataset_id="d1")


def author(team: int) -> AuthorId:
    return AuthorId(team=team, role=Role.NS)


def placed_authors(state) -> set:
    placed = set(state.singletons)
    for cl in state.clusters:
        placed |= cl.members
    return placed


def test_init_uses_default_k(state, collection):
    assert state.k == 3  # known default for the fixture
    assert state.singletons == frozenset()
    assert all(cl.provenance == "auto" for cl in state.clusters)
    assert all(cl.pattern is not None for cl in state.clusters)
    assert placed_authors(state) == set(collection.authors)


def test_init_full_agreement_no_singletons():
    c = make_collection([[W, AS, W]] * 3 + [[WC, WC, WC, WC]] * 3)
    s = init_session(c, session_id="s2")
    assert s.singletons == frozenset()
    assert len(s.clusters) == 2


def test_init_disagreement_lists_singletons(collection):
    s = init_session(collection, session_id="s3")
    forced = set_k(s, 2)
    assert len(forced.singletons) == 3


def test_set_k_matches_consensus(state, collection):
    from writelens.consensus import consensus_partition

    moved = set_k(state, 2)
    expected = consensus_partition(collection, 2)
    got_members = {cl.members for cl in moved.clusters}
    assert got_members == {cl.members for cl in expected.clusters}
    assert moved.singletons == expected.singletons
    assert moved.k == 2


def test_set_k_preserves_manual_placement(state):
    target = state.clusters[0].id
    victim = next(iter(state.clusters[1].members))
    edited = move_author(state, victim, target)
    assert edited.cluster_by_id(target).provenance == "manual"
    changed = set_k(edited, 2)
    assert victim in changed.cluster_by_id(target).members
    # and no auto cluster contains the manually placed author
    for cl in changed.clusters:
        if cl.id != target:
            assert victim not in cl.members


def test_set_k_out_of_range(state):
    with pytest.raises(KOutOfRange):
        set_k(state, 1)
    with pytest.raises(KOutOfRange):
        set_k(state, state.k_max + 1)


def test_move_to_singletons_is_pinned(state):
    victim = next(iter(state.clusters[0].members))
    moved = move_author(state, victim, SINGLETONS)
    assert victim in moved.singletons
    assert victim in moved.manual_singletons
    rek = set_k(moved, moved.k)
    assert victim in rek.singletons


def test_move_unknown_author(state):
    with pytest.raises(UnknownAuthor):
        move_author(state, author(999), SINGLETONS)


def test_move_unknown_cluster(state):
    someone = next(iter(state.clusters[0].members))
    with pytest.raises(UnknownCluster):
        move_author(state, someone, "nope")


def test_move_last_member_deletes_cluster(state):
    added = add_cluster(state, name="scratch")
    scratch = added.clusters[-1].id
    someone = next(iter(added.clusters[0].members))
    populated = move_author(added, someone, scratch)
    assert populated.cluster_by_id(scratch).members == frozenset([someone])
    emptied = move_author(populated, someone, SINGLETONS)
    with pytest.raises(UnknownCluster):
        emptied.cluster_by_id(scratch)


def test_move_noop_recorded(state):
    someone = next(iter(state.clusters[0].members))
    location = state.location_of(someone)
    same = move_author(state, someone, location)
    assert len(same.edit_log) == len(state.edit_log) + 1
    assert same.clusters == state.clusters


def test_add_cluster(state):
    added = add_cluster(state, name="my group")
    new = added.clusters[-1]
    assert new.members == frozenset()
    assert new.provenance == "manual"
    assert new.name == "my group"
    assert new.id not in {cl.id for cl in state.clusters}


def test_delete_cluster_moves_members_to_singletons(state):
    target = state.clusters[0]
    removed = delete_cluster(state, target.id)
    assert target.members <= removed.singletons
    assert target.id not in {cl.id for cl in removed.clusters}
    assert placed_authors(removed) == placed_authors(state)


def test_edit_text_marks_manual(state):
    target = state.clusters[0].id
    edited = edit_text(state, target, name="Researchers", description="search-heavy")
    cluster = edited.cluster_by_id(target)
    assert cluster.name == "Researchers"
    assert cluster.description == "search-heavy"
    assert cluster.summary_source == "manual"


def test_apply_summary(state):
    target = state.clusters[0].id
    summarized = apply_summary(
        state, target, name="Versatile writers", description="...", source="llm",
        model_id="stub-1",
    )
    cluster = summarized.cluster_by_id(target)
    assert cluster.name == "Versatile writers"
    assert cluster.summary_source == "llm"
    assert cluster.summary_model == "stub-1"


def test_undo_every_kind(state):
    target = state.clusters[0].id
    someone = next(iter(state.clusters[0].members))
    steps = [
        lambda s: set_k(s, 2),
        lambda s: move_author(s, someone, SINGLETONS),
        lambda s: add_cluster(s, name="x"),
        lambda s: delete_cluster(s, s.clusters[0].id),
        lambda s: edit_text(s, s.clusters[0].id, name="n"),
        lambda s: apply_summary(s, s.clusters[0].id, "a", "b", "fallback"),
    ]
    current = state
    for step in steps:
        edited = step(current)
        assert undo(edited) == current
        current = edited


def test_save_load_round_trip(state, collection):
    data = save_session(state)
    loaded = load_session(data, collection)
    assert loaded == state
    assert save_session(loaded) == data


def test_round_trip_after_edits(state, collection):
    someone = next(iter(state.clusters[0].members))
    edited = set_k(state, 2)
    edited = move_author(edited, someone, SINGLETONS)
    edited = edit_text(edited, edited.clusters[0].id, name="renamed")
    edited = apply_summary(edited, edited.clusters[0].id, "name", "desc", "fallback")
    data = save_session(edited)
    assert load_session(data, collection) == edited
    assert save_session(load_session(data, collection)) == data


def test_replay_reproduces_state(state, collection):
    someone = next(iter(state.clusters[0].members))
    edited = move_author(set_k(state, 2), someone, SINGLETONS)
    edited = add_cluster(edited, name="x")
    replayed = replay(collection, state.id, state.dataset_id, edited.edit_log)
    assert save_session(replayed) == save_session(edited)


def test_schema_version_mismatch(state, collection):
    doc = json.loads(save_session(state))
    doc["schema_version"] = 999
    with pytest.raises(SchemaVersionMismatch):
        load_session(json.dumps(doc).encode(), collection)


def test_truncated_file(state, collection):
    data = save_session(state)[:40]
    with pytest.raises(CorruptFile):
        load_session(data, collection)


def test_wrong_collection_rejected(state):
    other = make_collection([[W, AS]], role=Role.NNS)
    with pytest.raises(CorruptFile):
        load_session(save_session(state), other)


def test_random_edit_fuzz(collection):
    rng = random.Random(99)
    state = init_session(collection, session_id="fuzz")
    all_authors = list(collection.authors)
    for _ in range(120):
        kind = rng.randrange(6)
        try:
            if kind == 0:
                state = set_k(state, rng.randint(2, state.k_max))
            elif kind == 1:
                targets = [cl.id for cl in state.clusters] + [SINGLETONS]
                state = move_author(
                    state, rng.choice(all_authors), rng.choice(targets)
                )
            elif kind == 2:
                state = add_cluster(state, name=f"g{rng.randrange(10)}")
            elif kind == 3 and state.clusters:
                state = delete_cluster(state, rng.choice(state.clusters).id)
            elif kind == 4 and state.clusters:
                state = edit_text(
                    state, rng.choice(state.clusters).id, name=f"n{rng.randrange(5)}"
                )
            else:
                state = undo(state)
        except KOutOfRange:
            continue
        assert placed_authors(state) == set(collection.authors)
        total = len(state.singletons) + sum(len(cl.members) for cl in state.clusters)
        assert total == len(all_authors)
    data = save_session(state)
    assert save_session(load_session(data, collection)) == data
    replayed = replay(collection, state.id, state.dataset_id, state.edit_log)
    assert save_session(replayed) == data
