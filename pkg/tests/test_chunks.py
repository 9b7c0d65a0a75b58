import math

import pytest
from hypothesis import given, strategies as st

from omp2dm.codegen import (
    TAG_KINDS, compute_chunk_size, decode_tag, encode_tag, plan_chunks, static_worker,
)
from omp2dm.errors import DegenerateLoop


def test_chunk_size_examples():
    assert compute_chunk_size(1000, 4) == 25
    assert compute_chunk_size(1, 8) == 1
    with pytest.raises(DegenerateLoop):
        compute_chunk_size(0, 4)


def test_chunk_size_brute_force():
    # smallest c >= 1 with c * P * 10 >= trip
    for trip in range(1, 400):
        for p in range(1, 9):
            c = 1
            while c * p * 10 < trip:
                c += 1
            assert compute_chunk_size(trip, p) == c


def test_static_round_robin_example():
    got = [(c.offset, c.count, c.worker) for c in plan_chunks(40, 2, "static", chunk=10)]
    assert got == [(0, 10, 1), (10, 10, 2), (20, 10, 1), (30, 10, 2)]


def test_single_chunk():
    (c,) = plan_chunks(10, 4, "static", chunk=10)
    assert (c.offset, c.count, c.worker) == (0, 10, 1)


def test_one_worker_takes_everything():
    assert {c.worker for c in plan_chunks(57, 1)} == {1}


def test_dynamic_chunks_unassigned():
    assert all(c.worker is None for c in plan_chunks(30, 3, "dynamic"))


@given(trip=st.integers(1, 10_000), p=st.integers(1, 64))
def test_chunks_cover_iteration_space(trip, p):
    chunks = plan_chunks(trip, p)
    size = max(1, math.ceil(trip / (p * 10)))
    pos = 0
    for c in chunks:
        assert c.offset == pos and 1 <= c.count <= size
        pos += c.count
    assert pos == trip


@given(k=st.integers(0, 10_000), p=st.integers(1, 64))
def test_static_worker_in_range(k, p):
    assert 1 <= static_worker(k, p) <= p


@given(kind=st.sampled_from(sorted(TAG_KINDS)), ident=st.integers(0, 10_000))
def test_tag_round_trip(kind, ident):
    if kind == "TERMINATE_ALL":
        ident = 0
    tag = encode_tag(kind, ident)
    assert tag >= 0
    assert decode_tag(tag) == (kind, ident)


def test_tags_distinct():
    tags = {encode_tag(k, i) for k in TAG_KINDS for i in range(50) if k != "TERMINATE_ALL"}
    assert len(tags) == 5 * 50 and 0 not in tags


def test_bad_tags():
    with pytest.raises(ValueError):
        decode_tag(6)
    with pytest.raises(ValueError):
        encode_tag("TERMINATE_ALL", 3)
    with pytest.raises(ValueError):
        encode_tag("WORK", -1)
