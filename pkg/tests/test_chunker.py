import pytest
from hypothesis import given
from hypothesis import strategies as st

from lamsum.chunker import plan_chunks


def test_625_by_100():
    plan = plan_chunks(625, 100)
    assert plan.n_chunks == 7
    assert plan.widths() == [100] * 6 + [25]


def test_exact_fit():
    assert plan_chunks(100, 100).widths() == [100]


def test_remainder_of_one():
    assert plan_chunks(101, 100).widths() == [100, 1]


def test_level_and_index_recorded():
    plan = plan_chunks(250, 100, level=3)
    assert [(c.level, c.index, c.start, c.end) for c in plan.chunks] == [
        (3, 0, 0, 100),
        (3, 1, 100, 200),
        (3, 2, 200, 250),
    ]


@pytest.mark.parametrize("n,s", [(0, 10), (5, 0), (-1, 3)])
def test_bad_arguments(n, s):
    with pytest.raises(ValueError):
        plan_chunks(n, s)


@given(st.integers(1, 5000), st.integers(1, 300))
def test_partition_property(n, s):
    plan = plan_chunks(n, s)
    covered = [i for c in plan.chunks for i in range(c.start, c.end)]
    assert covered == list(range(n))
    widths = plan.widths()
    assert sum(widths) == n
    assert all(w == s for w in widths[:-1])
    assert 1 <= widths[-1] <= s
    assert plan.n_chunks == -(-n // s)
