import pytest

from settleprob.fork import Fork

# The worked example used throughout: w = 010100110, a fork of height 5
# with three leaves (two honest, one adversarial) and a pair of edge-disjoint
# maximum-length tines.
EXAMPLE_W = "010100110"


@pytest.fixture
def example_fork() -> Fork:
    #   id: 0    1    2    3    4    5    6    7    8    9   10   11   12
    # slot: 0    1    2    2    3    4    4    4    5    6    7    8    9
    return Fork(
        labels=[0, 1, 2, 2, 3, 4, 4, 4, 5, 6, 7, 8, 9],
        parents=[-1, 0, 1, 0, 3, 1, 2, 4, 5, 6, 7, 10, 9],
    )
