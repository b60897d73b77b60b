import math
from itertools import product

import pytest

from steinerknot.topology import (
    EnumerationCapError,
    ForestConfig,
    SteinerTopology,
    degenerate_closures,
    enumerate_forest_configs,
    enumerate_full_topologies,
    full_topology_count,
)

DOUBLE_FACTORIALS = {3: 1, 4: 3, 5: 15, 6: 105, 7: 945, 8: 10395, 9: 135135}


def _prufer_oracle_count(n):
    """Count full topologies by brute force over Prufer sequences on n + (n-2)
    labeled nodes, filtering degrees and quotienting Steiner relabelings."""
    total_nodes = n + (n - 2)
    count = 0
    for seq in product(range(total_nodes), repeat=total_nodes - 2):
        deg = [1] * total_nodes
        for v in seq:
            deg[v] += 1
        if all(deg[t] == 1 for t in range(n)) and all(
            deg[s] == 3 for s in range(n, total_nodes)
        ):
            count += 1
    return count // math.factorial(n - 2)


@pytest.mark.parametrize("n,expected", [(3, 1), (4, 3), (5, 15)])
def test_counts_match_prufer_oracle(n, expected):
    assert _prufer_oracle_count(n) == expected
    assert len(enumerate_full_topologies(n)) == expected


@pytest.mark.parametrize("n", range(3, 10))
def test_counts_match_double_factorial(n):
    topos = enumerate_full_topologies(n)
    assert len(topos) == DOUBLE_FACTORIALS[n] == full_topology_count(n)


def test_every_topology_valid_and_full():
    for n in range(3, 8):
        for t in enumerate_full_topologies(n):
            assert t.is_valid()
            assert t.is_full()


def test_encodings_unique():
    for n in range(3, 8):
        topos = enumerate_full_topologies(n)
        encs = {t.encode() for t in topos}
        assert len(encs) == len(topos)


def test_cap_enforced():
    with pytest.raises(EnumerationCapError):
        enumerate_full_topologies(10)


def test_triod_encoding_and_closures():
    (triod,) = enumerate_full_topologies(3)
    assert triod.encode() == "(0,(1,2))"
    closures = degenerate_closures(triod)
    # The triod plus the three contractions of its Steiner node onto a
    # terminal: 4 shapes in total.
    assert len(closures) == 4
    assert closures[0] is triod
    path_encodings = {c.encode() for c in closures[1:]}
    assert len(path_encodings) == 3
    for c in closures[1:]:
        assert c.k == 0
        assert c.is_valid()


def test_four_terminal_closures_include_star():
    topos = enumerate_full_topologies(4)
    star_seen = False
    for t in topos:
        for c in degenerate_closures(t):
            if c.k == 1 and c.degree(4) == 4:
                star_seen = True
    assert star_seen


def test_path_topology_closures_is_itself():
    path = SteinerTopology(3, 0, ((0, 1), (1, 2)))
    assert degenerate_closures(path) == [path]


def test_forest_configs_two_points_one_continuum():
    cfgs = enumerate_forest_configs(2, 1, max_blocks=2)
    encs = {c.encode() for c in cfgs}
    assert "{0,1|0}" in encs  # one block, one attachment
    assert "{0,1|0,0}" in encs  # one block, two attachments
    assert "{0|0}{1|0}" in encs  # two singleton blocks, one attachment each


def test_forest_configs_no_points():
    assert enumerate_forest_configs(0, 1) == [ForestConfig((), ())]


def test_forest_configs_contains_two_triod_shape():
    # Two blocks of two points each, one attachment per block: the shape of
    # the split-pair optimum.
    cfgs = enumerate_forest_configs(4, 1, max_blocks=4)
    encs = {c.encode() for c in cfgs}
    assert "{0,1|0}{2,3|0}" in encs
    assert "{0,2|0}{1,3|0}" in encs


def test_forest_configs_connectivity():
    # Two continua: a single block attaching only to continuum 0 leaves
    # continuum 1 disconnected.
    cfgs = enumerate_forest_configs(1, 2, max_blocks=1, max_attachments=2)
    for c in cfgs:
        touched = {x for sl in c.slots for x in sl}
        assert touched == {0, 1}
