import json
import random
from fractions import Fraction as F

import numpy as np
import pytest
from scipy.sparse.csgraph import floyd_warshall

from arakelov.curve_catalog import x0n_fiber
from arakelov.errors import AdjunctionMismatch, InvalidFiber, SingleComponent
from arakelov.fiber_model import (
    ComponentRecord,
    FiberFormatError,
    SectionHit,
    SpecialFiber,
    adjunction_sum,
    dual_graph_stats,
    dumps_fiber,
    intersection_matrix,
    loads_fiber,
    omega_restrictions,
    validate_fiber,
)

from helpers import random_fiber


def two_lines(k=1, mult=(1, 1)):
    comps = [ComponentRecord("A", mult[0]), ComponentRecord("B", mult[1])]
    return SpecialFiber.build(5, 5, comps, {(0, 1): k})


def test_two_lines_meeting_once():
    M = intersection_matrix(two_lines())
    assert M == [[-1, 1], [1, -1]]
    st = dual_graph_stats(two_lines())
    assert (st.r, st.u, st.l, st.c) == (2, 1, 1, 1)


def test_single_component_matrix():
    f = SpecialFiber.build(5, 5, [ComponentRecord("X", 1, 2)], {})
    assert intersection_matrix(f) == [[0]]


def test_x0n_35_p5_matrix_and_stats():
    f = x0n_fiber(35, 5)
    assert [c.name for c in f.components] == ["C0", "Cinf", "G1", "H1", "G2", "H2"]
    M = intersection_matrix(f)
    expected = [
        [-4, 2, 1, 0, 1, 0],
        [2, -4, 0, 1, 0, 1],
        [1, 0, -2, 1, 0, 0],
        [0, 1, 1, -2, 0, 0],
        [1, 0, 0, 0, -2, 1],
        [0, 1, 0, 0, 1, -2],
    ]
    assert M == expected
    st = dual_graph_stats(f)
    assert (st.r, st.u, st.l, st.c) == (6, 2, 1, 3)
    assert omega_restrictions(f, 3) == [2, 2, 0, 0, 0, 0]
    assert adjunction_sum(f) == 4


def test_rows_annihilate_the_fiber_cycle():
    rng = random.Random(3)
    for _ in range(50):
        f, _, _ = random_fiber(rng)
        M = intersection_matrix(f)
        m = f.multiplicities
        assert all(sum(M[i][j] * m[j] for j in range(f.size)) == 0 for i in range(f.size))


def test_matrix_is_negative_semidefinite_with_one_dim_kernel():
    rng = random.Random(4)
    for _ in range(30):
        f, _, _ = random_fiber(rng)
        eig = np.linalg.eigvalsh(np.array(intersection_matrix(f), dtype=float))
        assert eig.max() < 1e-9
        assert np.sum(np.abs(eig) < 1e-9) == 1


def test_non_reduced_fiber():
    # E-shaped: central component of multiplicity 2 with two reduced tails
    comps = [ComponentRecord("E", 2, 0), ComponentRecord("A", 1, 0), ComponentRecord("B", 1, 0)]
    f = SpecialFiber.build(3, 3, comps, {(0, 1): 1, (0, 2): 1})
    M = intersection_matrix(f)
    assert M[0][0] == -1 and M[1][1] == -2 and M[2][2] == -2


def test_diameter_matches_floyd_warshall():
    rng = random.Random(5)
    for _ in range(60):
        f, _, _ = random_fiber(rng, max_size=9)
        adj = np.zeros((f.size, f.size))
        for (i, j), k in f.crossings.items():
            if k:
                adj[i, j] = adj[j, i] = 1
        dist = floyd_warshall(adj, directed=False, unweighted=True)
        st = dual_graph_stats(f)
        assert st.c == int(dist.max())
        nonzero = [k for k in f.crossings.values() if k]
        assert (st.u, st.l) == (max(nonzero), min(nonzero))


def test_single_component_has_no_stats():
    f = SpecialFiber.build(7, 7, [ComponentRecord("X", 1, 3)], {})
    with pytest.raises(SingleComponent) as info:
        dual_graph_stats(f)
    assert info.value.r == 1


def test_disconnected_fiber_reported():
    comps = [ComponentRecord(n) for n in "ABCD"]
    f = SpecialFiber.build(5, 5, comps, {(0, 1): 1, (2, 3): 1})
    assert "Disconnected: fiber graph not connected" in validate_fiber(f)
    with pytest.raises(InvalidFiber):
        intersection_matrix(f)


def test_validation_catches_bad_data():
    bad = SpecialFiber.build(6, 2, [ComponentRecord("A", 0), ComponentRecord("A")], {(0, 1): 1})
    problems = validate_fiber(bad)
    assert any("power" in p for p in problems)
    assert any("unique" in p for p in problems)
    assert any("multiplicity" in p for p in problems)


def test_section_must_meet_a_reduced_component():
    comps = [ComponentRecord("E", 2), ComponentRecord("A"), ComponentRecord("B")]
    f = SpecialFiber.build(3, 3, comps, {(0, 1): 1, (0, 2): 1}, [SectionHit("s", 1, {0: 1})])
    assert any("multiplicity 2" in p for p in validate_fiber(f))


def test_adjunction_mismatch():
    with pytest.raises(AdjunctionMismatch):
        omega_restrictions(x0n_fiber(35, 5), 4)


def test_json_round_trip():
    f = x0n_fiber(35, 5)
    again = loads_fiber(dumps_fiber(f))
    assert again == f
    assert dumps_fiber(again) == dumps_fiber(f)


def test_json_unknown_key_and_line_numbers():
    doc = json.loads(dumps_fiber(x0n_fiber(35, 7)))
    doc["colour"] = "red"
    with pytest.raises(FiberFormatError, match="colour"):
        loads_fiber(json.dumps(doc))
    with pytest.raises(FiberFormatError) as info:
        loads_fiber('{\n  "prime_norm": 5,\n  oops\n}')
    assert info.value.line == 3


def test_json_rejects_non_integral_crossing():
    doc = json.loads(dumps_fiber(x0n_fiber(35, 7)))
    doc["crossings"][0][2] = 1.5
    with pytest.raises(FiberFormatError):
        loads_fiber(json.dumps(doc))


def test_json_local_degree_is_rational_string():
    doc = json.loads(dumps_fiber(x0n_fiber(35, 5)))
    degrees = [F(c["local_degree"]) for c in doc["components"]]
    assert degrees[:2] == [40, 8] and sum(degrees) == 48
