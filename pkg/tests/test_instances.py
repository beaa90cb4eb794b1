import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from memhnn.instances import (Graph, InstanceParseError, cut_from_energy, cut_value, energy_offset,
                              format_instance, generate_dense_random, graph_to_weights,
                              hopfield_energy, parse_instance, read_instance, write_instance)

K3 = Graph.from_edges(3, [(0, 1), (1, 2), (0, 2)])


def test_k3_cut_and_energy():
    W = graph_to_weights(K3)
    assert cut_value(K3, [1, -1, 1]) == 2
    assert cut_value(K3, [1, 1, 1]) == 0
    # all-equal state: every pair contributes -1/2 * (-1) = +1/2
    assert hopfield_energy(W, [1, 1, 1]) == pytest.approx(1.5)
    assert energy_offset(W) == pytest.approx(1.5)
    assert cut_from_energy(W, hopfield_energy(W, [1, -1, 1])) == pytest.approx(2)


def test_threshold_term_enters_energy():
    W = graph_to_weights(K3)
    x = np.array([1.0, -1.0, 1.0])
    assert hopfield_energy(W, x, theta=0.5) == pytest.approx(hopfield_energy(W, x) + 0.5)


def test_state_validation():
    with pytest.raises(ValueError):
        cut_value(K3, [1, 0, 1])
    with pytest.raises(ValueError):
        hopfield_energy(graph_to_weights(K3), [1, 1])


@settings(max_examples=60, deadline=None)
@given(n=st.integers(1, 14), density=st.floats(0.05, 1.0), weighted=st.booleans(),
       seed=st.integers(0, 2**31), sseed=st.integers(0, 2**31))
def test_cut_energy_identity(n, density, weighted, seed, sseed):
    g = generate_dense_random(n, density, weighted, seed)
    x = np.where(np.random.default_rng(sseed).random(n) < 0.5, 1.0, -1.0)
    W = graph_to_weights(g)
    assert abs(cut_from_energy(W, hopfield_energy(W, x)) - cut_value(g, x)) <= 1e-9


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 10), seed=st.integers(0, 2**31))
def test_cut_symmetric_under_global_flip(n, seed):
    g = generate_dense_random(n, 0.6, True, seed)
    x = np.where(np.random.default_rng(seed).random(n) < 0.5, 1.0, -1.0)
    assert cut_value(g, x) == cut_value(g, -x)


def test_generator_is_deterministic_and_valid():
    a = generate_dense_random(40, 0.5, seed=3)
    b = generate_dense_random(40, 0.5, seed=3)
    assert a == b and a.name == b.name == "rand-n40-d0.5-s3"
    assert a != generate_dense_random(40, 0.5, seed=4)
    A = a.adjacency
    assert np.array_equal(A, A.T) and not np.any(np.diag(A))
    assert set(np.unique(A)) <= {0.0, 1.0}
    assert abs(a.m / (40 * 39 / 2) - 0.5) < 0.1


def test_generator_weighted_range_and_density_one():
    g = generate_dense_random(20, 1.0, weighted=True, seed=1)
    assert g.m == 190
    w = g.edge_array[:, 2]
    assert w.min() >= 1 and w.max() <= 10


@pytest.mark.parametrize("n, density", [(0, 0.5), (5, 0.0), (5, 1.5)])
def test_generator_rejects(n, density):
    with pytest.raises(ValueError):
        generate_dense_random(n, density)


def test_graph_validation():
    with pytest.raises(ValueError):
        Graph(3, ((1, 0, 1),))
    with pytest.raises(ValueError):
        Graph(3, ((0, 1, 1), (0, 1, 2)))
    with pytest.raises(ValueError):
        Graph.from_edges(3, [(1, 1)])
    assert Graph.from_edges(3, [(2, 0, 4)]).edges == ((0, 2, 4),)


def test_relabel_preserves_cut_structure():
    g = generate_dense_random(8, 0.5, True, 5)
    perm = [3, 1, 7, 0, 2, 6, 5, 4]
    h = g.relabel(perm)
    x = np.array([1, -1, 1, 1, -1, -1, 1, -1], dtype=float)
    y = np.empty(8)
    y[perm] = x
    assert cut_value(g, x) == cut_value(h, y)


def test_roundtrip(tmp_path):
    g = generate_dense_random(12, 0.4, True, 9).with_optimum(42, "best-known")
    path = tmp_path / "g.txt"
    write_instance(g, path)
    h = read_instance(path)
    assert h == g and h.name == "g"
    assert format_instance(h) == format_instance(g)


def test_parse_comments_and_optimum():
    g = parse_instance("# a triangle\n# optimum 2 exact\n3 3\n1 2 1\n2 3 1\n# mid\n1 3 1\n")
    assert g == K3.with_optimum(2, "exact")


@pytest.mark.parametrize("text, line", [
    ("3\n", 1),
    ("3 1\n1 2\n", 2),
    ("3 1\n1 x 1\n", 2),
    ("3 1\n1 4 1\n", 2),
    ("3 1\n2 2 1\n", 2),
    ("3 2\n1 2 1\n2 1 1\n", 3),
    ("3 2\n1 2 1\n", 2),
    ("# optimum 2 maybe\n3 0\n", 1),
])
def test_parse_errors_name_the_line(text, line):
    with pytest.raises(InstanceParseError) as exc:
        parse_instance(text)
    assert exc.value.lineno == line
    assert str(exc.value).startswith(f"line {line}:")


def test_parse_missing_header():
    with pytest.raises(InstanceParseError):
        parse_instance("# nothing\n")


def test_energy_identity_exhaustive_small():
    g = generate_dense_random(6, 0.7, True, 2)
    W = graph_to_weights(g)
    for bits in itertools.product((-1.0, 1.0), repeat=6):
        x = np.array(bits)
        assert cut_from_energy(W, hopfield_energy(W, x)) == pytest.approx(cut_value(g, x), abs=1e-12)
