"""Weight combinatorics, dimension counts and the eigenvalue census."""

import numpy as np
import pytest

from projgeo.reps import (NotDominant, WeightVector, curvature_component_weights,
                          decompose_with, fundamental, j0_census,
                          torsion_component_weights, weights_of_V,
                          weights_of_dual, weyl_dim)
from projgeo.tensor import OddDimension


def test_weight_vector_arithmetic_and_rendering():
    w1 = fundamental(1, 4)
    w3 = fundamental(3, 4)
    assert str(w1 + w3) == "w1+w3"
    assert str(w1 + w1) == "2*w1"
    assert str(-w1 + w3) == "-w1+w3"
    assert str(fundamental(0, 4)) == "0"
    assert (w1 + w3).dominant
    assert not (-w1 + w3).dominant


def test_fundamental_bounds():
    with pytest.raises(ValueError):
        fundamental(4, 4)
    with pytest.raises(ValueError):
        fundamental(-1, 4)


def test_standard_weights_and_duals():
    assert [str(w) for w in weights_of_V(3)] == ["w1", "-w1+w2", "-w2"]
    assert [str(w) for w in weights_of_dual(3)] == ["-w1", "w1-w2", "w2"]
    for n in (2, 3, 4, 5):
        total = weights_of_V(n)[0]
        for w in weights_of_V(n)[1:]:
            total = total + w
        assert str(total) == "0"
        duals = weights_of_dual(n)
        assert all(str(-v) == str(d) for v, d in zip(weights_of_V(n), duals))


def test_tensor_decomposition_requires_dominant_weight():
    with pytest.raises(NotDominant):
        decompose_with(-fundamental(1, 4), "V", 4)
    with pytest.raises(ValueError):
        decompose_with(fundamental(1, 4), "W", 4)


def test_decompose_reproduces_known_products():
    # adjoint appears in V tensor V*
    got = decompose_with(fundamental(1, 5), "V*", 5)
    assert sorted(str(w) for w in got) == ["0", "w1+w4"]
    # symmetric plus alternating split of V tensor V
    got = decompose_with(fundamental(1, 5), "V", 5)
    assert sorted(str(w) for w in got) == ["2*w1", "w2"]


def test_weyl_dimension_formula():
    for n in (2, 3, 4, 5, 6):
        assert weyl_dim(fundamental(1, n), n) == n
        assert weyl_dim(fundamental(0, n), n) == 1
        # adjoint representation
        adj = fundamental(1, n) + fundamental(n - 1, n)
        assert weyl_dim(adj, n) == n * n - 1
    assert weyl_dim(WeightVector((1, 1)), 3) == 8
    assert weyl_dim(WeightVector((2, 0)), 3) == 6
    assert weyl_dim(WeightVector((1, 0, 1)), 4) == 15


def test_component_dimensions_fill_their_spaces():
    for n in (3, 4, 5, 6):
        t_dim = sum(weyl_dim(w, n) for w in torsion_component_weights(n))
        assert t_dim == n * n * (n - 1) // 2
        weights = curvature_component_weights(n)
        full = n * n * n * (n - 1) // 2
        alternating = n * n * (n - 1) * (n - 2) // 6
        assert sum(weyl_dim(w, n) for w in weights) == full
        # the last three components always fill the kernel of the cyclic
        # sum; whatever precedes them is the fully alternating branch
        assert sum(weyl_dim(w, n) for w in weights[-3:]) == full - alternating
        assert sum(weyl_dim(w, n) for w in weights[:-3]) == alternating


def test_component_lists_small_dimensions():
    assert [str(w) for w in torsion_component_weights(4)] == ["w1+w2", "w3"]
    assert [str(w) for w in curvature_component_weights(4)] == [
        "2*w1", "w2", "w1+w2+w3", "2*w3", "w2"]
    assert [str(w) for w in curvature_component_weights(6)] == [
        "w1+w3", "w4", "w1+w4+w5", "2*w5", "w4"]


def test_curvature_components_need_three_dimensions():
    with pytest.raises(ValueError):
        curvature_component_weights(2)


def test_census_rejects_odd_or_unsupported_dimensions():
    with pytest.raises(OddDimension):
        j0_census("torsion", 5)
    with pytest.raises(ValueError):
        j0_census("torsion", 2)
    with pytest.raises(ValueError):
        j0_census("weyl", 4)


def _spectrum_table(space, n):
    return {(str(c.highest), c.dim): dict(sorted(c.spectrum.items()))
            for c in j0_census(space, n)}


def test_torsion_census_dimension_four():
    got = _spectrum_table("torsion", 4)
    assert got[("w1+w2", 20)] == {-3: 2, -1: 8, 1: 8, 3: 2}
    assert got[("w3", 4)] == {-1: 2, 1: 2}


def test_curvature_census_dimension_four():
    got = _spectrum_table("curvature", 4)
    assert got[("w1+w2+w3", 64)] == {-4: 4, -2: 16, 0: 24, 2: 16, 4: 4}
    assert got[("2*w1", 10)] == {-2: 3, 0: 4, 2: 3}
    assert got[("2*w3", 10)] == {-2: 3, 0: 4, 2: 3}
    assert got[("w2", 6)] == {-2: 1, 0: 4, 2: 1}


def test_census_dimension_six():
    torsion = _spectrum_table("torsion", 6)
    assert torsion[("w1+w4", 84)][3] == 9
    assert torsion[("w5", 6)] == {-1: 3, 1: 3}
    curv = _spectrum_table("curvature", 6)
    assert curv[("w1+w4+w5", 384)][4] == 24
    # the fully alternating branch also reaches 4 in six dimensions
    assert curv[("w1+w3", 105)][4] == 3
    assert 4 not in curv[("2*w5", 21)]
    assert 4 not in curv[("w4", 15)]


def test_census_spectra_are_symmetric_and_complete():
    for space, n in (("torsion", 4), ("curvature", 4), ("torsion", 6)):
        for comp in j0_census(space, n):
            assert sum(comp.spectrum.values()) == comp.dim
            for k, mult in comp.spectrum.items():
                assert comp.spectrum.get(-k) == mult


def test_extreme_speed_eigenvalue_sits_on_one_torsion_piece_only():
    for n in (4, 6):
        comps = j0_census("torsion", n)
        with_three = [str(c.highest) for c in comps if 3 in c.spectrum]
        assert with_three == [str(fundamental(1, n) + fundamental(n - 2, n))]
