import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ebzip.predictor import PredictorStencil, build_stencil, predict

from _reference import STENCIL_2D, reference_predict


class TestBuildStencil:
    @pytest.mark.parametrize("layers", [1, 2, 3, 4])
    def test_two_dimensional_coefficients(self, layers):
        stencil = build_stencil(layers, 2)
        assert dict(stencil.terms) == STENCIL_2D[layers]

    @pytest.mark.parametrize("layers", [1, 2, 3, 4])
    @pytest.mark.parametrize("ndim", [1, 2, 3, 4])
    def test_term_count(self, layers, ndim):
        stencil = build_stencil(layers, ndim)
        assert len(stencil.terms) == (layers + 1) ** ndim - 1

    @pytest.mark.parametrize("layers", [1, 2, 3, 4])
    @pytest.mark.parametrize("ndim", [1, 2, 3, 4])
    def test_coefficients_sum_to_one(self, layers, ndim):
        stencil = build_stencil(layers, ndim)
        assert sum(c for _, c in stencil.terms) == 1

    def test_terms_are_lexicographic(self):
        stencil = build_stencil(2, 3)
        offsets = [offs for offs, _ in stencil.terms]
        assert offsets == sorted(offsets)

    def test_one_dimensional_extrapolation(self):
        assert dict(build_stencil(1, 1).terms) == {(1,): 1}
        assert dict(build_stencil(2, 1).terms) == {(1,): 2, (2,): -1}

    def test_caching_returns_same_object(self):
        assert build_stencil(2, 2) is build_stencil(2, 2)

    @pytest.mark.parametrize("layers,ndim", [(0, 1), (-1, 2), (1, 0), (1, 5)])
    def test_rejects_bad_arguments(self, layers, ndim):
        with pytest.raises(ValueError):
            build_stencil(layers, ndim)


class TestPredict:
    def test_lorenzo_corner(self):
        # prediction at (1,1) is left + below - diagonal
        v = np.array([[3.0, 2.0], [1.0, 0.0]])
        assert predict(build_stencil(1, 2), v, (1, 1)) == 0.0
        v = np.array([[1.0, 2.0], [3.0, 0.0]])
        assert predict(build_stencil(1, 2), v, (1, 1)) == 4.0

    def test_origin_predicts_zero(self):
        v = np.full((3, 3), 7.0)
        assert predict(build_stencil(2, 2), v, (0, 0)) == 0.0

    def test_edge_drops_zero_dimensions(self):
        # along the c1 = 0 edge only dimension 2 participates
        v = np.arange(9, dtype=np.float64).reshape(3, 3) ** 2
        stencil = build_stencil(1, 2)
        assert predict(stencil, v, (0, 2)) == v[1, 0]
        assert predict(stencil, v, (2, 0)) == v[0, 1]

    def test_layer_count_shrinks_to_depth(self):
        v = np.array([0.0, 1.0, 4.0, 9.0, 16.0, 25.0, 36.0, 49.0])
        deep = build_stencil(3, 1)
        # at coordinate 1 only one preceding value exists
        assert predict(deep, v, (1,)) == v[0]
        # at coordinate 2 the two-layer linear extrapolation applies
        assert predict(deep, v, (2,)) == 2 * v[1] - v[0]
        # deep interior uses all three layers
        assert predict(deep, v, (5,)) == 3 * v[4] - 3 * v[3] + v[2]

    def test_constant_field_reproduced_everywhere(self):
        v = np.full((4, 5), 3.25)
        for layers in (1, 2, 3):
            stencil = build_stencil(layers, 2)
            for c2 in range(4):
                for c1 in range(5):
                    expected = 0.0 if (c1, c2) == (0, 0) else 3.25
                    assert predict(stencil, v, (c1, c2)) == expected

    def test_exact_on_low_degree_monomials(self):
        size = 12
        i = np.arange(size, dtype=np.float64)
        for layers in (1, 2, 3):
            stencil = build_stencil(layers, 2)
            for a in range(2 * layers):
                for b in range(2 * layers - a):
                    v = (i[:, None] ** b) * (i[None, :] ** a)
                    for c2 in range(layers, size):
                        for c1 in range(layers, size):
                            truth = v[c2, c1]
                            got = predict(stencil, v, (c1, c2))
                            assert got == pytest.approx(truth, rel=1e-9, abs=1e-6)

    def test_rejects_bad_coordinates(self):
        stencil = build_stencil(1, 2)
        v = np.zeros((2, 2))
        with pytest.raises(ValueError):
            predict(stencil, v, (1,))
        with pytest.raises(ValueError):
            predict(stencil, v, (-1, 0))

    @settings(deadline=None, max_examples=60)
    @given(
        data=st.data(),
        layers=st.integers(1, 3),
        ndim=st.integers(1, 3),
    )
    def test_matches_reference(self, data, layers, ndim):
        dims = tuple(
            data.draw(st.integers(1, 6), label=f"dim{axis}")
            for axis in range(ndim)
        )
        n = int(np.prod(dims))
        flat = np.array(
            data.draw(
                st.lists(
                    st.floats(-100, 100, allow_nan=False, allow_infinity=False),
                    min_size=n,
                    max_size=n,
                )
            )
        )
        coord = tuple(
            data.draw(st.integers(0, size - 1), label=f"coord{axis}")
            for axis, size in enumerate(dims)
        )
        stencil = build_stencil(layers, ndim)
        expected = reference_predict(flat, dims, coord, layers)
        view = flat.reshape(tuple(reversed(dims)))
        assert predict(stencil, view, coord) == pytest.approx(
            expected, rel=1e-12, abs=1e-12
        )


class TestStencilType:
    def test_fields(self):
        stencil = build_stencil(1, 2)
        assert isinstance(stencil, PredictorStencil)
        assert stencil.layers == 1
        assert stencil.ndim == 2
