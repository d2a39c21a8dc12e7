import numpy as np
import pytest

from relu_regions import InitSpec, Network, he_init
from relu_regions.regions import AffineSlice, enumerate_regions, square_window
from relu_regions.svg import SvgStyle, render_svg


def n_polygons(doc):
    return doc.count('<polygon class="cell"')


class TestSvg:
    def test_single_cell(self):
        # no neuron's zero line crosses the window
        net = Network(2, [1, 1], [np.zeros((1, 2)), np.ones((1, 1))], [[1.0], [0.0]])
        c = enumerate_regions(net, AffineSlice.coordinate_plane(2, 2), square_window(1.0))
        doc = render_svg(c)
        assert c.activation_count == 1 and n_polygons(doc) == 1

    def test_hat_bars(self, hat, line1d):
        c = enumerate_regions(hat, line1d, np.array([[-1.0], [2.0]]))
        assert n_polygons(render_svg(c)) == 3

    def test_deep_net_count(self):
        net = he_init(2, [8] * 5 + [1], InitSpec(bias_std=0.3, seed=11))
        c = enumerate_regions(net, AffineSlice.coordinate_plane(2, 2), square_window(2.0),
                              degenerate="assign")
        assert n_polygons(render_svg(c)) == c.activation_count

    def test_points_and_title(self, hat, line1d):
        c = enumerate_regions(hat, line1d, np.array([[-1.0], [2.0]]))
        doc = render_svg(c, SvgStyle(points=np.array([0.5, 1.5]), title="a<b", fill="none"))
        assert doc.count("<circle") == 2 and "a&lt;b" in doc and 'fill="none"' in doc

    def test_needs_cells(self, hat, line1d):
        c = enumerate_regions(hat, line1d, np.array([[-1.0], [2.0]]), retain_cells=False)
        with pytest.raises(ValueError):
            render_svg(c)
