import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from subml.constellation import (
    Scheme,
    VectorConstellation,
    build_constellation,
    gray_code,
    neighbor_counts,
    pairwise_distances,
    parse_modulation,
)
from subml.errors import CapExceeded, UnsupportedOrder

ALL_SUPPORTED = [("bpsk", 2)] + [("pam", m) for m in (2, 4, 8, 16)] + \
    [("qam", m) for m in (4, 16, 64, 256)]


def _popcount(x: int) -> int:
    return bin(x).count("1")


@pytest.fixture(params=ALL_SUPPORTED, ids=lambda p: f"{p[0]}{p[1]}")
def constellation(request):
    return build_constellation(*request.param)


class TestBuild:
    def test_unit_energy(self, constellation):
        assert np.mean(np.abs(constellation.points) ** 2) == pytest.approx(1.0, abs=1e-12)

    def test_points_distinct_and_labels_bijective(self, constellation):
        c = constellation
        assert len(c.points) == c.M
        assert len(set(np.round(c.points, 12))) == c.M
        assert sorted(c.labels.tolist()) == list(range(c.M))

    def test_gray_property(self, constellation):
        c = constellation
        for i, j in itertools.combinations(range(c.M), 2):
            if abs(abs(c.points[i] - c.points[j]) - c.d_min) <= 1e-9:
                assert _popcount(int(c.labels[i] ^ c.labels[j])) == 1

    def test_d_min_is_exhaustive_minimum(self, constellation):
        c = constellation
        brute = min(abs(a - b) for a, b in itertools.combinations(c.points.tolist(), 2))
        assert c.d_min == pytest.approx(brute, rel=1e-14)

    def test_bpsk(self):
        c = build_constellation(Scheme.BPSK, 2)
        assert sorted(c.points.real.tolist()) == [-1.0, 1.0]
        assert c.d_min == 2.0

    def test_pam4(self):
        c = build_constellation("pam", 4)
        np.testing.assert_allclose(np.sort(c.points.real),
                                   np.array([-3, -1, 1, 3]) / math.sqrt(5), rtol=1e-15)
        assert c.d_min == pytest.approx(2 / math.sqrt(5), rel=1e-15)

    def test_qam16(self):
        c = build_constellation("qam", 16)
        assert c.d_min == pytest.approx(2 / math.sqrt(10), rel=1e-15)

    @pytest.mark.parametrize("scheme,m", [("bpsk", 4), ("pam", 3), ("pam", 32),
                                          ("qam", 8), ("qam", 32), ("qam", 1024)])
    def test_unsupported(self, scheme, m):
        with pytest.raises(UnsupportedOrder):
            build_constellation(scheme, m)

    def test_qam_row_major_order(self):
        c = build_constellation("qam", 16)
        # first four points share the most negative in-phase level
        assert np.allclose(c.points[:4].real, c.points[0].real)
        assert np.all(np.diff(c.points[:4].imag) > 0)

    def test_points_read_only(self):
        c = build_constellation("qam", 4)
        with pytest.raises(ValueError):
            c.points[0] = 0


@pytest.mark.parametrize("text,name,m", [("bpsk", "bpsk", 2), ("pam4", "pam4", 4),
                                         ("QAM64", "qam64", 64)])
def test_parse_modulation(text, name, m):
    c = parse_modulation(text)
    assert c.name == name and c.M == m


@pytest.mark.parametrize("bad", ["psk8", "qam", "qamx", ""])
def test_parse_modulation_rejects(bad):
    with pytest.raises(UnsupportedOrder):
        parse_modulation(bad)


def test_gray_code_adjacent_differ_by_one_bit():
    for n in range(255):
        assert _popcount(gray_code(n) ^ gray_code(n + 1)) == 1


class TestNeighbours:
    @pytest.mark.parametrize("m", [4, 16, 64, 256])
    def test_partition(self, m):
        side = math.isqrt(m)
        counts = neighbor_counts(build_constellation("qam", m))
        if side == 2:
            assert counts.tolist() == [2] * 4
            return
        assert np.sum(counts == 2) == 4
        assert np.sum(counts == 3) == 4 * (side - 2)
        assert np.sum(counts == 4) == (side - 2) ** 2

    @given(st.floats(min_value=1e-3, max_value=1e3))
    @settings(max_examples=30, deadline=None)
    def test_scaling(self, k):
        c = build_constellation("qam", 16)
        s = c.scaled(k)
        assert s.d_min == pytest.approx(k * c.d_min, rel=1e-12)
        np.testing.assert_array_equal(neighbor_counts(s), neighbor_counts(c))


class TestVector:
    def test_cardinality_and_order(self):
        c = build_constellation("qam", 16)
        v = VectorConstellation.uniform(c, 2)
        assert v.cardinality == 256 == len(v)
        assert v.indices[0].tolist() == [0, 0]
        assert v.indices[1].tolist() == [0, 1]
        assert v.indices[16].tolist() == [1, 0]
        np.testing.assert_array_equal(v.points[17], [c.points[1], c.points[1]])

    def test_mixed_orders(self):
        v = VectorConstellation([build_constellation("qam", 4),
                                 build_constellation("bpsk", 2)])
        assert v.orders == (4, 2)
        assert v.cardinality == 8
        assert v.bits_per_vector == 3

    def test_deterministic(self):
        c = build_constellation("pam", 4)
        a = VectorConstellation.uniform(c, 3)
        b = VectorConstellation.uniform(c, 3)
        np.testing.assert_array_equal(a.points, b.points)

    def test_bit_labels_concatenate(self):
        c = build_constellation("qam", 16)
        v = VectorConstellation.uniform(c, 2)
        lab = v.bit_labels()
        for i in (0, 37, 255):
            a0, a1 = v.indices[i]
            assert lab[i] == (int(c.labels[a0]) << 4) | int(c.labels[a1])


class TestPairwise:
    def test_bpsk(self):
        pd = pairwise_distances(VectorConstellation.uniform(build_constellation("bpsk", 2), 1))
        assert list(zip(pd.i.tolist(), pd.j.tolist(), pd.d.tolist())) == [(0, 1, 2.0), (1, 0, 2.0)]

    def test_qam16_2x2_against_scan(self):
        c = build_constellation("qam", 16)
        v = VectorConstellation.uniform(c, 2)
        pd = pairwise_distances(v)
        assert pd.d.size == 256 * 255
        # independent scan: norm of the difference vector, loop over a sample of rows
        for i in (0, 5, 100, 255):
            ref = np.linalg.norm(v.points[i] - v.points, axis=1)
            got = pd.d[pd.i == i]
            np.testing.assert_allclose(got, np.delete(ref, i), rtol=1e-14)
        assert pd.d.min() == pytest.approx(2 / math.sqrt(10), rel=1e-14)
        assert pd.d.min() == pytest.approx(v.d_min, rel=1e-14)
        assert np.all(pd.d > 0)

    def test_ordered_and_deterministic(self):
        v = VectorConstellation.uniform(build_constellation("qam", 4), 2)
        a, b = pairwise_distances(v), pairwise_distances(v)
        np.testing.assert_array_equal(a.d, b.d)
        keys = list(zip(a.i.tolist(), a.j.tolist()))
        assert keys == sorted(keys)

    def test_cap(self):
        # 4096 candidates sit exactly at the default cap
        pairwise_distances(VectorConstellation.uniform(build_constellation("qam", 16), 3))
        v = VectorConstellation.uniform(build_constellation("qam", 256), 2)
        with pytest.raises(CapExceeded):
            pairwise_distances(v)
        small = VectorConstellation.uniform(build_constellation("qam", 4), 2)
        with pytest.raises(CapExceeded):
            pairwise_distances(small, cap=8)

    @given(st.sampled_from([("bpsk", 2), ("pam", 4), ("qam", 4), ("qam", 16)]),
           st.integers(min_value=1, max_value=2))
    @settings(max_examples=12, deadline=None)
    def test_min_is_product_d_min(self, mod, nt):
        v = VectorConstellation.uniform(build_constellation(*mod), nt)
        assert pairwise_distances(v).d.min() == pytest.approx(v.d_min, rel=1e-12)
