import pytest
from hypothesis import given
from hypothesis import strategies as st

from spinhelix.errors import InvalidDims, RangeTooLarge
from spinhelix.lattice import axial_neighbors, build_lattice, check_epsilon, phase

dims_st = st.lists(st.integers(2, 5), min_size=1, max_size=3).map(tuple)


def test_ring():
    lat = build_lattice((4,))
    assert len(lat.bonds) == 4
    assert (3, 0) in [(b.site_a, b.site_b) for b in lat.bonds]


def test_square_bond_count():
    assert len(build_lattice((3, 3)).bonds) == 18


def test_open_chain():
    lat = build_lattice((6,), "open")
    assert len(lat.bonds) == 5
    assert all(b.site_b == b.site_a + 1 for b in lat.bonds)


def test_row_major_last_axis_fastest():
    lat = build_lattice((2, 3))
    assert lat.site_coords.tolist() == [[0, 0], [0, 1], [0, 2], [1, 0], [1, 1], [1, 2]]
    assert lat.index((1, 2)) == 5
    assert lat.index((-1, 4)) == lat.index((1, 1))


def test_length_two_keeps_both_bonds():
    lat = build_lattice((2,))
    assert len(lat.bonds) == 2


@pytest.mark.parametrize("dims,boundary", [((0,), "periodic"), ((3, 1), "periodic"), ((3,), "twisted"), ((), "periodic")])
def test_invalid(dims, boundary):
    with pytest.raises(InvalidDims):
        build_lattice(dims, boundary)


def test_open_length_one_allowed():
    assert build_lattice((1,), "open").volume == 1


@pytest.mark.parametrize("eps,coord,expected", [((1, 1), (2, 1), 3), ((1, -1), (1, 1), 0)])
def test_phase_2d(eps, coord, expected):
    lat = build_lattice((4, 4))
    assert phase(lat, eps, lat.index(coord)) == expected


def test_phase_1d():
    lat = build_lattice((6,))
    assert phase(lat, (-1,), 5) == -5
    assert list(phase(lat, (1,))) == list(range(6))


def test_bad_epsilon():
    with pytest.raises(ValueError):
        check_epsilon(build_lattice((4, 4)), (1, 0))
    with pytest.raises(ValueError):
        check_epsilon(build_lattice((4, 4)), (1,))


def test_axial_k2():
    bonds = axial_neighbors(build_lattice((6,)), 2)
    assert sorted((b.site_a, b.site_b) for b in bonds) == [(j, (j + 2) % 6) for j in range(6)]


def test_axial_k1_2d():
    assert len(axial_neighbors(build_lattice((4, 4)), 1)) == 32


@pytest.mark.parametrize("dims,k", [((4,), 2), ((5, 3), 2)])
def test_axial_too_long(dims, k):
    with pytest.raises(RangeTooLarge):
        axial_neighbors(build_lattice(dims), k)


def test_axial_open_rejected():
    with pytest.raises(InvalidDims):
        axial_neighbors(build_lattice((6,), "open"), 1)


@given(dims_st)
def test_index_coord_inverse(dims):
    lat = build_lattice(dims)
    for j in range(lat.volume):
        assert lat.index(lat.coord(j)) == j
    assert len({lat.coord(j) for j in range(lat.volume)}) == lat.volume


@given(dims_st.filter(lambda d: min(d) >= 3), st.integers(1, 2), st.data())
def test_bond_geometry(dims, k, data):
    if any(2 * k >= L for L in dims) and k > 1:
        return
    lat = build_lattice(dims)
    bonds = axial_neighbors(lat, k)
    assert len(bonds) == lat.d * lat.volume
    pairs = [frozenset((b.site_a, b.site_b)) for b in bonds]
    assert len(set(pairs)) == len(pairs)
    eps = data.draw(st.lists(st.sampled_from([1, -1]), min_size=lat.d, max_size=lat.d))
    seams = [0] * lat.d
    for b in bonds:
        ca, cb = lat.coord(b.site_a), lat.coord(b.site_b)
        diff = [y - x for x, y in zip(ca, cb)]
        others = [d for a, d in enumerate(diff) if a != b.direction]
        assert all(d == 0 for d in others)
        step = diff[b.direction]
        L = dims[b.direction]
        assert step in (k, k - L)
        dphi = phase(lat, eps, b.site_b) - phase(lat, eps, b.site_a)
        e = eps[b.direction]
        if step == k:
            assert dphi == e * k
        else:
            seams[b.direction] += 1
            assert dphi == -e * (L - k)
    for a, L in enumerate(dims):
        assert seams[a] == k * lat.volume // L
