import numpy as np
import pytest

from kakeya_lab.maps import make_map
from kakeya_lab.slices import slice_loop
from kakeya_lab.sphere import sample_sphere
from kakeya_lab.winding import (
    BoundaryError,
    ResidualError,
    degree_circle_map,
    degree_integral_bound,
    generalized_winding_3d,
    make_slice_loop,
    ray_crossing_oracle,
    winding_field,
    winding_number_2d,
)


def circle_loop(radius=1.0, n=256, reverse=False, windings=1, center=(0.0, 0.0)):
    th = windings * 2 * np.pi * np.arange(n) / n
    pts = radius * np.stack([np.cos(th), np.sin(th)], axis=1) + np.asarray(center)
    if reverse:
        pts = pts[::-1]
    return make_slice_loop(0.5, pts)


def test_unit_circle_windings():
    loop = circle_loop()
    assert winding_number_2d(loop, np.array([0.0, 0.0])) == 1
    assert winding_number_2d(loop, np.array([2.0, 0.0])) == 0


def test_doubly_wound_circle():
    loop = circle_loop(windings=2)
    assert winding_number_2d(loop, np.array([0.0, 0.0])) == 2


def test_boundary_proximity_rejected():
    loop = circle_loop()
    with pytest.raises(BoundaryError):
        winding_number_2d(loop, np.array([1.0, 0.0]), tol_boundary=0.01)


def test_default_boundary_tolerance_guards_loop_points():
    th = 2 * np.pi * np.arange(64) / 64
    loop = make_slice_loop(0.1, np.stack([np.cos(th), np.sin(th)], axis=1))
    # distance 1e-10 < default tolerance 1e-9
    with pytest.raises(BoundaryError):
        winding_number_2d(loop, np.array([1.0 - 1e-10, 0.0]))


def test_ray_crossing_matches_examples():
    loop = circle_loop()
    assert ray_crossing_oracle(loop, np.array([0.0, 0.0])) == 1
    assert ray_crossing_oracle(loop, np.array([2.0, 0.0])) == 0
    rev = circle_loop(reverse=True)
    assert ray_crossing_oracle(rev, np.array([0.0, 0.0])) == -1


def test_cross_validation_on_random_loops():
    # the two independent planar algorithms agree on every unmasked cell
    rng = np.random.default_rng(7)
    mesh = sample_sphere(1, 256)
    for _ in range(10):
        alpha = rng.uniform(0.5, 0.9)
        seed = int(rng.integers(0, 1000))
        t = rng.uniform(0.3, 0.9)
        m = make_map("lacunary_fourier", alpha=alpha, terms=8, seed=seed)
        loop = slice_loop(m, t, mesh)
        field = winding_field(loop, 0.05)
        centers = field.grid.centers()[~field.mask.ravel()]
        assert np.array_equal(
            winding_number_2d(loop, centers), ray_crossing_oracle(loop, centers)
        )


def test_field_matches_pointwise_kernels():
    loop = circle_loop(radius=0.8)
    field = winding_field(loop, 0.04)
    centers = field.grid.centers()[~field.mask.ravel()]
    vals = field.values[~field.mask]
    assert np.array_equal(vals, winding_number_2d(loop, centers))


def test_translation_equivariance():
    loop = circle_loop()
    shifted = circle_loop(center=(3.0, -2.0))
    pts = np.array([[0.3, 0.2], [1.5, 0.0], [-0.4, 0.1]])
    w      = winding_number_2d(loop, pts)
    w_shift = winding_number_2d(shifted, pts + np.array([3.0, -2.0]))
    assert np.array_equal(w, w_shift)


def test_reversal_negates():
    loop = circle_loop()
    rev = circle_loop(reverse=True)
    pts = np.array([[0.0, 0.0], [0.5, 0.2], [2.0, 0.0]])
    assert np.array_equal(winding_number_2d(loop, pts), -winding_number_2d(rev, pts))


def test_winding_field_masks_boundary():
    loop = circle_loop()
    field = winding_field(loop, 0.05)
    assert field.mask.sum() > 0
    assert np.all(field.values[field.mask] == 0)
    # outside the bounding box inflation everything is zero
    assert field.values[0, 0] == 0


def test_generalized_winding_icosphere():
    mesh = sample_sphere(2, 162)
    loop = slice_loop(make_map("zero", n=4), 1.0, mesh)
    assert generalized_winding_3d(loop, np.array([0.0, 0.0, 0.0])) == 1
    assert generalized_winding_3d(loop, np.array([3.0, 0.0, 0.0])) == 0


def test_generalized_winding_subdivided_tetrahedron():
    # simplest closed mesh, subdivided (without projection) to meet the
    # loop's vertex-count floor; winding at the centroid is 1
    verts = [
        np.array([1.0, 1.0, 1.0]),
        np.array([1.0, -1.0, -1.0]),
        np.array([-1.0, 1.0, -1.0]),
        np.array([-1.0, -1.0, 1.0]),
    ]
    faces = [(0, 1, 2), (0, 2, 3), (0, 3, 1), (1, 3, 2)]
    verts_list = list(verts)
    for _ in range(2):
        new_faces = []
        cache = {}

        def midpoint(i, j):
            key = (min(i, j), max(i, j))
            if key not in cache:
                verts_list.append(0.5 * (verts_list[i] + verts_list[j]))
                cache[key] = len(verts_list) - 1
            return cache[key]

        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new_faces
    loop = make_slice_loop(0.5, np.array(verts_list), np.array(faces))
    centroid = np.mean(verts[:4], axis=0)
    assert generalized_winding_3d(loop, centroid) == 1
    assert generalized_winding_3d(loop, np.array([5.0, 0.0, 0.0])) == 0


def test_generalized_winding_convex_hulls():
    rng = np.random.default_rng(3)
    mesh = sample_sphere(2, 162)
    for _ in range(20):
        scale = rng.uniform(0.5, 2.0, size=3)
        verts = mesh.vertices * scale
        loop = make_slice_loop(0.5, verts, mesh.cells)
        inner = rng.uniform(-0.2, 0.2, size=3) * scale.min()
        outer = np.array([3.0, 3.0, 3.0]) * scale.max()
        assert generalized_winding_3d(loop, inner) == 1
        assert generalized_winding_3d(loop, outer) == 0


def test_degree_circle_map_basics():
    th = 2 * np.pi * np.arange(512) / 512
    ident = np.stack([np.cos(th), np.sin(th)], axis=1)
    assert degree_circle_map(ident) == 1
    triple = np.stack([np.cos(3 * th), np.sin(3 * th)], axis=1)
    assert degree_circle_map(triple) == 3
    const = np.tile([0.0, 1.0], (512, 1))
    assert degree_circle_map(const) == 0


def test_degree_circle_map_rejects_under_resolution():
    th = 2 * np.pi * np.arange(32) / 32
    fast = np.stack([np.cos(9 * th), np.sin(9 * th)], axis=1)
    with pytest.raises(ResidualError):
        degree_circle_map(fast)


def test_degree_integral_zero_for_constant():
    mesh = sample_sphere(1, 256)
    const = np.tile([1.0, 0.0], (256, 1))
    assert degree_integral_bound(const, 1.0, mesh) == 0.0


def test_degree_integral_refinement_agreement():
    vals = []
    for res in (512, 1024):
        mesh = sample_sphere(1, res)
        f = np.stack([np.cos(mesh.angles), np.sin(mesh.angles)], axis=1)
        vals.append(degree_integral_bound(f, 1.0, mesh))
    assert abs(vals[1] - vals[0]) / vals[0] < 0.05


def test_degree_integral_grows_linearly_in_degree():
    mesh = sample_sphere(1, 1024)
    th = mesh.angles

    def I(d):
        f = np.stack([np.cos(d * th), np.sin(d * th)], axis=1)
        return degree_integral_bound(f, 1.0, mesh)

    base = I(1)
    assert abs(I(5) / base - 5.0) <= 0.5


def test_degree_integral_dominates_degree_with_single_constant():
    # one constant calibrated at degree 1 keeps C * I(f) >= |deg f|
    mesh = sample_sphere(1, 1024)
    th = mesh.angles

    def I(d):
        f = np.stack([np.cos(d * th), np.sin(d * th)], axis=1)
        return degree_integral_bound(f, 1.0, mesh)

    C = 2.0 * 1 / I(1)
    for d in range(1, 9):
        assert C * I(d) >= d
    assert degree_integral_bound(
        np.tile([1.0, 0.0], (1024, 1)), 1.0, mesh
    ) * C >= 0


def test_degree_integral_rejects_threshold_out_of_range():
    mesh = sample_sphere(1, 256)
    f = np.stack([np.cos(mesh.angles), np.sin(mesh.angles)], axis=1)
    with pytest.raises(ValueError):
        degree_integral_bound(f, 2.0, mesh)
