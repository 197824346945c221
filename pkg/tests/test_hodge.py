"""Periodic-grid exterior calculus: operator laws and the four identity checks."""
import json

import numpy as np
import pytest
from scipy.special import iv

from grflab.hodge import (
    FormField,
    HodgeReport,
    PeriodicGrid,
    VectorField,
    adjointness_gap,
    check_divH2,
    check_integral_identity,
    check_suobing,
    check_twisted_codiff,
    closed_three_form,
    codiff,
    d,
    example_fields,
    gradient,
    hodge,
    inner_pointwise,
    integral,
    interior,
    l2_inner,
    wedge,
)


@pytest.fixture(scope="module")
def g16():
    return PeriodicGrid(dim=3, sizes=(16, 16, 16))


@pytest.fixture(scope="module")
def g32():
    return PeriodicGrid(dim=3, sizes=(32, 32, 32))


@pytest.fixture(scope="module")
def g64():
    return PeriodicGrid(dim=3, sizes=(64, 64, 64))


@pytest.fixture(scope="module")
def gm16():
    return PeriodicGrid(dim=3, sizes=(16, 16, 16), metric=(1.3, 0.7, 2.1))


@pytest.fixture(scope="module")
def g4():
    return PeriodicGrid(dim=4, sizes=(16, 16, 16, 16))


def random_trig_form(grid, degree, seed):
    rng = np.random.default_rng(seed)
    axes = grid.coords()
    comps = {}
    from itertools import combinations

    for idx in combinations(range(grid.dim), degree):
        k = int(rng.integers(1, 4))
        ax = axes[int(rng.integers(0, grid.dim))]
        comps[idx] = np.sin(k * ax + rng.uniform(0.0, 2 * np.pi))
    return FormField(grid, degree, comps)


# ---------------------------------------------------------------- grid basics


def test_grid_geometry(g16):
    assert np.allclose(g16.spacing, 2 * np.pi / 16)
    assert abs(g16.cell_volume - (2 * np.pi / 16) ** 3) < 1e-15
    assert g16.refined().sizes == (32, 32, 32)
    spec = g16.spec()
    assert spec["dim"] == 3 and spec["sizes"] == [16, 16, 16]
    x, y, z = g16.coords()
    assert x.shape == (16, 1, 1) and y.shape == (1, 16, 1) and z.shape == (1, 1, 16)


def test_grid_validation():
    with pytest.raises(ValueError):
        PeriodicGrid(dim=2, sizes=(16, 16))
    with pytest.raises(ValueError):
        PeriodicGrid(dim=3, sizes=(8, 16, 16))
    with pytest.raises(ValueError):
        PeriodicGrid(dim=3, sizes=(16, 16, 16), metric=(1.0, -1.0, 1.0))
    with pytest.raises(ValueError):
        PeriodicGrid(dim=3, sizes=(16, 16))


def test_stencil_truncation_law(g32):
    # centered 4th-order derivative of sin x errs by h^4/30 at the peak
    x, y, z = g32.coords()
    err = np.abs(g32.deriv(np.sin(x) + 0 * y + 0 * z, 0) - np.cos(x)).max()
    model = g32.spacing[0] ** 4 / 30.0
    assert 0.9 < err / model < 1.1


# ----------------------------------------------------------- operator algebra


def test_d_squared_is_exactly_zero(g16, g4):
    for grid in (g16, g4):
        for degree in range(0, grid.dim - 1):
            field = random_trig_form(grid, degree, seed=10 + degree)
            assert d(d(field)).sup() == 0.0


def test_hodge_involution_signs(g16, gm16, g4):
    # ** = (-1)^{k(n-k)} on k-forms, any diagonal metric
    for grid in (g16, gm16, g4):
        for degree in range(0, grid.dim + 1):
            field = random_trig_form(grid, degree, seed=20 + degree)
            twice = hodge(hodge(field))
            sign = (-1.0) ** (degree * (grid.dim - degree))
            gap = max(
                np.abs(twice.comp(idx) - sign * field.comp(idx)).max()
                for idx in field.indices()
            ) if degree else np.abs(twice.comp(()) - field.comp(())).max()
            assert gap < 1e-13


def test_codiff_kills_scalars(g16):
    f = random_trig_form(g16, 0, seed=3)
    assert codiff(f).degree == 0
    assert codiff(f).sup() == 0.0


def test_form_arithmetic_and_array_scaling(g16):
    a = random_trig_form(g16, 1, seed=4)
    x, _, _ = g16.coords()
    weight = np.broadcast_to(np.cos(x), g16.sizes).copy()
    left = weight * a
    right = a * weight
    assert isinstance(left, FormField) and isinstance(right, FormField)
    for idx in a.indices():
        assert np.array_equal(left.comp(idx), right.comp(idx))
        assert np.array_equal(left.comp(idx), weight * a.comp(idx))
    assert (a - a).sup() == 0.0
    assert (2.0 * a).sup() == 2.0 * a.sup()


def test_degree_and_grid_mismatch_rejected(g16, g32):
    a = random_trig_form(g16, 1, seed=5)
    b = random_trig_form(g16, 2, seed=6)
    c = random_trig_form(g32, 1, seed=7)
    with pytest.raises(ValueError):
        a + b
    with pytest.raises(ValueError):
        a + c
    with pytest.raises(ValueError):
        FormField(g16, 2, {(0, 0): np.zeros(g16.sizes)})
    with pytest.raises(ValueError):
        hodge(FormField(g16, 4, {}))


def test_adjointness_of_d_and_codiff(g16, gm16, g4):
    # <d a, b> = <a, d* b> pins the codifferential sign table
    for grid in (g16, gm16, g4):
        for degree in range(0, grid.dim):
            a = random_trig_form(grid, degree, seed=30 + degree)
            b = random_trig_form(grid, degree + 1, seed=40 + degree)
            assert adjointness_gap(a, b) < 1e-12
    with pytest.raises(ValueError):
        adjointness_gap(random_trig_form(g16, 0, seed=1), random_trig_form(g16, 2, seed=2))


def test_wedge_and_interior_shapes(g16):
    a = random_trig_form(g16, 1, seed=8)
    b = random_trig_form(g16, 1, seed=9)
    ab = wedge(a, b)
    assert ab.degree == 2
    # antisymmetry of the 1-1 wedge
    ba = wedge(b, a)
    assert (ab + ba).sup() < 1e-13
    f = random_trig_form(g16, 0, seed=11)
    v = gradient(f)
    assert isinstance(v, VectorField)
    assert interior(v, a).degree == 0


def test_l2_inner_positive(g16):
    a = random_trig_form(g16, 2, seed=12)
    assert l2_inner(a, a) > 0.0
    assert abs(l2_inner(a, a) - integral(inner_pointwise(a, a), g16)) < 1e-12


# -------------------------------------------------------- the identity checks


def test_suobing_pinned_example(g32, g64):
    refs = {}
    for grid in (g32, g64):
        f, H, ref = example_fields(grid)
        rep = check_suobing(f, H, reference=ref)
        # both routes share the stencil: the discrete identity is exact
        assert rep.residuals["discrete"] == 0.0
        refs[grid.sizes[0]] = rep.residuals["reference"]
    # against the analytic interior product the h^4 law shows
    assert 4e-5 < refs[32] < 6e-5
    assert 2.5e-6 < refs[64] < 3.7e-6
    assert 14.0 < refs[32] / refs[64] < 18.0


def test_suobing_constant_potential_trivial(g16):
    x, _, _ = g16.coords()
    f = FormField(g16, 0, {(): np.full(g16.sizes, 0.7)})
    _, H, _ = example_fields(g16)
    rep = check_suobing(f, H)
    assert rep.residuals["discrete"] == 0.0


def test_suobing_dim4_degenerate_example(g4):
    # f = cos w, H = sin x dx^dy^dz: i_{grad f} H has no overlap, 0 = 0
    w, x, y, z = g4.coords()
    f = FormField(g4, 0, {(): np.cos(w) + 0 * x + 0 * y + 0 * z})
    H = FormField(g4, 3, {(1, 2, 3): np.sin(x) + 0 * w + 0 * y + 0 * z})
    rep = check_suobing(f, H)
    assert rep.residuals["discrete"] == 0.0


def test_twisted_codiff_rates(g32, g64):
    out = {}
    for grid in (g32, g64):
        f, H, _ = example_fields(grid)
        rep = check_twisted_codiff(f, H)
        out[grid.sizes[0]] = rep.residuals
        assert set(rep.residuals) == {"pointwise", "differentiated"}
    for key in ("pointwise", "differentiated"):
        rate = np.log2(out[32][key] / out[64][key])
        assert 3.5 < rate < 4.5
    assert out[64]["pointwise"] < 5e-5
    assert out[64]["differentiated"] < 1.5e-4


def test_twisted_codiff_zero_potential_exact(g32):
    x, y, z = g32.coords()
    f = FormField(g32, 0, {(): 0.0 * x + 0 * y + 0 * z})
    _, H, _ = example_fields(g32)
    rep = check_twisted_codiff(f, H)
    assert rep.residuals["pointwise"] < 1e-12
    assert rep.residuals["differentiated"] < 1e-12


def test_twisted_codiff_rejects_nonclosed_torsion(g4):
    w, x, y, z = g4.coords()
    f = FormField(g4, 0, {(): np.cos(w) + 0 * x + 0 * y + 0 * z})
    H_bad = FormField(g4, 3, {(1, 2, 3): np.sin(w) + 0 * x + 0 * y + 0 * z})
    with pytest.raises(ValueError, match="not closed"):
        check_twisted_codiff(f, H_bad)


def test_integral_identity_gap_and_bessel_value(g32, g64):
    # independent routes agree to rounding; the value itself converges
    # at 4th order to 4 pi^3 (I0(1) + I1(1))
    exact = 4.0 * np.pi**3 * (iv(0, 1.0) + iv(1, 1.0))
    errs = {}
    for grid in (g32, g64):
        f, H, _ = example_fields(grid)
        rep = check_integral_identity(f, H)
        assert rep.residuals["relative_gap"] < 1e-12
        errs[grid.sizes[0]] = abs(rep.values["left"] - exact)
    assert 1e-3 < errs[64] < 2e-3
    assert 14.0 < errs[32] / errs[64] < 18.0


def test_integral_identity_harmonic_torsion_trivial(g16):
    x, y, z = g16.coords()
    f = FormField(g16, 0, {(): 0.0 * x + 0 * y + 0 * z})
    H = FormField(g16, 3, {(0, 1, 2): np.full(g16.sizes, 0.7)})
    rep = check_integral_identity(f, H)
    assert rep.values["left"] == 0.0
    assert rep.values["right"] == 0.0


def test_integral_identity_quadratic_torsion_scaling(g32):
    f, H, _ = example_fields(g32)
    one = check_integral_identity(f, H)
    two = check_integral_identity(f, H * 2.0)
    assert abs(two.values["left"] - 4.0 * one.values["left"]) < 1e-12 * one.values["left"]


def test_integral_identity_potential_shift_covariance(g32):
    # f -> f + c multiplies both sides by e^{-c} and moves no residual
    f, H, _ = example_fields(g32)
    shifted = FormField(g32, 0, {(): f.comp(()) + 0.7})
    a = check_integral_identity(f, H)
    b = check_integral_identity(shifted, H)
    assert abs(b.values["left"] - np.exp(-0.7) * a.values["left"]) < 1e-12 * a.values["left"]
    assert abs(b.residuals["relative_gap"] - a.residuals["relative_gap"]) < 1e-14
    ta = check_twisted_codiff(f, H)
    tb = check_twisted_codiff(shifted, H)
    assert abs(ta.residuals["pointwise"] - tb.residuals["pointwise"]) < 1e-12


def test_divh2_pinned_truncation_band(g32, g64):
    # product-rule defect of the shared stencil: residual = h^4/2 on the
    # canonical H = sin x dV data; a half-weight double contraction
    # would instead leave an O(1) residual
    sups = {}
    for grid in (g32, g64):
        _, H, _ = example_fields(grid)
        rep = check_divH2(H)
        sups[grid.sizes[0]] = rep.sup
        model = grid.spacing[0] ** 4 / 2.0
        assert 0.9 < rep.sup / model < 1.1
    assert 14.0 < sups[32] / sups[64] < 18.0


def test_divh2_constant_torsion_exact(g16):
    x, _, _ = g16.coords()
    H = FormField(g16, 3, {(0, 1, 2): np.full(g16.sizes, 0.7)})
    assert check_divH2(H).sup == 0.0


def test_divh2_on_generic_closed_three_form(g4):
    H = closed_three_form(g4, (0.2, 0.15))
    assert d(H).sup() == 0.0
    rep = check_divH2(H)
    assert np.isfinite(rep.sup)
    assert rep.sup < 1e-2


def test_example_fields_require_canonical_periods():
    grid = PeriodicGrid(dim=3, sizes=(16, 16, 16), periods=(1.0, 2 * np.pi, 2 * np.pi))
    with pytest.raises(ValueError):
        example_fields(grid)


def test_check_argument_validation(g16):
    f, H, _ = example_fields(g16)
    with pytest.raises(ValueError):
        check_suobing(random_trig_form(g16, 1, seed=2), H)
    with pytest.raises(ValueError):
        check_integral_identity(f, random_trig_form(g16, 2, seed=3))


def test_report_serialization(tmp_path, g16):
    f, H, ref = example_fields(g16)
    rep = check_suobing(f, H, reference=ref)
    assert rep.sup == max(rep.residuals.values())
    path = tmp_path / "report.json"
    text = rep.to_json(str(path))
    payload = json.loads(path.read_text())
    assert payload == json.loads(text)
    assert payload["identity"] == rep.identity
    assert "rate" not in payload
    rated = HodgeReport(identity="x", grid_spec=g16.spec(), residuals={"a": 1.0}, rate=4.0)
    assert json.loads(rated.to_json())["rate"] == 4.0
