from fractions import Fraction

import numpy as np
import pytest

from soficlab import approx, bernoulli as B, irs, relation as R
from soficlab.cylsets import CylinderSet, SoficApproxData, preimage
from soficlab.groups import GroupSpec, ball

Z = GroupSpec.lattice(1)
Z2 = GroupSpec.lattice(2)


def rotation_data(d=400, radius=1, bins=2, seed=0, group=Z):
    sigma = approx.from_action(group, "rotation", n=d if group is Z else int(round(d ** 0.5)), window=ball(group, 2))
    x = B.sample_labels(sigma.degree, seed)
    base = R.cylinder_algebra(group, radius, bins)
    data = B.export_relation_data(sigma, x, R.close_family(base, group.generators()))
    return sigma, x, base, data


def test_preimage_matches_pointwise_definition():
    sigma, x, base, data = rotation_data(d=60, bins=3)
    lab = np.floor(x.x * 3).astype(int)
    for S in base:
        mask = preimage(sigma, x.x, S)
        for j in range(sigma.degree):
            ok = True
            for g, v in S.bits:
                ok &= int(sigma.img(g)[j] == j) == v
            for g, allowed in S.labels:
                ok &= lab[sigma.inv(g)[j]] in allowed
            assert mask[j] == ok


def test_honest_export_has_zero_structural_defects():
    sigma, x, base, data = rotation_data()
    for a in base:
        for b in base:
            if a.intersect(b) in data.rho:
                assert R.intersection_defect(data, a, b) == 0
        for g in Z.generators():
            assert R.equivariance_defect(data, a, g) == 0


def test_single_point_corruption_gives_one_over_d():
    sigma, x, base, data = rotation_data()
    target = base[1]
    bad = R.corrupt(data, target, 1 / data.degree, seed=3)
    assert R.equivariance_defect(bad, target, Z.generators()[0]) == Fraction(1, data.degree)
    # e fixes every point, so this intersection has the same preimage as target but is stored separately
    always = CylinderSet.bit(Z.identity(), 1, target.bins)
    assert R.intersection_defect(bad, target, always) == Fraction(1, data.degree)


def test_ten_percent_corruption_is_flagged():
    sigma, x, base, data = rotation_data()
    theta = irs.empirical_irs(sigma, ball(Z, 4))
    clean = R.full_report(data, base, [Z.identity(), *Z.generators()], theta)
    assert clean.max_value("intersection") == 0 and clean.max_value("equivariance") == 0
    bad = R.corrupt(data, base[1], 0.1, seed=1)
    report = R.full_report(bad, base, [Z.identity(), *Z.generators()], theta)
    assert not report.passed
    assert report.max_value("intersection") >= 0.1 - 1e-12


def test_trace_zero_for_fixed_point_free_element():
    sigma, x, base, data = rotation_data()
    theta = irs.IRSWindowSpec.point_mass(ball(Z, 4), [])
    g = Z.generators()[0]
    for S in base:
        assert R.fixed_trace(data, S, g) == 0
        assert R.trace_defect(data, S, g, theta) == 0


def test_identity_trace_is_label_mass():
    sigma, x, base, data = rotation_data(d=2000, bins=2)
    theta = irs.empirical_irs(sigma, ball(Z, 4))
    low = CylinderSet.label(Z.identity(), [0], 2)
    assert R.trace_defect(data, low, Z.identity(), theta) == pytest.approx(abs(np.mean(x.x < 0.5) - 0.5))


def test_empty_family_warns_and_passes():
    sigma, x, base, data = rotation_data(d=20)
    theta = irs.empirical_irs(sigma, ball(Z, 4))
    with pytest.warns(UserWarning, match="empty family"):
        report = R.full_report(data, [], [], theta)
    assert report.passed and report.warnings


def test_missing_intersection_is_a_failing_row():
    sigma = approx.from_action(Z, "rotation", n=30, window=ball(Z, 2))
    x = B.sample_labels(30, 0)
    a = CylinderSet.label(Z.identity(), [0], 2)
    b = CylinderSet.bit(Z.identity(), 1, 2)
    data = B.export_relation_data(sigma, x, [a, b])
    theta = irs.empirical_irs(sigma, ball(Z, 4))
    report = R.full_report(data, [a, b], [], theta)
    assert [r.kind for r in report.rows] == ["missing-set"]
    assert not report.passed


def test_notes_record_unchecked_scope():
    sigma, x, base, data = rotation_data(d=20)
    report = R.full_report(data, base[:2], [], irs.empirical_irs(sigma, ball(Z, 4)))
    assert any("translations" in n for n in report.notes)


def test_dump_load_roundtrip(tmp_path):
    sigma, x, base, data = rotation_data(d=50, group=Z2)
    path = tmp_path / "data.npz"
    data.dump(path)
    back = SoficApproxData.load(path)
    assert back.degree == data.degree and set(back.rho) == set(data.rho)
    for S in data.rho:
        assert np.array_equal(back.rho[S], data.rho[S])
    for g in ball(Z2, 2):
        assert np.array_equal(back.image(g), data.image(g))


def test_data_validation():
    with pytest.raises(ValueError):
        SoficApproxData(Z, 3, {CylinderSet.full(2): np.ones(4, bool)}, {})
    with pytest.raises(ValueError):
        SoficApproxData(Z, 3, {}, {Z.generators()[0]: np.array([0, 0, 1])})


def test_cylinder_set_canonical_forms():
    e, g = Z.identity(), Z.generators()[0]
    a = CylinderSet.bit(e, 1, 4).intersect(CylinderSet.label(g, [0, 1], 4))
    b = CylinderSet.label(g, [1, 0], 4).intersect(CylinderSet.bit(e, 1, 4))
    assert a == b and hash(a) == hash(b)
    assert CylinderSet.bit(e, 1, 4).intersect(CylinderSet.bit(e, 0, 4)).empty
    assert CylinderSet.label(e, [0], 4).intersect(CylinderSet.label(e, [1], 4)).empty
    assert CylinderSet.bit(e, 1, 4).intersect(CylinderSet.bit(e, 0, 4)) == \
        CylinderSet.bit(g, 0, 4).intersect(CylinderSet.bit(g, 1, 4))
    assert CylinderSet.label(e, range(4), 4) == CylinderSet.full(4)
    assert a.translate(g).translate(g.inverse()) == a


def test_close_family_contents():
    base = R.cylinder_algebra(Z, 1, 2)
    fam = R.close_family(base, Z.generators())
    for a in base:
        assert a.translate(Z.generators()[0]) in fam
        for b in base:
            assert a.intersect(b) in fam
