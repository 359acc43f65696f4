import numpy as np
import pytest

from stokesdrop import shapes
from stokesdrop.diagnostics.inequalities import (INEQUALITIES, DomainSample, domain_table, poincare_ritz,
                                                 scalar_fields, scalar_ratios)


@pytest.fixture(scope="module")
def disk_sample():
    return DomainSample("disk", shapes.disk(64), h_max=1 / 16)


@pytest.fixture(scope="module")
def disk_table(disk_sample):
    return {r.inequality: r for r in domain_table(disk_sample, trials=2)}


def test_table_covers_every_inequality(disk_table):
    assert set(disk_table) == set(INEQUALITIES)
    assert all(np.isfinite(r.ratio) and r.ratio >= 0 for r in disk_table.values())


def test_disk_poincare_constant(disk_sample):
    # first nonzero Neumann eigenvalue of the unit disk is j'_{1,1}^2 = 3.3899
    mu, _ = poincare_ritz(disk_sample)
    assert mu == pytest.approx(1 / 1.84118**2, rel=2e-2)


def test_sampled_and_ritz_constants_below_exact(disk_sample, disk_table, rng):
    exact = 1 / 1.84118**2
    for f in scalar_fields(disk_sample, rng, 3):
        var, g2 = scalar_ratios(disk_sample, f)["poincare_raw"]
        assert var <= exact * g2 * (1 + 1e-2)
    # x lies in the Ritz span and has ratio 1/4 on the unit disk
    assert 0.25 * (1 - 1e-2) <= disk_table["poincare_raw"].ratio <= exact * (1 + 1e-2)


def test_grid_quadrature_of_disk_area(disk_sample):
    assert disk_sample.integral(np.ones(len(disk_sample.x))) == pytest.approx(np.pi, rel=1e-3)
