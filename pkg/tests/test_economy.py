import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from emt.economy import (
    FactorAllocation,
    IdeationParams,
    NeedParams,
    ProductionParams,
    alignment_efficiency,
    cobb_douglas,
    demand_sensing,
    ideation_cost,
    phi_map,
    reallocate,
)
from emt.errors import InvalidInputError, InvalidParameterError

pos = st.floats(min_value=1e-3, max_value=1e3, allow_nan=False)


class TestCobbDouglas:
    @pytest.mark.parametrize("A, K, L, a, expected", [(1, 1, 1, 0.5, 1.0), (2, 4, 1, 0.5, 4.0), (1, 3, 0, 0.3, 0.0)])
    def test_examples(self, A, K, L, a, expected):
        assert cobb_douglas(ProductionParams(A, a, K, L)) == pytest.approx(expected, rel=1e-15)

    def test_alpha_rejected(self):
        with pytest.raises(InvalidParameterError, match="alpha"):
            ProductionParams(1.0, 1.5, 1.0, 1.0)

    @given(A=pos, K=pos, L=pos, c=pos, a=st.floats(0.05, 0.95))
    def test_homogeneous_degree_one(self, A, K, L, c, a):
        base = cobb_douglas(ProductionParams(A, a, K, L))
        scaled = cobb_douglas(ProductionParams(A, a, c * K, c * L))
        assert scaled == pytest.approx(c * base, rel=1e-12)

    @given(K=pos, L=pos, a=st.floats(0.05, 0.95))
    def test_increasing_in_labor(self, K, L, a):
        assert cobb_douglas(ProductionParams(1.0, a, K, L * 1.01)) > cobb_douglas(ProductionParams(1.0, a, K, L))


class TestIdeation:
    def test_no_decay(self):
        assert ideation_cost(IdeationParams(1.0, 0.0), 123.0) == 1.0

    def test_half_life(self):
        assert ideation_cost(IdeationParams(2.0, math.log(2)), 1.0) == pytest.approx(1.0, rel=1e-15)

    def test_analytic(self):
        assert ideation_cost(IdeationParams(1.0, 0.1), 10.0) == pytest.approx(math.exp(-1), rel=1e-15)

    def test_negative_time(self):
        with pytest.raises(InvalidInputError):
            ideation_cost(IdeationParams(1.0, 0.1), -1.0)

    def test_efficiency_at_zero(self):
        assert alignment_efficiency(IdeationParams(1.0, 0.5), 0.0) == 0.5

    def test_efficiency_monotone_to_one(self):
        t = np.linspace(0, 80, 1000)
        a = alignment_efficiency(IdeationParams(1.0, 0.5), t)
        assert np.all(np.diff(a) >= 0)
        # strictly increasing wherever the increment is representable in double precision
        assert np.all(np.diff(a[t < 30]) > 0)
        assert a[-1] == pytest.approx(1.0, abs=1e-15)

    def test_shortfall_bound(self):
        ip = IdeationParams(1.7, 0.3)
        t = np.linspace(0, 50, 1000)
        assert np.all(1 - alignment_efficiency(ip, t) <= ip.c0 * np.exp(-ip.lambda_decay * t))


class TestPhiMap:
    ip = IdeationParams(1.0, 0.5)

    def test_analytic_composition(self):
        out = phi_map(2.0, 0.0, [0.0], [NeedParams(weight=1.0, delta=1.0)], self.ip)
        assert out[0] == pytest.approx(0.5 * (1 - math.exp(-2)), rel=1e-14)
        assert out[0] == pytest.approx(0.432332, abs=1e-6)

    def test_satisfied_needs(self):
        needs = [NeedParams(weight=1.0, delta=1.0, desired=0.5)] * 2
        assert np.all(phi_map(3.0, 0.0, [0.5, 0.7], needs, self.ip) == 0)

    def test_masked(self):
        needs = [NeedParams(weight=1.0, delta=1.0, ethics_mask=False), NeedParams(weight=1.0, delta=1.0)]
        out = phi_map(3.0, 0.0, [0.0, 0.0], needs, self.ip)
        assert out[0] == 0 and out[1] > 0
        all_masked = [NeedParams(weight=1.0, delta=1.0, ethics_mask=False)] * 2
        assert np.all(phi_map(3.0, 0.0, [0.0, 0.0], all_masked, self.ip) == 0)

    def test_symmetric_split(self):
        needs = [NeedParams(weight=0.5, delta=1.0)] * 2
        out = phi_map(1.0, 2.0, [0.1, 0.1], needs, self.ip)
        assert out[0] == out[1] > 0

    def test_negative_output(self):
        with pytest.raises(InvalidInputError):
            phi_map(-1.0, 0.0, [0.0], [NeedParams(weight=1.0, delta=1.0)], self.ip)

    def test_allocation_budget(self):
        needs = [NeedParams(weight=0.5, delta=1.0)] * 2
        with pytest.raises(InvalidInputError):
            phi_map(1.0, 0.0, [0.0, 0.0], needs, self.ip, allocation=[0.8, 0.8])

    def test_continuous_in_output(self):
        needs = [NeedParams(weight=0.3, delta=1.0), NeedParams(weight=0.7, delta=2.0, effectiveness=1.4)]
        a = phi_map(1.0, 1.0, [0.2, 0.4], needs, self.ip)
        b = phi_map(1.0 + 1e-9, 1.0, [0.2, 0.4], needs, self.ip)
        assert np.max(np.abs(a - b)) < 1e-8

    def test_demand_sensing(self):
        assert list(demand_sensing([0.2, 0.9], [0.5, 0.5])) == pytest.approx([0.3, 0.0])


class TestReallocate:
    f = FactorAllocation(2.0, 1.5, 3.0, 0.5)

    def test_full_employment(self):
        g = reallocate(self.f, 1.5, 0.5)
        assert g.labor_idle == 0.0 and g.capital_idle == 0.0

    def test_identity(self):
        assert reallocate(self.f, 0.0, 0.0) == self.f

    def test_overdraw(self):
        with pytest.raises(InvalidInputError):
            reallocate(self.f, 1.6, 0.0)

    @settings(max_examples=200)
    @given(st.floats(0, 1.5), st.floats(0, 0.5))
    def test_conservation(self, dL, dK):
        g = reallocate(self.f, dL, dK)
        assert g.labor_total == self.f.labor_total
        assert g.capital_total == self.f.capital_total
