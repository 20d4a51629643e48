"""Analytic saturation limits for the steady-state quanta number."""

import warnings

import pytest

from helpers import make_params
from spaserkit.analysis import limit_strong_drive, limit_weak_drive
from spaserkit.errors import DegenerateParameterError, RegimeWarning


STRONG_OK = dict(
    gamma31=1e9, gamma32=1e11, gamma21=4e12, omega_a_rabi=6e15,
    gamma_n=5.3e14, pump_g=6e12,
)
WEAK_OK = dict(
    gamma31=1e9, gamma32=1e11, gamma21=4e12, omega_a_rabi=1e11,
    gamma_n=5.3e14, pump_g=6e12,
)


class TestStrongDriveLimit:
    def test_arithmetic(self):
        p = make_params(**{**STRONG_OK, "pump_g": 4e12 + 1e12, "n_p": 6e4})
        assert limit_strong_drive(p) == 6e4 * 1e12 / (6.0 * 5.3e14)
        assert limit_strong_drive(p) == 18.867924528301888

    def test_clamps_to_zero_at_the_pump_break_even(self):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RegimeWarning)
            p = make_params(**{**STRONG_OK, "pump_g": STRONG_OK["gamma21"]})
            assert limit_strong_drive(p) == 0.0
            below = make_params(**{**STRONG_OK, "pump_g": 1e12})
            assert limit_strong_drive(below) == 0.0

    def test_silent_inside_its_regime(self):
        p = make_params(**STRONG_OK, n_p=6e4)
        with warnings.catch_warnings():
            warnings.simplefilter("error", RegimeWarning)
            limit_strong_drive(p)

    @pytest.mark.parametrize(
        "override",
        [
            {"omega_a_rabi": 4e12},      # drive not far above gamma21/gamma_n
            {"gamma32": 3e12},           # gamma21 not >> gamma32
            {"gamma31": 5e10},           # gamma32 not >> gamma31
            {"pump_g": 1e12},            # below break-even
        ],
    )
    def test_warns_outside_its_regime(self, override):
        p = make_params(**{**STRONG_OK, **override})
        with pytest.warns(RegimeWarning, match="strong-drive limit"):
            limit_strong_drive(p)


class TestWeakDriveLimit:
    def test_arithmetic(self):
        p = make_params(**{**WEAK_OK, "pump_g": 4e12 + 1e12, "n_p": 6e4})
        expected = 6e4 * 1e11 * 1e12 / (2.0 * 5.3e14 * 4e12)
        assert limit_weak_drive(p) == expected

    def test_clamps_to_zero_at_the_pump_break_even(self):
        p = make_params(**{**WEAK_OK, "pump_g": WEAK_OK["gamma21"]})
        assert limit_weak_drive(p) == 0.0

    def test_silent_inside_its_regime(self):
        p = make_params(**WEAK_OK)
        with warnings.catch_warnings():
            warnings.simplefilter("error", RegimeWarning)
            limit_weak_drive(p)

    @pytest.mark.parametrize(
        "override",
        [
            {"omega_a_rabi": 2e12},      # drive not << gamma21
            {"gamma32": 3e12},           # gamma21 not >> gamma32
        ],
    )
    def test_warns_outside_its_regime(self, override):
        p = make_params(**{**WEAK_OK, **override})
        with pytest.warns(RegimeWarning, match="weak-drive limit"):
            limit_weak_drive(p)

    def test_rejects_vanishing_spontaneous_rate(self):
        p = make_params(**{**WEAK_OK, "gamma21": 0.0, "omega_a_rabi": 0.0,
                           "gamma32": 1e11})
        with pytest.raises(DegenerateParameterError):
            limit_weak_drive(p)


class TestLimitOrdering:
    def test_weak_limit_sits_below_strong_limit(self):
        """The bottlenecked cycle always delivers less than the saturated
        one when the intermediate feed is slow: their ratio is
        3*gamma32/gamma21 < 1."""
        strong = make_params(**STRONG_OK, n_p=6e4)
        weak = make_params(**WEAK_OK, n_p=6e4)
        n_strong = limit_strong_drive(strong)
        n_weak = limit_weak_drive(weak)
        assert n_weak < n_strong
        ratio = n_weak / n_strong
        expected = 3.0 * WEAK_OK["gamma32"] / WEAK_OK["gamma21"]
        assert ratio == pytest.approx(expected, rel=1e-12)

    def test_both_limits_scale_linearly_in_pump_surplus(self):
        for fn, base in [(limit_strong_drive, STRONG_OK), (limit_weak_drive, WEAK_OK)]:
            g21 = base["gamma21"]
            n1 = fn(make_params(**{**base, "pump_g": g21 + 1e12}))
            n2 = fn(make_params(**{**base, "pump_g": g21 + 2e12}))
            assert n2 == pytest.approx(2.0 * n1, rel=1e-12)
