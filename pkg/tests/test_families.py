import numpy as np
import pytest

from dirmax.families import (
    FAMILY_IDS,
    adversarial_field,
    kakeya_fan_field,
    sample_suite,
)


class TestGenerators:
    @pytest.mark.parametrize("fam", FAMILY_IDS)
    def test_nonnegative_unit_norm(self, fam):
        n = 64
        rng = np.random.default_rng(0)
        vals = adversarial_field(fam, n, rng)
        assert np.all(vals >= 0.0)
        l2 = np.sqrt(np.sum(vals**2) / (n * n))
        assert l2 == pytest.approx(1.0, rel=1e-12)

    def test_unknown_family(self):
        with pytest.raises(ValueError):
            adversarial_field("nope", 32, np.random.default_rng(0))

    def test_fan_strip_count(self):
        n = 128
        delta = 2.0**-4
        vals = kakeya_fan_field(n, delta)
        # mass concentrates at the center where all strips overlap
        assert vals[n // 2, n // 2] == vals.max()
        assert np.count_nonzero(vals) > n  # strips reach across the square

    def test_suite_covers_families(self):
        rng = np.random.default_rng(1)
        suite = sample_suite(32, 5, rng)
        ids = [fam for fam, _ in suite]
        for fam in FAMILY_IDS:
            assert ids.count(fam) >= 3

    def test_deterministic(self):
        a = adversarial_field("bump", 32, np.random.default_rng(7))
        b = adversarial_field("bump", 32, np.random.default_rng(7))
        assert np.array_equal(a, b)
