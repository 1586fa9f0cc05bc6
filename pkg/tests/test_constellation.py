"""Constellation geometry, labelling, and source-selection tests."""

import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from signshape import (
    Constellation,
    ParameterError,
    ShapingProfile,
    build_ask,
    decimal_value,
    induced_distribution,
    induced_pmf,
    profile_from_json,
    profile_to_json,
    select_source,
    selection_tables,
    sign_bit_conditionals,
)


class TestBuildAsk:
    def test_4ask(self):
        c = build_ask(2)
        assert c.symbols == (-3, -1, 1, 3)
        assert c.size == 4

    def test_8ask(self):
        c = build_ask(3)
        assert c.symbols == (-7, -5, -3, -1, 1, 3, 5, 7)

    def test_32ask_extremes(self):
        c = build_ask(5)
        assert c.size == 32
        assert c.symbols[0] == -31
        assert c.symbols[-1] == 31
        diffs = np.diff(c.points())
        assert np.all(diffs == 2.0)

    @pytest.mark.parametrize("bad", [1, 0, -3, 17])
    def test_rejects_out_of_range(self, bad):
        with pytest.raises(ParameterError):
            build_ask(bad)

    def test_rejects_bool(self):
        with pytest.raises(ParameterError):
            build_ask(True)


class TestLabels:
    def test_rank_roundtrip_8ask(self):
        c = build_ask(3)
        for r in range(8):
            label = c.label_for_rank(r)
            assert c.rank_for_label(label) == r
            assert c.label_for_symbol(c.symbols[r]) == label

    def test_label_is_lsb_first(self):
        c = build_ask(3)
        # rank 6 = 011 read LSB first
        assert c.label_for_rank(6) == (0, 1, 1)

    def test_sign_bit_is_last_label_bit(self):
        c = build_ask(4)
        for r in range(c.size):
            label = c.label_for_rank(r)
            # 0 on the last position means the negative half
            assert (label[-1] == 0) == (c.symbols[r] < 0)

    def test_symbol_for_label(self):
        c = build_ask(2)
        assert c.symbol_for_label((0, 0)) == -3
        assert c.symbol_for_label((1, 1)) == 3


class TestDecimalValue:
    def test_examples(self):
        assert decimal_value([0, 0]) == 0
        assert decimal_value([1, 0]) == 1
        assert decimal_value([0, 1]) == 2
        assert decimal_value([1, 1, 0, 1]) == 11

    def test_exhaustive_length_4(self):
        for bits in itertools.product((0, 1), repeat=4):
            expected = sum(b << i for i, b in enumerate(bits))
            assert decimal_value(bits) == expected

    def test_rejects_non_binary(self):
        with pytest.raises(ParameterError):
            decimal_value([0, 2])

    @given(st.lists(st.integers(0, 1), min_size=1, max_size=12))
    def test_bijective_with_labels(self, bits):
        value = decimal_value(bits)
        back = [(value >> i) & 1 for i in range(len(bits))]
        assert back == bits


class TestShapingProfile:
    def test_valid(self):
        p = ShapingProfile(m=5, probs=(0.04, 0.24))
        assert p.num_distinct == 2
        assert p.group_size == 4

    def test_single_source(self):
        p = ShapingProfile(m=3, probs=(0.2,))
        assert p.group_size == 2

    def test_full_resolution(self):
        p = ShapingProfile(m=5, probs=tuple([0.1] * 8))
        assert p.group_size == 1

    @pytest.mark.parametrize("probs", [(0.1, 0.2, 0.3), (0.1,) * 5])
    def test_rejects_non_divisor_counts(self, probs):
        with pytest.raises(ParameterError):
            ShapingProfile(m=5, probs=probs)

    def test_rejects_out_of_range_prob(self):
        with pytest.raises(ParameterError):
            ShapingProfile(m=3, probs=(0.1, 1.2))

    def test_rejects_too_many_sources(self):
        with pytest.raises(ParameterError):
            ShapingProfile(m=3, probs=(0.1, 0.2, 0.3, 0.4))

    def test_json_roundtrip(self):
        p = ShapingProfile(m=4, probs=(0.05, 0.15))
        q = profile_from_json(profile_to_json(p))
        assert q == p


class TestInducedDistribution:
    def test_8ask_example(self):
        pmf = induced_pmf(3, (0.1, 0.4))
        expected = [0.025, 0.1, 0.15, 0.225, 0.225, 0.15, 0.1, 0.025]
        np.testing.assert_allclose(pmf, expected, atol=1e-15)

    def test_uniform_when_half(self):
        pmf = induced_pmf(5, (0.5,) * 8)
        np.testing.assert_allclose(pmf, np.full(32, 1 / 32), atol=1e-15)

    def test_sums_to_one(self):
        pmf = induced_pmf(6, (0.01, 0.37))
        assert abs(pmf.sum() - 1.0) < 1e-12

    def test_mirror_symmetry_is_exact(self):
        # bit-exact, not approximate: the two halves reuse the same products
        pmf = induced_pmf(5, (0.043, 0.217))
        assert np.array_equal(pmf, pmf[::-1])

    def test_small_probs_pull_mass_inward(self):
        pmf = induced_pmf(5, (0.04, 0.24))
        # outer quarter of the constellation carries little mass
        assert pmf[:4].sum() < 0.02
        assert pmf[12:20].sum() > 0.4

    def test_average_energy(self):
        dist = induced_distribution(ShapingProfile(m=2, probs=(0.0,)))
        # sign bit always says inner: symbols are only -1 and +1... the
        # conditional leaves ranks 0/3 empty, so energy is 1
        assert dist.average_energy == pytest.approx(1.0)

    def test_conditionals_order(self):
        cond = sign_bit_conditionals(ShapingProfile(m=3, probs=(0.1, 0.4)))
        np.testing.assert_allclose(cond, [0.1, 0.4, 0.6, 0.9])


class TestSelectSource:
    def test_8ask_two_source_table(self):
        prof = ShapingProfile(m=3, probs=(0.04, 0.24))
        # prefix bits are LSB first: d = b1 + 2*b2
        assert select_source([0, 0], prof) == (1, False)
        assert select_source([1, 0], prof) == (2, False)
        assert select_source([0, 1], prof) == (2, True)
        assert select_source([1, 1], prof) == (1, True)

    def test_single_source_always_one(self):
        prof = ShapingProfile(m=3, probs=(0.3,))
        assert select_source([0, 0], prof) == (1, False)
        assert select_source([1, 1], prof) == (1, True)

    def test_flip_iff_upper_half(self):
        prof = ShapingProfile(m=5, probs=(0.04, 0.24))
        for d in range(16):
            bits = [(d >> i) & 1 for i in range(4)]
            _, flip = select_source(bits, prof)
            assert flip == (d >= 8)

    @pytest.mark.parametrize("m", [2, 3, 4, 5, 6])
    def test_each_source_used_equally(self, m):
        M = 1 << m
        for P in range(1, M // 4 + 1):
            if (M // 4) % P:
                continue
            prof = ShapingProfile(m=m, probs=tuple(0.1 for _ in range(P)))
            counts = np.zeros(P, dtype=int)
            for d in range(M // 2):
                bits = [(d >> i) & 1 for i in range(m - 1)]
                src, _ = select_source(bits, prof)
                counts[src - 1] += 1
            assert np.all(counts == (M // 2) // P)

    def test_accumulated_selection_matches_induced_pmf(self):
        # walking every prefix and weighting by the selected source's
        # probability must reproduce the closed-form distribution
        prof = ShapingProfile(m=5, probs=(0.07, 0.21, 0.33, 0.47))
        pmf = np.zeros(32)
        for d in range(16):
            bits = [(d >> i) & 1 for i in range(4)]
            src, flip = select_source(bits, prof)
            p_src = prof.probs[src - 1]
            # sign bit 0 -> negative half keeps rank d
            p_negative = p_src if not flip else 1.0 - p_src
            pmf[d] += (1 / 16) * p_negative
            pmf[d + 16] += (1 / 16) * (1 - p_negative)
        np.testing.assert_allclose(pmf, induced_pmf(5, prof.probs), atol=1e-15)

    def test_tables_are_readonly(self):
        src, flip = selection_tables(5, 2)
        assert not src.flags.writeable
        assert not flip.flags.writeable

    def test_wrong_prefix_length(self):
        prof = ShapingProfile(m=5, probs=(0.1, 0.2))
        with pytest.raises(ParameterError):
            select_source([0, 1], prof)
