"""Information measures: closed forms, slopes, oracles, symmetry."""

import math

import numpy as np
import pytest

from sdof_lab.analysis import (
    DEFAULT_GRID,
    achievable_rate,
    check_output_symmetry,
    estimate_slope,
    gaussian_mi,
    leakage_slope,
    mc_mi_oracle,
    rate_slope,
)
from sdof_lab.errors import DimensionTooLarge, EmptySystem, GridTooSmall
from sdof_lab.model import EVE, RX1, RX2, PowerBudget, Topology, sample_channel
from sdof_lab.precoding import EffectiveLinearSystem, SymbolDecl, assemble_effective_system
from sdof_lab.schemes import build_scheme, run_scheme


def _system(scheme_id, seed=0, **params):
    spec = build_scheme(scheme_id, **params)
    realization = sample_channel(spec.topology, spec.n_slots, seed)
    trace = run_scheme(spec, realization, PowerBudget(1e4), "noiseless", seed)
    return spec, assemble_effective_system(trace)


def _scalar_system():
    return EffectiveLinearSystem(
        symbols=(SymbolDecl("s", RX1),),
        matrices={RX1: np.array([[1.0 + 0j]])},
        slot_of_row=(0,),
    )


class TestGaussianMi:
    def test_nulled_adversary_is_exactly_zero(self):
        spec, system = _system("MR_PDP")
        assert gaussian_mi(system, EVE, ["v1", "v2", "w"], 2.0 ** 40).bits == 0.0

    def test_vanishing_power(self):
        spec, system = _system("MR_PPD")
        assert gaussian_mi(system, EVE, ["v", "w"], 1e-12).bits <= 1e-6

    def test_bounded_leakage_across_powers(self):
        spec, system = _system("MR_PPD")
        low = gaussian_mi(system, EVE, ["v", "w"], 2.0 ** 20).bits
        high = gaussian_mi(system, EVE, ["v", "w"], 2.0 ** 40).bits
        assert abs(high - low) <= 0.5

    def test_scalar_channel_value(self):
        system = _scalar_system()
        got = gaussian_mi(system, RX1, ["s"], 100.0).bits
        assert math.isclose(got, math.log2(101.0), rel_tol=1e-12)

    @pytest.mark.parametrize("scheme_id,node", [
        ("BC_S1_43", RX1), ("MR_DDP", RX2), ("WT_DD_23", RX1),
        ("MR_S30_29_A", RX1), ("SUB_SECURE_MULTICAST", RX2),
    ])
    def test_monotone_in_power(self, scheme_id, node):
        spec, system = _system(scheme_id)
        values = [achievable_rate(system, node, p).bits for p in DEFAULT_GRID]
        assert all(b >= a for a, b in zip(values, values[1:]))

    def test_chain_consistency(self):
        spec, system = _system("WT_DD_23", seed=4)
        p = 2.0 ** 30
        all_msgs = list(system.message_sids())
        whole = gaussian_mi(system, EVE, all_msgs, p).bits
        first = gaussian_mi(system, EVE, ["v1"], p).bits
        rest = gaussian_mi(system, EVE, ["v2"], p, known=["v1"]).bits
        assert abs(whole - first - rest) <= 1e-6

    def test_empty_system_raises(self):
        system = EffectiveLinearSystem(
            symbols=(SymbolDecl("s", RX1),),
            matrices={RX1: np.zeros((0, 1), dtype=complex)},
            slot_of_row=(),
        )
        with pytest.raises(EmptySystem):
            gaussian_mi(system, RX1, ["s"], 10.0)

    def test_zero_power_rate(self):
        spec, system = _system("BC_PP_S2")
        assert achievable_rate(system, RX1, 0.0).bits == 0.0


class TestSlopes:
    def test_analytic_single_stream(self):
        est = estimate_slope(lambda p: math.log2(1 + p), 1, DEFAULT_GRID)
        assert 0.999 <= est.slope <= 1.001

    def test_grid_too_small(self):
        with pytest.raises(GridTooSmall):
            estimate_slope(lambda p: p, 1, [8.0])
        with pytest.raises(GridTooSmall):
            estimate_slope(lambda p: p, 1, [8.0, 4.0])

    def test_rate_slopes_match_nominal(self):
        spec, system = _system("BC_PP_S2")
        for node in (RX1, RX2):
            assert abs(rate_slope(system, node, 1).slope - 1.0) <= 0.05

    def test_bc43_block_rate(self):
        spec, system = _system("BC_S1_43")
        est = estimate_slope(
            lambda p: achievable_rate(system, RX1, p).bits, 1, DEFAULT_GRID)
        assert abs(est.slope - 4.0) <= 0.05

    def test_leakage_slope_bounded(self):
        spec, system = _system("MR_PPD")
        est = leakage_slope(system, EVE, ["v", "w"], 1)
        assert abs(est.slope) <= 0.05

    def test_composite_rate_slope(self):
        spec, system = _system("MR_S30_29_A", seed=2)
        est = rate_slope(system, RX1, spec.n_slots)
        assert abs(est.slope - 15.0 / 29.0) <= 0.05

    def test_every_scheme_tracks_its_accounting(self):
        """Measured prelog matches the exact bookkeeping for the whole library."""
        from sdof_lab.schemes import SCHEME_IDS, accounting

        for scheme_id in SCHEME_IDS:
            spec, system = _system(scheme_id, seed=3)
            nominal = accounting(spec).nominal_sdof
            for node in (RX1, RX2):
                if not system.message_sids(node):
                    continue
                est = rate_slope(system, node, spec.n_slots)
                assert abs(est.slope - float(nominal[node])) <= 0.05, \
                    (scheme_id, node, est.slope)


class TestMcOracle:
    def test_scalar_channel(self):
        system = _scalar_system()
        est = mc_mi_oracle(system, RX1, ["s"], 100.0, n_samples=200_000, seed=3)
        assert abs(est.bits - math.log2(101.0)) <= 0.02 * math.log2(101.0)
        assert est.std_error is not None

    def test_agreement_with_closed_form(self):
        spec, system = _system("MR_PPD", seed=8)
        exact = gaussian_mi(system, EVE, ["v", "w"], 1e4).bits
        est = mc_mi_oracle(system, EVE, ["v", "w"], 1e4, n_samples=200_000, seed=8)
        assert abs(est.bits - exact) <= max(0.02 * exact, 0.05)

    def test_zero_block(self):
        spec, system = _system("MR_PDP", seed=1)
        est = mc_mi_oracle(system, EVE, ["v1", "v2", "w"], 1e4,
                           n_samples=100_000, seed=1)
        assert abs(est.bits) <= max(3 * est.std_error, 1e-9)

    def test_dimension_cap(self):
        spec, system = _system("MR_S30_29_A")
        with pytest.raises(DimensionTooLarge):
            mc_mi_oracle(system, RX1, ["x0.0"], 1e4, n_samples=1000)


class TestOutputSymmetry:
    def test_independent_twin_within_three_se(self):
        rep = check_output_symmetry(Topology.wiretap(), n_trials=1000, seed=0)
        assert rep.abs_gap <= 3 * rep.std_error

    def test_zero_input_exact(self):
        rep = check_output_symmetry(Topology.wiretap(), n_trials=1000, seed=0,
                                    zero_input=True)
        noise_entropy = math.log2(math.pi * math.e)
        assert abs(rep.entropy_actual - noise_entropy) <= 1e-9
        assert rep.abs_gap <= 1e-9

    def test_twin_equals_actual_exact(self):
        rep = check_output_symmetry(Topology.wiretap(), n_trials=1000, seed=7,
                                    twin_equals_actual=True)
        assert rep.abs_gap <= 1e-9

    def test_gap_definition(self):
        rep = check_output_symmetry(Topology.broadcast(), n_trials=1000, seed=5)
        assert rep.abs_gap == abs(rep.entropy_actual - rep.entropy_twin)
