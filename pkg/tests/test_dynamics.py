import numpy as np
import pytest

from sglab import (
    MAX,
    StopReason,
    StopRule,
    as_operator,
    build_network,
    cofinality_witness,
    decay_margin,
    identity,
    iterate,
    linear,
    max_fixed_point,
    min_fixed_point,
    stability_battery,
    sup_norm,
)
from conftest import contracting_sum_network, random_kfun, random_network


class TestApply:
    def test_plain(self, two_node_half):
        np.testing.assert_array_equal(as_operator(two_node_half)(np.ones(2)), [0.5, 0.5])

    def test_augmented(self, two_node_half):
        np.testing.assert_array_equal(as_operator(two_node_half).augmented()(np.ones(2)), [1.0, 1.0])

    def test_enlarged(self, two_node_half):
        op = as_operator(two_node_half).enlarge_left(identity())
        np.testing.assert_array_equal(op(np.ones(2)), [1.0, 1.0])

    def test_empty_in_neighbors_give_zero(self):
        net = build_network(3, [(0, 1, linear(0.5))], MAX)
        out = as_operator(net)(np.ones(3))
        assert out[0] == 0.0 and out[2] == 0.0 and out[1] == 0.5

    def test_restricted_matches_subnetwork(self, chain10):
        from sglab import subnetwork

        nodes = [0, 1, 2, 3, 4]
        op = as_operator(chain10).restricted(nodes)
        sub = as_operator(subnetwork(chain10, nodes))
        rng = np.random.default_rng(0)
        for _ in range(10):
            s = rng.uniform(0, 2, 10)
            full = op(s)
            assert np.all(full[5:] == 0)
            np.testing.assert_array_equal(full[:5], sub(s[:5]))

    def test_index_mismatch(self, two_node_half):
        with pytest.raises(ValueError):
            as_operator(two_node_half)(np.ones(3))

    def test_batch_columns_match_single(self, chain10):
        rng = np.random.default_rng(1)
        op = as_operator(chain10).enlarge_left(linear(0.1)).augmented()
        batch = rng.uniform(0, 2, (10, 7))
        out = op(batch)
        for k in range(7):
            np.testing.assert_array_equal(out[:, k], op(batch[:, k]))


class TestIterate:
    def test_geometric_decay(self, two_node_half):
        traj = iterate(two_node_half, np.ones(2))
        assert traj.stop_reason is StopReason.CONVERGED
        np.testing.assert_allclose(traj.states[1], [0.5, 0.5])
        np.testing.assert_allclose(traj.states[2], [0.25, 0.25])
        assert sup_norm(traj.final) < 1e-9

    def test_divergence(self, two_node_double):
        traj = iterate(two_node_double, np.ones(2), StopRule(divergence_bound=1e6))
        assert traj.stop_reason is StopReason.DIVERGED

    def test_zero_start(self, two_node_half):
        traj = iterate(two_node_half, np.zeros(2))
        assert traj.stop_reason is StopReason.CONVERGED
        assert sup_norm(traj.final) == 0.0


class TestMinFixedPoint:
    def test_floor_already_fixed(self, two_node_half):
        res = min_fixed_point(two_node_half, np.ones(2))
        assert res.status is StopReason.CONVERGED
        np.testing.assert_array_equal(res.point, [1.0, 1.0])

    def test_hand_example(self, two_node_half):
        res = min_fixed_point(two_node_half, np.array([4.0, 0.0]))
        np.testing.assert_array_equal(res.point, [4.0, 2.0])

    def test_divergence_reported(self, two_node_double):
        res = min_fixed_point(two_node_double, np.ones(2))
        assert res.status is StopReason.DIVERGED

    def test_brute_force_oracle(self):
        rng = np.random.default_rng(31)
        for _ in range(20):
            net = contracting_sum_network(rng)
            b = rng.uniform(0, 2, net.n)
            res = min_fixed_point(net, b)
            assert res.status is StopReason.CONVERGED
            # independent oracle: iterate the defining map directly
            op = as_operator(net)
            s = b.copy()
            for _ in range(400):
                s = np.maximum(b, op(s))
            assert sup_norm(s - res.point) < 1e-7
            assert res.residual < 1e-8


class TestMaxFixedPoint:
    def test_unique_fp_matches_min(self, two_node_half):
        res = max_fixed_point(two_node_half, np.ones(2), r_cap=4.0)
        np.testing.assert_allclose(res.point, [1.0, 1.0], atol=1e-10)

    def test_zero_floor(self, two_node_half):
        res = max_fixed_point(two_node_half, np.zeros(2), r_cap=1.0)
        assert sup_norm(res.point) < 1e-8

    def test_chain3_unique(self, chain3):
        b = np.ones(3)
        lo = min_fixed_point(chain3, b)
        hi = max_fixed_point(chain3, b, r_cap=4.0)
        assert sup_norm(hi.point - lo.point) < 1e-8
        assert hi.residual < 1e-10

    def test_cap_below_floor_rejected(self, two_node_half):
        with pytest.raises(ValueError):
            max_fixed_point(two_node_half, 2.0 * np.ones(2), r_cap=1.0)


class TestDecayMargin:
    def test_inside(self, two_node_half):
        np.testing.assert_array_equal(decay_margin(two_node_half, np.ones(2)), [0.5, 0.5])

    def test_outside(self, two_node_double):
        np.testing.assert_array_equal(decay_margin(two_node_double, np.ones(2)), [-1.0, -1.0])

    def test_mixed(self, two_node_half):
        margin = decay_margin(two_node_half, np.array([1.0, 0.4]))
        np.testing.assert_allclose(margin, [0.8, -0.1])


class TestCofinality:
    def test_already_decaying(self, two_node_half):
        res = cofinality_witness(two_node_half, np.ones(2))
        assert res.status == "witness" and res.n == 1
        np.testing.assert_allclose(res.point, [1.0, 1.0])

    def test_matches_min_fixed_point(self, two_node_half):
        res = cofinality_witness(two_node_half, np.array([4.0, 0.0]))
        np.testing.assert_allclose(res.point, [4.0, 2.0], atol=1e-9)

    def test_divergence(self, two_node_double):
        assert cofinality_witness(two_node_double, np.ones(2)).status == "diverged"


class TestStabilityBattery:
    def test_contracting_pair(self, two_node_half):
        rep = stability_battery(two_node_half, r_grid=[1.0], n_max=30)
        np.testing.assert_allclose(rep.kl_table[0][:6], 0.5 ** np.arange(6))
        assert rep.ugas_evidence

    def test_expanding_pair(self, two_node_double):
        rep = stability_battery(two_node_double, r_grid=[1.0], n_max=20)
        np.testing.assert_allclose(rep.kl_table[0][:6], 2.0 ** np.arange(6))
        assert not rep.gatt_evidence and not rep.ugs_evidence

    def test_chain10_row_sum_bound(self, chain10):
        rep = stability_battery(chain10, r_grid=[1.0], n_max=40)
        assert np.all(rep.kl_table[0] <= 0.5 ** np.arange(41) + 1e-12)
        assert rep.ugas_evidence

    def test_beta_starts_at_r(self, two_node_half):
        rep = stability_battery(two_node_half, r_grid=[0.25, 1.0, 4.0], n_max=10)
        np.testing.assert_array_equal(rep.kl_table[:, 0], [0.25, 1.0, 4.0])

    def test_table_monotone_iff_rays_decay(self, two_node_half, two_node_double):
        good = stability_battery(two_node_half, r_grid=[1.0], n_max=12)
        assert np.all(np.diff(good.kl_table[0]) <= 0)
        bad = stability_battery(two_node_double, r_grid=[1.0], n_max=12)
        assert np.any(np.diff(bad.kl_table[0]) > 0)


class TestOperatorIdentities:
    def test_monotonicity_all_variants(self):
        rng = np.random.default_rng(41)
        pairs = 0
        while pairs < 500:
            net = random_network(rng)
            op = as_operator(net)
            rho = random_kfun(rng, slope_range=(0.05, 1.0))
            variants = [
                op,
                op.enlarge_left(rho),
                op.enlarge_right(rho),
                op.augmented(),
                op.projected(rng.uniform(0, 2, net.n)),
            ]
            for _ in range(5):
                s1 = rng.uniform(0, 3, net.n)
                s2 = s1 + rng.uniform(0, 2, net.n)
                for v in variants:
                    assert np.all(v(s1) <= v(s2))
                pairs += 1

    def test_conjugacy(self):
        rng = np.random.default_rng(43)
        for _ in range(50):
            net = random_network(rng)
            rho = random_kfun(rng, slope_range=(0.05, 1.0))
            op = as_operator(net)
            left, right = op.enlarge_left(rho), op.enlarge_right(rho)
            s = rng.uniform(0, 3, net.n)
            inner = right(s)
            lhs = inner + rho(inner)
            rhs = left(s + rho(s))
            assert sup_norm(lhs - rhs) <= 1e-10 * max(1.0, sup_norm(rhs))

    def test_augmented_equals_projected_at_start(self):
        rng = np.random.default_rng(47)
        for _ in range(30):
            net = random_network(rng)
            op = as_operator(net)
            s = rng.uniform(0, 2, net.n)
            a, b = s.copy(), s.copy()
            aug, proj = op.augmented(), op.projected(s)
            for _ in range(20):
                a, b = aug(a), proj(b)
                np.testing.assert_array_equal(a, b)

    def test_augmented_dominates_argument(self):
        rng = np.random.default_rng(53)
        for _ in range(30):
            net = random_network(rng)
            op = as_operator(net)
            s = rng.uniform(0, 2, net.n)
            b = rng.uniform(0, 2, net.n)
            assert np.all(op.augmented()(s) >= s)
            assert np.all(op.projected(b)(s) >= b)

    def test_gain_floor_through_edges(self):
        rng = np.random.default_rng(59)
        for _ in range(20):
            net = random_network(rng, p_edge=0.8)
            if not net.all_in_nonempty:
                continue
            op = as_operator(net)
            floor = net.xi.compose(net.eta)
            for _ in range(5):
                s = rng.uniform(0, 3, net.n)
                out = op(s)
                for j, i, _ in net.edges:
                    assert out[i] >= floor(s[j]) - 1e-12

    def test_fixed_point_monotone_in_floor(self):
        rng = np.random.default_rng(61)
        for _ in range(25):
            net = contracting_sum_network(rng)
            b1 = rng.uniform(0, 2, net.n)
            b2 = b1 + rng.uniform(0, 1, net.n)
            lo1, lo2 = min_fixed_point(net, b1), min_fixed_point(net, b2)
            hi1 = max_fixed_point(net, b1, r_cap=8.0)
            hi2 = max_fixed_point(net, b2, r_cap=8.0)
            tol = 1e-8
            assert np.all(lo1.point <= lo2.point + tol)
            assert np.all(hi1.point <= hi2.point + tol)
            assert np.all(lo1.point <= hi1.point + tol)

    def test_max_type_closed_form(self):
        rng = np.random.default_rng(67)
        for _ in range(30):
            net = random_network(rng, maf=MAX)
            rho = random_kfun(rng, slope_range=(0.05, 0.5))
            en = as_operator(net).enlarge_left(rho)
            s, b = rng.uniform(0, 2, net.n), rng.uniform(0, 2, net.n)
            proj = en.projected(b)
            lhs = s.copy()
            pow_s, pow_b, acc = s.copy(), b.copy(), b.copy()
            for _ in range(20):
                lhs = proj(lhs)
                pow_s = en(pow_s)
                rhs = np.maximum(pow_s, acc)
                scale = max(1.0, sup_norm(rhs))
                assert sup_norm(lhs - rhs) <= 1e-12 * scale
                pow_b = en(pow_b)
                acc = np.maximum(acc, pow_b)

    def test_subadditive_contraction(self):
        rng = np.random.default_rng(71)
        for _ in range(30):
            net = contracting_sum_network(rng, row_sum=1.2)
            op = as_operator(net)
            r = float(rng.uniform(0, 2))
            proj = op.projected(r * np.ones(net.n))
            s1 = rng.uniform(0, 2, net.n)
            s2 = s1 + rng.uniform(0, 2, net.n)
            a, b, d = s1.copy(), s2.copy(), s2 - s1
            for _ in range(15):
                a, b, d = proj(a), proj(b), op(d)
                assert np.all(b - a <= d + 1e-12 * max(1.0, sup_norm(d)))
