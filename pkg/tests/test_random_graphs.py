"""Random-graph samplers and the analytic degree/clustering properties."""

import math

import numpy as np
import pytest
from scipy import integrate, stats

from ggmsmc.graphs import degree_sequence
from ggmsmc.random_graphs import (
    BetaHyper,
    analytic_degree_moments,
    clustering_coefficient,
    degree_pmf,
    dispersion_index,
    factorial_moment,
    match_hyperparameters,
    neighbour_mean_degree,
    poisson_dispersion_shape,
    sample_barabasi_albert,
    sample_community,
    sample_connectivities,
    sample_erdos_renyi,
    sample_multiplicative,
    skewness_index,
)


class TestSampleConnectivities:
    def test_point_mass_limit(self):
        rng = np.random.default_rng(0)
        draws = sample_connectivities(BetaHyper(1e6, 1e6), 4000, rng)
        assert draws.std() < 1e-2
        assert abs(draws.mean() - 0.5) < 1e-3

    def test_uniform_mean(self):
        rng = np.random.default_rng(1)
        n = 20000
        draws = sample_connectivities(BetaHyper(1.0, 1.0), n, rng)
        assert abs(draws.mean() - 0.5) < 3.0 / math.sqrt(12 * n)

    def test_u_shape_concentrates_at_ends(self):
        # oracle: Beta(0.1, 0.1) cdf mass of the middle band
        rng = np.random.default_rng(2)
        draws = sample_connectivities(BetaHyper(0.1, 0.1), 50000, rng)
        middle = np.mean((draws > 0.4) & (draws < 0.6))
        expected = stats.beta.cdf(0.6, 0.1, 0.1) - stats.beta.cdf(0.4, 0.1, 0.1)
        assert middle < 0.1
        assert abs(middle - expected) < 0.01

    def test_rejects_bad_shapes(self):
        with pytest.raises(ValueError):
            BetaHyper(0.0, 1.0)


class TestGraphSamplers:
    def test_multiplicative_extremes(self):
        rng = np.random.default_rng(0)
        assert sample_multiplicative(np.ones(5), rng).edge_count == 10
        assert sample_multiplicative(np.zeros(5), rng).edge_count == 0

    def test_multiplicative_mean_edges(self):
        rng = np.random.default_rng(3)
        pi = np.full(20, math.sqrt(0.5))
        counts = [sample_multiplicative(pi, rng).edge_count for _ in range(4000)]
        # binomial oracle: 190 pairs at probability 1/2
        se = math.sqrt(190 * 0.25 / len(counts))
        assert abs(np.mean(counts) - 95.0) < 4 * se

    def test_erdos_renyi_extremes_and_mean(self):
        rng = np.random.default_rng(4)
        assert sample_erdos_renyi(6, 0.0, rng).edge_count == 0
        assert sample_erdos_renyi(6, 1.0, rng).edge_count == 15
        counts = [sample_erdos_renyi(10, 0.5, rng).edge_count for _ in range(4000)]
        se = math.sqrt(45 * 0.25 / len(counts))
        assert abs(np.mean(counts) - 22.5) < 4 * se
        with pytest.raises(ValueError):
            sample_erdos_renyi(4, 1.5, rng)

    def test_barabasi_albert_forced_triangle(self):
        rng = np.random.default_rng(5)
        g = sample_barabasi_albert(3, m=2, rng=rng)
        assert g.edge_count == 3

    def test_barabasi_albert_edge_count(self):
        rng = np.random.default_rng(6)
        g = sample_barabasi_albert(20, m=2, rng=rng)
        assert g.edge_count == 1 + 2 * 18

    def test_barabasi_albert_right_skew(self):
        rng = np.random.default_rng(7)
        hits = 0
        n = 300
        for _ in range(n):
            d = degree_sequence(sample_barabasi_albert(20, 2, rng)).astype(float)
            hits += stats.skew(d) > 0
        assert hits / n >= 0.95

    def test_barabasi_albert_rejects_impossible_m(self):
        with pytest.raises(ValueError):
            sample_barabasi_albert(4, m=3, rng=np.random.default_rng(0))

    def test_community_extremes(self):
        rng = np.random.default_rng(8)
        g = sample_community(6, within=1.0, across=0.0, rng=rng)
        # two disjoint triangles
        assert g.edge_count == 6
        assert not g.has_edge(1, 4)
        assert sample_community(6, within=0.0, across=0.0, rng=rng).edge_count == 0
        with pytest.raises(ValueError):
            sample_community(5, rng=rng)

    def test_community_mean_edges(self):
        rng = np.random.default_rng(9)
        counts = [sample_community(20, rng=rng).edge_count for _ in range(3000)]
        expected = 0.6 * 90 + 0.02 * 100
        se = math.sqrt((90 * 0.24 + 100 * 0.0196) / len(counts))
        assert abs(np.mean(counts) - expected) < 4 * se


class TestAnalyticMoments:
    def test_uniform_case(self):
        mean, var = analytic_degree_moments(BetaHyper(1.0, 1.0), 20)
        assert mean == pytest.approx(4.75)
        assert var == pytest.approx(10.6875)

    def test_erdos_renyi_limit(self):
        hyper = BetaHyper(1e8, 1e8)
        mean, var = analytic_degree_moments(hyper, 12)
        binom_var = 11 * 0.25 * (1 - 0.25)
        assert var == pytest.approx(binom_var, rel=1e-5)

    def test_single_node(self):
        assert analytic_degree_moments(BetaHyper(2.0, 3.0), 1) == (0.0, 0.0)

    def test_simulation_cross_check(self):
        rng = np.random.default_rng(10)
        hyper = BetaHyper(1.0, 1.0)
        degs = []
        for _ in range(20000):
            pi = sample_connectivities(hyper, 20, rng)
            degs.append(int(degree_sequence(sample_multiplicative(pi, rng))[0]))
        degs = np.asarray(degs, dtype=float)
        mean, var = analytic_degree_moments(hyper, 20)
        assert abs(degs.mean() - mean) < 4 * degs.std() / math.sqrt(len(degs))


class TestDegreePmf:
    @pytest.mark.parametrize("a,b,p", [(1.0, 1.0, 20), (0.1, 0.1, 20), (0.5, 20.0, 100)])
    def test_normalization(self, a, b, p):
        hyper = BetaHyper(a, b)
        total = sum(degree_pmf(hyper, p, d) for d in range(p))
        assert abs(total - 1.0) < 1e-8

    @pytest.mark.parametrize("a,b,p", [(1.0, 1.0, 20), (0.5, 20.0, 100)])
    def test_mean_consistency(self, a, b, p):
        hyper = BetaHyper(a, b)
        mean = sum(d * degree_pmf(hyper, p, d) for d in range(p))
        assert mean == pytest.approx(analytic_degree_moments(hyper, p)[0], abs=1e-6)

    def test_closed_form_when_b_is_one(self):
        # P(D = d) = C(p-1, d) a B(mu; a+d, p-d) / mu^a for b = 1, where the
        # incomplete Beta B(x; a, b) equals cdf(x) * B(a, b)
        from scipy.special import beta as beta_fn

        hyper = BetaHyper(1.7, 1.0)
        p, mu = 12, hyper.mean
        for d in (0, 3, 11):
            closed = (
                math.comb(p - 1, d)
                * hyper.a
                * stats.beta.cdf(mu, hyper.a + d, p - d)
                * beta_fn(hyper.a + d, p - d)
                / mu**hyper.a
            )
            assert degree_pmf(hyper, p, d) == pytest.approx(closed, rel=1e-9)

    def test_isolated_node_frequency(self):
        rng = np.random.default_rng(11)
        hyper = BetaHyper(1.0, 1.0)
        p, n = 20, 20000
        hits = 0
        for _ in range(n):
            pi = sample_connectivities(hyper, p, rng)
            hits += int(degree_sequence(sample_multiplicative(pi, rng))[0] == 0)
        phat = hits / n
        target = degree_pmf(hyper, p, 0)
        se = math.sqrt(target * (1 - target) / n)
        assert abs(phat - target) < 3 * se

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            degree_pmf(BetaHyper(1, 1), 5, 5)


class TestFactorialMoments:
    def test_first_equals_mean(self):
        hyper = BetaHyper(0.7, 2.2)
        assert factorial_moment(hyper, 15, 1) == pytest.approx(
            analytic_degree_moments(hyper, 15)[0], rel=1e-12
        )

    @pytest.mark.parametrize("k", [2, 19])
    def test_matches_pmf_sum(self, k):
        hyper = BetaHyper(1.0, 1.0)
        p = 20
        total = 0.0
        for d in range(p):
            if d >= k:
                total += math.perm(d, k) * degree_pmf(hyper, p, d)
        assert factorial_moment(hyper, p, k) == pytest.approx(total, rel=1e-6, abs=1e-9)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            factorial_moment(BetaHyper(1, 1), 5, 5)


class TestDispersionAndSkewness:
    def test_uniform_dispersion(self):
        assert dispersion_index(BetaHyper(1.0, 1.0), 20) == pytest.approx(2.25)

    def test_variance_over_mean_identity(self):
        hyper = BetaHyper(0.4, 3.3)
        mean, var = analytic_degree_moments(hyper, 30)
        assert dispersion_index(hyper, 30) == pytest.approx(var / mean, rel=1e-12)

    def test_degenerate_limit_underdispersed(self):
        assert dispersion_index(BetaHyper(1e9, 1e9), 25) == pytest.approx(0.75, rel=1e-4)

    def test_quadratic_root_gives_unit_dispersion(self):
        for b, p in [(1.0, 20), (5.0, 50), (20.0, 100)]:
            a = poisson_dispersion_shape(b, p)
            assert a**2 + (b + 1) * a - (p - 2) * b == pytest.approx(0.0, abs=1e-9)
            assert dispersion_index(BetaHyper(a, b), p) == pytest.approx(1.0, abs=1e-9)

    def test_skewness_matches_pmf(self):
        hyper = BetaHyper(1.0, 1.0)
        p = 20
        pmf = np.array([degree_pmf(hyper, p, d) for d in range(p)])
        d = np.arange(p)
        m = float(pmf @ d)
        v = float(pmf @ (d - m) ** 2)
        skew = float(pmf @ (d - m) ** 3) / v**1.5
        assert skewness_index(hyper, p) == pytest.approx(skew, abs=1e-6)

    def test_skew_signs(self):
        assert skewness_index(BetaHyper(0.5, 20.0), 100) > 0
        assert skewness_index(BetaHyper(20.0, 0.5), 100) < 0


class TestNeighbourMeanDegree:
    def test_two_nodes(self):
        assert neighbour_mean_degree(BetaHyper(2.0, 5.0), 2) == pytest.approx(1.0)

    def test_uniform_value(self):
        assert neighbour_mean_degree(BetaHyper(1.0, 1.0), 20) == pytest.approx(7.0)

    def test_simulation_and_flatness_in_source_degree(self):
        # E[deg(j) | edge (i, j)] matches the formula and does not depend on
        # the source node's degree: condition on the fixed pair (1, 2)
        rng = np.random.default_rng(12)
        hyper = BetaHyper(1.0, 1.0)
        p = 12
        by_source_degree: dict[int, list[int]] = {}
        for _ in range(40000):
            pi = sample_connectivities(hyper, p, rng)
            g = sample_multiplicative(pi, rng)
            if not g.has_edge(1, 2):
                continue
            deg = degree_sequence(g)
            by_source_degree.setdefault(int(deg[0]), []).append(int(deg[1]))
        target = neighbour_mean_degree(hyper, p)
        pooled = np.concatenate([np.asarray(v, float) for v in by_source_degree.values()])
        assert abs(pooled.mean() - target) < 4 * pooled.std() / math.sqrt(len(pooled))
        for vals in by_source_degree.values():
            vals = np.asarray(vals, float)
            if len(vals) > 400:
                assert abs(vals.mean() - target) < 5 * vals.std() / math.sqrt(len(vals))


class TestClusteringCoefficient:
    def test_uniform_value_and_integral_oracle(self):
        # (sigma^2 + mu^2) / mu with Beta(1, 1) moments: E[pi^2]/E[pi] = (1/3)/(1/2)
        val, _ = integrate.quad(lambda t: t * t, 0, 1)
        mean, _ = integrate.quad(lambda t: t, 0, 1)
        assert clustering_coefficient(BetaHyper(1.0, 1.0)) == pytest.approx(val / mean)
        assert clustering_coefficient(BetaHyper(1.0, 1.0)) == pytest.approx(2.0 / 3.0)

    def test_b_to_zero_limit(self):
        assert clustering_coefficient(BetaHyper(1.0, 1e-9)) == pytest.approx(1.0, abs=1e-8)

    def test_u_shaped_value_vs_simulation(self):
        # the realized triangle-to-wedge ratio estimates the SQUARE of the
        # coefficient, so compare its square root
        assert clustering_coefficient(BetaHyper(0.1, 0.1)) == pytest.approx(11.0 / 12.0)
        rng = np.random.default_rng(13)
        tri = wedges = 0.0
        for _ in range(4000):
            pi = sample_connectivities(BetaHyper(0.1, 0.1), 20, rng)
            a = sample_multiplicative(pi, rng).adjacency.astype(float)
            a2 = a @ a
            tri += float(np.sum(a2 * a)) / 2.0  # 3 * triangle count
            d = a.sum(axis=1)
            wedges += float(np.sum(d * (d - 1)) / 2.0)
        assert abs(math.sqrt(tri / wedges) - 11.0 / 12.0) < 0.01


class TestMatchHyperparameters:
    def test_round_trip_uniform(self):
        hyper = match_hyperparameters(4.75, 10.6875, 20)
        assert hyper.a == pytest.approx(1.0, abs=1e-9)
        assert hyper.b == pytest.approx(1.0, abs=1e-9)

    def test_round_trip_property(self):
        rng = np.random.default_rng(14)
        for _ in range(50):
            a, b, p = rng.uniform(0.2, 5), rng.uniform(0.2, 5), int(rng.integers(5, 40))
            mean, var = analytic_degree_moments(BetaHyper(a, b), p)
            back = match_hyperparameters(mean, var, p)
            mean2, var2 = analytic_degree_moments(back, p)
            assert mean2 == pytest.approx(mean, abs=1e-6)
            assert var2 == pytest.approx(var, abs=1e-6)

    def test_infeasible_variance_falls_back(self):
        hyper = match_hyperparameters(4.75, 3.0, 20)
        assert hyper.b == 1000.0
        mean, _ = analytic_degree_moments(hyper, 20)
        assert mean == pytest.approx(4.75, abs=1e-6)

    def test_rejects_bad_mean(self):
        with pytest.raises(ValueError):
            match_hyperparameters(19.5, 1.0, 20)


class TestDistributionalIdentities:
    def test_conditional_binomial_chi_square(self):
        # degree of a node with fixed connectivity is Binomial(p-1, mu * pi)
        rng = np.random.default_rng(15)
        hyper = BetaHyper(1.0, 1.0)
        p, pi_fixed, n = 10, 0.7, 20000
        counts = np.zeros(p)
        for _ in range(n):
            pi = sample_connectivities(hyper, p, rng)
            pi[0] = pi_fixed
            counts[degree_sequence(sample_multiplicative(pi, rng))[0]] += 1
        expected = n * stats.binom.pmf(np.arange(p), p - 1, hyper.mean * pi_fixed)
        keep = expected > 5
        stat = float(np.sum((counts[keep] - expected[keep]) ** 2 / expected[keep]))
        # fold the tail bins into the test implicitly by comparing kept bins only
        pval = 1 - stats.chi2.cdf(stat, keep.sum() - 1)
        assert pval > 0.01

    def test_matches_erdos_renyi_when_constant(self):
        rng = np.random.default_rng(16)
        alpha = 0.3
        pi = np.full(12, math.sqrt(alpha))
        a_counts = [sample_multiplicative(pi, rng).edge_count for _ in range(3000)]
        b_counts = [sample_erdos_renyi(12, alpha, rng).edge_count for _ in range(3000)]
        assert stats.mannwhitneyu(a_counts, b_counts).pvalue > 0.01

    def test_edge_probability_given_connectivity(self):
        # P(edge to a fixed node with connectivity pi) = mu * pi
        rng = np.random.default_rng(17)
        hyper = BetaHyper(2.0, 3.0)
        p, pi_fixed, n = 8, 0.6, 30000
        hits = 0
        for _ in range(n):
            pi = sample_connectivities(hyper, p, rng)
            pi[0] = pi_fixed
            hits += int(sample_multiplicative(pi, rng).has_edge(1, 2))
        target = hyper.mean * pi_fixed
        se = math.sqrt(target * (1 - target) / n)
        assert abs(hits / n - target) < 4 * se
