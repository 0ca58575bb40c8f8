//! Community influence metrics: reciprocity, follower/followee balance,
//! hierarchy and homophily deltas over DI scores, and the distribution fits
//! used to summarise them.

use serde::{Deserialize, Serialize};
use statrs::function::beta::ln_beta;
use statrs::function::gamma::digamma;

use crate::error::{Error, Result};
use crate::graph::{sorted_intersection, CommunityGraph, NodeId};
use crate::ingest::DiScore;

/// Fraction of `u`'s followers that `u` follows back.
pub fn reciprocal_level(g: &CommunityGraph, u: NodeId) -> Result<f64> {
    let followers = g.out_neighbors(u)?;
    if followers.is_empty() {
        return Err(Error::UndefinedReciprocalLevel(u));
    }
    let mutual = sorted_intersection(followers, g.followees(u)).len();
    Ok(mutual as f64 / followers.len() as f64)
}

/// Reciprocal level of every node that has at least one follower.
pub fn reciprocal_levels(g: &CommunityGraph) -> Vec<(NodeId, f64)> {
    g.nodes()
        .filter_map(|u| reciprocal_level(g, u).ok().map(|r| (u, r)))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FollowSummary {
    /// `(follower_count, followee_count)` per node.
    pub counts: Vec<(usize, usize)>,
    /// Percentage of nodes with more followees than followers.
    pub above_pct: f64,
    /// Percentage of nodes with fewer followees than followers.
    pub below_pct: f64,
    /// Percentage of nodes with equal counts.
    pub diagonal_pct: f64,
}

pub fn follower_followee_summary(g: &CommunityGraph) -> FollowSummary {
    let counts: Vec<(usize, usize)> = g
        .nodes()
        .map(|u| (g.followers(u).len(), g.followees(u).len()))
        .collect();
    let (mut above, mut below, mut diagonal) = (0usize, 0usize, 0usize);
    for &(followers, followees) in &counts {
        match followees.cmp(&followers) {
            std::cmp::Ordering::Greater => above += 1,
            std::cmp::Ordering::Less => below += 1,
            std::cmp::Ordering::Equal => diagonal += 1,
        }
    }
    let pct = |k: usize| {
        if counts.is_empty() {
            0.0
        } else {
            100.0 * k as f64 / counts.len() as f64
        }
    };
    FollowSummary {
        above_pct: pct(above),
        below_pct: pct(below),
        diagonal_pct: pct(diagonal),
        counts,
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HierarchyDelta {
    pub node: NodeId,
    /// DI minus mean follower DI.
    pub delta_r: f64,
    /// DI minus mean followee DI.
    pub delta_e: f64,
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomophilyDelta {
    pub node: NodeId,
    /// Mean |DI(u) - DI(v)| over reciprocal followers.
    pub delta_re: f64,
    /// Same over followers that are not followed back.
    pub delta_nre: f64,
}

fn mean_of<I: Iterator<Item = f64>>(values: I) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn scores<'a>(nodes: &'a [NodeId], di: &'a [Option<DiScore>]) -> impl Iterator<Item = f64> + 'a {
    nodes
        .iter()
        .filter_map(move |v| di[v.index()].map(DiScore::value))
}

/// Neighbours without a DI score are left out of the means; nodes without a
/// DI score, or whose scored follower or followee set is empty, are skipped.
pub fn hierarchy_deltas(g: &CommunityGraph, di: &[Option<DiScore>]) -> Vec<HierarchyDelta> {
    assert_eq!(di.len(), g.node_count());
    g.nodes()
        .filter_map(|u| {
            let own = di[u.index()]?.value();
            let followers = mean_of(scores(g.followers(u), di))?;
            let followees = mean_of(scores(g.followees(u), di))?;
            Some(HierarchyDelta {
                node: u,
                delta_r: own - followers,
                delta_e: own - followees,
            })
        })
        .collect()
}

pub fn homophily_deltas(g: &CommunityGraph, di: &[Option<DiScore>]) -> Vec<HomophilyDelta> {
    assert_eq!(di.len(), g.node_count());
    g.nodes()
        .filter_map(|u| {
            let own = di[u.index()]?.value();
            let followees = g.followees(u);
            let (reciprocal, one_way): (Vec<NodeId>, Vec<NodeId>) = g
                .followers(u)
                .iter()
                .partition(|v| followees.binary_search(v).is_ok());
            let distance = |set: &[NodeId]| mean_of(scores(set, di).map(|s| (own - s).abs()));
            Some(HomophilyDelta {
                node: u,
                delta_re: distance(&reciprocal)?,
                delta_nre: distance(&one_way)?,
            })
        })
        .collect()
}

/// Product-moment correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::UndefinedCorrelation("fewer than two points"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("zero variance"));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaFit {
    pub alpha: f64,
    pub beta: f64,
    /// Total log-likelihood of the fitted samples.
    pub log_likelihood: f64,
    pub iterations: usize,
}

pub const BETA_FIT_MIN_SAMPLES: usize = 10;
pub const BETA_FIT_MAX_ITER: usize = 200;
pub const BETA_FIT_GRAD_TOL: f64 = 1e-8;
/// Samples are clamped to `[CLAMP, 1 - CLAMP]` before fitting.
pub const BETA_FIT_CLAMP: f64 = 1e-6;

/// Trigamma function, by upward recurrence and the asymptotic series.
pub fn trigamma(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 10.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    acc + inv
        + inv2 / 2.0
        + inv
            * inv2
            * (1.0 / 6.0
                - inv2
                    * (1.0 / 30.0 - inv2 * (1.0 / 42.0 - inv2 * (1.0 / 30.0 - inv2 * 5.0 / 66.0))))
}

/// Maximum-likelihood Beta(alpha, beta) fit by damped Newton iteration on
/// the score equations, started from the method-of-moments estimate.
pub fn beta_mle_fit(samples: &[f64]) -> Result<BetaFit> {
    if samples.len() < BETA_FIT_MIN_SAMPLES {
        return Err(Error::InsufficientSamples {
            needed: BETA_FIT_MIN_SAMPLES,
            got: samples.len(),
        });
    }
    if let Some(bad) = samples.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(Error::InvalidArgument(format!(
            "beta sample {bad} outside [0, 1]"
        )));
    }
    let n = samples.len() as f64;
    let clamped: Vec<f64> = samples
        .iter()
        .map(|x| x.clamp(BETA_FIT_CLAMP, 1.0 - BETA_FIT_CLAMP))
        .collect();
    let mean = clamped.iter().sum::<f64>() / n;
    let var = clamped.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    if var <= 0.0 {
        return Err(Error::DegenerateFit("zero-variance sample".into()));
    }
    let ln_x = clamped.iter().map(|x| x.ln()).sum::<f64>() / n;
    let ln_1mx = clamped.iter().map(|x| (-x).ln_1p()).sum::<f64>() / n;

    // mean log-likelihood per sample
    let objective = |a: f64, b: f64| (a - 1.0) * ln_x + (b - 1.0) * ln_1mx - ln_beta(a, b);

    let common = mean * (1.0 - mean) / var - 1.0;
    let (mut a, mut b) = if common > 0.0 {
        (mean * common, (1.0 - mean) * common)
    } else {
        (1.0, 1.0)
    };

    let score = |a: f64, b: f64| {
        let psi_ab = digamma(a + b);
        (ln_x - digamma(a) + psi_ab, ln_1mx - digamma(b) + psi_ab)
    };

    for iter in 0..BETA_FIT_MAX_ITER {
        let (ga, gb) = score(a, b);
        let norm = ga.hypot(gb);
        if norm < BETA_FIT_GRAD_TOL {
            return Ok(BetaFit {
                alpha: a,
                beta: b,
                log_likelihood: n * objective(a, b),
                iterations: iter,
            });
        }
        let t_ab = trigamma(a + b);
        let (haa, hbb, hab) = (t_ab - trigamma(a), t_ab - trigamma(b), t_ab);
        let det = haa * hbb - hab * hab;
        if !det.is_finite() || det == 0.0 {
            return Err(Error::DegenerateFit("singular Hessian".into()));
        }
        let da = -(hbb * ga - hab * gb) / det;
        let db = -(haa * gb - hab * ga) / det;

        let current = objective(a, b);
        let mut step = 1.0;
        loop {
            let (na, nb) = (a + step * da, b + step * db);
            // near the optimum the likelihood change drowns in rounding, so
            // a smaller score also counts as progress
            if na > 0.0
                && nb > 0.0
                && (objective(na, nb) > current || {
                    let (ha, hb) = score(na, nb);
                    ha.hypot(hb) < norm
                })
            {
                a = na;
                b = nb;
                break;
            }
            step *= 0.5;
            if step < 1e-12 {
                return Err(Error::NonConvergence {
                    alpha: a,
                    beta: b,
                    iterations: iter,
                });
            }
        }
    }
    Err(Error::NonConvergence {
        alpha: a,
        beta: b,
        iterations: BETA_FIT_MAX_ITER,
    })
}

/// Fits a beta distribution to DI scores mapped onto `[0, 1]` by `DI / 100`.
pub fn di_beta_fit(di: &[Option<DiScore>]) -> Result<BetaFit> {
    let samples: Vec<f64> = di.iter().flatten().map(|d| d.value() / 100.0).collect();
    beta_mle_fit(&samples)
}

/// Fixed-width histogram. The last bin is closed on the right.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// Values outside `[edges[0], edges[last]]`.
    pub out_of_range: u64,
}

impl Histogram {
    pub fn fixed_width<I: IntoIterator<Item = f64>>(
        values: I,
        lo: f64,
        hi: f64,
        width: f64,
    ) -> Self {
        assert!(hi > lo && width > 0.0);
        let bins = ((hi - lo) / width).round().max(1.0) as usize;
        let edges = (0..=bins).map(|i| lo + i as f64 * width).collect();
        let mut counts = vec![0u64; bins];
        let mut out_of_range = 0;
        for v in values {
            if !(lo..=hi).contains(&v) {
                out_of_range += 1;
                continue;
            }
            let idx = (((v - lo) / width) + 1e-9).floor() as usize;
            counts[idx.min(bins - 1)] += 1;
        }
        Histogram {
            edges,
            counts,
            out_of_range,
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

pub const RECIPROCAL_BIN_WIDTH: f64 = 0.05;
pub const DI_BIN_WIDTH: f64 = 1.0;

pub fn reciprocal_histogram(levels: &[(NodeId, f64)]) -> Histogram {
    Histogram::fixed_width(
        levels.iter().map(|&(_, r)| r),
        0.0,
        1.0,
        RECIPROCAL_BIN_WIDTH,
    )
}

pub fn di_histogram(di: &[Option<DiScore>]) -> Histogram {
    Histogram::fixed_width(
        di.iter().flatten().map(|d| d.value()),
        10.0,
        100.0,
        DI_BIN_WIDTH,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{compute_di, ProfileRecord};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_distr::{Beta as BetaDist, Distribution};

    fn graph(n: usize, follows: &[(u32, u32)]) -> CommunityGraph {
        CommunityGraph::from_follows(n, follows.iter().map(|&(a, b)| (NodeId(a), NodeId(b))))
            .unwrap()
            .0
    }

    fn di(v: f64) -> Option<DiScore> {
        compute_di(&ProfileRecord {
            external_id: String::new(),
            created_at: 0,
            is_private: false,
            klout: Some(v),
            peerindex: Some(v),
        })
    }

    #[test]
    fn reciprocal_level_cases() {
        // u=0, a=1, b=2, c=3: followers {a, c}, followees {a, b}
        let g = graph(4, &[(1, 0), (3, 0), (0, 1), (0, 2)]);
        assert_eq!(reciprocal_level(&g, NodeId(0)).unwrap(), 0.5);
        let all = graph(3, &[(1, 0), (2, 0), (0, 1), (0, 2)]);
        assert_eq!(reciprocal_level(&all, NodeId(0)).unwrap(), 1.0);
        let none = graph(3, &[(1, 0), (2, 0)]);
        assert_eq!(reciprocal_level(&none, NodeId(0)).unwrap(), 0.0);
        assert!(matches!(
            reciprocal_level(&none, NodeId(1)),
            Err(Error::UndefinedReciprocalLevel(_))
        ));
    }

    #[test]
    fn follow_summary_cases() {
        let s = follower_followee_summary(&graph(2, &[(0, 1), (1, 0)]));
        assert_eq!(s.diagonal_pct, 100.0);
        let s = follower_followee_summary(&graph(2, &[(0, 1)]));
        assert_eq!(s.counts, vec![(0, 1), (1, 0)]);
        assert_eq!(
            (s.above_pct, s.below_pct, s.diagonal_pct),
            (50.0, 50.0, 0.0)
        );
        let s = follower_followee_summary(&graph(3, &[]));
        assert_eq!(s.counts, vec![(0, 0); 3]);
        assert_eq!(s.diagonal_pct, 100.0);
    }

    #[test]
    fn hierarchy_cases() {
        // node 0 followed by 1, 2; follows 3
        let g = graph(4, &[(1, 0), (2, 0), (0, 3)]);
        let scores = vec![di(50.0), di(30.0), di(40.0), di(60.0)];
        let d = hierarchy_deltas(&g, &scores);
        assert_eq!(d.len(), 1);
        assert_eq!(
            d[0],
            HierarchyDelta {
                node: NodeId(0),
                delta_r: 15.0,
                delta_e: -10.0
            }
        );

        let flat = vec![di(50.0); 4];
        assert!(hierarchy_deltas(&g, &flat)
            .iter()
            .all(|h| h.delta_r == 0.0 && h.delta_e == 0.0));

        // unscored followers are ignored; no scored follower -> discarded
        let partial = vec![di(50.0), None, None, di(60.0)];
        assert!(hierarchy_deltas(&g, &partial).is_empty());
    }

    #[test]
    fn homophily_cases() {
        // node 0: reciprocal followers 1, 2; one-way followers 3, 4
        let g = graph(5, &[(1, 0), (2, 0), (3, 0), (4, 0), (0, 1), (0, 2)]);
        let scores = vec![di(40.0), di(38.0), di(42.0), di(10.0), di(70.0)];
        let d = homophily_deltas(&g, &scores);
        assert_eq!(
            d,
            vec![HomophilyDelta {
                node: NodeId(0),
                delta_re: 2.0,
                delta_nre: 30.0
            }]
        );

        let flat = vec![di(40.0); 5];
        assert_eq!(homophily_deltas(&g, &flat)[0].delta_re, 0.0);
        assert_eq!(homophily_deltas(&g, &flat)[0].delta_nre, 0.0);

        let no_reciprocal = graph(3, &[(1, 0), (2, 0)]);
        assert!(homophily_deltas(&no_reciprocal, &[di(40.0), di(40.0), di(40.0)]).is_empty());
    }

    #[test]
    fn pearson_cases() {
        assert_abs_diff_eq!(
            pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(),
            -1.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            pearson(&[1.0, 2.0, 3.0, 4.0], &[2.0, 1.0, 4.0, 3.0]).unwrap(),
            0.6,
            epsilon = 1e-12
        );
        assert!(matches!(
            pearson(&[1.0, 1.0], &[1.0, 2.0]),
            Err(Error::UndefinedCorrelation(_))
        ));
        assert!(pearson(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn trigamma_matches_known_values_and_derivative_of_digamma() {
        let pi2_6 = std::f64::consts::PI.powi(2) / 6.0;
        assert_abs_diff_eq!(trigamma(1.0), pi2_6, epsilon = 1e-12);
        assert_abs_diff_eq!(
            trigamma(0.5),
            std::f64::consts::PI.powi(2) / 2.0,
            epsilon = 1e-11
        );
        for &x in &[0.3f64, 1.7, 4.2, 9.0, 55.0] {
            let h = 1e-5 * x.max(1.0);
            let fd = (digamma(x + h) - digamma(x - h)) / (2.0 * h);
            assert!((trigamma(x) - fd).abs() < 1e-6 * trigamma(x), "x={x}");
        }
    }

    fn beta_samples(a: f64, b: f64, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = rand_pcg::Pcg64Mcg::seed_from_u64(seed);
        let d = BetaDist::new(a, b).unwrap();
        (0..n).map(|_| d.sample(&mut rng)).collect()
    }

    #[test]
    fn beta_fit_errors() {
        assert!(matches!(
            beta_mle_fit(&[0.5; 5]),
            Err(Error::InsufficientSamples { needed: 10, got: 5 })
        ));
        assert!(matches!(
            beta_mle_fit(&[0.5; 50]),
            Err(Error::DegenerateFit(_)) | Err(Error::NonConvergence { .. })
        ));
        assert!(beta_mle_fit(&[1.5; 20]).is_err());
    }

    #[test]
    fn beta_fit_recovers_parameters_across_range() {
        for (i, &(a, b)) in [(1.0, 1.0), (2.0, 5.0), (7.5, 3.0), (10.0, 10.0), (1.3, 8.8)]
            .iter()
            .enumerate()
        {
            let fit = beta_mle_fit(&beta_samples(a, b, 100_000, 100 + i as u64)).unwrap();
            assert!((fit.alpha / a - 1.0).abs() < 0.05, "{fit:?} vs {a}");
            assert!((fit.beta / b - 1.0).abs() < 0.05, "{fit:?} vs {b}");
            assert!(fit.log_likelihood.is_finite());
        }
    }

    #[test]
    fn beta_fit_is_a_likelihood_maximum() {
        let xs = beta_samples(2.5, 4.0, 2_000, 9);
        let fit = beta_mle_fit(&xs).unwrap();
        let ll = |a: f64, b: f64| {
            xs.iter()
                .map(|x| (a - 1.0) * x.ln() + (b - 1.0) * (1.0 - x).ln())
                .sum::<f64>()
                - xs.len() as f64 * ln_beta(a, b)
        };
        assert_abs_diff_eq!(ll(fit.alpha, fit.beta), fit.log_likelihood, epsilon = 1e-6);
        for (da, db) in [
            (0.01, 0.0),
            (-0.01, 0.0),
            (0.0, 0.01),
            (0.0, -0.01),
            (0.01, 0.01),
        ] {
            assert!(ll(fit.alpha + da, fit.beta + db) < fit.log_likelihood);
        }
    }

    #[test]
    fn histogram_bins() {
        let h = Histogram::fixed_width([0.0, 0.05, 0.5, 0.95, 1.0, 1.2], 0.0, 1.0, 0.05);
        assert_eq!(h.counts.len(), 20);
        assert_eq!(h.counts[0], 1);
        assert_eq!(h.counts[1], 1);
        assert_eq!(h.counts[10], 1);
        assert_eq!(h.counts[19], 2);
        assert_eq!(h.out_of_range, 1);
        assert_eq!(h.total(), 5);
    }

    fn arb_scored_graph() -> impl Strategy<Value = (CommunityGraph, Vec<Option<DiScore>>)> {
        (2usize..10).prop_flat_map(|n| {
            let m = n as u32;
            (
                prop::collection::vec((0..m, 0..m), 0..40),
                prop::collection::vec(prop::option::weighted(0.85, 16.0f64..84.0), n),
            )
                .prop_map(move |(f, s)| {
                    (
                        graph(n, &f),
                        s.into_iter().map(|v| v.and_then(di)).collect(),
                    )
                })
        })
    }

    proptest! {
        #[test]
        fn deltas_are_translation_invariant((g, scores) in arb_scored_graph(), shift in -5.0f64..5.0) {
            let shifted: Vec<_> = scores.iter().map(|s| s.and_then(|d| di(d.value() + shift))).collect();
            let (h0, h1) = (hierarchy_deltas(&g, &scores), hierarchy_deltas(&g, &shifted));
            prop_assert_eq!(h0.len(), h1.len());
            for (a, b) in h0.iter().zip(&h1) {
                prop_assert!((a.delta_r - b.delta_r).abs() < 1e-9 && (a.delta_e - b.delta_e).abs() < 1e-9);
            }
            let (m0, m1) = (homophily_deltas(&g, &scores), homophily_deltas(&g, &shifted));
            prop_assert_eq!(m0.len(), m1.len());
            for (a, b) in m0.iter().zip(&m1) {
                prop_assert!((a.delta_re - b.delta_re).abs() < 1e-9 && (a.delta_nre - b.delta_nre).abs() < 1e-9);
            }
            for (_, r) in reciprocal_levels(&g) {
                prop_assert!((0.0..=1.0).contains(&r));
            }
        }

        #[test]
        fn pearson_symmetric_and_affine_invariant(
            xy in prop::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 3..30),
            scale in 0.1f64..10.0,
            offset in -50.0f64..50.0,
        ) {
            let (x, y): (Vec<f64>, Vec<f64>) = xy.into_iter().unzip();
            if let Ok(r) = pearson(&x, &y) {
                prop_assert!((r - pearson(&y, &x).unwrap()).abs() < 1e-9);
                let xs: Vec<f64> = x.iter().map(|v| v * scale + offset).collect();
                prop_assert!((r - pearson(&xs, &y).unwrap()).abs() < 1e-9);
            }
        }
    }
}
