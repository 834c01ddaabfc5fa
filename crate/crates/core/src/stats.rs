//! Statistical test utilities used by the experiment harness and by the
//! verification operations: plug-in total variation with bootstrap, one-sample
//! Kolmogorov-Smirnov, chi-square goodness of fit, DKW confidence bands, and
//! small time-series helpers.

use rand::Rng;

use crate::numerics::special::{chi_squared_cdf, kolmogorov_cdf};
use crate::rng::task_rng;

/// Counts over a fixed number of cells.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Histogram {
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn new(cells: usize) -> Self {
        Histogram {
            counts: vec![0; cells],
        }
    }

    pub fn from_labels(cells: usize, labels: impl IntoIterator<Item = usize>) -> Self {
        let mut h = Histogram::new(cells);
        for l in labels {
            h.counts[l] += 1;
        }
        h
    }

    /// Bin scalar samples into `cells` equal-width bins over `[lo, hi]`;
    /// values outside the range are clamped into the end bins.
    pub fn from_samples(cells: usize, lo: f64, hi: f64, samples: &[f64]) -> Self {
        assert!(cells > 0 && hi > lo);
        let mut h = Histogram::new(cells);
        let w = (hi - lo) / cells as f64;
        for &x in samples {
            let b = (((x - lo) / w).floor() as i64).clamp(0, cells as i64 - 1) as usize;
            h.counts[b] += 1;
        }
        h
    }

    pub fn cells(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        let n = self.total().max(1) as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }
}

/// Exact total variation between two probability vectors on a common support.
pub fn tv_exact(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len(), "distributions must share a support");
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Plug-in total-variation estimate between two empirical histograms.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TvEstimate {
    pub estimate: f64,
    /// Percentile bootstrap confidence interval for the estimate.
    pub ci: (f64, f64),
    pub confidence: f64,
    /// Expected plug-in TV of two same-size samples drawn from the *pooled*
    /// empirical law: the finite-sample bias floor. Reported, not subtracted.
    pub bias: f64,
    pub n_a: u64,
    pub n_b: u64,
    pub n_bootstrap: usize,
}

/// `(1/2) sum |p_hat - q_hat|` with a nonparametric bootstrap CI and a
/// pooled-law bias estimate.
pub fn tv_plugin(a: &Histogram, b: &Histogram, n_bootstrap: usize, seed: u64) -> TvEstimate {
    assert_eq!(a.cells(), b.cells(), "histograms must share a support");
    let (n_a, n_b) = (a.total(), b.total());
    assert!(n_a > 0 && n_b > 0, "empty histogram");
    let estimate = tv_exact(&a.probabilities(), &b.probabilities());

    let cum_a = cumulative(&a.probabilities());
    let cum_b = cumulative(&b.probabilities());
    let pooled: Vec<f64> = a
        .counts
        .iter()
        .zip(&b.counts)
        .map(|(&x, &y)| (x + y) as f64 / (n_a + n_b) as f64)
        .collect();
    let cum_pool = cumulative(&pooled);

    let mut resampled = Vec::with_capacity(n_bootstrap);
    let mut bias_sum = 0.0;
    for i in 0..n_bootstrap {
        let mut rng = task_rng(seed, i as u64);
        let ra = resample(&cum_a, n_a, &mut rng);
        let rb = resample(&cum_b, n_b, &mut rng);
        resampled.push(tv_exact(&ra, &rb));
        let pa = resample(&cum_pool, n_a, &mut rng);
        let pb = resample(&cum_pool, n_b, &mut rng);
        bias_sum += tv_exact(&pa, &pb);
    }
    resampled.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let confidence = 0.95;
    let lo = resampled[((n_bootstrap as f64) * 0.025) as usize];
    let hi = resampled[(((n_bootstrap as f64) * 0.975) as usize).min(n_bootstrap - 1)];

    TvEstimate {
        estimate,
        ci: (lo, hi),
        confidence,
        bias: bias_sum / n_bootstrap as f64,
        n_a,
        n_b,
        n_bootstrap,
    }
}

fn cumulative(p: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut cum = Vec::with_capacity(p.len());
    for &x in p {
        acc += x;
        cum.push(acc);
    }
    if let Some(last) = cum.last_mut() {
        *last = 1.0;
    }
    cum
}

fn resample<R: Rng>(cum: &[f64], n: u64, rng: &mut R) -> Vec<f64> {
    let mut counts = vec![0u64; cum.len()];
    for _ in 0..n {
        let u: f64 = rng.gen();
        let idx = cum.partition_point(|&c| c < u).min(cum.len() - 1);
        counts[idx] += 1;
    }
    counts.iter().map(|&c| c as f64 / n as f64).collect()
}

/// One-sample Kolmogorov-Smirnov report.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KsReport {
    pub statistic: f64,
    /// Asymptotic p-value from the Kolmogorov distribution.
    pub p_value: f64,
    pub n: usize,
}

/// KS test of `samples` against a CDF given as a closure.
pub fn ks_test<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> KsReport {
    assert!(!samples.is_empty());
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len();
    let nf = n as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d
            .max((f - i as f64 / nf).abs())
            .max(((i + 1) as f64 / nf - f).abs());
    }
    KsReport {
        statistic: d,
        p_value: 1.0 - kolmogorov_cdf(nf.sqrt() * d),
        n,
    }
}

/// KS test against Exp(rate).
pub fn ks_test_exponential(samples: &[f64], rate: f64) -> KsReport {
    ks_test(samples, |x| if x <= 0.0 { 0.0 } else { -(-rate * x).exp_m1() })
}

/// Chi-square goodness-of-fit report.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Chi2Report {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson chi-square of observed counts against expected probabilities.
pub fn chi2_gof(observed: &Histogram, expected: &[f64]) -> Chi2Report {
    assert_eq!(observed.cells(), expected.len());
    let n = observed.total() as f64;
    let mut stat = 0.0;
    let mut cells = 0;
    for (&o, &p) in observed.counts.iter().zip(expected) {
        let e = n * p;
        if e > 0.0 {
            stat += (o as f64 - e).powi(2) / e;
            cells += 1;
        } else {
            assert_eq!(o, 0, "observed mass on a zero-probability cell");
        }
    }
    let dof = cells.max(2) - 1;
    Chi2Report {
        statistic: stat,
        dof,
        p_value: 1.0 - chi_squared_cdf(stat, dof as f64),
    }
}

/// Half-width of the Dvoretzky-Kiefer-Wolfowitz band:
/// `eps = sqrt(ln(2/delta) / (2n))` covers the true CDF with probability
/// `1 - delta` simultaneously over the whole line.
pub fn dkw_epsilon(n: usize, confidence: f64) -> f64 {
    assert!(n > 0 && (0.0..1.0).contains(&confidence));
    let delta = 1.0 - confidence;
    ((2.0 / delta).ln() / (2.0 * n as f64)).sqrt()
}

/// Sample mean and standard error.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    assert!(xs.len() > 1);
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Standard error of the mean of a correlated series via batch means.
pub fn batch_means_se(xs: &[f64], batches: usize) -> (f64, f64) {
    assert!(batches >= 2 && xs.len() >= 2 * batches);
    let per = xs.len() / batches;
    let means: Vec<f64> = (0..batches)
        .map(|b| xs[b * per..(b + 1) * per].iter().sum::<f64>() / per as f64)
        .collect();
    let (mean, se_batch) = mean_se(&means);
    (mean, se_batch)
}

/// Integrated autocorrelation time of an evenly-spaced series, in units of
/// the sampling interval, with Sokal's adaptive window (c = 5). Returns at
/// least 0.5 (the i.i.d. value for the sum convention used here is 0.5 since
/// `tau = 1/2 + sum_{k>=1} rho_k`).
pub fn integrated_autocorr_time(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 8 {
        return 0.5;
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
    if var == 0.0 {
        return 0.5;
    }
    let mut tau = 0.5;
    for k in 1..n / 2 {
        let mut acc = 0.0;
        for i in 0..n - k {
            acc += (xs[i] - mean) * (xs[i + k] - mean);
        }
        let rho = acc / ((n - k) as f64 * var);
        tau += rho;
        if (k as f64) >= 5.0 * tau {
            break;
        }
    }
    tau.max(0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use approx::assert_relative_eq;

    #[test]
    fn tv_trivial_cases() {
        let a = Histogram::from_labels(2, [0, 0, 1, 1].iter().copied());
        let same = tv_plugin(&a, &a.clone(), 100, 0);
        assert_eq!(same.estimate, 0.0);

        let b = Histogram::from_labels(2, [0; 8].iter().copied());
        let c = Histogram::from_labels(2, [1; 8].iter().copied());
        let disjoint = tv_plugin(&b, &c, 100, 0);
        assert_eq!(disjoint.estimate, 1.0);
    }

    #[test]
    fn tv_same_law_estimate_sits_near_bias() {
        // two multinomial samples of size 10^4 on 8 cells from one law
        let p = [0.3, 0.2, 0.15, 0.1, 0.1, 0.05, 0.05, 0.05];
        let mut rng = rng_from_seed(42);
        let mut draw = |n: usize| {
            let cum = cumulative(&p.to_vec());
            let mut h = Histogram::new(8);
            for _ in 0..n {
                let u: f64 = rng.gen();
                let idx = cum.partition_point(|&c| c < u).min(7);
                h.counts[idx] += 1;
            }
            h
        };
        let a = draw(10_000);
        let b = draw(10_000);
        let est = tv_plugin(&a, &b, 300, 7);
        // the estimate should be within its own CI neighborhood of the bias
        assert!(est.estimate < est.bias + (est.ci.1 - est.ci.0) * 2.0 + 0.01);
        assert!(est.bias > 0.0 && est.bias < 0.05);
    }

    #[test]
    fn ks_accepts_true_exponential_rejects_wrong_rate() {
        let mut rng = rng_from_seed(3);
        let xs: Vec<f64> = (0..2000)
            .map(|_| crate::rng::sample_exp(&mut rng, 2.0))
            .collect();
        let good = ks_test_exponential(&xs, 2.0);
        assert!(good.p_value > 0.01, "p = {}", good.p_value);
        let bad = ks_test_exponential(&xs, 3.0);
        assert!(bad.p_value < 1e-6, "p = {}", bad.p_value);
    }

    #[test]
    fn chi2_uniform_counts() {
        let h = Histogram::from_labels(4, (0..4000).map(|i| i % 4));
        let r = chi2_gof(&h, &[0.25; 4]);
        assert_relative_eq!(r.statistic, 0.0);
        assert!(r.p_value > 0.999);
    }

    #[test]
    fn dkw_matches_formula() {
        let eps = dkw_epsilon(100_000, 0.99);
        assert_relative_eq!(eps, ((2.0f64 / 0.01).ln() / 2e5).sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn iid_series_has_small_autocorr_time() {
        let mut rng = rng_from_seed(5);
        let xs: Vec<f64> = (0..4000).map(|_| rng.gen::<f64>()).collect();
        let tau = integrated_autocorr_time(&xs);
        assert!(tau < 1.5, "tau = {tau}");
    }
}
