//! Experiment protocols shared by the CLI and the acceptance suite: escape
//! ensembles, engine-equivalence comparisons, coupling-law statistics, and
//! the structural-diagnostics trend sweep.

use serde::{Deserialize, Serialize};

use levyglass::couplings::{
    relevant_edges, structure_diagnostics, CouplingMatrix, DiagnosticConstants, RegimeParams,
};
use levyglass::dynamics::{Engine, EngineKind};
use levyglass::error::Result;
use levyglass::hamiltonian::Constraint;
use levyglass::rng::{random_spins, task_rng};
use levyglass::stats::{dkw_epsilon, ks_test_exponential, tv_plugin, Histogram, KsReport, TvEstimate};
use levyglass::wells::{two_state_rates, RateMode, WellDecomposition, WellLabel};
use levyglass::{par_map, Spin};

/// Escape-time ensemble from a well, with the exponential-approximation
/// references.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EscapeExperimentReport {
    pub times: Vec<f64>,
    pub censored: usize,
    pub censor_fraction: f64,
    /// KS test of the uncensored times against `Exp(lambda_bar)`.
    pub ks: KsReport,
    /// Conditional-Gibbs mean of `lambda_L` over the starting well side.
    pub rate_exact: f64,
    pub empirical_mean: f64,
    /// Mean exit time from the linear solve on the unrestricted chain.
    pub mean_exit_exact: f64,
}

/// Run `samples` independent escapes from the well `label`, each from a
/// fresh conditional-Gibbs start, and compare against the exact references.
/// The well must be defined by a single bond (`K = 1`).
pub fn escape_experiment(
    j: &CouplingMatrix,
    beta: f64,
    decomp: &WellDecomposition,
    label: &[Spin],
    samples: usize,
    horizon_multiplier: f64,
    seed: u64,
) -> Result<EscapeExperimentReport> {
    if decomp.k() != 1 {
        return Err(levyglass::Error::Input(
            "the exponential reference is defined for single-bond wells".into(),
        ));
    }
    let chain = two_state_rates(j, beta, decomp, 1, &[], &RateMode::exact())?;
    let rate_exact = if label[0] == 1 {
        chain.rate_plus
    } else {
        chain.rate_minus
    };
    let separation = levyglass::exact::verify_well_separation(
        j,
        beta,
        decomp,
        label,
        levyglass::exact::DEFAULT_MAX_FREE_DENSE,
    )?;
    let horizon = horizon_multiplier / rate_exact;
    let table = levyglass::wells::well_gibbs(j, beta, decomp, label)?;
    let well = WellLabel::Label(label.to_vec());

    let observations: Vec<levyglass::dynamics::EscapeObservation> = par_map(samples, |idx| {
        let mut rng = task_rng(seed, idx as u64);
        let x0 = table.sample(&mut rng);
        levyglass::dynamics::escape_time(j, beta, decomp, &well, x0, horizon, seed ^ (idx as u64) << 20)
            .expect("start drawn inside the well")
    });

    let times: Vec<f64> = observations.iter().map(|o| o.time).collect();
    let uncensored: Vec<f64> = observations
        .iter()
        .filter(|o| !o.censored)
        .map(|o| o.time)
        .collect();
    let censored = observations.len() - uncensored.len();
    let ks = ks_test_exponential(&uncensored, rate_exact);
    let empirical_mean = uncensored.iter().sum::<f64>() / uncensored.len() as f64;
    Ok(EscapeExperimentReport {
        censor_fraction: censored as f64 / observations.len() as f64,
        censored,
        times,
        ks,
        rate_exact,
        empirical_mean,
        mean_exit_exact: separation.mean_exit,
    })
}

/// TV between the naive and rejection-free state laws at time `t`, from
/// uniform starts, `runs` trajectories per engine.
pub fn engine_equivalence(
    j: &CouplingMatrix,
    beta: f64,
    t: f64,
    runs: usize,
    seed: u64,
) -> TvEstimate {
    let n = j.n();
    assert!(n <= 16, "state histogram needs n <= 16");
    let mut hists = Vec::new();
    for (pass, kind) in [(0u64, EngineKind::Naive), (1u64, EngineKind::RejectionFree)] {
        let masks: Vec<usize> = par_map(runs, |i| {
            let mut rng = task_rng(seed ^ (pass << 32), i as u64);
            let x0 = random_spins(&mut rng, n);
            let mut engine = Engine::new(j, beta, x0, kind, &[], 0.0);
            engine.advance(t, &mut rng, false, |_, _, _, _| true);
            engine
                .spins()
                .iter()
                .enumerate()
                .fold(0usize, |acc, (v, &s)| acc | (((s == 1) as usize) << v))
        });
        hists.push(Histogram::from_labels(1 << n, masks));
    }
    tv_plugin(&hists[0], &hists[1], 400, seed ^ 0xe9e9)
}

/// Empirical survival of `N^{1/alpha} |J|` against `r^{-alpha}`, with the
/// DKW band.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SurvivalBandReport {
    pub samples: usize,
    pub max_deviation: f64,
    pub dkw_epsilon: f64,
    pub inside: bool,
}

/// Draw at least `min_samples` Pareto entries and check the empirical
/// survival function sits inside the DKW band around `r^{-alpha}` at the
/// given confidence.
pub fn survival_band(
    alpha: f64,
    n: usize,
    min_samples: usize,
    confidence: f64,
    seed: u64,
) -> Result<SurvivalBandReport> {
    let law = levyglass::couplings::CouplingLaw::pareto(n, alpha)?;
    let scale = (n as f64).powf(1.0 / alpha);
    let mut scaled = Vec::with_capacity(min_samples + n * n / 2);
    let mut draw = 0u64;
    while scaled.len() < min_samples {
        let m = levyglass::couplings::sample_matrix(&law, seed ^ draw);
        scaled.extend(m.upper_tri().iter().map(|v| v.abs() * scale));
        draw += 1;
    }
    scaled.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // sup_x |F_hat(x) - F(x)| with F(x) = 1 - x^{-alpha} on x >= 1
    let total = scaled.len() as f64;
    let mut max_dev: f64 = 0.0;
    for (i, &x) in scaled.iter().enumerate() {
        let f = 1.0 - x.powf(-alpha);
        max_dev = max_dev
            .max((f - i as f64 / total).abs())
            .max(((i + 1) as f64 / total - f).abs());
    }
    let eps = dkw_epsilon(scaled.len(), confidence);
    Ok(SurvivalBandReport {
        samples: scaled.len(),
        max_deviation: max_dev,
        dkw_epsilon: eps,
        inside: max_dev <= eps,
    })
}

/// Pass rates of the structural diagnostics at one system size.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagnosticsRates {
    pub n: usize,
    pub seeds: u64,
    pub all_pass: f64,
    pub no_row_pair: f64,
    pub row_sum_ok: f64,
    pub annulus_empty: f64,
    pub spacing_ok: f64,
    pub top_edges_disjoint: f64,
    pub mean_k: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagnosticsSweepReport {
    pub per_n: Vec<DiagnosticsRates>,
    pub common_random_numbers: bool,
}

/// Monte Carlo pass rates of the structural scans over a sweep of system
/// sizes. With common random numbers, each seed reuses one underlying
/// uniform field across every `N` (the sub-triangle of the largest size),
/// which couples the sweep and sharpens the trend.
pub fn diagnostics_sweep(
    alpha: f64,
    beta: f64,
    a: f64,
    gamma: f64,
    n_values: &[usize],
    seeds_per_n: u64,
    c_row: f64,
    common_random_numbers: bool,
    master_seed: u64,
) -> Result<DiagnosticsSweepReport> {
    let consts = DiagnosticConstants { c_row };
    let n_max = *n_values.iter().max().expect("nonempty sweep");
    let tri = |i: usize, jv: usize, n: usize| i * n - i * (i + 1) / 2 + (jv - i - 1);

    let mut per_n: Vec<DiagnosticsRates> = n_values
        .iter()
        .map(|&n| DiagnosticsRates {
            n,
            seeds: seeds_per_n,
            all_pass: 0.0,
            no_row_pair: 0.0,
            row_sum_ok: 0.0,
            annulus_empty: 0.0,
            spacing_ok: 0.0,
            top_edges_disjoint: 0.0,
            mean_k: 0.0,
        })
        .collect();

    let counts: Vec<Vec<DiagnosticsRates>> = par_map(seeds_per_n as usize, |s| {
        use rand::Rng;
        let mut rng = task_rng(master_seed, s as u64);
        // one uniform field over the largest triangle, shared across sizes
        let (mut u, mut sign): (Vec<f64>, Vec<f64>) = (Vec::new(), Vec::new());
        if common_random_numbers {
            let edges = n_max * (n_max - 1) / 2;
            u = (0..edges).map(|_| 1.0 - rng.gen::<f64>()).collect();
            sign = (0..edges)
                .map(|_| levyglass::rng::random_spin(&mut rng) as f64)
                .collect();
        }
        n_values
            .iter()
            .map(|&n| {
                let m = if common_random_numbers {
                    let scale = (n as f64).powf(-1.0 / alpha);
                    let mut vals = vec![0.0; n * (n - 1) / 2];
                    for i in 0..n {
                        for jv in i + 1..n {
                            let big = tri(i, jv, n_max);
                            vals[tri(i, jv, n)] =
                                sign[big] * scale * u[big].powf(-1.0 / alpha);
                        }
                    }
                    CouplingMatrix::from_upper_tri(n, vals).expect("finite values")
                } else {
                    let law = levyglass::couplings::CouplingLaw::pareto(n, alpha)
                        .expect("valid law");
                    levyglass::couplings::sample_matrix(
                        &law,
                        master_seed ^ (s as u64) << 16 ^ (n as u64),
                    )
                };
                let regime = RegimeParams::new(beta, a, gamma, alpha, n).expect("valid regime");
                let rep = structure_diagnostics(&m, &regime, &consts);
                DiagnosticsRates {
                    n,
                    seeds: 1,
                    all_pass: rep.all_pass as u8 as f64,
                    no_row_pair: rep.no_row_pair as u8 as f64,
                    row_sum_ok: rep.row_sum_ok as u8 as f64,
                    annulus_empty: rep.annulus_empty as u8 as f64,
                    spacing_ok: rep.spacing_ok as u8 as f64,
                    top_edges_disjoint: rep.top_edges_disjoint as u8 as f64,
                    mean_k: rep.k as f64,
                }
            })
            .collect()
    });

    for row in counts {
        for (acc, one) in per_n.iter_mut().zip(row) {
            acc.all_pass += one.all_pass;
            acc.no_row_pair += one.no_row_pair;
            acc.row_sum_ok += one.row_sum_ok;
            acc.annulus_empty += one.annulus_empty;
            acc.spacing_ok += one.spacing_ok;
            acc.top_edges_disjoint += one.top_edges_disjoint;
            acc.mean_k += one.mean_k;
        }
    }
    let d = seeds_per_n as f64;
    for acc in &mut per_n {
        acc.all_pass /= d;
        acc.no_row_pair /= d;
        acc.row_sum_ok /= d;
        acc.annulus_empty /= d;
        acc.spacing_ok /= d;
        acc.top_edges_disjoint /= d;
        acc.mean_k /= d;
    }
    Ok(DiagnosticsSweepReport {
        per_n,
        common_random_numbers,
    })
}

/// Frequency with which a configuration drawn from the full Gibbs table has
/// every relevant bond satisfied (the alignment-of-bonds event).
pub fn alignment_frequency(
    j: &CouplingMatrix,
    beta: f64,
    regime: &RegimeParams,
    max_free: usize,
) -> Result<f64> {
    let rel = relevant_edges(j, regime);
    let table = levyglass::hamiltonian::gibbs_exact_capped(j, beta, &Constraint::none(), max_free)?;
    Ok(table.expectation(|spins| {
        let ok = rel.edges.iter().all(|&e| {
            (spins[e.i] as f64 * spins[e.j] as f64) * j.edge_value(e) > 0.0
        });
        ok as u8 as f64
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use levyglass::couplings::{uniform_background_edges, CouplingLaw, Edge, PlantedEdge};

    fn planted_with_bg(
        n: usize,
        big: &[(usize, usize, f64)],
        bg: (f64, f64),
        seed: u64,
    ) -> CouplingMatrix {
        let exclude: Vec<Edge> = big.iter().map(|&(i, j, _)| Edge::new(i, j)).collect();
        let mut edges = uniform_background_edges(n, &exclude, bg.0, bg.1, seed);
        edges.extend(big.iter().map(|&(i, j, value)| PlantedEdge {
            edge: Edge::new(i, j),
            value,
        }));
        levyglass::couplings::sample_matrix(&CouplingLaw::planted(n, edges).unwrap(), 0)
    }

    #[test]
    fn survival_band_holds_for_the_true_law() {
        let rep = survival_band(0.5, 200, 50_000, 0.99, 3).unwrap();
        assert!(rep.inside, "{rep:?}");
    }

    #[test]
    fn engine_equivalence_small_instance() {
        let m = planted_with_bg(3, &[(0, 1, 1.0)], (0.1, 0.3), 5);
        let tv = engine_equivalence(&m, 0.9, 1.5, 20_000, 11);
        assert!(tv.estimate < 0.02, "tv {}", tv.estimate);
    }

    #[test]
    fn escape_experiment_beta_zero_mean_one() {
        // beta = 0, decoupled bond: exit is the min of two Exp(1/2) clocks
        let m = planted_with_bg(4, &[(0, 1, 3.0)], (0.0, 0.0), 0);
        let regime = RegimeParams::new(1.0, 2.0 * 2.5 / 4.0, 1.0, 0.5, 4).unwrap();
        let decomp = WellDecomposition::new(&m, regime).unwrap();
        let rep = escape_experiment(&m, 0.0, &decomp, &[1], 2000, 200.0, 3).unwrap();
        assert_eq!(rep.censored, 0);
        assert!((rep.empirical_mean - 1.0).abs() < 0.07, "{}", rep.empirical_mean);
        assert!((rep.rate_exact - 1.0).abs() < 1e-12);
        assert!(rep.ks.p_value > 0.01, "p {}", rep.ks.p_value);
    }

    #[test]
    fn diagnostics_sweep_runs_both_modes() {
        for crn in [false, true] {
            let rep =
                diagnostics_sweep(0.5, 1.0, 1.0, 1.9, &[30, 60], 20, 4.0, crn, 9).unwrap();
            assert_eq!(rep.per_n.len(), 2);
            for r in &rep.per_n {
                assert!((0.0..=1.0).contains(&r.all_pass));
            }
        }
    }
}
