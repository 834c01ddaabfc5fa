//! Dispatch a parsed configuration to the right experiment, write its
//! artifacts, and assemble the manifest. Everything is deterministic in the
//! configuration (timestamps live only in the manifest).

use std::path::Path;

use serde::{Deserialize, Serialize};

use levyglass::couplings::CouplingMatrix;
use levyglass::dynamics::{self, AutocorrOptions, RunOptions};
use levyglass::error::Result;
use levyglass::exact;
use levyglass::fk;
use levyglass::hamiltonian::Constraint;
use levyglass::rng::{random_spins, task_rng};
use levyglass::stats::mean_se;
use levyglass::wells::{self, RateMode, WellDecomposition, WellLabel};
use levyglass::yprocess::{self, CompareOptions, YInitMode, YRateMode};
use levyglass::Error;

use crate::config::{
    ExactReport, ExperimentConfig, ExperimentSpec, FkReport, WellSamplerConfig, YInitConfig,
};
use crate::experiments;
use crate::manifest::RunManifest;
use crate::output::{fmt, OutDir};
use crate::report::{Estimate, StatReport, TestResult};

/// Versioned on-disk form of a coupling matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixFile {
    pub schema_version: u32,
    pub n: usize,
    pub alpha: f64,
    pub seed: u64,
    pub upper_tri: Vec<f64>,
}

impl MatrixFile {
    pub fn new(config: &ExperimentConfig, m: &CouplingMatrix) -> Self {
        MatrixFile {
            schema_version: 1,
            n: m.n(),
            alpha: config.law.alpha,
            seed: config.law.matrix_seed.unwrap_or(config.seed),
            upper_tri: m.upper_tri().to_vec(),
        }
    }
}

/// Run the configured experiment, writing `report.json`, experiment
/// artifacts, and `manifest.json` into `out`.
pub fn run_experiment(config: &ExperimentConfig, out: &Path) -> Result<StatReport> {
    let mut dir = OutDir::create(out)?;
    let report = dispatch(config, &mut dir)?;
    dir.write_json("report.json", &report)?;
    let manifest = RunManifest::new(config.clone(), dir.files().to_vec());
    manifest.save(dir.path())?;
    Ok(report)
}

fn dispatch(config: &ExperimentConfig, dir: &mut OutDir) -> Result<StatReport> {
    let mut report = StatReport::new(config.experiment.subcommand(), &config.name, config.seed);
    let m = config.matrix()?;
    let regime = config.regime_params()?;
    let beta = regime.beta;
    match &config.experiment {
        ExperimentSpec::Sample {} => {
            dir.write_json("matrix.json", &MatrixFile::new(config, &m))?;
            dir.write_csv(
                "matrix.csv",
                &["i", "j", "j_ij", "rank"],
                m.rank_edges().iter().enumerate().map(|(rank, e)| {
                    vec![
                        e.i.to_string(),
                        e.j.to_string(),
                        fmt(m.edge_value(*e)),
                        (rank + 1).to_string(),
                    ]
                }),
            )?;
            let rel = levyglass::couplings::relevant_edges(&m, &regime);
            report.estimate("num_edges", Estimate::point(m.num_edges() as f64, 1));
            report.estimate("max_abs_j", Estimate::point(m.rank_abs(0), 1));
            report.estimate("k_relevant", Estimate::point(rel.k as f64, 1));
            for w in config.law.build_law()?.warnings() {
                report.flag(&format!("warning_{w:?}"), true);
            }
        }

        ExperimentSpec::Diagnose {
            n_values,
            seeds_per_n,
            c_row,
            common_random_numbers,
        } => {
            let sweep = experiments::diagnostics_sweep(
                config.law.alpha,
                beta,
                regime.a,
                regime.gamma,
                n_values,
                *seeds_per_n,
                *c_row,
                *common_random_numbers,
                config.seed,
            )?;
            dir.write_csv(
                "pass_rates.csv",
                &[
                    "n",
                    "all_pass",
                    "no_row_pair",
                    "row_sum_ok",
                    "annulus_empty",
                    "spacing_ok",
                    "top_edges_disjoint",
                    "mean_k",
                ],
                sweep.per_n.iter().map(|r| {
                    vec![
                        r.n.to_string(),
                        fmt(r.all_pass),
                        fmt(r.no_row_pair),
                        fmt(r.row_sum_ok),
                        fmt(r.annulus_empty),
                        fmt(r.spacing_ok),
                        fmt(r.top_edges_disjoint),
                        fmt(r.mean_k),
                    ]
                }),
            )?;
            for r in &sweep.per_n {
                report.estimate(
                    &format!("all_pass_n{}", r.n),
                    Estimate::point(r.all_pass, r.seeds),
                );
            }
            let rates: Vec<f64> = sweep.per_n.iter().map(|r| r.all_pass).collect();
            report.flag(
                "pass_rate_nondecreasing",
                rates.windows(2).all(|w| w[1] >= w[0]),
            );
        }

        ExperimentSpec::Simulate {
            engine,
            duration,
            frozen,
            record_null_events,
        } => {
            let mut rng = task_rng(config.seed, u64::MAX);
            let x0 = random_spins(&mut rng, m.n());
            let mut opts = RunOptions::new((*engine).into(), *duration).frozen(frozen.clone());
            opts.record_null_events = *record_null_events;
            let traj = dynamics::run(&m, beta, x0, &opts, config.seed);
            dir.write_csv(
                "trajectory.csv",
                &["time", "vertex", "new_spin"],
                traj.events.iter().map(|e| {
                    vec![fmt(e.time), e.vertex.to_string(), e.new_spin.to_string()]
                }),
            )?;
            report.estimate("events", Estimate::point(traj.events.len() as f64, 1));
            report.flag(
                "absorbed",
                traj.outcome == dynamics::Outcome::Absorbed,
            );
            let end = traj.state_at(*duration)?;
            report.estimate(
                "final_energy",
                Estimate::point(levyglass::hamiltonian::energy(&m, &end), 1),
            );
        }

        ExperimentSpec::Escape {
            samples,
            label,
            horizon_multiplier,
        } => {
            let decomp = WellDecomposition::new(&m, regime.clone())?;
            let label = parse_label(label)?;
            let rep = experiments::escape_experiment(
                &m,
                beta,
                &decomp,
                &label,
                *samples,
                *horizon_multiplier,
                config.seed,
            )?;
            dir.write_csv(
                "escape_times.csv",
                &["time", "censored"],
                rep.times.iter().enumerate().map(|(i, t)| {
                    let censored = i >= rep.times.len() - rep.censored;
                    vec![fmt(*t), (censored as u8).to_string()]
                }),
            )?;
            report.estimate(
                "rate_exact",
                Estimate::point(rep.rate_exact, *samples as u64),
            );
            report.estimate(
                "empirical_mean",
                Estimate::point(rep.empirical_mean, (rep.times.len() - rep.censored) as u64),
            );
            report.estimate(
                "mean_exit_exact",
                Estimate::point(rep.mean_exit_exact, 1),
            );
            report.estimate(
                "censor_fraction",
                Estimate::point(rep.censor_fraction, *samples as u64),
            );
            report.test(
                "ks_vs_exponential",
                TestResult {
                    statistic: rep.ks.statistic,
                    p_value: Some(rep.ks.p_value),
                    threshold: Some(0.01),
                    pass: Some(rep.ks.p_value > 0.01),
                    n: rep.ks.n as u64,
                },
            );
        }

        ExperimentSpec::Autocorr {
            s,
            runs,
            bins,
            bootstrap,
        } => {
            let decomp = WellDecomposition::new(&m, regime.clone())?;
            let opts = AutocorrOptions {
                s: *s,
                n_runs: *runs,
                n_bins: *bins,
                n_bootstrap: *bootstrap,
                ..Default::default()
            };
            let rep = dynamics::autocorrelation_distribution(&m, beta, &decomp, &opts, config.seed)?;
            dir.write_csv(
                "autocorr_samples.csv",
                &["c"],
                rep.dynamical.iter().map(|c| vec![fmt(*c)]),
            )?;
            dir.write_csv(
                "replica_samples.csv",
                &["q"],
                rep.replica.iter().map(|q| vec![fmt(*q)]),
            )?;
            let (dyn_mean, dyn_se) = mean_se(&rep.dynamical);
            let (rep_mean, rep_se) = mean_se(&rep.replica);
            report.estimate(
                "dynamical_mean",
                Estimate::with_se(dyn_mean, dyn_se, *runs as u64),
            );
            report.estimate(
                "replica_mean",
                Estimate::with_se(rep_mean, rep_se, *runs as u64),
            );
            report.estimate(
                "tv_binned",
                Estimate::with_ci(rep.tv.estimate, rep.tv.ci, *runs as u64),
            );
            report.estimate("tv_bias_floor", Estimate::point(rep.tv.bias, *runs as u64));
        }

        ExperimentSpec::Wells {} => {
            let decomp = WellDecomposition::new(&m, regime.clone())?;
            let delta = config.regime.delta();
            dir.write_csv(
                "wells.csv",
                &["l", "v", "w", "abs_j", "log_window_lo", "log_window_hi"],
                (1..=decomp.k()).map(|l| {
                    let e = decomp.edges()[l - 1];
                    let center = 2.0 * beta * decomp.bond_abs(l);
                    vec![
                        l.to_string(),
                        e.i.to_string(),
                        e.j.to_string(),
                        fmt(decomp.bond_abs(l)),
                        fmt(center + delta.ln()),
                        fmt(center - delta.ln()),
                    ]
                }),
            )?;
            report.estimate("k", Estimate::point(decomp.k() as f64, 1));
            for l in 1..=decomp.k() {
                let context = vec![1i8; l - 1];
                let chain = wells::two_state_rates(&m, beta, &decomp, l, &context, &RateMode::exact())?;
                report.estimate(
                    &format!("rate_plus_l{l}"),
                    Estimate::point(chain.rate_plus, 1),
                );
                report.estimate(
                    &format!("rate_minus_l{l}"),
                    Estimate::point(chain.rate_minus, 1),
                );
            }
        }

        ExperimentSpec::Yproc { paths, duration_s } => {
            let decomp = WellDecomposition::new(&m, regime.clone())?;
            let k = decomp.k();
            if k > 12 {
                return Err(Error::ResourceCap {
                    what: "wells in the yproc report",
                    needed: 1u64 << k.min(63),
                    cap: 1 << 12,
                    hint: "the exact report enumerates all wells",
                });
            }
            let pi = yprocess::stationary_y(&m, beta, &decomp, 26)?;
            let mut eval = yprocess::RateEvaluator::new(&m, beta, &decomp, YRateMode::exact());
            let mut rows = Vec::new();
            for idx in 0..1usize << k {
                let entry = eval.entry(idx)?.clone();
                for (l, lz) in entry.log_rates.iter().enumerate() {
                    rows.push(vec![
                        WellLabel::from_index(idx, k).to_string(),
                        (l + 1).to_string(),
                        fmt(*lz),
                    ]);
                }
            }
            dir.write_csv("rate_table.csv", &["label", "l", "log_rate"], rows)?;
            dir.write_csv(
                "stationary.csv",
                &["label", "probability"],
                pi.iter().enumerate().map(|(idx, p)| {
                    vec![WellLabel::from_index(idx, k).to_string(), fmt(*p)]
                }),
            )?;
            // detailed-balance defect over adjacent wells
            let mut worst: f64 = 0.0;
            for idx in 0..1usize << k {
                for l in 0..k {
                    let other = idx ^ (1 << l);
                    let lhs = pi[idx].ln() + eval.entry(idx)?.log_rates[l];
                    let rhs = pi[other].ln() + eval.entry(other)?.log_rates[l];
                    worst = worst.max((lhs - rhs).abs());
                }
            }
            report.estimate("detailed_balance_log_defect", Estimate::point(worst, 1));
            // occupancy of simulated trajectories vs the stationary law
            let final_states: Vec<usize> = levyglass::par_map(*paths, |p| {
                let mut rng = task_rng(config.seed, p as u64);
                let y0: Vec<i8> = (0..k).map(|_| levyglass::rng::random_spin(&mut rng)).collect();
                let mut eval =
                    yprocess::RateEvaluator::new(&m, beta, &decomp, YRateMode::exact());
                let traj = yprocess::simulate_y(&mut eval, y0, *duration_s, config.seed ^ (p as u64) << 24)
                    .expect("valid simulation");
                WellLabel::Label(traj.state_at(*duration_s).expect("inside horizon"))
                    .index()
                    .expect("labels never transit")
            });
            let hist = levyglass::stats::Histogram::from_labels(1 << k, final_states);
            let chi2 = levyglass::stats::chi2_gof(&hist, &pi);
            report.test(
                "occupancy_chi2",
                TestResult {
                    statistic: chi2.statistic,
                    p_value: Some(chi2.p_value),
                    threshold: Some(0.01),
                    pass: Some(chi2.p_value > 0.01),
                    n: *paths as u64,
                },
            );
        }

        ExperimentSpec::CompareSkeleton {
            times_s,
            paths,
            y_init,
            bootstrap,
        } => {
            let decomp = WellDecomposition::new(&m, regime.clone())?;
            let opts = CompareOptions {
                times_s: times_s.clone(),
                n_paths: *paths,
                y_init: match y_init {
                    YInitConfig::Uniform => YInitMode::Uniform,
                    YInitConfig::Matched => YInitMode::Matched,
                },
                n_bootstrap: *bootstrap,
                ..Default::default()
            };
            let rep = yprocess::compare_skeleton(
                &m,
                beta,
                &decomp,
                &YRateMode::exact(),
                &opts,
                config.seed,
            )?;
            let cells = (1usize << rep.k) + 1;
            let mut rows = Vec::new();
            for (i, s) in rep.times_s.iter().enumerate() {
                for cell in 0..cells {
                    let label = if cell == cells - 1 {
                        "*".to_string()
                    } else {
                        WellLabel::from_index(cell, rep.k).to_string()
                    };
                    rows.push(vec![
                        fmt(*s),
                        label,
                        rep.skeleton_marginals[i].counts[cell].to_string(),
                        rep.y_marginals[i].counts[cell].to_string(),
                    ]);
                }
            }
            dir.write_csv("marginals.csv", &["s", "label", "skeleton_count", "y_count"], rows)?;
            for (i, s) in rep.times_s.iter().enumerate() {
                let tv = &rep.marginal_tv[i];
                report.estimate(
                    &format!("marginal_tv_s{s}"),
                    Estimate::with_ci(tv.estimate, tv.ci, *paths as u64),
                );
                report.estimate(
                    &format!("transit_fraction_s{s}"),
                    Estimate::point(rep.transit_fraction[i], *paths as u64),
                );
            }
            if let Some(tv) = &rep.joint_tv {
                report.estimate(
                    "joint_tv",
                    Estimate::with_ci(tv.estimate, tv.ci, *paths as u64),
                );
            }
            report.flag("pairwise_fallback", rep.pairwise_fallback);
        }

        ExperimentSpec::Exact { report: what } => {
            run_exact(config, &m, beta, &regime, what, dir, &mut report)?;
        }

        ExperimentSpec::Fk { report: what } => {
            run_fk(config, &m, beta, &regime, what, dir, &mut report)?;
        }
    }
    Ok(report)
}

fn run_exact(
    config: &ExperimentConfig,
    m: &CouplingMatrix,
    beta: f64,
    regime: &levyglass::couplings::RegimeParams,
    what: &ExactReport,
    dir: &mut OutDir,
    report: &mut StatReport,
) -> Result<()> {
    match what {
        ExactReport::Spectral { frozen, tv_times } => {
            let g = exact::build_generator(
                m,
                beta,
                &Constraint::freeze(frozen.clone()),
                exact::DEFAULT_MAX_FREE_DENSE,
            )?;
            report.estimate("states", Estimate::point(g.num_states() as f64, 1));
            report.estimate(
                "detailed_balance_defect",
                Estimate::point(g.detailed_balance_defect(), 1),
            );
            report.estimate("row_sum_defect", Estimate::point(g.row_sum_defect(), 1));
            let gap = exact::spectral_gap(&g);
            report.estimate("gap", Estimate::point(gap.gap, 1));
            report.flag("disconnected", gap.disconnected);
            if !gap.disconnected {
                let t_mix = exact::mixing_time(&g, 0.25)?;
                report.estimate("t_mix_quarter", Estimate::point(t_mix, 1));
            }
            if !tv_times.is_empty() {
                let curve = exact::tv_curve(&g, 0, tv_times);
                dir.write_csv(
                    "tv_curve.csv",
                    &["t", "tv"],
                    tv_times
                        .iter()
                        .zip(&curve)
                        .map(|(t, d)| vec![fmt(*t), fmt(*d)]),
                )?;
            }
        }
        ExactReport::Block { blocks } => {
            let spec = exact::BlockSpec {
                blocks: blocks.clone(),
            };
            let rep = exact::block_gap_check(
                m,
                beta,
                &spec,
                &Constraint::none(),
                exact::DEFAULT_MAX_FREE_DENSE,
            )?;
            report.estimate("gap_single_site", Estimate::point(rep.gap_single_site, 1));
            report.estimate("gap_block", Estimate::point(rep.gap_block, 1));
            report.estimate("worst_block_gap", Estimate::point(rep.worst_block_gap, 1));
            report.estimate("chi", Estimate::point(rep.chi as f64, 1));
            report.estimate("bound", Estimate::point(rep.bound, 1));
            report.flag("inequality_holds", rep.holds);
        }
        ExactReport::Congestion { pairs } => {
            let mut rows = Vec::new();
            let mut violations = 0usize;
            for s in 0..*pairs {
                let mut rng = task_rng(config.seed, s as u64);
                let tau: Vec<i8> = (0..m.n())
                    .map(|_| levyglass::rng::random_spin(&mut rng))
                    .collect();
                let i1 = s % (m.n() - 1);
                let i2 = m.n() - 1;
                let rep = exact::congestion_4state(m, beta, i1, i2, &tau)?;
                if !(rep.lower_holds && rep.upper_holds) {
                    violations += 1;
                }
                rows.push(vec![
                    i1.to_string(),
                    i2.to_string(),
                    fmt(rep.congestion),
                    fmt(rep.gap),
                    fmt(rep.upper_bound),
                ]);
            }
            dir.write_csv("congestion.csv", &["i1", "i2", "b", "gap", "upper"], rows)?;
            report.estimate("violations", Estimate::point(violations as f64, *pairs as u64));
            report.flag("all_hold", violations == 0);
        }
        ExactReport::WellSeparation { label } => {
            let decomp = WellDecomposition::new(m, regime.clone())?;
            let label = parse_label(label)?;
            let rep = exact::verify_well_separation(
                m,
                beta,
                &decomp,
                &label,
                exact::DEFAULT_MAX_FREE_DENSE,
            )?;
            report.estimate("t_mix_quarter", Estimate::point(rep.t_mix_quarter, 1));
            report.estimate("mean_exit", Estimate::point(rep.mean_exit, 1));
            report.estimate("max_exit", Estimate::point(rep.max_exit, 1));
            report.estimate("ratio", Estimate::point(rep.ratio, 1));
            report.estimate("fitted_d", Estimate::point(rep.fitted_d, 1));
        }
    }
    Ok(())
}

fn run_fk(
    config: &ExperimentConfig,
    m: &CouplingMatrix,
    beta: f64,
    regime: &levyglass::couplings::RegimeParams,
    what: &FkReport,
    dir: &mut OutDir,
    report: &mut StatReport,
) -> Result<()> {
    match what {
        FkReport::Correlation { l, i, j } => {
            let rel = levyglass::couplings::relevant_edges(m, regime);
            let mut tau = Vec::new();
            for &e in rel.edges.iter().take(*l) {
                let sign = if m.edge_value(e) > 0.0 { 1 } else { -1 };
                tau.push((e.i, 1i8));
                tau.push((e.j, sign));
            }
            let mode = if m.num_edges() <= 20 {
                fk::CorrelationMode::Exact
            } else {
                fk::CorrelationMode::MonteCarlo {
                    samples: 50_000,
                    seed: config.seed,
                }
            };
            let rep = fk::correlation_identity_check(m, beta, *l, &tau, *i, *j, mode)?;
            report.estimate("spin_side", Estimate::point(rep.spin_side, 1));
            report.estimate("rc_side", Estimate::point(rep.rc_side, 1));
            report.estimate("diff", Estimate::point(rep.diff, 1));
        }
        FkReport::MeanBondProb {
            beta_multipliers,
            n_values,
        } => {
            let alpha = config.law.alpha;
            let b0 = fk::beta0(alpha);
            report.estimate("beta0", Estimate::point(b0, 1));
            let mut rows = Vec::new();
            for &mult in beta_multipliers {
                for &n in n_values {
                    let v = fk::mean_bond_prob(alpha, mult * b0, n)?;
                    rows.push(vec![fmt(mult), fmt(n), fmt(v)]);
                }
            }
            dir.write_csv("mean_bond_prob.csv", &["beta_over_beta0", "n", "value"], rows)?;
        }
        FkReport::QOverlap { samples, sampler } => {
            let decomp = WellDecomposition::new(m, regime.clone())?;
            let sampler = match sampler {
                WellSamplerConfig::ExactGibbs => fk::WellSampler::ExactGibbs,
                WellSamplerConfig::Es { rounds } => fk::WellSampler::Es { rounds: *rounds },
            };
            let rep = fk::q_overlap_stats(m, beta, &decomp, *samples, sampler, config.seed)?;
            dir.write_csv(
                "overlap_samples.csv",
                &["q"],
                rep.samples.iter().map(|q| vec![fmt(*q)]),
            )?;
            report.estimate(
                "e_q2",
                Estimate::with_se(rep.e_q2, rep.se_q2, *samples as u64),
            );
            report.estimate("mean_q", Estimate::point(rep.mean_q, *samples as u64));
        }
        FkReport::Uniformity {
            l,
            tau,
            samples,
            rounds,
            bootstrap,
        } => {
            let decomp = WellDecomposition::new(m, regime.clone())?;
            let tau_label = parse_label(tau)?;
            let rep = fk::uniformity_check(
                m,
                beta,
                &decomp,
                *l,
                &tau_label,
                *samples,
                *rounds,
                *bootstrap,
                config.seed,
            )?;
            dir.write_csv(
                "skeleton_histogram.csv",
                &["cell", "count"],
                rep.histogram
                    .counts
                    .iter()
                    .enumerate()
                    .map(|(c, k)| vec![c.to_string(), k.to_string()]),
            )?;
            report.estimate(
                "tv_to_uniform",
                Estimate::with_ci(rep.tv, rep.ci, *samples as u64),
            );
            report.estimate("tv_bias_floor", Estimate::point(rep.bias, *samples as u64));
            report.estimate("k_minus_l", Estimate::point(rep.k_minus_l as f64, 1));
        }
    }
    Ok(())
}

fn parse_label(text: &str) -> Result<Vec<i8>> {
    match WellLabel::parse(text)? {
        WellLabel::Label(signs) => Ok(signs),
        WellLabel::Transit => Err(Error::Input(
            "the transit sentinel is not a well label".into(),
        )),
    }
}

/// Re-run a manifest's experiment into `out` and compare artifacts byte for
/// byte (the manifest itself differs in its timestamp and is excluded).
pub fn replay(manifest_path: &Path, out: &Path) -> Result<ReplayOutcome> {
    let manifest = RunManifest::load(manifest_path)?;
    let base = manifest_path
        .parent()
        .ok_or_else(|| Error::Input("manifest has no parent directory".into()))?;
    run_experiment(&manifest.config, out)?;
    let mut mismatched = Vec::new();
    for name in &manifest.outputs {
        let old = std::fs::read(base.join(name))
            .map_err(|e| Error::Input(format!("read original {name}: {e}")))?;
        let new = std::fs::read(out.join(name))
            .map_err(|e| Error::Input(format!("read replayed {name}: {e}")))?;
        if old != new {
            mismatched.push(name.clone());
        }
    }
    Ok(ReplayOutcome {
        files_checked: manifest.outputs.len(),
        mismatched,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReplayOutcome {
    pub files_checked: usize,
    pub mismatched: Vec<String>,
}

impl ReplayOutcome {
    pub fn identical(&self) -> bool {
        self.mismatched.is_empty()
    }
}
