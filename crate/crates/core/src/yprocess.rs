//! The approximating Markov jump process `Y` on `{-1,+1}^K`.
//!
//! Coordinate `l` of `Y` rings at rate `t_scale * Z_l(y)` in rescaled
//! `s`-units, where `Z_l(y)` is the conditional-Gibbs mean of
//! `Z_{v_l} + Z_{w_l} = e^{-2 beta m_{v_l}} + e^{-2 beta m_{w_l}}` given that
//! every relevant bond is satisfied and the skeleton equals `y`; a ring
//! resamples the coordinate uniformly. Rates are composed in log domain end
//! to end (`ln rate = a N^gamma + ln Z_l(y)`) and the ringing coordinate is
//! drawn by the Gumbel-max trick, so regimes where `2 beta |J|` reaches the
//! hundreds of thousands stay exact instead of underflowing.

use std::collections::BTreeMap;

use rand::Rng;

use crate::couplings::CouplingMatrix;
use crate::dynamics::{Engine, EngineKind};
use crate::error::{Error, Result};
use crate::hamiltonian::{log_z_v, Constraint};
use crate::numerics::{log_add_exp, log_sum_exp, LogSumExp};
use crate::rng::{random_spin, standard_exp, task_rng};
use crate::stats::{mean_se, tv_plugin, Histogram, TvEstimate};
use crate::wells::{McmcParams, WellDecomposition, WellLabel};
use crate::Spin;

/// Estimation mode for the `Y` rates.
#[derive(Debug, Clone)]
pub enum YRateMode {
    Exact { max_free: usize },
    /// Within-well time average of `Z_{v_l} + Z_{w_l}` along the restricted
    /// dynamics (the well conditioning freezes all well vertices, so the
    /// single-site restricted chain is ergodic on the well).
    Mcmc(McmcParams),
}

impl YRateMode {
    pub fn exact() -> Self {
        YRateMode::Exact {
            max_free: crate::hamiltonian::DEFAULT_MAX_FREE,
        }
    }
}

/// Log-rates `ln Z_l(y)` for one well, with provenance.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RateEntry {
    /// `ln Z_l(y)` in coordinate order.
    pub log_rates: Vec<f64>,
    /// Standard errors of `ln Z_l` (batch means) when estimated by MCMC.
    pub log_rate_se: Option<Vec<f64>>,
}

/// Memoized table of `Y` rates per visited well label.
///
/// Entries are populated lazily (2^K wells is too many to precompute for
/// large `K`) and are write-once. Parallel sweeps give each worker its own
/// evaluator clone: duplicated computation is acceptable, torn reads are
/// not.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RateTable {
    pub k: usize,
    pub log_t_scale: f64,
    pub exact: bool,
    pub entries: BTreeMap<usize, RateEntry>,
}

/// Lazily computes and memoizes `Y` rates for a fixed instance.
#[derive(Clone)]
pub struct RateEvaluator<'a> {
    j: &'a CouplingMatrix,
    beta: f64,
    decomp: &'a WellDecomposition,
    mode: YRateMode,
    table: RateTable,
}

impl<'a> RateEvaluator<'a> {
    pub fn new(
        j: &'a CouplingMatrix,
        beta: f64,
        decomp: &'a WellDecomposition,
        mode: YRateMode,
    ) -> Self {
        let exact = matches!(mode, YRateMode::Exact { .. });
        RateEvaluator {
            j,
            beta,
            decomp,
            mode,
            table: RateTable {
                k: decomp.k(),
                log_t_scale: decomp.regime().log_t_scale,
                exact,
                entries: BTreeMap::new(),
            },
        }
    }

    pub fn decomp(&self) -> &WellDecomposition {
        self.decomp
    }

    /// The rates accumulated so far.
    pub fn table(&self) -> &RateTable {
        &self.table
    }

    /// Memoized `ln Z_l(y)` for all coordinates of the well `label_index`.
    pub fn entry(&mut self, label_index: usize) -> Result<&RateEntry> {
        if !self.table.entries.contains_key(&label_index) {
            let label = match WellLabel::from_index(label_index, self.table.k) {
                WellLabel::Label(signs) => signs,
                WellLabel::Transit => unreachable!(),
            };
            let entry = compute_rates(self.j, self.beta, self.decomp, &label, &self.mode)?;
            self.table.entries.insert(label_index, entry);
        }
        Ok(&self.table.entries[&label_index])
    }
}

fn compute_rates(
    j: &CouplingMatrix,
    beta: f64,
    decomp: &WellDecomposition,
    label: &[Spin],
    mode: &YRateMode,
) -> Result<RateEntry> {
    let k = decomp.k();
    match mode {
        YRateMode::Exact { max_free } => {
            let frozen = decomp.label_assignment(j, label)?;
            let table = crate::hamiltonian::gibbs_exact_capped(
                j,
                beta,
                &Constraint::freeze(frozen),
                *max_free,
            )?;
            let log_rates = (1..=k)
                .map(|l| {
                    let e = decomp.edges()[l - 1];
                    table.log_expectation(|spins| {
                        let mv = crate::hamiltonian::local_field(j, spins, e.i);
                        let mw = crate::hamiltonian::local_field(j, spins, e.j);
                        log_add_exp(log_z_v(beta, mv), log_z_v(beta, mw))
                    })
                })
                .collect();
            Ok(RateEntry {
                log_rates,
                log_rate_se: None,
            })
        }
        YRateMode::Mcmc(params) => mcmc_rates(j, beta, decomp, label, params),
    }
}

/// Within-well time averages of `Z_{v_l} + Z_{w_l}`, accumulated in log
/// domain, with batch-means errors on the log scale.
fn mcmc_rates(
    j: &CouplingMatrix,
    beta: f64,
    decomp: &WellDecomposition,
    label: &[Spin],
    params: &McmcParams,
) -> Result<RateEntry> {
    let k = decomp.k();
    let frozen = decomp.label_assignment(j, label)?;
    let frozen_vertices: Vec<usize> = frozen.iter().map(|&(v, _)| v).collect();
    let mut x0: Vec<Spin> = vec![1; j.n()];
    for &(v, s) in &frozen {
        x0[v] = s;
    }
    let mut rng = task_rng(params.seed, 1);
    let mut engine = Engine::new(j, beta, x0, EngineKind::RejectionFree, &frozen_vertices, 0.0);
    // the observable is a smooth function of the free spins; the pilot
    // duration doubles as burn-in here
    engine.advance(params.pilot_duration, &mut rng, false, |_, _, _, _| true);

    let log_obs = |spins: &[Spin], l: usize| -> f64 {
        let e = decomp.edges()[l];
        let mv = crate::hamiltonian::local_field(j, spins, e.i);
        let mw = crate::hamiltonian::local_field(j, spins, e.j);
        log_add_exp(log_z_v(beta, mv), log_z_v(beta, mw))
    };

    let start = engine.time();
    let batch_len = params.duration / params.batches as f64;
    // per coordinate, per batch: ln (integral of (Z_v + Z_w) dt / batch_len)
    let mut batch_logs = vec![Vec::with_capacity(params.batches); k];
    let mut acc: Vec<LogSumExp> = (0..k).map(|_| LogSumExp::new()).collect();
    let mut last_t = start;
    let mut last_vals: Vec<f64> = (0..k).map(|l| log_obs(engine.spins(), l)).collect();
    for b in 1..=params.batches {
        let target = start + b as f64 * batch_len;
        engine.advance(target, &mut rng, false, |t, _, _, spins| {
            let dt = t - last_t;
            if dt > 0.0 {
                for (l, a) in acc.iter_mut().enumerate() {
                    a.add(last_vals[l] + dt.ln());
                }
            }
            last_t = t;
            for (l, val) in last_vals.iter_mut().enumerate() {
                *val = log_obs(spins, l);
            }
            true
        });
        let dt = target - last_t;
        for l in 0..k {
            if dt > 0.0 {
                acc[l].add(last_vals[l] + dt.ln());
            }
            batch_logs[l].push(acc[l].value() - batch_len.ln());
            acc[l] = LogSumExp::new();
        }
        last_t = target;
    }
    let mut log_rates = Vec::with_capacity(k);
    let mut ses = Vec::with_capacity(k);
    for logs in &batch_logs {
        log_rates.push(log_sum_exp(logs) - (params.batches as f64).ln());
        let (_, se) = mean_se(logs);
        ses.push(se);
    }
    Ok(RateEntry {
        log_rates,
        log_rate_se: Some(ses),
    })
}

/// `ln Z_l(y)` for a single coordinate (1-based `l`).
pub fn y_rate(
    j: &CouplingMatrix,
    beta: f64,
    decomp: &WellDecomposition,
    l: usize,
    label: &[Spin],
    mode: &YRateMode,
) -> Result<f64> {
    if l == 0 || l > decomp.k() {
        return Err(Error::input(format!("coordinate {l} outside 1..=K")));
    }
    let entry = compute_rates(j, beta, decomp, label, mode)?;
    Ok(entry.log_rates[l - 1])
}

/// Conditional means over `W_{+/-}` for the `M'` chain: all `K` bonds
/// satisfied, coordinates `1..L-1` frozen to `context`, coordinate `L`
/// fixed to `+`/`-`. Returns `(ln Zbar_+, ln Zbar_-)`.
///
/// Only exact enumeration is offered: the conditioning set is a union of
/// wells, between which single-site restricted dynamics cannot move, so a
/// plain MCMC time average would not be ergodic.
pub fn mprime_rates(
    j: &CouplingMatrix,
    beta: f64,
    decomp: &WellDecomposition,
    l: usize,
    context: &[Spin],
    max_free: usize,
) -> Result<(f64, f64)> {
    if l == 0 || l > decomp.k() {
        return Err(Error::input(format!("coordinate {l} outside 1..=K")));
    }
    if context.len() != l - 1 {
        return Err(Error::input(format!(
            "context must fix exactly the {} coordinates above L",
            l - 1
        )));
    }
    let e_l = decomp.edges()[l - 1];
    let mut out = [0.0f64; 2];
    for (slot, sign) in [(0usize, 1i8), (1usize, -1i8)] {
        let frozen = crate::wells::frozen_for_context(j, decomp, l, context, sign)?;
        let below: Vec<_> = decomp.edges()[l..].to_vec();
        let constraint = Constraint::freeze(frozen).with_required_sat(below);
        let table = crate::hamiltonian::gibbs_exact_capped(j, beta, &constraint, max_free)?;
        out[slot] = table.log_expectation(|spins| {
            let mv = crate::hamiltonian::local_field(j, spins, e_l.i);
            let mw = crate::hamiltonian::local_field(j, spins, e_l.j);
            log_add_exp(log_z_v(beta, mv), log_z_v(beta, mw))
        });
    }
    Ok((out[0], out[1]))
}

/// Exact stationary law of `Y`: `pi^Y(y)` proportional to the well partition
/// function `sum_{sigma in C_y} e^{beta H}`. Probabilities are indexed by
/// label index.
pub fn stationary_y(
    j: &CouplingMatrix,
    beta: f64,
    decomp: &WellDecomposition,
    max_free: usize,
) -> Result<Vec<f64>> {
    let k = decomp.k();
    if k > 20 {
        return Err(Error::ResourceCap {
            what: "wells in exact stationary law",
            needed: 1u64 << k.min(63),
            cap: 1 << 20,
            hint: "exact enumeration over wells needs K <= 20",
        });
    }
    let mut log_weights = Vec::with_capacity(1 << k);
    for idx in 0..1usize << k {
        let label = match WellLabel::from_index(idx, k) {
            WellLabel::Label(signs) => signs,
            WellLabel::Transit => unreachable!(),
        };
        let frozen = decomp.label_assignment(j, &label)?;
        let table =
            crate::hamiltonian::gibbs_exact_capped(j, beta, &Constraint::freeze(frozen), max_free)?;
        log_weights.push(table.log_z());
    }
    let log_total = log_sum_exp(&log_weights);
    Ok(log_weights.iter().map(|&lw| (lw - log_total).exp()).collect())
}

/// One recorded jump of a `Y` trajectory (sign changes only).
#[derive(Debug, Clone, Copy)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct YJump {
    pub s: f64,
    pub coord: usize,
    pub new_sign: Spin,
}

/// Trajectory of `Y` in rescaled time.
#[derive(Debug, Clone)]
pub struct YTrajectory {
    pub initial: Vec<Spin>,
    pub jumps: Vec<YJump>,
    pub horizon_s: f64,
}

impl YTrajectory {
    pub fn state_at(&self, s: f64) -> Result<Vec<Spin>> {
        if !(0.0..=self.horizon_s).contains(&s) {
            return Err(Error::OutOfHorizon {
                t: s,
                horizon: self.horizon_s,
            });
        }
        let mut y = self.initial.clone();
        for j in &self.jumps {
            if j.s > s {
                break;
            }
            y[j.coord] = j.new_sign;
        }
        Ok(y)
    }
}

/// Simulate `Y` for `duration_s` rescaled time units from `y0`.
///
/// Coordinate `l` rings at `exp(log_t_scale + ln Z_l(y))` per `s`-unit;
/// rates are re-read after every ring since `Z_l` depends on the whole
/// state, and each ring resamples its coordinate uniformly.
pub fn simulate_y(
    eval: &mut RateEvaluator<'_>,
    y0: Vec<Spin>,
    duration_s: f64,
    seed: u64,
) -> Result<YTrajectory> {
    simulate_y_restricted(eval, y0, duration_s, 0, seed)
}

/// [`simulate_y`] with updates to the top `frozen_prefix` coordinates
/// rejected (the restricted process of the within-well mixing analysis; its
/// stationary law is the full one conditioned on the frozen values).
pub fn simulate_y_restricted(
    eval: &mut RateEvaluator<'_>,
    y0: Vec<Spin>,
    duration_s: f64,
    frozen_prefix: usize,
    seed: u64,
) -> Result<YTrajectory> {
    let k = eval.table().k;
    if y0.len() != k {
        return Err(Error::input(format!("y0 length {} != K = {}", y0.len(), k)));
    }
    if frozen_prefix > k {
        return Err(Error::input("frozen prefix exceeds K"));
    }
    let log_t_scale = eval.table().log_t_scale;
    let mut rng = task_rng(seed, 0);
    let mut y = y0.clone();
    let mut jumps = Vec::new();
    let mut s = 0.0f64;
    if k == frozen_prefix {
        return Ok(YTrajectory {
            initial: y0,
            jumps,
            horizon_s: duration_s,
        });
    }
    let mut idx = WellLabel::Label(y.clone()).index().unwrap();
    loop {
        // a rejected update leaves the state unchanged, so freezing a
        // coordinate is equivalent to removing its clock
        let log_rates: Vec<f64> = eval
            .entry(idx)?
            .log_rates
            .iter()
            .enumerate()
            .map(|(l, &lz)| {
                if l < frozen_prefix {
                    f64::NEG_INFINITY
                } else {
                    log_t_scale + lz
                }
            })
            .collect();
        let log_total = log_sum_exp(&log_rates);
        let ds = (standard_exp(&mut rng).max(1e-300).ln() - log_total).exp();
        s += ds;
        if !s.is_finite() || s > duration_s {
            break;
        }
        // Gumbel-max pick of the ringing coordinate
        let mut best = 0usize;
        let mut best_val = f64::NEG_INFINITY;
        for (l, &lr) in log_rates.iter().enumerate() {
            let u: f64 = 1.0 - rng.gen::<f64>();
            let g = -(-u.ln()).ln();
            if lr + g > best_val {
                best_val = lr + g;
                best = l;
            }
        }
        let new_sign = random_spin(&mut rng);
        if new_sign != y[best] {
            y[best] = new_sign;
            idx = WellLabel::Label(y.clone()).index().unwrap();
            jumps.push(YJump {
                s,
                coord: best,
                new_sign,
            });
        }
    }
    Ok(YTrajectory {
        initial: y0,
        jumps,
        horizon_s: duration_s,
    })
}

/// Initialization of the `Y` side in skeleton comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum YInitMode {
    /// `Y(0) ~ Unif({-1,+1}^K)`, the main theorem's initialization.
    Uniform,
    /// `Y(0)` drawn from the empirical law of the skeleton after a short
    /// burn-in of the real dynamics (transit samples redrawn); the matched
    /// variant the theorem statement leaves open.
    Matched,
}

/// Options for [`compare_skeleton`].
#[derive(Debug, Clone)]
pub struct CompareOptions {
    /// Observation times `s_1 < ... < s_n` in rescaled units.
    pub times_s: Vec<f64>,
    pub n_paths: usize,
    pub y_init: YInitMode,
    pub n_bootstrap: usize,
    /// Joint histograms larger than this fall back to pairwise marginals.
    pub max_joint_cells: usize,
    pub max_log_t_scale: f64,
}

impl Default for CompareOptions {
    fn default() -> Self {
        CompareOptions {
            times_s: vec![1.0, 2.0],
            n_paths: 10_000,
            y_init: YInitMode::Uniform,
            n_bootstrap: 400,
            max_joint_cells: 1 << 16,
            max_log_t_scale: 18.0,
        }
    }
}

/// Comparison of the skeleton of the true dynamics against `Y`.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CompareReport {
    pub k: usize,
    pub times_s: Vec<f64>,
    pub n_paths: usize,
    pub y_init: YInitMode,
    /// Per-time histograms over the `2^K` labels plus one transit cell.
    pub skeleton_marginals: Vec<Histogram>,
    pub y_marginals: Vec<Histogram>,
    /// Plug-in TV per observation time, on the full space of labels plus
    /// the transit cell (transit counts against `Y`, which never transits).
    pub marginal_tv: Vec<TvEstimate>,
    /// Plug-in TV per observation time after dropping transit samples and
    /// renormalizing: the comparison of the well-conditional laws.
    pub conditional_marginal_tv: Vec<TvEstimate>,
    /// TV of the joint law over all observation times (`None` when the cell
    /// count exceeded the cap and only marginals were compared).
    pub joint_tv: Option<TvEstimate>,
    pub pairwise_fallback: bool,
    /// Fraction of dynamics paths in transit at each observation time.
    pub transit_fraction: Vec<f64>,
}

/// Run `n_paths` trajectories of the dynamics from uniform starts and of
/// `Y` from its initialization, observe the skeleton at `s_i * t_scale` and
/// `Y` at `s_i`, and compare the empirical finite-dimensional distributions.
pub fn compare_skeleton(
    j: &CouplingMatrix,
    beta: f64,
    decomp: &WellDecomposition,
    mode: &YRateMode,
    opts: &CompareOptions,
    seed: u64,
) -> Result<CompareReport> {
    let k = decomp.k();
    let times = &opts.times_s;
    if times.is_empty() || times.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::input("observation times must be strictly increasing"));
    }
    if times[0] <= 0.0 {
        return Err(Error::input("observation times must be positive"));
    }
    let log_t_scale = decomp.regime().log_t_scale;
    if log_t_scale > opts.max_log_t_scale {
        return Err(Error::ResourceCap {
            what: "ln t_scale for an honest dynamical run",
            needed: log_t_scale.ceil() as u64,
            cap: opts.max_log_t_scale as u64,
            hint: "use a planted surrogate instance or raise max_log_t_scale",
        });
    }
    let t_scale = log_t_scale.exp();
    let n_times = times.len();
    let cells = (1usize << k) + 1;
    let transit_cell = 1usize << k;

    // dynamics side: one independent stream per path, parallel when enabled
    let burn_in_s = times[0] / 4.0;
    let matched = opts.y_init == YInitMode::Matched;
    let per_path: Vec<(Vec<usize>, Option<usize>)> = crate::par_map(opts.n_paths, |path| {
        let mut rng = task_rng(seed, path as u64);
        let x0 = crate::rng::random_spins(&mut rng, j.n());
        let mut engine = Engine::new(j, beta, x0, EngineKind::RejectionFree, &[], 0.0);
        let mut burn_label = None;
        if matched {
            engine.advance(burn_in_s * t_scale, &mut rng, false, |_, _, _, _| true);
            burn_label = decomp.skeleton(j, engine.spins()).index();
        }
        let mut symbols = Vec::with_capacity(n_times);
        for &s_i in times.iter() {
            engine.advance(s_i * t_scale, &mut rng, false, |_, _, _, _| true);
            symbols.push(
                decomp
                    .skeleton(j, engine.spins())
                    .index()
                    .unwrap_or(transit_cell),
            );
        }
        (symbols, burn_label)
    });
    let mut x_symbols = vec![0usize; opts.n_paths * n_times];
    let mut burn_in_labels = Vec::new();
    for (path, (symbols, burn_label)) in per_path.into_iter().enumerate() {
        x_symbols[path * n_times..(path + 1) * n_times].copy_from_slice(&symbols);
        if matched {
            burn_in_labels.push(burn_label);
        }
    }

    // Y side
    let mut y_symbols = vec![0usize; opts.n_paths * n_times];
    let mut eval = RateEvaluator::new(j, beta, decomp, mode.clone());
    for path in 0..opts.n_paths {
        let mut rng = task_rng(seed ^ 0xabcd_1234, path as u64);
        let y0: Vec<Spin> = match opts.y_init {
            YInitMode::Uniform => (0..k).map(|_| random_spin(&mut rng)).collect(),
            YInitMode::Matched => {
                // draw burn-in labels until a non-transit one comes up
                let mut idx = None;
                for _ in 0..64 {
                    let cand = burn_in_labels[rng.gen_range(0..burn_in_labels.len())];
                    if let Some(c) = cand {
                        idx = Some(c);
                        break;
                    }
                }
                match WellLabel::from_index(
                    idx.ok_or_else(|| Error::input("burn-in skeletons were all transit"))?,
                    k,
                ) {
                    WellLabel::Label(signs) => signs,
                    WellLabel::Transit => unreachable!(),
                }
            }
        };
        let traj = simulate_y(&mut eval, y0, *times.last().unwrap(), seed ^ 0x59ce
            ^ ((path as u64) << 16))?;
        for (i, &s_i) in times.iter().enumerate() {
            let y = traj.state_at(s_i)?;
            y_symbols[path * n_times + i] = WellLabel::Label(y).index().unwrap_or(transit_cell);
        }
    }

    // marginals and transit fractions
    let mut skeleton_marginals = Vec::with_capacity(n_times);
    let mut y_marginals = Vec::with_capacity(n_times);
    let mut marginal_tv = Vec::with_capacity(n_times);
    let mut conditional_marginal_tv = Vec::with_capacity(n_times);
    let mut transit_fraction = Vec::with_capacity(n_times);
    for i in 0..n_times {
        let hx =
            Histogram::from_labels(cells, (0..opts.n_paths).map(|p| x_symbols[p * n_times + i]));
        let hy =
            Histogram::from_labels(cells, (0..opts.n_paths).map(|p| y_symbols[p * n_times + i]));
        transit_fraction.push(hx.counts[transit_cell] as f64 / opts.n_paths as f64);
        marginal_tv.push(tv_plugin(&hx, &hy, opts.n_bootstrap, seed ^ ((i as u64) << 8)));
        let cx = Histogram {
            counts: hx.counts[..transit_cell].to_vec(),
        };
        let cy = Histogram {
            counts: hy.counts[..transit_cell].to_vec(),
        };
        conditional_marginal_tv.push(tv_plugin(&cx, &cy, opts.n_bootstrap, seed ^ ((i as u64) << 9)));
        skeleton_marginals.push(hx);
        y_marginals.push(hy);
    }

    // joint law over all observation times
    let joint_cells = cells.checked_pow(n_times as u32);
    let (joint_tv, pairwise_fallback) = match joint_cells {
        Some(c) if c <= opts.max_joint_cells => {
            let index = |symbols: &[usize], p: usize| -> usize {
                (0..n_times).fold(0usize, |acc, i| acc * cells + symbols[p * n_times + i])
            };
            let hx = Histogram::from_labels(c, (0..opts.n_paths).map(|p| index(&x_symbols, p)));
            let hy = Histogram::from_labels(c, (0..opts.n_paths).map(|p| index(&y_symbols, p)));
            (
                Some(tv_plugin(&hx, &hy, opts.n_bootstrap, seed ^ 0xff00)),
                false,
            )
        }
        _ => (None, true),
    };

    Ok(CompareReport {
        k,
        times_s: times.clone(),
        n_paths: opts.n_paths,
        y_init: opts.y_init,
        skeleton_marginals,
        y_marginals,
        marginal_tv,
        conditional_marginal_tv,
        joint_tv,
        pairwise_fallback,
        transit_fraction,
    })
}
