//! Continuous-time Glauber dynamics.
//!
//! Two law-equivalent engines:
//!
//! - `Naive`: every free site carries a rate-1 Poisson clock; a ring at `v`
//!   resamples the spin from the heat-bath conditional, i.e. flips with
//!   probability `lambda_v`.
//! - `RejectionFree`: the flip-event process directly; waiting time
//!   `Exp(Lambda)` with `Lambda = sum_v lambda_v(sigma)`, flip vertex chosen
//!   proportionally to `lambda_v`. This is the engine that survives
//!   exponentially separated timescales, where almost every naive ring would
//!   be rejected.
//!
//! Local fields are maintained exactly; rates are refreshed incrementally
//! (the flipped vertex and its significant neighbors) with a full resync
//! every 2^16 events. If every rate underflows linear `f64`, the step is
//! redone in log domain, which either yields an honest event or pushes past
//! the horizon.

use std::collections::HashMap;

use rand::Rng;

use crate::couplings::CouplingMatrix;
use crate::error::{Error, Result};
use crate::hamiltonian::{flip_rate, gibbs_exact, log_flip_rate, Constraint, SpinConfig};
use crate::numerics::log_sum_exp;
use crate::rng::{random_spin, random_spins, standard_exp, task_rng, SimRng};
use crate::stats::{tv_plugin, Histogram, TvEstimate};
use crate::wells::{WellDecomposition, WellLabel};
use crate::Spin;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum EngineKind {
    Naive,
    RejectionFree,
}

/// Options for a single trajectory run.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub engine: EngineKind,
    /// Vertices whose updates are rejected (restricted dynamics).
    pub frozen: Vec<usize>,
    pub horizon: f64,
    /// Record rejected naive updates as events with unchanged spin.
    pub record_null_events: bool,
    /// Neighbors with `|J| <=` this keep a stale rate until the next refresh.
    pub significant_cutoff: f64,
}

impl RunOptions {
    pub fn new(engine: EngineKind, horizon: f64) -> Self {
        RunOptions {
            engine,
            frozen: Vec::new(),
            horizon,
            record_null_events: false,
            significant_cutoff: 0.0,
        }
    }

    pub fn frozen(mut self, frozen: Vec<usize>) -> Self {
        self.frozen = frozen;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Event {
    pub time: f64,
    pub vertex: usize,
    pub new_spin: Spin,
}

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Outcome {
    ReachedHorizon,
    StoppedByObserver,
    /// Total flip rate hit zero with time remaining (e.g. all vertices
    /// frozen); reported, not an error.
    Absorbed,
}

/// An ordered event record plus the initial configuration.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub initial: Vec<Spin>,
    pub events: Vec<Event>,
    pub horizon: f64,
    pub outcome: Outcome,
}

impl Trajectory {
    /// Configuration at time `t` by replay.
    pub fn state_at(&self, t: f64) -> Result<Vec<Spin>> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(Error::OutOfHorizon {
                t,
                horizon: self.horizon,
            });
        }
        let mut spins = self.initial.clone();
        for e in &self.events {
            if e.time > t {
                break;
            }
            spins[e.vertex] = e.new_spin;
        }
        Ok(spins)
    }

    /// Two-time autocorrelation `C(t, t') = (1/N) sum_v X_v(t) X_v(t')`.
    pub fn autocorrelation(&self, t: f64, t_prime: f64) -> Result<f64> {
        if t > t_prime {
            return Err(Error::input("autocorrelation requires t <= t'"));
        }
        let a = self.state_at(t)?;
        let b = self.state_at(t_prime)?;
        Ok(overlap(&a, &b))
    }
}

/// `(1/N) <a, b>`.
pub fn overlap(a: &[Spin], b: &[Spin]) -> f64 {
    let dot: i64 = a.iter().zip(b).map(|(&x, &y)| (x as i64) * (y as i64)).sum();
    dot as f64 / a.len() as f64
}

const RATE_REFRESH_INTERVAL: u64 = 1 << 16;

/// Incremental simulation state shared by both engines. Drive it with
/// [`Engine::advance`]; the observer sees every event together with the
/// updated configuration.
pub struct Engine<'a> {
    j: &'a CouplingMatrix,
    beta: f64,
    cfg: SpinConfig,
    free: Vec<usize>,
    is_free: Vec<bool>,
    /// `lambda_v` for free vertices, 0 for frozen.
    rates: Vec<f64>,
    total_rate: f64,
    t: f64,
    events_since_refresh: u64,
    kind: EngineKind,
    cutoff: f64,
}

enum Step {
    Flip { t: f64, v: usize },
    Null { t: f64, v: usize },
    PastTarget,
    Absorbed,
}

impl<'a> Engine<'a> {
    pub fn new(
        j: &'a CouplingMatrix,
        beta: f64,
        x0: Vec<Spin>,
        kind: EngineKind,
        frozen: &[usize],
        significant_cutoff: f64,
    ) -> Self {
        let n = j.n();
        let mut is_free = vec![true; n];
        for &v in frozen {
            is_free[v] = false;
        }
        let free: Vec<usize> = (0..n).filter(|&v| is_free[v]).collect();
        let mut engine = Engine {
            j,
            beta,
            cfg: SpinConfig::new(j, x0),
            free,
            is_free,
            rates: vec![0.0; n],
            total_rate: 0.0,
            t: 0.0,
            events_since_refresh: 0,
            kind,
            cutoff: significant_cutoff,
        };
        engine.refresh_rates();
        engine
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn state(&self) -> &SpinConfig {
        &self.cfg
    }

    pub fn spins(&self) -> &[Spin] {
        self.cfg.spins()
    }

    fn refresh_rates(&mut self) {
        self.total_rate = 0.0;
        for &v in &self.free {
            let r = flip_rate(self.beta, self.cfg.local_field(v));
            self.rates[v] = r;
            self.total_rate += r;
        }
        self.events_since_refresh = 0;
    }

    /// Flip `v`, keeping fields exact and rates fresh for `v` and its
    /// significant neighbors.
    fn apply_flip(&mut self, v: usize) {
        self.cfg.flip(self.j, v);
        if self.kind == EngineKind::RejectionFree {
            for w in 0..self.j.n() {
                if !self.is_free[w] {
                    continue;
                }
                if w != v && self.j.get(v, w).abs() <= self.cutoff {
                    continue;
                }
                let new = flip_rate(self.beta, self.cfg.local_field(w));
                self.total_rate += new - self.rates[w];
                self.rates[w] = new;
            }
            self.events_since_refresh += 1;
            if self.events_since_refresh >= RATE_REFRESH_INTERVAL {
                self.refresh_rates();
            }
        }
    }

    fn step(&mut self, target: f64, rng: &mut SimRng) -> Step {
        match self.kind {
            EngineKind::Naive => self.step_naive(target, rng),
            EngineKind::RejectionFree => self.step_rejection_free(target, rng),
        }
    }

    fn step_naive(&mut self, target: f64, rng: &mut SimRng) -> Step {
        if self.free.is_empty() {
            return Step::Absorbed;
        }
        let dt = standard_exp(rng).max(1e-300) / self.free.len() as f64;
        let t_next = self.t + dt;
        if t_next > target {
            self.t = target;
            return Step::PastTarget;
        }
        self.t = t_next;
        let v = self.free[rng.gen_range(0..self.free.len())];
        let lambda = flip_rate(self.beta, self.cfg.local_field(v));
        if rng.gen::<f64>() < lambda {
            self.apply_flip(v);
            Step::Flip { t: t_next, v }
        } else {
            Step::Null { t: t_next, v }
        }
    }

    fn step_rejection_free(&mut self, target: f64, rng: &mut SimRng) -> Step {
        if self.free.is_empty() {
            return Step::Absorbed;
        }
        if self.total_rate <= 0.0 {
            return self.step_log_domain(target, rng);
        }
        let dt = standard_exp(rng).max(1e-300) / self.total_rate;
        let t_next = self.t + dt;
        if t_next > target {
            self.t = target;
            return Step::PastTarget;
        }
        self.t = t_next;
        let mut u = rng.gen::<f64>() * self.total_rate;
        let mut chosen = usize::MAX;
        for &v in &self.free {
            u -= self.rates[v];
            if u <= 0.0 {
                chosen = v;
                break;
            }
        }
        if chosen == usize::MAX {
            // rounding drift in the incremental total; resync and retry once
            self.refresh_rates();
            let mut u = rng.gen::<f64>() * self.total_rate;
            chosen = *self.free.last().unwrap();
            for &v in &self.free {
                u -= self.rates[v];
                if u <= 0.0 {
                    chosen = v;
                    break;
                }
            }
        }
        self.apply_flip(chosen);
        Step::Flip { t: t_next, v: chosen }
    }

    /// All rates underflow `f64`: compute `ln Lambda` exactly and either
    /// produce the event or push past the target.
    fn step_log_domain(&mut self, target: f64, rng: &mut SimRng) -> Step {
        let log_rates: Vec<f64> = self
            .free
            .iter()
            .map(|&v| log_flip_rate(self.beta, self.cfg.local_field(v)))
            .collect();
        let log_total = log_sum_exp(&log_rates);
        let dt = (standard_exp(rng).max(1e-300).ln() - log_total).exp();
        let t_next = self.t + dt;
        if !t_next.is_finite() || t_next > target {
            self.t = target;
            return Step::PastTarget;
        }
        self.t = t_next;
        let mut u = rng.gen::<f64>();
        let mut chosen = *self.free.last().unwrap();
        for (idx, &v) in self.free.iter().enumerate() {
            u -= (log_rates[idx] - log_total).exp();
            if u <= 0.0 {
                chosen = v;
                break;
            }
        }
        self.apply_flip(chosen);
        Step::Flip { t: t_next, v: chosen }
    }

    /// Advance until `target` time or absorption, invoking
    /// `on_event(t, vertex, new_spin, spins)` after every event (flips, plus
    /// rejected naive attempts when `with_nulls`; those carry the unchanged
    /// spin). The callback returns `false` to stop early.
    pub fn advance<F>(&mut self, target: f64, rng: &mut SimRng, with_nulls: bool, mut on_event: F) -> Outcome
    where
        F: FnMut(f64, usize, Spin, &[Spin]) -> bool,
    {
        loop {
            match self.step(target, rng) {
                Step::Flip { t, v } => {
                    if !on_event(t, v, self.cfg.spin(v), self.cfg.spins()) {
                        return Outcome::StoppedByObserver;
                    }
                }
                Step::Null { t, v } => {
                    if with_nulls && !on_event(t, v, self.cfg.spin(v), self.cfg.spins()) {
                        return Outcome::StoppedByObserver;
                    }
                }
                Step::PastTarget => return Outcome::ReachedHorizon,
                Step::Absorbed => return Outcome::Absorbed,
            }
        }
    }
}

/// Run the (restricted) dynamics and record the trajectory.
pub fn run(j: &CouplingMatrix, beta: f64, x0: Vec<Spin>, opts: &RunOptions, seed: u64) -> Trajectory {
    let mut rng = task_rng(seed, 0);
    let mut engine = Engine::new(
        j,
        beta,
        x0.clone(),
        opts.engine,
        &opts.frozen,
        opts.significant_cutoff,
    );
    let mut events = Vec::new();
    let record_nulls = opts.record_null_events && opts.engine == EngineKind::Naive;
    let outcome = engine.advance(opts.horizon, &mut rng, record_nulls, |time, vertex, new_spin, _| {
        events.push(Event {
            time,
            vertex,
            new_spin,
        });
        true
    });
    Trajectory {
        initial: x0,
        events,
        horizon: opts.horizon,
        outcome,
    }
}

/// A first-exit observation, possibly right-censored at the horizon.
#[derive(Debug, Clone, Copy)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EscapeObservation {
    pub time: f64,
    pub censored: bool,
}

/// First time the trajectory leaves the well of `x0` (some edge of
/// `E_{a,gamma}` becomes unsatisfied), using the rejection-free engine.
/// `x0` must lie in the well `well`.
pub fn escape_time(
    j: &CouplingMatrix,
    beta: f64,
    decomp: &WellDecomposition,
    well: &WellLabel,
    x0: Vec<Spin>,
    horizon: f64,
    seed: u64,
) -> Result<EscapeObservation> {
    let start = decomp.skeleton(j, &x0);
    if &start != well || start == WellLabel::Transit {
        return Err(Error::input(format!(
            "x0 has skeleton {start}, expected the well {well}"
        )));
    }
    // each well vertex belongs to exactly one relevant edge (disjointness),
    // so the post-flip satisfaction check is O(1)
    let mut incident = vec![usize::MAX; j.n()];
    for (l, e) in decomp.edges().iter().enumerate() {
        incident[e.i] = l;
        incident[e.j] = l;
    }
    let edges = decomp.edges();
    let mut rng = task_rng(seed, 0);
    let mut engine = Engine::new(j, beta, x0, EngineKind::RejectionFree, &[], 0.0);
    let mut exit_time = f64::NAN;
    let outcome = engine.advance(horizon, &mut rng, false, |time, vertex, _, spins| {
        let l = incident[vertex];
        if l != usize::MAX {
            let e = edges[l];
            let sat = (spins[e.i] as f64 * spins[e.j] as f64) * j.edge_value(e) > 0.0;
            if !sat {
                exit_time = time;
                return false;
            }
        }
        true
    });
    Ok(match outcome {
        Outcome::StoppedByObserver => EscapeObservation {
            time: exit_time,
            censored: false,
        },
        Outcome::ReachedHorizon | Outcome::Absorbed => EscapeObservation {
            time: horizon,
            censored: true,
        },
    })
}

/// Options for [`autocorrelation_distribution`].
#[derive(Debug, Clone)]
pub struct AutocorrOptions {
    /// Later observation time in units of `t_scale` (must be > 1).
    pub s: f64,
    pub n_runs: usize,
    /// Histogram bins over `[-1, 1]` for the TV comparison.
    pub n_bins: usize,
    pub n_bootstrap: usize,
    /// Runs with `ln t_scale` above this are refused: the horizon
    /// `s * exp(log_t_scale)` must stay simulable. Planted surrogates with
    /// `2 beta |J|` in roughly `[8, 30]` keep it so.
    pub max_log_t_scale: f64,
}

impl Default for AutocorrOptions {
    fn default() -> Self {
        AutocorrOptions {
            s: 2.0,
            n_runs: 10_000,
            n_bins: 20,
            n_bootstrap: 400,
            max_log_t_scale: 18.0,
        }
    }
}

/// Empirical law of `C_N(t_scale, s t_scale)` against the replica overlap
/// law `q_{a,gamma}`.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AutocorrelationReport {
    pub s: f64,
    pub log_t_scale: f64,
    /// `C_N(t_scale, s t_scale)` per dynamical run (uniform start).
    pub dynamical: Vec<f64>,
    /// Overlap of two independent conditional-Gibbs samples in a
    /// uniform-at-random well, per replica draw.
    pub replica: Vec<f64>,
    /// Binned TV between the two sample sets.
    pub tv: TvEstimate,
}

/// Dynamical two-time autocorrelation law vs. the replica overlap law.
///
/// The dynamical side runs `n_runs` trajectories from uniform starts to
/// `s * t_scale` and records `C_N(t_scale, s t_scale)`. The replica side
/// draws a uniform well label, then two independent samples from the Gibbs
/// measure conditioned on that well, and records their overlap; it does not
/// depend on `s`.
pub fn autocorrelation_distribution(
    j: &CouplingMatrix,
    beta: f64,
    decomp: &WellDecomposition,
    opts: &AutocorrOptions,
    seed: u64,
) -> Result<AutocorrelationReport> {
    if !(opts.s > 1.0) {
        return Err(Error::input("autocorrelation requires s > 1"));
    }
    let log_t_scale = decomp.regime().log_t_scale;
    if log_t_scale > opts.max_log_t_scale {
        return Err(Error::ResourceCap {
            what: "ln t_scale for an honest dynamical run",
            needed: log_t_scale.ceil() as u64,
            cap: opts.max_log_t_scale as u64,
            hint: "use a planted surrogate instance with 2*beta*|J| in [8,30] or raise max_log_t_scale",
        });
    }
    let t_scale = log_t_scale.exp();
    let horizon = opts.s * t_scale;

    let dynamical: Vec<f64> = crate::par_map(opts.n_runs, |run_idx| {
        let mut rng = task_rng(seed, run_idx as u64);
        let x0 = random_spins(&mut rng, j.n());
        let mut engine = Engine::new(j, beta, x0, EngineKind::RejectionFree, &[], 0.0);
        engine.advance(t_scale, &mut rng, false, |_, _, _, _| true);
        let snap: Vec<Spin> = engine.spins().to_vec();
        engine.advance(horizon, &mut rng, false, |_, _, _, _| true);
        overlap(&snap, engine.spins())
    });

    let replica = replica_overlap_samples(j, beta, decomp, opts.n_runs, seed)?;

    let hist_dyn = Histogram::from_samples(opts.n_bins, -1.0, 1.0, &dynamical);
    let hist_rep = Histogram::from_samples(opts.n_bins, -1.0, 1.0, &replica);
    let tv = tv_plugin(&hist_dyn, &hist_rep, opts.n_bootstrap, seed ^ 0x5eed_b007);

    Ok(AutocorrelationReport {
        s: opts.s,
        log_t_scale,
        dynamical,
        replica,
        tv,
    })
}

/// Overlaps of pairs of independent conditional-Gibbs samples from a
/// uniform-at-random well (the law `q_{a,gamma}`), by exact table sampling.
pub fn replica_overlap_samples(
    j: &CouplingMatrix,
    beta: f64,
    decomp: &WellDecomposition,
    n_samples: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let k = decomp.k();
    let mut tables: HashMap<Vec<Spin>, crate::hamiltonian::GibbsTable> = HashMap::new();
    let mut out = Vec::with_capacity(n_samples);
    // replica stream is offset so it never collides with the dynamical one
    for idx in 0..n_samples {
        let mut rng = task_rng(seed ^ 0x7e11_ca5e, idx as u64);
        let label: Vec<Spin> = (0..k).map(|_| random_spin(&mut rng)).collect();
        if !tables.contains_key(&label) {
            let frozen = decomp.label_assignment(j, &label)?;
            let table = gibbs_exact(j, beta, &Constraint::freeze(frozen))?;
            tables.insert(label.clone(), table);
        }
        let table = &tables[&label];
        let a = table.sample(&mut rng);
        let b = table.sample(&mut rng);
        out.push(overlap(&a, &b));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::couplings::{sample_matrix, CouplingLaw, Edge, PlantedEdge, RegimeParams};
    use crate::rng::rng_from_seed;
    use crate::stats::ks_test_exponential;

    fn planted(n: usize, edges: &[(usize, usize, f64)]) -> CouplingMatrix {
        let law = CouplingLaw::planted(
            n,
            edges
                .iter()
                .map(|&(i, j, value)| PlantedEdge {
                    edge: Edge::new(i, j),
                    value,
                })
                .collect(),
        )
        .unwrap();
        sample_matrix(&law, 0)
    }

    #[test]
    fn single_free_spin_flips_as_poisson_half() {
        // beta = 0, n = 1 free spin: flips are a Poisson process of rate 1/2
        let m = planted(2, &[]);
        let opts = RunOptions::new(EngineKind::Naive, 4000.0).frozen(vec![1]);
        let traj = run(&m, 0.0, vec![1, 1], &opts, 3);
        let mut gaps = Vec::new();
        let mut last = 0.0;
        for e in &traj.events {
            gaps.push(e.time - last);
            last = e.time;
        }
        assert!(gaps.len() > 1500, "{} flips", gaps.len());
        let ks = ks_test_exponential(&gaps, 0.5);
        assert!(ks.p_value > 0.01, "p = {}", ks.p_value);
    }

    #[test]
    fn fully_frozen_trajectory_is_absorbed_with_no_events() {
        let m = planted(3, &[(0, 1, 1.0)]);
        let opts = RunOptions::new(EngineKind::RejectionFree, 10.0).frozen(vec![0, 1, 2]);
        let traj = run(&m, 1.0, vec![1, 1, 1], &opts, 0);
        assert!(traj.events.is_empty());
        assert_eq!(traj.outcome, Outcome::Absorbed);
    }

    #[test]
    fn frozen_vertices_never_change() {
        let m = sample_matrix(&CouplingLaw::pareto(6, 0.5).unwrap(), 5);
        let opts = RunOptions::new(EngineKind::RejectionFree, 200.0).frozen(vec![2, 4]);
        let traj = run(&m, 0.7, vec![1, -1, 1, -1, 1, -1], &opts, 8);
        assert!(traj.events.iter().all(|e| e.vertex != 2 && e.vertex != 4));
        let end = traj.state_at(200.0).unwrap();
        assert_eq!(end[2], 1);
        assert_eq!(end[4], 1);
    }

    #[test]
    fn event_times_strictly_increase_and_replay_is_consistent() {
        let m = sample_matrix(&CouplingLaw::pareto(5, 0.5).unwrap(), 6);
        let opts = RunOptions::new(EngineKind::RejectionFree, 50.0);
        let traj = run(&m, 0.5, vec![1; 5], &opts, 9);
        for w in traj.events.windows(2) {
            assert!(w[0].time < w[1].time);
        }
        // replay at the final horizon matches applying all events
        let mut spins = traj.initial.clone();
        for e in &traj.events {
            spins[e.vertex] = e.new_spin;
        }
        assert_eq!(traj.state_at(50.0).unwrap(), spins);
    }

    #[test]
    fn engines_agree_in_distribution_small_instance() {
        // n = 3, modest beta, t = 1.5: compare exact state histograms
        let m = sample_matrix(&CouplingLaw::pareto(3, 0.5).unwrap(), 11);
        let runs = 30_000;
        let t = 1.5;
        let mut hists = Vec::new();
        for engine in [EngineKind::Naive, EngineKind::RejectionFree] {
            let mut h = Histogram::new(8);
            for i in 0..runs {
                let mut rng = task_rng(100 + engine as u64, i);
                let x0 = random_spins(&mut rng, 3);
                let mut eng = Engine::new(&m, 0.8, x0, engine, &[], 0.0);
                eng.advance(t, &mut rng, false, |_, _, _, _| true);
                let mask = eng
                    .spins()
                    .iter()
                    .enumerate()
                    .fold(0usize, |acc, (i, &s)| acc | ((s == 1) as usize) << i);
                h.counts[mask] += 1;
            }
            hists.push(h);
        }
        let tv = tv_plugin(&hists[0], &hists[1], 200, 0);
        assert!(tv.estimate < 0.02, "engine TV {}", tv.estimate);
    }

    #[test]
    fn autocorrelation_identities() {
        let m = sample_matrix(&CouplingLaw::pareto(6, 0.5).unwrap(), 13);
        let opts = RunOptions::new(EngineKind::RejectionFree, 10.0);
        let traj = run(&m, 0.3, vec![1; 6], &opts, 2);
        assert_eq!(traj.autocorrelation(4.0, 4.0).unwrap(), 1.0);
        assert!(traj.autocorrelation(2.0, 11.0).is_err());
        // independent uniform configurations have mean overlap 0
        let mut rng = rng_from_seed(1);
        let mean: f64 = (0..4000)
            .map(|_| {
                let a = random_spins(&mut rng, 32);
                let b = random_spins(&mut rng, 32);
                overlap(&a, &b)
            })
            .sum::<f64>()
            / 4000.0;
        assert!(mean.abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn beta_zero_autocorrelation_decays_like_exp_minus_delta() {
        let n = 32;
        let m = planted(n, &[]);
        let runs = 3000;
        for &delta in &[0.5f64, 2.0] {
            let mut vals = Vec::with_capacity(runs);
            for i in 0..runs {
                let mut rng = task_rng(77, i as u64);
                let x0 = random_spins(&mut rng, n);
                let mut eng = Engine::new(&m, 0.0, x0, EngineKind::RejectionFree, &[], 0.0);
                eng.advance(1.0, &mut rng, false, |_, _, _, _| true);
                let snap = eng.spins().to_vec();
                eng.advance(1.0 + delta, &mut rng, false, |_, _, _, _| true);
                vals.push(overlap(&snap, eng.spins()));
            }
            let (mean, se) = crate::stats::mean_se(&vals);
            let expect = (-delta).exp();
            assert!(
                (mean - expect).abs() < 3.0 * se,
                "delta {delta}: mean {mean} expect {expect} se {se}"
            );
        }
    }

    #[test]
    fn escape_from_single_bond_well_beta_zero_has_mean_one() {
        // beta = 0: the two endpoints each flip at rate 1/2, so the exit time
        // is the minimum of two Exp(1/2) clocks, i.e. Exp(1)
        let m = planted(4, &[(0, 1, 3.0)]);
        let regime = RegimeParams::new(1.0, 1.0, 0.7926, 0.5, 4).unwrap();
        assert_eq!(crate::couplings::relevant_edges(&m, &regime).k, 1);
        let decomp = WellDecomposition::new(&m, regime).unwrap();
        let well = WellLabel::Label(vec![1]);
        let mut times = Vec::new();
        for seed in 0..4000 {
            let obs = escape_time(&m, 0.0, &decomp, &well, vec![1, 1, 1, 1], 1e6, seed).unwrap();
            assert!(!obs.censored);
            times.push(obs.time);
        }
        let (mean, se) = crate::stats::mean_se(&times);
        assert!((mean - 1.0).abs() < 3.0 * se.max(0.02), "mean {mean} se {se}");
        let ks = ks_test_exponential(&times, 1.0);
        assert!(ks.p_value > 0.01, "p = {}", ks.p_value);
    }

    #[test]
    fn escape_rejects_mismatched_start() {
        let m = planted(4, &[(0, 1, 3.0)]);
        let regime = RegimeParams::new(1.0, 1.0, 0.7926, 0.5, 4).unwrap();
        let decomp = WellDecomposition::new(&m, regime).unwrap();
        let well = WellLabel::Label(vec![-1]);
        let res = escape_time(&m, 0.0, &decomp, &well, vec![1, 1, 1, 1], 10.0, 0);
        assert!(res.is_err());
    }

    #[test]
    fn log_domain_step_handles_underflowing_rates() {
        // 2*beta*|J| = 2000: both rates underflow f64; the engine must not
        // panic and must report no escape within a short horizon
        let m = planted(2, &[(0, 1, 1000.0)]);
        let opts = RunOptions::new(EngineKind::RejectionFree, 100.0);
        let traj = run(&m, 1.0, vec![1, 1], &opts, 4);
        assert!(traj.events.is_empty());
        assert_eq!(traj.outcome, Outcome::ReachedHorizon);
    }

    #[test]
    fn first_attempted_update_at_unsatisfied_big_bond_succeeds() {
        // planted bond starts unsatisfied; the first naive attempt at an
        // endpoint flips it with probability >= 1 - e^{-2 beta |J| + 2 beta B}
        let mut edges = vec![(0usize, 1usize, 4.0f64)];
        // weak background on the other vertices
        edges.extend([(2, 3, 0.05), (4, 5, -0.04), (2, 5, 0.03)]);
        let m = planted(6, &edges);
        let beta = 1.0;
        let trials = 20_000;
        let mut successes = 0u64;
        for i in 0..trials {
            let mut rng = task_rng(31, i);
            // bond (0,1) unsatisfied: J > 0 with opposite spins
            let mut x0 = random_spins(&mut rng, 6);
            x0[0] = 1;
            x0[1] = -1;
            let mut eng = Engine::new(&m, beta, x0, EngineKind::Naive, &[], 0.0);
            let mut first: Option<(usize, Spin, Spin)> = None;
            eng.advance(1e9, &mut rng, true, |_, v, s, spins| {
                if v <= 1 {
                    let other = spins[1 - v];
                    first = Some((v, s, other));
                    return false;
                }
                true
            });
            let (v, s, other) = first.expect("an endpoint attempt must occur");
            // success means the pair became satisfied, i.e. the spin changed
            let sat = (s as f64) * (other as f64) * m.get(0, 1) > 0.0;
            let _ = v;
            if sat {
                successes += 1;
            }
        }
        let freq = successes as f64 / trials as f64;
        let row_bg: f64 = (2..6).map(|w| m.get(0, w).abs().max(m.get(1, w).abs())).sum();
        let bound = (-2.0 * beta * 4.0 + 2.0 * beta * row_bg).exp();
        assert!(
            freq >= 1.0 - 2.0 * bound,
            "freq {freq}, bound {bound}"
        );
    }
}
