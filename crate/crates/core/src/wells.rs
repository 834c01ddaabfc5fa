//! Well decomposition of the state space, the skeleton projection, the
//! timescale index `L(s)`, and the two-state chain `M` that approximates a
//! single critical bond.
//!
//! On the event that the relevant edges `e_1..e_K` are vertex disjoint, the
//! set `{ sigma : E_{a,gamma} subset Sat(sigma) }` splits into `2^K`
//! components, each labeled by the spins at the first endpoints
//! `(sigma_{v_1}, ..., sigma_{v_K})`. Configurations outside every well
//! project to the `Transit` sentinel.

use std::fmt;

use crate::couplings::{relevant_edges, CouplingMatrix, Edge, RegimeParams};
use crate::dynamics::{Engine, EngineKind};
use crate::error::{Error, Result};
use crate::hamiltonian::{flip_rate, gibbs_exact, Constraint, GibbsTable};
use crate::rng::{sample_exp, task_rng};
use crate::stats::{integrated_autocorr_time, mean_se};
use crate::Spin;

/// Skeleton value: spins at `(v_1, ..., v_K)` inside a well, or `Transit`
/// when some relevant bond is unsatisfied.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum WellLabel {
    Label(Vec<Spin>),
    Transit,
}

impl WellLabel {
    /// `K`-bit index of a label (bit `l` set when `sigma_{v_{l+1}} = +1`);
    /// `None` for `Transit`.
    pub fn index(&self) -> Option<usize> {
        match self {
            WellLabel::Transit => None,
            WellLabel::Label(signs) => Some(
                signs
                    .iter()
                    .enumerate()
                    .fold(0usize, |acc, (l, &s)| acc | (((s == 1) as usize) << l)),
            ),
        }
    }

    pub fn from_index(index: usize, k: usize) -> Self {
        WellLabel::Label((0..k).map(|l| if index >> l & 1 == 1 { 1 } else { -1 }).collect())
    }

    /// Parse the serialized form: `+`/`-` per coordinate, `*` for transit.
    pub fn parse(s: &str) -> Result<Self> {
        if s == "*" {
            return Ok(WellLabel::Transit);
        }
        s.chars()
            .map(|c| match c {
                '+' => Ok(1),
                '-' => Ok(-1),
                _ => Err(Error::input(format!("invalid well label character {c:?}"))),
            })
            .collect::<Result<Vec<Spin>>>()
            .map(WellLabel::Label)
    }
}

impl fmt::Display for WellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WellLabel::Transit => write!(f, "*"),
            WellLabel::Label(signs) => {
                for &s in signs {
                    write!(f, "{}", if s == 1 { '+' } else { '-' })?;
                }
                Ok(())
            }
        }
    }
}

/// The ordered relevant edges `e_1..e_K` with their regime; construction
/// verifies vertex disjointness (the analysis works on that event).
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WellDecomposition {
    regime: RegimeParams,
    edges: Vec<Edge>,
    abs_j: Vec<f64>,
    vertices: Vec<usize>,
}

impl WellDecomposition {
    pub fn new(j: &CouplingMatrix, regime: RegimeParams) -> Result<Self> {
        let rel = relevant_edges(j, &regime);
        let mut seen = vec![false; j.n()];
        for (l, e) in rel.edges.iter().enumerate() {
            for v in [e.i, e.j] {
                if seen[v] {
                    let l1 = rel.edges[..l]
                        .iter()
                        .position(|p| p.touches(v))
                        .unwrap_or(l);
                    return Err(Error::NonDisjointEdges { l1: l1 + 1, l2: l + 1 });
                }
                seen[v] = true;
            }
        }
        let abs_j = rel.edges.iter().map(|&e| j.edge_value(e).abs()).collect();
        Ok(WellDecomposition {
            regime,
            edges: rel.edges,
            abs_j,
            vertices: rel.vertices,
        })
    }

    pub fn k(&self) -> usize {
        self.edges.len()
    }

    /// Rank-ordered relevant edges; `edges()[l]` is `e_{l+1}` in the 1-based
    /// notation.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn regime(&self) -> &RegimeParams {
        &self.regime
    }

    /// `|J_{(l)}|` for 1-based `l` in `1..=K`.
    pub fn bond_abs(&self, l: usize) -> f64 {
        self.abs_j[l - 1]
    }

    /// Skeleton projection `S(sigma)`.
    pub fn skeleton(&self, j: &CouplingMatrix, spins: &[Spin]) -> WellLabel {
        for &e in &self.edges {
            let sat = (spins[e.i] as f64 * spins[e.j] as f64) * j.edge_value(e) > 0.0;
            if !sat {
                return WellLabel::Transit;
            }
        }
        WellLabel::Label(self.edges.iter().map(|e| spins[e.i]).collect())
    }

    /// The frozen assignment on all well vertices determined by a label:
    /// `sigma_{v_l}` from the label, `sigma_{w_l}` from satisfaction.
    pub fn label_assignment(&self, j: &CouplingMatrix, label: &[Spin]) -> Result<Vec<(usize, Spin)>> {
        if label.len() != self.k() {
            return Err(Error::input(format!(
                "label length {} does not match K = {}",
                label.len(),
                self.k()
            )));
        }
        let mut out = Vec::with_capacity(2 * self.k());
        for (l, &e) in self.edges.iter().enumerate() {
            let sv = label[l];
            let sign = if j.edge_value(e) > 0.0 { 1 } else { -1 };
            out.push((e.i, sv));
            out.push((e.j, sv * sign));
        }
        Ok(out)
    }

    /// Write the spins on `V_{a,gamma}` determined by a label into `spins`.
    pub fn reconstruct(&self, j: &CouplingMatrix, label: &[Spin], spins: &mut [Spin]) -> Result<()> {
        for (v, s) in self.label_assignment(j, label)? {
            spins[v] = s;
        }
        Ok(())
    }
}

/// Which part of the timescale landscape a query time falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum WindowCase {
    /// Inside the resonance window
    /// `[delta e^{2 beta |J_(L)|}, delta^{-1} e^{2 beta |J_(L)|}]`:
    /// coordinate `L` is actively flipping on this timescale.
    Resonance,
    /// Off-window: every coordinate is either frozen or equilibrated.
    Off,
}

/// Timescale index `L(t)` and its window case.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TimescaleIndex {
    /// `L in {0, ..., K}` (1-based bond index): coordinates above `L` are
    /// frozen on this timescale, coordinates below it have equilibrated.
    pub l: usize,
    pub case: WindowCase,
}

/// The index `L(t)` for a query time given in log scale (`log_time = ln t`),
/// with window parameter `delta` in `(0,1)`:
///
/// - `L = K` while `t < delta^{-1} e^{2 beta |J_(K)|}`,
/// - `L = l` for `t` in `[delta^{-1} e^{2 beta |J_(l+1)|}, delta^{-1} e^{2 beta |J_(l)|}]`,
/// - `L = 0` beyond `delta^{-1} e^{2 beta |J_(1)|}`,
///
/// Case 1 (resonance) iff `t` lies within `delta^{+-1} e^{2 beta |J_(L)|}`.
/// All comparisons happen in log-time. Fails structurally when consecutive
/// resonance windows overlap (only possible if the spacing diagnostics fail).
pub fn timescale_index(
    decomp: &WellDecomposition,
    log_time: f64,
    delta: f64,
) -> Result<TimescaleIndex> {
    if !(0.0 < delta && delta < 1.0) {
        return Err(Error::input("delta must lie in (0,1)"));
    }
    let k = decomp.k();
    if k == 0 {
        return Ok(TimescaleIndex {
            l: 0,
            case: WindowCase::Off,
        });
    }
    let beta = decomp.regime().beta;
    let log_inv_delta = -delta.ln();
    for l in 1..k {
        if log_inv_delta + 2.0 * beta * decomp.bond_abs(l + 1)
            > -log_inv_delta + 2.0 * beta * decomp.bond_abs(l)
        {
            return Err(Error::OverlappingWindows { lower: l + 1, upper: l });
        }
    }
    let upper = |l: usize| log_inv_delta + 2.0 * beta * decomp.bond_abs(l);
    let l = if log_time < upper(k) {
        k
    } else if log_time > upper(1) {
        0
    } else {
        (1..k)
            .find(|&l| log_time >= upper(l + 1) && log_time <= upper(l))
            .unwrap_or(1)
    };
    let case = if l >= 1 {
        let center = 2.0 * beta * decomp.bond_abs(l);
        if (center - log_inv_delta..=center + log_inv_delta).contains(&log_time) {
            WindowCase::Resonance
        } else {
            WindowCase::Off
        }
    } else {
        WindowCase::Off
    };
    Ok(TimescaleIndex { l, case })
}

/// Estimation mode for conditional-Gibbs rate averages.
#[derive(Debug, Clone)]
pub enum RateMode {
    /// Exact enumeration with a free-spin cap.
    Exact { max_free: usize },
    /// Time average of the observable along the restricted dynamics.
    Mcmc(McmcParams),
}

impl RateMode {
    pub fn exact() -> Self {
        RateMode::Exact {
            max_free: crate::hamiltonian::DEFAULT_MAX_FREE,
        }
    }
}

/// MCMC budget: a pilot run estimates the autocorrelation time of the
/// observable, burn-in is 10x that estimate, and the main run reports
/// batch-means standard errors.
#[derive(Debug, Clone)]
pub struct McmcParams {
    pub pilot_duration: f64,
    pub duration: f64,
    pub batches: usize,
    pub seed: u64,
}

impl Default for McmcParams {
    fn default() -> Self {
        McmcParams {
            pilot_duration: 200.0,
            duration: 4000.0,
            batches: 32,
            seed: 0,
        }
    }
}

/// The two-state chain `M` for the critical bond `e_L` inside a fixed
/// context on `e_1..e_{L-1}`: in state `+` or `-`, wait an `Exp(rate)` clock
/// and resample the state uniformly (so it stays put with probability 1/2).
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TwoStateChain {
    pub rate_plus: f64,
    pub rate_minus: f64,
    /// Batch-means standard errors when estimated by MCMC.
    pub std_err: Option<(f64, f64)>,
}

impl TwoStateChain {
    /// Stationary weight of the `+` state, proportional to the inverse rate.
    pub fn stationary_plus(&self) -> f64 {
        let wp = 1.0 / self.rate_plus;
        wp / (wp + 1.0 / self.rate_minus)
    }
}

/// Conditional-Gibbs means of `lambda_L = lambda_{v_L} + lambda_{w_L}` over
/// `C_+` and `C_-`.
///
/// `C_{+/-}` freezes the endpoints of `e_1..e_{L-1}` according to `context`
/// (satisfying assignments) and the endpoints of `e_L` to the satisfying
/// assignment with `sigma_{v_L} = +/-1`; everything else, including the
/// bonds below `L`, stays free.
pub fn two_state_rates(
    j: &CouplingMatrix,
    beta: f64,
    decomp: &WellDecomposition,
    l: usize,
    context: &[Spin],
    mode: &RateMode,
) -> Result<TwoStateChain> {
    if l == 0 || l > decomp.k() {
        return Err(Error::input(format!("bond index {l} outside 1..=K")));
    }
    if context.len() != l - 1 {
        return Err(Error::input(format!(
            "context must fix exactly the {} bonds above L",
            l - 1
        )));
    }
    let e = decomp.edges()[l - 1];
    let mut rates = [0.0f64; 2];
    let mut errs = [0.0f64; 2];
    let mut have_err = false;
    for (slot, sign) in [(0usize, 1i8), (1usize, -1i8)] {
        let frozen = frozen_for_context(j, decomp, l, context, sign)?;
        match mode {
            RateMode::Exact { max_free } => {
                let table = crate::hamiltonian::gibbs_exact_capped(
                    j,
                    beta,
                    &Constraint::freeze(frozen),
                    *max_free,
                )?;
                rates[slot] = table.expectation(|spins| lambda_l(j, beta, spins, e));
            }
            RateMode::Mcmc(params) => {
                let (mean, se) =
                    mcmc_time_average(j, beta, &frozen, params, |spins| lambda_l(j, beta, spins, e))?;
                rates[slot] = mean;
                errs[slot] = se;
                have_err = true;
            }
        }
    }
    Ok(TwoStateChain {
        rate_plus: rates[0],
        rate_minus: rates[1],
        std_err: have_err.then_some((errs[0], errs[1])),
    })
}

/// `lambda_{v}(sigma) + lambda_{w}(sigma)` at the endpoints of `e`.
pub fn lambda_l(j: &CouplingMatrix, beta: f64, spins: &[Spin], e: Edge) -> f64 {
    flip_rate(beta, crate::hamiltonian::local_field(j, spins, e.i))
        + flip_rate(beta, crate::hamiltonian::local_field(j, spins, e.j))
}

/// Frozen assignment for `C_{+/-}`: context on bonds above `l`, `sign_l` at
/// `v_l`, satisfaction at every frozen partner.
pub(crate) fn frozen_for_context(
    j: &CouplingMatrix,
    decomp: &WellDecomposition,
    l: usize,
    context: &[Spin],
    sign_l: Spin,
) -> Result<Vec<(usize, Spin)>> {
    let mut frozen = Vec::with_capacity(2 * l);
    for (idx, &e) in decomp.edges()[..l].iter().enumerate() {
        let sv = if idx + 1 == l { sign_l } else { context[idx] };
        let w_sign = if j.edge_value(e) > 0.0 { 1 } else { -1 };
        frozen.push((e.i, sv));
        frozen.push((e.j, sv * w_sign));
    }
    Ok(frozen)
}

/// Ergodic time average of `f` along restricted dynamics with the given
/// frozen vertices; returns `(mean, batch-means SE)`.
pub(crate) fn mcmc_time_average<F: Fn(&[Spin]) -> f64>(
    j: &CouplingMatrix,
    beta: f64,
    frozen: &[(usize, Spin)],
    params: &McmcParams,
    f: F,
) -> Result<(f64, f64)> {
    if params.batches < 2 {
        return Err(Error::input("need at least two batches"));
    }
    let frozen_vertices: Vec<usize> = frozen.iter().map(|&(v, _)| v).collect();
    let mut x0: Vec<Spin> = vec![1; j.n()];
    for &(v, s) in frozen {
        x0[v] = s;
    }
    let mut rng = task_rng(params.seed, 0);

    // pilot: sample f on a uniform grid, estimate its autocorrelation time
    let mut engine = Engine::new(j, beta, x0, EngineKind::RejectionFree, &frozen_vertices, 0.0);
    let grid = 512usize;
    let grid_dt = params.pilot_duration / grid as f64;
    let mut series = Vec::with_capacity(grid);
    for step in 1..=grid {
        engine.advance(step as f64 * grid_dt, &mut rng, false, |_, _, _, _| true);
        series.push(f(engine.spins()));
    }
    let tau = integrated_autocorr_time(&series) * grid_dt;
    let burn_in = 10.0 * tau;

    // main run: piecewise-constant time integral of f, batched for the SE
    engine.advance(engine.time() + burn_in, &mut rng, false, |_, _, _, _| true);
    let start = engine.time();
    let batch_len = params.duration / params.batches as f64;
    let mut batch_means = Vec::with_capacity(params.batches);
    let mut acc = 0.0;
    let mut last_t = start;
    let mut last_val = f(engine.spins());
    for b in 1..=params.batches {
        let target = start + b as f64 * batch_len;
        engine.advance(target, &mut rng, false, |t, _, _, spins| {
            acc += last_val * (t - last_t);
            last_t = t;
            last_val = f(spins);
            true
        });
        acc += last_val * (target - last_t);
        last_t = target;
        batch_means.push(acc / batch_len);
        acc = 0.0;
    }
    Ok(mean_se(&batch_means))
}

/// Simulate the two-state chain from `m0` for `duration`; returns the final
/// state.
pub fn simulate_two_state(chain: &TwoStateChain, m0: Spin, duration: f64, seed: u64) -> Spin {
    let mut rng = task_rng(seed, 0);
    let mut state = m0;
    let mut t = 0.0;
    loop {
        let rate = if state == 1 {
            chain.rate_plus
        } else {
            chain.rate_minus
        };
        if rate <= 0.0 {
            return state;
        }
        t += sample_exp(&mut rng, rate);
        if t > duration {
            return state;
        }
        state = crate::rng::random_spin(&mut rng);
    }
}

/// Exact conditional-Gibbs table over a well (all well vertices frozen per
/// the label).
pub fn well_gibbs(
    j: &CouplingMatrix,
    beta: f64,
    decomp: &WellDecomposition,
    label: &[Spin],
) -> Result<GibbsTable> {
    let frozen = decomp.label_assignment(j, label)?;
    gibbs_exact(j, beta, &Constraint::freeze(frozen))
}
