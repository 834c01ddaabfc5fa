//! The random-cluster (Edwards-Sokal) coupling.
//!
//! Forward: given spins, open each *satisfied* edge independently with
//! `p_{e,L}` (1 for the top-`L` edges, else `1 - e^{-2 beta |J_e|}`).
//! Backward: given bonds, clusters containing boundary vertices take the
//! boundary spins, every other cluster gets an independent fair-coin root
//! spin, and spins propagate so every open edge is satisfied. Alternating
//! the two kernels is a Gibbs sampler for the spin measure conditioned on
//! the boundary: one cluster move can flip a whole frozen bond, which is
//! what makes conditional sampling feasible at `N` in the hundreds.
//!
//! Clusters use union-find with a relative sign per node, so frustrated
//! open cycles surface at union time.

use rand::Rng;

use crate::couplings::{CouplingMatrix, Edge};
use crate::error::{Error, Result};
use crate::hamiltonian::{edge_satisfied, gibbs_exact, Constraint};
use crate::numerics::quad::adaptive_simpson;
use crate::numerics::special::ln_gamma;
use crate::rng::{random_spin, task_rng, SimRng};
use crate::stats::{mean_se, Histogram, TvEstimate};
use crate::wells::WellDecomposition;
use crate::Spin;

/// A bond configuration: the open-edge set over the complete graph.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BondConfig {
    pub n: usize,
    pub open: Vec<Edge>,
}

impl BondConfig {
    pub fn new(n: usize, mut open: Vec<Edge>) -> Self {
        open.sort();
        open.dedup();
        BondConfig { n, open }
    }

    pub fn is_open(&self, e: Edge) -> bool {
        self.open.binary_search(&e).is_ok()
    }
}

/// Union-find with a relative sign per node: `sign(v)` is the product of
/// required spin agreements along the (compressed) path to the root.
#[derive(Debug, Clone)]
pub struct SignedUnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
    sign: Vec<i8>,
}

impl SignedUnionFind {
    pub fn new(n: usize) -> Self {
        SignedUnionFind {
            parent: (0..n).collect(),
            rank: vec![0; n],
            sign: vec![1; n],
        }
    }

    /// Root of `v` and the relative sign of `v` to it.
    pub fn find(&mut self, v: usize) -> (usize, i8) {
        if self.parent[v] == v {
            return (v, 1);
        }
        let (root, s) = self.find(self.parent[v]);
        self.parent[v] = root;
        self.sign[v] *= s;
        (root, self.sign[v])
    }

    /// Merge the clusters of `u` and `v`, requiring
    /// `spin(u) * spin(v) = rel`. Frustrated constraints are reported with
    /// the offending edge.
    pub fn union(&mut self, u: usize, v: usize, rel: i8) -> Result<()> {
        let (ru, su) = self.find(u);
        let (rv, sv) = self.find(v);
        if ru == rv {
            if su * sv != rel {
                return Err(Error::FrustratedCycle {
                    i: u.min(v),
                    j: u.max(v),
                });
            }
            return Ok(());
        }
        let link = su * sv * rel;
        if self.rank[ru] < self.rank[rv] {
            self.parent[ru] = rv;
            self.sign[ru] = link;
        } else {
            self.parent[rv] = ru;
            self.sign[rv] = link;
            if self.rank[ru] == self.rank[rv] {
                self.rank[ru] += 1;
            }
        }
        Ok(())
    }
}

/// Cluster structure of a bond configuration with the sign constraints of
/// the couplings baked in: an open edge `e` forces
/// `sigma_i sigma_j = sgn(J_e)`.
#[derive(Debug, Clone)]
pub struct SignedClusters {
    uf: SignedUnionFind,
}

impl SignedClusters {
    /// Fails with a structural error on a frustrated open cycle.
    pub fn build(j: &CouplingMatrix, omega: &BondConfig) -> Result<Self> {
        let mut uf = SignedUnionFind::new(omega.n);
        for &e in &omega.open {
            let val = j.edge_value(e);
            if val == 0.0 {
                return Err(Error::input(format!(
                    "open edge ({},{}) has a zero coupling",
                    e.i, e.j
                )));
            }
            uf.union(e.i, e.j, if val > 0.0 { 1 } else { -1 })?;
        }
        Ok(SignedClusters { uf })
    }

    pub fn find(&mut self, v: usize) -> (usize, i8) {
        self.uf.find(v)
    }

    /// `eta_{ij}`: 0 when `i` and `j` lie in different clusters, else the
    /// sign product along any open path (path independence is exactly
    /// cluster consistency).
    pub fn eta(&mut self, i: usize, j: usize) -> i8 {
        if i == j {
            return 1;
        }
        let (ri, si) = self.find(i);
        let (rj, sj) = self.find(j);
        if ri == rj {
            si * sj
        } else {
            0
        }
    }
}

/// `eta_{ij}(omega)` as a standalone operation.
pub fn eta(j: &CouplingMatrix, omega: &BondConfig, i: usize, jv: usize) -> Result<i8> {
    let mut clusters = SignedClusters::build(j, omega)?;
    Ok(clusters.eta(i, jv))
}

/// Percolation parameters `p_{e,L}`, with the non-forced edges kept sorted
/// by probability for order-of-opens sampling.
#[derive(Debug, Clone)]
pub struct PercolationParams {
    pub l: usize,
    forced: Vec<Edge>,
    /// Non-forced edges with `p > 0`, sorted by `p` descending.
    sorted: Vec<(Edge, f64)>,
}

impl PercolationParams {
    /// `p_e = 1` for the top-`l` edges of the rank order, else
    /// `1 - e^{-2 beta |J_e|}`.
    pub fn new(j: &CouplingMatrix, beta: f64, l: usize) -> Result<Self> {
        if l > j.num_edges() {
            return Err(Error::input("L exceeds the edge count"));
        }
        let forced: Vec<Edge> = j.rank_edges()[..l].to_vec();
        let mut sorted: Vec<(Edge, f64)> = Vec::with_capacity(j.num_edges() - l);
        for &e in &j.rank_edges()[l..] {
            let p = -(-2.0 * beta * j.edge_value(e).abs()).exp_m1();
            if p > 0.0 {
                sorted.push((e, p));
            }
        }
        // rank order is |J| descending, hence p descending already; the sort
        // guards against exotic laws all the same
        sorted.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
        Ok(PercolationParams { l, forced, sorted })
    }

    pub fn forced_edges(&self) -> &[Edge] {
        &self.forced
    }

    /// `p_{e,L}` of a single edge.
    pub fn p(&self, j: &CouplingMatrix, beta: f64, e: Edge) -> f64 {
        if self.forced.contains(&e) {
            1.0
        } else {
            -(-2.0 * beta * j.edge_value(e).abs()).exp_m1()
        }
    }

    fn p_of(&self, e: Edge) -> f64 {
        self.sorted
            .iter()
            .find(|&&(ee, _)| ee == e)
            .map(|&(_, p)| p)
            .unwrap_or(0.0)
    }

    /// Draw the open set given `spins`: forced edges always (they must be
    /// satisfied), every other *satisfied* edge independently with its `p`.
    ///
    /// The Bernoulli field is sampled by skipping through the p-sorted
    /// candidate list with a geometric envelope, so the cost scales with the
    /// number of (near-)opens instead of `N^2`.
    pub fn sample(&self, j: &CouplingMatrix, spins: &[Spin], rng: &mut SimRng) -> Result<BondConfig> {
        let mut open = Vec::with_capacity(self.forced.len() + 64);
        for &e in &self.forced {
            if edge_satisfied(j, spins, e) != Some(true) {
                return Err(Error::input(format!(
                    "forced edge ({},{}) is not satisfied by the given spins",
                    e.i, e.j
                )));
            }
            open.push(e);
        }
        let m = self.sorted.len();
        let mut i = 0usize;
        while i < m {
            let p_env = self.sorted[i].1;
            let g = if p_env >= 1.0 {
                0
            } else {
                let u: f64 = 1.0 - rng.gen::<f64>();
                (u.ln() / (-p_env).ln_1p()).floor() as usize
            };
            i = match i.checked_add(g) {
                Some(next) if next < m => next,
                _ => break,
            };
            let (e, p) = self.sorted[i];
            // thin from the envelope down to the true probability, then
            // apply the satisfaction indicator
            if rng.gen::<f64>() * p_env < p && edge_satisfied(j, spins, e) == Some(true) {
                open.push(e);
            }
            i += 1;
        }
        Ok(BondConfig::new(j.n(), open))
    }
}

/// Spec-shaped convenience: draw `omega | sigma` with fresh parameters.
pub fn rc_from_spin(
    j: &CouplingMatrix,
    beta: f64,
    spins: &[Spin],
    l: usize,
    seed: u64,
) -> Result<BondConfig> {
    let params = PercolationParams::new(j, beta, l)?;
    let mut rng = task_rng(seed, 0);
    params.sample(j, spins, &mut rng)
}

/// Draw `sigma | omega` with boundary values `tau`: boundary clusters take
/// the boundary spins (conflicts are structural errors), every other cluster
/// gets a fair-coin root spin, and signs propagate along open edges.
pub fn spin_from_rc(
    j: &CouplingMatrix,
    omega: &BondConfig,
    tau: &[(usize, Spin)],
    seed: u64,
) -> Result<Vec<Spin>> {
    let mut rng = task_rng(seed, 0);
    spin_from_rc_with(j, omega, tau, &mut rng)
}

/// [`spin_from_rc`] with a caller-owned RNG (for samplers).
pub fn spin_from_rc_with(
    j: &CouplingMatrix,
    omega: &BondConfig,
    tau: &[(usize, Spin)],
    rng: &mut SimRng,
) -> Result<Vec<Spin>> {
    let n = omega.n;
    let mut clusters = SignedClusters::build(j, omega)?;
    let mut pinned: Vec<Spin> = vec![0; n];
    for &(v, s) in tau {
        let (root, sign) = clusters.find(v);
        let root_spin = s * sign;
        if pinned[root] != 0 && pinned[root] != root_spin {
            return Err(Error::TauConflict { vertex: v });
        }
        pinned[root] = root_spin;
    }
    let mut spins = vec![0i8; n];
    for v in 0..n {
        let (root, sign) = clusters.find(v);
        if pinned[root] == 0 {
            pinned[root] = random_spin(rng);
        }
        spins[v] = pinned[root] * sign;
    }
    Ok(spins)
}

/// Edwards-Sokal alternation targeting the Gibbs measure conditioned on the
/// boundary `tau` (which must satisfy the forced top-`L` edges).
pub struct EsSampler<'a> {
    j: &'a CouplingMatrix,
    params: PercolationParams,
    tau: Vec<(usize, Spin)>,
}

impl<'a> EsSampler<'a> {
    pub fn new(j: &'a CouplingMatrix, beta: f64, l: usize, tau: Vec<(usize, Spin)>) -> Result<Self> {
        let params = PercolationParams::new(j, beta, l)?;
        let spin_of = |v: usize| tau.iter().find(|&&(w, _)| w == v).map(|&(_, s)| s);
        for &e in params.forced_edges() {
            match (spin_of(e.i), spin_of(e.j)) {
                (Some(si), Some(sj)) => {
                    if (si as f64) * (sj as f64) * j.edge_value(e) <= 0.0 {
                        return Err(Error::input(format!(
                            "boundary leaves forced edge ({},{}) unsatisfied",
                            e.i, e.j
                        )));
                    }
                }
                _ => {
                    return Err(Error::input(format!(
                        "forced edge ({},{}) endpoints must be in the boundary",
                        e.i, e.j
                    )));
                }
            }
        }
        Ok(EsSampler { j, params, tau })
    }

    /// Fresh start: boundary spins plus fair coins elsewhere.
    pub fn initial(&self, rng: &mut SimRng) -> Vec<Spin> {
        let mut spins: Vec<Spin> = (0..self.j.n()).map(|_| random_spin(rng)).collect();
        for &(v, s) in &self.tau {
            spins[v] = s;
        }
        spins
    }

    /// One `sigma -> omega -> sigma` sweep in place.
    pub fn sweep(&self, spins: &mut Vec<Spin>, rng: &mut SimRng) -> Result<()> {
        let omega = self.params.sample(self.j, spins, rng)?;
        *spins = spin_from_rc_with(self.j, &omega, &self.tau, rng)?;
        Ok(())
    }

    /// Independent sample after `rounds` sweeps from a fresh start.
    pub fn sample(&self, rounds: usize, rng: &mut SimRng) -> Result<Vec<Spin>> {
        let mut spins = self.initial(rng);
        for _ in 0..rounds {
            self.sweep(&mut spins, rng)?;
        }
        Ok(spins)
    }
}

/// Both sides of the correlation identity
/// `<sigma_i sigma_j | tau> = <eta_ij | tau>_rc` and their difference.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CorrelationReport {
    pub spin_side: f64,
    pub rc_side: f64,
    pub diff: f64,
}

/// How to evaluate the RC side of the identity.
#[derive(Debug, Clone, Copy)]
pub enum CorrelationMode {
    /// Full enumeration of the joint `(sigma, omega)` law (n <= 5).
    Exact,
    /// Monte Carlo over the forward coupling.
    MonteCarlo { samples: usize, seed: u64 },
}

/// Check `<sigma_i sigma_j>_tau = <eta_ij(omega)>^rc_tau` for the measure
/// conditioned on the top-`l` edges frozen to `tau`.
pub fn correlation_identity_check(
    j: &CouplingMatrix,
    beta: f64,
    l: usize,
    tau: &[(usize, Spin)],
    i: usize,
    jv: usize,
    mode: CorrelationMode,
) -> Result<CorrelationReport> {
    let table = gibbs_exact(j, beta, &Constraint::freeze(tau.to_vec()))?;
    let spin_side = table.expectation(|s| s[i] as f64 * s[jv] as f64);
    let params = PercolationParams::new(j, beta, l)?;
    let rc_side = match mode {
        CorrelationMode::Exact => {
            if j.num_edges() > 20 {
                return Err(Error::ResourceCap {
                    what: "edges in exact omega enumeration",
                    needed: j.num_edges() as u64,
                    cap: 20,
                    hint: "exact mode enumerates open subsets of the satisfied edges",
                });
            }
            let mut acc = 0.0;
            for mask in 0..table.num_states() {
                let p_sigma = table.probability(mask);
                if p_sigma == 0.0 {
                    continue;
                }
                let spins = table.config(mask);
                acc += p_sigma * expected_eta_given_sigma(j, &params, &spins, i, jv)?;
            }
            acc
        }
        CorrelationMode::MonteCarlo { samples, seed } => {
            let mut acc = 0.0;
            for s in 0..samples {
                let mut rng = task_rng(seed, s as u64);
                let spins = table.sample(&mut rng);
                let omega = params.sample(j, &spins, &mut rng)?;
                let mut clusters = SignedClusters::build(j, &omega)?;
                acc += clusters.eta(i, jv) as f64;
            }
            acc / samples as f64
        }
    };
    Ok(CorrelationReport {
        spin_side,
        rc_side,
        diff: spin_side - rc_side,
    })
}

/// `E[eta_ij(omega) | sigma]` by exact enumeration over the open subsets of
/// the satisfied edges.
fn expected_eta_given_sigma(
    j: &CouplingMatrix,
    params: &PercolationParams,
    spins: &[Spin],
    i: usize,
    jv: usize,
) -> Result<f64> {
    let mut candidates = Vec::new();
    let mut forced = Vec::new();
    for &e in j.rank_edges() {
        let sat = edge_satisfied(j, spins, e) == Some(true);
        if params.forced_edges().contains(&e) {
            if !sat {
                return Err(Error::input("forced edge unsatisfied in enumeration"));
            }
            forced.push(e);
        } else if sat && params.p_of(e) > 0.0 {
            candidates.push((e, params.p_of(e)));
        }
    }
    let mut acc = 0.0;
    for mask in 0..1usize << candidates.len() {
        let mut open = forced.clone();
        let mut prob = 1.0;
        for (b, &(e, p)) in candidates.iter().enumerate() {
            if mask >> b & 1 == 1 {
                open.push(e);
                prob *= p;
            } else {
                prob *= 1.0 - p;
            }
        }
        if prob == 0.0 {
            continue;
        }
        let omega = BondConfig::new(j.n(), open);
        let mut clusters = SignedClusters::build(j, &omega)?;
        acc += prob * clusters.eta(i, jv) as f64;
    }
    Ok(acc)
}

/// `N E[p(J)]` for the Pareto law:
/// `N (1 - e^{-2 beta N^{-1/alpha}}) + (2 beta)^alpha int_x^inf e^{-u} u^{-alpha} du`
/// with `x = 2 beta N^{-1/alpha}`, by adaptive quadrature after the
/// substitution `u = e^v` (relative tolerance 1e-10). Below `beta_0` this
/// stays under 1 and the coupled percolation is subcritical.
pub fn mean_bond_prob(alpha: f64, beta: f64, n: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::input("mean_bond_prob needs alpha in (0,1)"));
    }
    if !(beta > 0.0 && n >= 2.0) {
        return Err(Error::input("need beta > 0 and N >= 2"));
    }
    let x = 2.0 * beta * n.powf(-1.0 / alpha);
    let term1 = -n * (-x).exp_m1();
    let upper = (x + 50.0).max(50.0);
    // e^{-u} u^{-alpha} du with u = e^v: no endpoint singularity left
    let integrand = |v: f64| (-(v.exp())).exp() * ((1.0 - alpha) * v).exp();
    let integral = adaptive_simpson(&integrand, x.ln(), upper.ln(), 1e-10)?;
    Ok(term1 + (2.0 * beta).powf(alpha) * integral)
}

/// High-temperature threshold `beta_0 = 1 / (2 Gamma(1-alpha)^{1/alpha})`.
pub fn beta0(alpha: f64) -> f64 {
    0.5 * (-ln_gamma(1.0 - alpha) / alpha).exp()
}

/// How conditional-Gibbs samples inside wells are drawn.
#[derive(Debug, Clone, Copy)]
pub enum WellSampler {
    /// Exact table sampling (small `n`).
    ExactGibbs,
    /// Edwards-Sokal sweeps with the well boundary (any `n`).
    Es { rounds: usize },
}

/// Overlap statistics of the replica law `q_{a,gamma}`.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QOverlapReport {
    pub samples: Vec<f64>,
    pub mean_q: f64,
    pub e_q2: f64,
    pub se_q2: f64,
}

/// Draw uniform wells and two independent conditional samples per well;
/// report the overlap law and its second moment.
pub fn q_overlap_stats(
    j: &CouplingMatrix,
    beta: f64,
    decomp: &WellDecomposition,
    n_samples: usize,
    sampler: WellSampler,
    seed: u64,
) -> Result<QOverlapReport> {
    let k = decomp.k();
    let mut samples = Vec::with_capacity(n_samples);
    match sampler {
        WellSampler::ExactGibbs => {
            let mut tables = std::collections::HashMap::new();
            for idx in 0..n_samples {
                let mut rng = task_rng(seed, idx as u64);
                let label: Vec<Spin> = (0..k).map(|_| random_spin(&mut rng)).collect();
                if !tables.contains_key(&label) {
                    let frozen = decomp.label_assignment(j, &label)?;
                    tables.insert(label.clone(), gibbs_exact(j, beta, &Constraint::freeze(frozen))?);
                }
                let table = &tables[&label];
                let a = table.sample(&mut rng);
                let b = table.sample(&mut rng);
                samples.push(crate::dynamics::overlap(&a, &b));
            }
        }
        WellSampler::Es { rounds } => {
            let mut samplers = std::collections::HashMap::new();
            for idx in 0..n_samples {
                let mut rng = task_rng(seed, idx as u64);
                let label: Vec<Spin> = (0..k).map(|_| random_spin(&mut rng)).collect();
                if !samplers.contains_key(&label) {
                    let tau = decomp.label_assignment(j, &label)?;
                    samplers.insert(label.clone(), EsSampler::new(j, beta, k, tau)?);
                }
                let es = &samplers[&label];
                let a = es.sample(rounds, &mut rng)?;
                let b = es.sample(rounds, &mut rng)?;
                samples.push(crate::dynamics::overlap(&a, &b));
            }
        }
    }
    let mean_q = samples.iter().sum::<f64>() / samples.len() as f64;
    let sq: Vec<f64> = samples.iter().map(|q| q * q).collect();
    let (e_q2, se_q2) = mean_se(&sq);
    Ok(QOverlapReport {
        samples,
        mean_q,
        e_q2,
        se_q2,
    })
}

/// TV of the sub-threshold skeleton marginal to uniform, with bootstrap CI.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct UniformityReport {
    pub k_minus_l: usize,
    pub tv: f64,
    pub ci: (f64, f64),
    /// Expected TV of an exactly-uniform sample of the same size (the noise
    /// floor).
    pub bias: f64,
    pub histogram: Histogram,
}

/// Sample `sigma ~ pi(. | top-L endpoints frozen to the label prefix)` by ES
/// sweeps and measure the TV of `(sigma_{v_{L+1}}, ..., sigma_{v_K})` to
/// uniform on `{-1,+1}^{K-L}`.
pub fn uniformity_check(
    j: &CouplingMatrix,
    beta: f64,
    decomp: &WellDecomposition,
    l: usize,
    tau_label: &[Spin],
    n_samples: usize,
    rounds: usize,
    n_bootstrap: usize,
    seed: u64,
) -> Result<UniformityReport> {
    let k = decomp.k();
    if l > k {
        return Err(Error::input("L exceeds K"));
    }
    if tau_label.len() != l {
        return Err(Error::input("tau must fix exactly the top-L coordinates"));
    }
    if k - l > 12 {
        return Err(Error::ResourceCap {
            what: "free skeleton coordinates in the uniformity histogram",
            needed: (k - l) as u64,
            cap: 12,
            hint: "histogramming needs K - L <= 12",
        });
    }
    let mut tau = Vec::with_capacity(2 * l);
    for (idx, &e) in decomp.edges()[..l].iter().enumerate() {
        let sv = tau_label[idx];
        let sign = if j.edge_value(e) > 0.0 { 1 } else { -1 };
        tau.push((e.i, sv));
        tau.push((e.j, sv * sign));
    }
    let es = EsSampler::new(j, beta, l, tau)?;
    let free_coords: Vec<usize> = decomp.edges()[l..].iter().map(|e| e.i).collect();
    let cells = 1usize << (k - l);
    let mut hist = Histogram::new(cells);
    for idx in 0..n_samples {
        let mut rng = task_rng(seed, idx as u64);
        let spins = es.sample(rounds, &mut rng)?;
        let cell = free_coords
            .iter()
            .enumerate()
            .fold(0usize, |acc, (b, &v)| acc | (((spins[v] == 1) as usize) << b));
        hist.counts[cell] += 1;
    }
    let uniform = vec![1.0 / cells as f64; cells];
    let est = tv_to_reference(&hist, &uniform, n_bootstrap, seed ^ 0xb005);
    Ok(UniformityReport {
        k_minus_l: k - l,
        tv: est.estimate,
        ci: est.ci,
        bias: est.bias,
        histogram: hist,
    })
}

fn multinomial(probs: &[f64], n: usize, rng: &mut SimRng) -> Vec<f64> {
    let mut cum = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for &p in probs {
        acc += p;
        cum.push(acc);
    }
    if let Some(last) = cum.last_mut() {
        *last = 1.0;
    }
    let mut counts = vec![0u64; probs.len()];
    for _ in 0..n {
        let u: f64 = rng.gen();
        let idx = cum.partition_point(|&c| c < u).min(probs.len() - 1);
        counts[idx] += 1;
    }
    counts.iter().map(|&c| c as f64 / n as f64).collect()
}

/// TV between an empirical histogram and an exact reference law, with a
/// bootstrap CI and a same-size noise floor for the reference.
pub fn tv_to_reference(
    hist: &Histogram,
    reference: &[f64],
    n_bootstrap: usize,
    seed: u64,
) -> TvEstimate {
    let n = hist.total();
    let probs = hist.probabilities();
    let estimate = crate::stats::tv_exact(&probs, reference);
    let mut boot = Vec::with_capacity(n_bootstrap);
    let mut bias_acc = 0.0;
    for b in 0..n_bootstrap {
        let mut rng = task_rng(seed, b as u64);
        let re = multinomial(&probs, n as usize, &mut rng);
        boot.push(crate::stats::tv_exact(&re, reference));
        let rf = multinomial(reference, n as usize, &mut rng);
        bias_acc += crate::stats::tv_exact(&rf, reference);
    }
    boot.sort_by(|a, b| a.partial_cmp(b).unwrap());
    TvEstimate {
        estimate,
        ci: (
            boot[(n_bootstrap as f64 * 0.025) as usize],
            boot[((n_bootstrap as f64 * 0.975) as usize).min(n_bootstrap - 1)],
        ),
        confidence: 0.95,
        bias: bias_acc / n_bootstrap as f64,
        n_a: n,
        n_b: n,
        n_bootstrap,
    }
}
