//! Energies, local fields, heat-bath flip rates, satisfied-bond sets, and
//! exact Gibbs tables for small systems.
//!
//! Conventions: `H(sigma) = sum_{i<j} J_ij sigma_i sigma_j`, the local field
//! is `m_v = sum_{w != v} J_vw sigma_v sigma_w` (so `H = (1/2) sum_v m_v`),
//! and the Gibbs measure is `pi ~ exp(beta H)` — larger energy is more
//! likely. A ring of the clock at `v` flips the spin with the heat-bath
//! probability `lambda_v = 1 / (1 + exp(2 beta m_v))`.

use rand::Rng;

use crate::couplings::{CouplingMatrix, Edge};
use crate::error::{Error, Result};
use crate::numerics::{softplus, LogSumExp};
use crate::Spin;

/// Exact energy `sum_{i<j} J_ij sigma_i sigma_j`.
pub fn energy(j: &CouplingMatrix, spins: &[Spin]) -> f64 {
    let n = j.n();
    assert_eq!(spins.len(), n);
    let mut h = 0.0;
    for i in 0..n {
        for k in i + 1..n {
            h += j.get(i, k) * spins[i] as f64 * spins[k] as f64;
        }
    }
    h
}

/// Exact local field `m_v = sum_{w != v} J_vw sigma_v sigma_w`.
pub fn local_field(j: &CouplingMatrix, spins: &[Spin], v: usize) -> f64 {
    let n = j.n();
    assert!(v < n);
    let sv = spins[v] as f64;
    (0..n)
        .filter(|&w| w != v)
        .map(|w| j.get(v, w) * sv * spins[w] as f64)
        .sum()
}

/// Heat-bath flip probability `lambda = 1 / (1 + e^{2 beta m})`, computed in
/// the log-safe branch so `|beta m|` up to 1e4 neither overflows nor loses
/// the tiny-rate tail prematurely.
#[inline]
pub fn flip_rate(beta: f64, m: f64) -> f64 {
    let x = 2.0 * beta * m;
    if x > 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

/// `ln lambda = -softplus(2 beta m)`; finite for any finite input.
#[inline]
pub fn log_flip_rate(beta: f64, m: f64) -> f64 {
    -softplus(2.0 * beta * m)
}

/// `Z_v = exp(-2 beta m_v)`; overflows for strongly unsatisfied fields, so
/// metastable-rate computations use [`log_z_v`].
#[inline]
pub fn z_v(beta: f64, m: f64) -> f64 {
    (-2.0 * beta * m).exp()
}

/// `ln Z_v = -2 beta m_v`.
#[inline]
pub fn log_z_v(beta: f64, m: f64) -> f64 {
    -2.0 * beta * m
}

/// Satisfaction of one bond: `sign(sigma_i sigma_j) == sign(J_ij)`.
/// Zero bonds are excluded (`None`): the paper's `sgn` is undefined at 0 and
/// exclusion keeps `Sat` monotone in `|J|`.
#[inline]
pub fn edge_satisfied(j: &CouplingMatrix, spins: &[Spin], e: Edge) -> Option<bool> {
    let v = j.edge_value(e);
    if v == 0.0 {
        None
    } else {
        Some((spins[e.i] as f64 * spins[e.j] as f64) * v > 0.0)
    }
}

/// The satisfied-bond set `Sat(sigma)` over nonzero bonds, in lexicographic
/// edge order.
pub fn sat_set(j: &CouplingMatrix, spins: &[Spin]) -> Vec<Edge> {
    let n = j.n();
    let mut out = Vec::new();
    for i in 0..n {
        for k in i + 1..n {
            let e = Edge { i, j: k };
            if edge_satisfied(j, spins, e) == Some(true) {
                out.push(e);
            }
        }
    }
    out
}

/// How many flips between full cache refreshes (drift control).
const REFRESH_INTERVAL: u64 = 1 << 20;

/// A spin configuration with incrementally maintained local fields and
/// energy.
#[derive(Debug, Clone)]
pub struct SpinConfig {
    spins: Vec<Spin>,
    fields: Vec<f64>,
    energy: f64,
    flips_since_refresh: u64,
}

impl SpinConfig {
    pub fn new(j: &CouplingMatrix, spins: Vec<Spin>) -> Self {
        assert_eq!(spins.len(), j.n());
        debug_assert!(spins.iter().all(|&s| s == 1 || s == -1));
        let mut cfg = SpinConfig {
            spins,
            fields: vec![0.0; j.n()],
            energy: 0.0,
            flips_since_refresh: 0,
        };
        cfg.refresh(j);
        cfg
    }

    pub fn uniform<R: Rng>(j: &CouplingMatrix, rng: &mut R) -> Self {
        Self::new(j, crate::rng::random_spins(rng, j.n()))
    }

    pub fn n(&self) -> usize {
        self.spins.len()
    }

    #[inline]
    pub fn spin(&self, v: usize) -> Spin {
        self.spins[v]
    }

    pub fn spins(&self) -> &[Spin] {
        &self.spins
    }

    /// Cached local field `m_v`.
    #[inline]
    pub fn local_field(&self, v: usize) -> f64 {
        self.fields[v]
    }

    /// Cached energy `H = (1/2) sum_v m_v`.
    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// Recompute fields and energy from scratch.
    pub fn refresh(&mut self, j: &CouplingMatrix) {
        for v in 0..self.n() {
            self.fields[v] = local_field(j, &self.spins, v);
        }
        self.energy = 0.5 * self.fields.iter().sum::<f64>();
        self.flips_since_refresh = 0;
    }

    /// Flip spin `v`, updating fields incrementally:
    /// `m_v -> -m_v`, and `m_w -> m_w - 2 J_vw sigma_v sigma_w` (old spins)
    /// for `w != v`. A full refresh runs every 2^20 flips to bound drift.
    pub fn flip(&mut self, j: &CouplingMatrix, v: usize) {
        let sv = self.spins[v] as f64;
        for w in 0..self.n() {
            if w != v {
                self.fields[w] -= 2.0 * j.get(v, w) * sv * self.spins[w] as f64;
            }
        }
        self.energy -= 2.0 * self.fields[v];
        self.fields[v] = -self.fields[v];
        self.spins[v] = -self.spins[v];
        self.flips_since_refresh += 1;
        if self.flips_since_refresh >= REFRESH_INTERVAL {
            self.refresh(j);
        }
    }
}

/// Conditioning for exact Gibbs tables and restricted chains: frozen spins
/// plus bonds required to be satisfied.
#[derive(Debug, Clone, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Constraint {
    pub frozen: Vec<(usize, Spin)>,
    pub required_sat: Vec<Edge>,
}

impl Constraint {
    pub fn none() -> Self {
        Constraint::default()
    }

    pub fn freeze(frozen: Vec<(usize, Spin)>) -> Self {
        Constraint {
            frozen,
            required_sat: Vec::new(),
        }
    }

    pub fn with_required_sat(mut self, edges: Vec<Edge>) -> Self {
        self.required_sat = edges;
        self
    }
}

/// Default cap on the number of free spins in exact enumerations.
pub const DEFAULT_MAX_FREE: usize = 26;

/// Exact Gibbs table over the free spins of a constrained system.
///
/// Configurations are indexed by a bitmask over the free vertices (bit `b`
/// set means the `b`-th free vertex is `+1`). Disallowed configurations
/// (violating a required-satisfied bond) carry probability zero.
#[derive(Debug, Clone)]
pub struct GibbsTable {
    n: usize,
    beta: f64,
    free: Vec<usize>,
    frozen: Vec<(usize, Spin)>,
    /// `beta H` per mask, `-inf` for disallowed masks.
    log_weights: Vec<f64>,
    probs: Vec<f64>,
    cumulative: Vec<f64>,
    /// `ln sum_allowed exp(beta H)`.
    log_z: f64,
}

/// Exact Gibbs table by enumeration, with the default free-spin cap.
pub fn gibbs_exact(j: &CouplingMatrix, beta: f64, constraint: &Constraint) -> Result<GibbsTable> {
    gibbs_exact_capped(j, beta, constraint, DEFAULT_MAX_FREE)
}

/// Exact Gibbs table by enumeration with an explicit free-spin cap.
pub fn gibbs_exact_capped(
    j: &CouplingMatrix,
    beta: f64,
    constraint: &Constraint,
    max_free: usize,
) -> Result<GibbsTable> {
    let n = j.n();
    let mut frozen_spin = vec![0i8; n];
    for &(v, s) in &constraint.frozen {
        if v >= n {
            return Err(Error::input(format!("frozen vertex {v} out of range")));
        }
        if s != 1 && s != -1 {
            return Err(Error::input("frozen spins must be +1 or -1"));
        }
        if frozen_spin[v] != 0 && frozen_spin[v] != s {
            return Err(Error::input(format!("vertex {v} frozen to both signs")));
        }
        frozen_spin[v] = s;
    }
    for e in &constraint.required_sat {
        if e.j >= n {
            return Err(Error::input("required-satisfied edge out of range"));
        }
        if j.edge_value(*e) == 0.0 {
            return Err(Error::input(
                "a zero bond cannot be required satisfied (sgn undefined at 0)",
            ));
        }
    }
    let free: Vec<usize> = (0..n).filter(|&v| frozen_spin[v] == 0).collect();
    let f = free.len();
    if f > max_free {
        return Err(Error::ResourceCap {
            what: "free spins in exact enumeration",
            needed: f as u64,
            cap: max_free as u64,
            hint: "freeze more vertices or use the MCMC estimators",
        });
    }

    // Gray-code walk with incremental energy updates: each step flips one
    // free spin and costs O(n).
    let spins: Vec<Spin> = (0..n)
        .map(|v| if frozen_spin[v] == 0 { 1 } else { frozen_spin[v] })
        .collect();
    let mut cfg = SpinConfig::new(j, spins);
    let states = 1usize << f;
    let mut log_weights = vec![f64::NEG_INFINITY; states];
    let mut lse = LogSumExp::new();

    let violation_count = |spins: &[Spin]| -> usize {
        constraint
            .required_sat
            .iter()
            .filter(|&&e| edge_satisfied(j, spins, e) == Some(false))
            .count()
    };
    let mut violations = violation_count(cfg.spins());

    let mut gray_prev = 0usize;
    for idx in 0..states {
        let gray = idx ^ (idx >> 1);
        if idx > 0 {
            let bit = (gray ^ gray_prev).trailing_zeros() as usize;
            let v = free[bit];
            // track required-sat violations across the flip
            for &e in &constraint.required_sat {
                if e.touches(v) && edge_satisfied(j, cfg.spins(), e) == Some(false) {
                    violations -= 1;
                }
            }
            cfg.flip(j, v);
            for &e in &constraint.required_sat {
                if e.touches(v) && edge_satisfied(j, cfg.spins(), e) == Some(false) {
                    violations += 1;
                }
            }
        }
        gray_prev = gray;
        if violations == 0 {
            // mask encodes free spins: bit b set <=> free[b] is +1
            let mut mask = 0usize;
            for (b, &v) in free.iter().enumerate() {
                if cfg.spin(v) == 1 {
                    mask |= 1 << b;
                }
            }
            let lw = beta * cfg.energy();
            log_weights[mask] = lw;
            lse.add(lw);
        }
    }
    let log_z = lse.value();
    if log_z == f64::NEG_INFINITY {
        return Err(Error::input(
            "constraint admits no configuration (required bonds unsatisfiable)",
        ));
    }

    let probs: Vec<f64> = log_weights.iter().map(|&lw| (lw - log_z).exp()).collect();
    let mut cumulative = Vec::with_capacity(states);
    let mut acc = 0.0;
    for &p in &probs {
        acc += p;
        cumulative.push(acc);
    }
    if let Some(last) = cumulative.last_mut() {
        *last = 1.0;
    }

    Ok(GibbsTable {
        n,
        beta,
        free,
        frozen: constraint.frozen.clone(),
        log_weights,
        probs,
        cumulative,
        log_z,
    })
}

impl GibbsTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn free_vertices(&self) -> &[usize] {
        &self.free
    }

    pub fn num_states(&self) -> usize {
        self.probs.len()
    }

    /// `ln Z` over the constrained set.
    pub fn log_z(&self) -> f64 {
        self.log_z
    }

    pub fn probability(&self, mask: usize) -> f64 {
        self.probs[mask]
    }

    pub fn log_weight(&self, mask: usize) -> f64 {
        self.log_weights[mask]
    }

    /// Reconstruct the full configuration for a free-spin mask.
    pub fn config(&self, mask: usize) -> Vec<Spin> {
        let mut spins = vec![0i8; self.n];
        for &(v, s) in &self.frozen {
            spins[v] = s;
        }
        for (b, &v) in self.free.iter().enumerate() {
            spins[v] = if mask >> b & 1 == 1 { 1 } else { -1 };
        }
        spins
    }

    /// Mask of a full configuration (frozen part ignored).
    pub fn mask_of(&self, spins: &[Spin]) -> usize {
        let mut mask = 0usize;
        for (b, &v) in self.free.iter().enumerate() {
            if spins[v] == 1 {
                mask |= 1 << b;
            }
        }
        mask
    }

    /// `E[f(sigma)]` over the table.
    pub fn expectation<F: FnMut(&[Spin]) -> f64>(&self, mut f: F) -> f64 {
        let mut acc = 0.0;
        for mask in 0..self.num_states() {
            let p = self.probs[mask];
            if p > 0.0 {
                acc += p * f(&self.config(mask));
            }
        }
        acc
    }

    /// `ln E[exp(g(sigma))]` with `g` supplied in log form; exact in log
    /// domain so huge positive or tiny values of `e^g` are safe.
    pub fn log_expectation<F: FnMut(&[Spin]) -> f64>(&self, mut log_g: F) -> f64 {
        let mut lse = LogSumExp::new();
        for mask in 0..self.num_states() {
            let lw = self.log_weights[mask];
            if lw > f64::NEG_INFINITY {
                lse.add(lw + log_g(&self.config(mask)));
            }
        }
        lse.value() - self.log_z
    }

    /// Draw a mask by inverse CDF.
    pub fn sample_mask<R: Rng>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        self.cumulative
            .partition_point(|&c| c < u)
            .min(self.num_states() - 1)
    }

    /// Draw a full configuration.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec<Spin> {
        self.config(self.sample_mask(rng))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::couplings::{sample_matrix, CouplingLaw, PlantedEdge};
    use crate::rng::rng_from_seed;
    use approx::assert_relative_eq;

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

    fn random_instance(n: usize, seed: u64) -> CouplingMatrix {
        sample_matrix(&CouplingLaw::pareto(n, 0.5).unwrap(), seed)
    }

    #[test]
    fn two_spin_energy() {
        let m = planted(2, &[(0, 1, 1.0)]);
        assert_eq!(energy(&m, &[1, 1]), 1.0);
        assert_eq!(energy(&m, &[1, -1]), -1.0);
        assert_eq!(local_field(&m, &[1, 1], 0), 1.0);
    }

    #[test]
    fn energy_is_half_sum_of_fields() {
        let m = random_instance(8, 1);
        let mut rng = rng_from_seed(2);
        let spins = crate::rng::random_spins(&mut rng, 8);
        let h = energy(&m, &spins);
        let half: f64 = 0.5 * (0..8).map(|v| local_field(&m, &spins, v)).sum::<f64>();
        assert_relative_eq!(h, half, max_relative = 1e-12);
    }

    #[test]
    fn isolated_vertex_has_zero_field() {
        let m = planted(3, &[(0, 1, 2.0)]);
        assert_eq!(local_field(&m, &[1, 1, -1], 2), 0.0);
    }

    #[test]
    fn flip_rate_values_and_symmetry() {
        assert_eq!(flip_rate(3.0, 0.0), 0.5);
        assert_relative_eq!(flip_rate(1.0, 1.0), 1.0 / (1.0 + (2.0f64).exp()), max_relative = 1e-14);
        assert_relative_eq!(flip_rate(1.0, 1.0), 0.119_202_9, max_relative = 1e-6);
        for &m in &[-3.0, -0.5, 0.0, 0.7, 12.0] {
            assert_relative_eq!(flip_rate(2.0, m) + flip_rate(2.0, -m), 1.0, max_relative = 1e-12);
        }
        // stability at huge arguments
        let lam = flip_rate(1.0, 1e4);
        assert!(lam >= 0.0 && lam < 1e-300);
        assert_relative_eq!(log_flip_rate(1.0, 1e4), -2e4, max_relative = 1e-12);
    }

    #[test]
    fn incremental_updates_match_recompute() {
        let m = random_instance(10, 3);
        let mut rng = rng_from_seed(4);
        let mut cfg = SpinConfig::uniform(&m, &mut rng);
        for _ in 0..500 {
            let v = rng.gen_range(0..10);
            let sv = cfg.spin(v);
            let w = (v + 1) % 10;
            let before = cfg.local_field(w);
            cfg.flip(&m, v);
            // m_w changes by -2 J_vw sigma_v sigma_w (old spins)
            let expect = before - 2.0 * m.get(v, w) * sv as f64 * cfg.spin(w) as f64;
            assert_relative_eq!(cfg.local_field(w), expect, max_relative = 1e-9, epsilon = 1e-12);
        }
        for v in 0..10 {
            assert_relative_eq!(
                cfg.local_field(v),
                local_field(&m, cfg.spins(), v),
                max_relative = 1e-9,
                epsilon = 1e-12
            );
        }
        assert_relative_eq!(cfg.energy(), energy(&m, cfg.spins()), max_relative = 1e-9, epsilon = 1e-12);
    }

    #[test]
    fn sat_set_basics_and_global_flip_invariance() {
        let m = planted(2, &[(0, 1, 1.0)]);
        assert_eq!(sat_set(&m, &[1, 1]), vec![Edge::new(0, 1)]);
        let neg = planted(2, &[(0, 1, -1.0)]);
        assert!(sat_set(&neg, &[1, 1]).is_empty());

        let r = random_instance(7, 9);
        let mut rng = rng_from_seed(10);
        for _ in 0..20 {
            let spins = crate::rng::random_spins(&mut rng, 7);
            let flipped: Vec<Spin> = spins.iter().map(|s| -s).collect();
            assert_eq!(sat_set(&r, &spins), sat_set(&r, &flipped));
        }
    }

    #[test]
    fn gibbs_uniform_at_beta_zero() {
        let m = random_instance(5, 7);
        let t = gibbs_exact(&m, 0.0, &Constraint::none()).unwrap();
        for mask in 0..32 {
            assert_relative_eq!(t.probability(mask), 1.0 / 32.0, max_relative = 1e-14);
        }
        assert_relative_eq!(t.log_z(), (32f64).ln(), max_relative = 1e-14);
    }

    #[test]
    fn gibbs_two_spin_closed_form() {
        let jv = 0.8;
        let beta = 1.3;
        let m = planted(2, &[(0, 1, jv)]);
        let t = gibbs_exact(&m, beta, &Constraint::none()).unwrap();
        let up = (beta * jv).exp();
        let down = (-beta * jv).exp();
        let z = 2.0 * up + 2.0 * down;
        let mask_pp = t.mask_of(&[1, 1]);
        assert_relative_eq!(t.probability(mask_pp), up / z, max_relative = 1e-12);
    }

    #[test]
    fn conditioning_on_satisfied_edge_halves_the_endpoint_states() {
        let m = planted(4, &[(0, 1, 2.0)]);
        let t = gibbs_exact(
            &m,
            0.5,
            &Constraint::none().with_required_sat(vec![Edge::new(0, 1)]),
        )
        .unwrap();
        let allowed = (0..t.num_states()).filter(|&m| t.probability(m) > 0.0).count();
        assert_eq!(allowed, 8); // 2 of 4 endpoint assignments survive, times 2^2 free
    }

    #[test]
    fn conditional_expectation_basics() {
        let m = random_instance(6, 12);
        let t = gibbs_exact(&m, 0.0, &Constraint::none()).unwrap();
        assert_relative_eq!(t.expectation(|_| 1.0), 1.0, max_relative = 1e-12);
        let corr = t.expectation(|s| s[0] as f64 * s[3] as f64);
        assert_relative_eq!(corr, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn permutation_equivariance_of_gibbs() {
        // relabeling vertices permutes the table but not the distribution
        let m = random_instance(5, 20);
        let beta = 0.9;
        // swap vertices 0 and 3 in the matrix
        let perm = [3usize, 1, 2, 0, 4];
        let mut vals = Vec::new();
        for i in 0..5 {
            for j in i + 1..5 {
                vals.push(m.get(perm[i], perm[j]));
            }
        }
        let mp = CouplingMatrix::from_upper_tri(5, vals).unwrap();
        let t = gibbs_exact(&m, beta, &Constraint::none()).unwrap();
        let tp = gibbs_exact(&mp, beta, &Constraint::none()).unwrap();
        // compare marginal probabilities of matched configurations
        let mut max_err: f64 = 0.0;
        for mask in 0..32 {
            let spins = t.config(mask);
            let perm_spins: Vec<Spin> = (0..5).map(|v| spins[perm[v]]).collect();
            let pm = tp.probability(tp.mask_of(&perm_spins));
            max_err = max_err.max((t.probability(mask) - pm).abs());
        }
        assert!(max_err < 1e-12, "max err {max_err}");
    }

    #[test]
    fn frozen_vertices_are_respected_and_cap_enforced() {
        let m = random_instance(6, 30);
        let t = gibbs_exact(&m, 1.0, &Constraint::freeze(vec![(0, -1), (2, 1)])).unwrap();
        assert_eq!(t.free_vertices(), &[1, 3, 4, 5]);
        let cfg = t.config(0b1010);
        assert_eq!(cfg[0], -1);
        assert_eq!(cfg[2], 1);
        let err = gibbs_exact_capped(&m, 1.0, &Constraint::none(), 4);
        assert!(matches!(err, Err(Error::ResourceCap { .. })));
    }

    #[test]
    fn probabilities_sum_to_one() {
        let m = random_instance(8, 31);
        let t = gibbs_exact(&m, 2.0, &Constraint::none()).unwrap();
        let total: f64 = (0..t.num_states()).map(|m| t.probability(m)).sum();
        assert_relative_eq!(total, 1.0, max_relative = 1e-12);
    }
}
