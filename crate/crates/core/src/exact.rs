//! Exact small-system spectral toolkit: dense generators, stationary
//! measures, spectral gaps, total-variation curves and mixing times, the
//! block-dynamics gap inequality, canonical-path congestion for the 4-state
//! chain, and well-separation reports.
//!
//! Everything here is dense linear algebra over explicitly enumerated state
//! spaces with hard caps; exactness is the point of this module.

use nalgebra::{DMatrix, DVector};

use crate::couplings::CouplingMatrix;
use crate::error::{Error, Result};
use crate::hamiltonian::{flip_rate, gibbs_exact_capped, Constraint};
use crate::wells::WellDecomposition;
use crate::Spin;

/// Default cap on free spins for dense generators (2^12 = 4096 states).
pub const DEFAULT_MAX_FREE_DENSE: usize = 12;

/// Dense continuous-time generator of the (restricted) heat-bath chain.
///
/// Off-diagonal entries are the flip rates `q(sigma, sigma^v) = lambda_v(sigma)`
/// between allowed configurations differing at one free vertex; diagonals
/// make rows sum to zero. The stationary vector is the conditional Gibbs
/// measure on the allowed set, and reversibility holds by construction.
#[derive(Debug, Clone)]
pub struct GeneratorMatrix {
    /// Free-spin masks of the allowed states, in mask order.
    pub states: Vec<usize>,
    pub free: Vec<usize>,
    pub gen: DMatrix<f64>,
    pub stationary: DVector<f64>,
    /// Full configurations per state (frozen spins included).
    configs: Vec<Vec<Spin>>,
}

/// Build the exact generator of the heat-bath chain conditioned by
/// `constraint` (frozen spins and/or required-satisfied bonds).
pub fn build_generator(
    j: &CouplingMatrix,
    beta: f64,
    constraint: &Constraint,
    max_free: usize,
) -> Result<GeneratorMatrix> {
    let table = gibbs_exact_capped(j, beta, constraint, max_free)?;
    let free = table.free_vertices().to_vec();
    let states: Vec<usize> = (0..table.num_states())
        .filter(|&m| table.probability(m) > 0.0)
        .collect();
    let index_of = {
        let mut map = vec![usize::MAX; table.num_states()];
        for (i, &m) in states.iter().enumerate() {
            map[m] = i;
        }
        map
    };
    let s = states.len();
    let mut gen = DMatrix::zeros(s, s);
    let mut stationary = DVector::zeros(s);
    let mut configs = Vec::with_capacity(s);
    for (row, &mask) in states.iter().enumerate() {
        stationary[row] = table.probability(mask);
        let spins = table.config(mask);
        for (bit, &v) in free.iter().enumerate() {
            let target_mask = mask ^ (1 << bit);
            let col = index_of[target_mask];
            if col == usize::MAX {
                // move leaves the allowed set: rejected
                continue;
            }
            gen[(row, col)] = flip_rate(beta, crate::hamiltonian::local_field(j, &spins, v));
        }
        configs.push(spins);
    }
    for row in 0..s {
        let off: f64 = (0..s).filter(|&c| c != row).map(|c| gen[(row, c)]).sum();
        gen[(row, row)] = -off;
    }
    Ok(GeneratorMatrix {
        states,
        free,
        gen,
        stationary,
        configs,
    })
}

impl GeneratorMatrix {
    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn config(&self, state: usize) -> &[Spin] {
        &self.configs[state]
    }

    /// State index of a full configuration, if allowed.
    pub fn state_of(&self, spins: &[Spin]) -> Option<usize> {
        let mut mask = 0usize;
        for (bit, &v) in self.free.iter().enumerate() {
            if spins[v] == 1 {
                mask |= 1 << bit;
            }
        }
        self.states.iter().position(|&m| m == mask)
    }

    /// Maximum over adjacent pairs of the relative detailed-balance defect
    /// `|pi_x q(x,y) - pi_y q(y,x)| / max(pi_x q(x,y), pi_y q(y,x))`.
    pub fn detailed_balance_defect(&self) -> f64 {
        let s = self.num_states();
        let mut worst: f64 = 0.0;
        for x in 0..s {
            for y in 0..x {
                let a = self.stationary[x] * self.gen[(x, y)];
                let b = self.stationary[y] * self.gen[(y, x)];
                let m = a.max(b);
                if m > 0.0 {
                    worst = worst.max((a - b).abs() / m);
                }
            }
        }
        worst
    }

    /// Maximum absolute row sum (zero up to roundoff).
    pub fn row_sum_defect(&self) -> f64 {
        let s = self.num_states();
        (0..s)
            .map(|r| (0..s).map(|c| self.gen[(r, c)]).sum::<f64>().abs())
            .fold(0.0, f64::max)
    }

    /// Dirichlet form `E(f,f) = (1/2) sum_{x,y} pi_x q(x,y) (f_x - f_y)^2`.
    pub fn dirichlet_form(&self, f: &[f64]) -> f64 {
        let s = self.num_states();
        let mut acc = 0.0;
        for x in 0..s {
            for y in 0..s {
                if x != y {
                    acc += self.stationary[x] * self.gen[(x, y)] * (f[x] - f[y]).powi(2);
                }
            }
        }
        0.5 * acc
    }

    /// Rayleigh quotient `E(f,f) / Var_pi(f)`; `None` for constant `f`.
    pub fn rayleigh_quotient(&self, f: &[f64]) -> Option<f64> {
        let mean: f64 = (0..self.num_states())
            .map(|x| self.stationary[x] * f[x])
            .sum();
        let var: f64 = (0..self.num_states())
            .map(|x| self.stationary[x] * (f[x] - mean).powi(2))
            .sum();
        (var > 1e-300).then(|| self.dirichlet_form(f) / var)
    }
}

/// Spectral-gap report; when the allowed set is disconnected under single
/// flips, the gap of each connected component is reported too.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GapReport {
    /// Smallest nonzero eigenvalue of `-G` (0 when disconnected).
    pub gap: f64,
    pub disconnected: bool,
    pub component_gaps: Vec<f64>,
}

/// All eigenvalues of `-G` via the symmetrized similarity transform
/// `A = -D^{1/2} G D^{-1/2}` with `D = diag(pi)`, ascending.
///
/// Reversibility gives `A_{xy} = -sqrt(q(x,y) q(y,x))` off the diagonal,
/// which keeps every entry bounded by the rates even when `pi` spans
/// hundreds of e-folds.
pub fn spectrum(g: &GeneratorMatrix) -> Vec<f64> {
    let s = g.num_states();
    let mut a = DMatrix::zeros(s, s);
    for x in 0..s {
        a[(x, x)] = -g.gen[(x, x)];
        for y in 0..x {
            let v = -(g.gen[(x, y)] * g.gen[(y, x)]).sqrt();
            a[(x, y)] = v;
            a[(y, x)] = v;
        }
    }
    let mut eig: Vec<f64> = a.symmetric_eigen().eigenvalues.iter().copied().collect();
    eig.sort_by(|p, q| p.partial_cmp(q).unwrap());
    eig
}

/// Smallest nonzero eigenvalue of `-G`, with disconnection detection and
/// per-component gaps.
pub fn spectral_gap(g: &GeneratorMatrix) -> GapReport {
    let comps = components(g);
    let n_comps = comps.iter().copied().max().map_or(0, |m| m + 1);
    if n_comps <= 1 {
        let eig = spectrum(g);
        let gap = eig.get(1).copied().unwrap_or(0.0).max(0.0);
        return GapReport {
            gap,
            disconnected: false,
            component_gaps: vec![gap],
        };
    }
    let mut component_gaps = Vec::with_capacity(n_comps);
    for c in 0..n_comps {
        let idx: Vec<usize> = (0..g.num_states()).filter(|&x| comps[x] == c).collect();
        let total: f64 = idx.iter().map(|&x| g.stationary[x]).sum();
        let mut sub = DMatrix::zeros(idx.len(), idx.len());
        let mut pi = DVector::zeros(idx.len());
        for (r, &x) in idx.iter().enumerate() {
            pi[r] = g.stationary[x] / total;
            for (cc, &y) in idx.iter().enumerate() {
                sub[(r, cc)] = g.gen[(x, y)];
            }
        }
        let sub_gen = GeneratorMatrix {
            states: idx.iter().map(|&x| g.states[x]).collect(),
            free: g.free.clone(),
            gen: sub,
            stationary: pi,
            configs: idx.iter().map(|&x| g.configs[x].clone()).collect(),
        };
        let eig = spectrum(&sub_gen);
        component_gaps.push(eig.get(1).copied().unwrap_or(0.0).max(0.0));
    }
    GapReport {
        gap: 0.0,
        disconnected: true,
        component_gaps,
    }
}

fn components(g: &GeneratorMatrix) -> Vec<usize> {
    let s = g.num_states();
    let mut comp = vec![usize::MAX; s];
    let mut next = 0;
    for start in 0..s {
        if comp[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        comp[start] = next;
        while let Some(x) = stack.pop() {
            for y in 0..s {
                if y != x && comp[y] == usize::MAX && (g.gen[(x, y)] > 0.0 || g.gen[(y, x)] > 0.0) {
                    comp[y] = next;
                    stack.push(y);
                }
            }
        }
        next += 1;
    }
    comp
}

/// `d_TV(law at time t from x0, pi)` per query time, exactly via the matrix
/// exponential (scaling and squaring).
pub fn tv_curve(g: &GeneratorMatrix, x0: usize, times: &[f64]) -> Vec<f64> {
    times
        .iter()
        .map(|&t| {
            let p_t = (g.gen.clone() * t).exp();
            tv_row_to_pi(g, &p_t, x0)
        })
        .collect()
}

fn tv_row_to_pi(g: &GeneratorMatrix, p_t: &DMatrix<f64>, x0: usize) -> f64 {
    let s = g.num_states();
    0.5 * (0..s)
        .map(|y| (p_t[(x0, y)] - g.stationary[y]).abs())
        .sum::<f64>()
}

/// Worst-case distance `d(t) = max_{x0} d_TV(law at t, pi)`.
pub fn worst_case_tv(g: &GeneratorMatrix, t: f64) -> f64 {
    let p_t = (g.gen.clone() * t).exp();
    (0..g.num_states())
        .map(|x0| tv_row_to_pi(g, &p_t, x0))
        .fold(0.0, f64::max)
}

/// `t_mix(eps) = inf { t : max_{x0} d_TV(t) <= eps }` by geometric
/// bracketing plus bisection (worst-case TV is non-increasing in t).
pub fn mixing_time(g: &GeneratorMatrix, eps: f64) -> Result<f64> {
    if !(0.0 < eps && eps < 1.0) {
        return Err(Error::input("eps must lie in (0,1)"));
    }
    if g.num_states() <= 1 {
        return Ok(0.0);
    }
    let mut hi = 1.0;
    let mut guard = 0;
    while worst_case_tv(g, hi) > eps {
        hi *= 4.0;
        guard += 1;
        if guard > 600 {
            return Err(Error::Quadrature(
                "mixing-time bracket diverged (disconnected chain?)".into(),
            ));
        }
    }
    let mut lo = 0.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if worst_case_tv(g, mid) <= eps {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-9 * hi {
            break;
        }
    }
    Ok(hi)
}

/// A cover of the free vertices by (possibly overlapping) blocks.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BlockSpec {
    pub blocks: Vec<Vec<usize>>,
}

impl BlockSpec {
    /// `chi = max_v #{i : v in B_i}`.
    pub fn chi(&self) -> usize {
        let mut counts = std::collections::HashMap::new();
        for b in &self.blocks {
            for &v in b {
                *counts.entry(v).or_insert(0usize) += 1;
            }
        }
        counts.values().copied().max().unwrap_or(0)
    }
}

/// Numerical check of the block-dynamics gap inequality
/// `gap_V^{-1} <= chi * gap_B^{-1} * max_{i,zeta} gap_{B_i^zeta}^{-1}`.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BlockGapReport {
    pub gap_single_site: f64,
    pub gap_block: f64,
    /// Worst (smallest) conditioned within-block gap over all blocks and
    /// boundary configurations.
    pub worst_block_gap: f64,
    pub chi: usize,
    /// `gap_B * min_block_gap / chi`: the certified lower bound on the gap.
    pub bound: f64,
    pub holds: bool,
}

/// Verify the block-dynamics bound on an instance. Blocks must consist of
/// free vertices and cover them all.
pub fn block_gap_check(
    j: &CouplingMatrix,
    beta: f64,
    blocks: &BlockSpec,
    constraint: &Constraint,
    max_free: usize,
) -> Result<BlockGapReport> {
    let g = build_generator(j, beta, constraint, max_free)?;
    let free = g.free.clone();
    let mut covered = vec![false; j.n()];
    for b in &blocks.blocks {
        for &v in b {
            if !free.contains(&v) {
                return Err(Error::input(format!("block vertex {v} is not free")));
            }
            covered[v] = true;
        }
    }
    if free.iter().any(|&v| !covered[v]) {
        return Err(Error::input("blocks must cover every free vertex"));
    }
    let gap_single_site = spectral_gap(&g);
    if gap_single_site.disconnected {
        return Err(Error::input(
            "block comparison needs a connected single-site chain",
        ));
    }

    // block dynamics: each block rings at rate 1 and resamples from the
    // conditional Gibbs measure given the rest
    let s = g.num_states();
    let state_index = {
        let max_mask = 1usize << free.len();
        let mut map = vec![usize::MAX; max_mask];
        for (i, &m) in g.states.iter().enumerate() {
            map[m] = i;
        }
        map
    };
    let mut gen_b = DMatrix::zeros(s, s);
    for (row, &mask) in g.states.iter().enumerate() {
        for block in &blocks.blocks {
            let block_bits: Vec<usize> = block
                .iter()
                .map(|v| free.iter().position(|w| w == v).unwrap())
                .collect();
            let mut weights = Vec::new();
            let mut targets = Vec::new();
            for sub in 0..1usize << block_bits.len() {
                let mut target = mask;
                for (p, &bit) in block_bits.iter().enumerate() {
                    if sub >> p & 1 == 1 {
                        target |= 1 << bit;
                    } else {
                        target &= !(1 << bit);
                    }
                }
                let idx = state_index[target];
                if idx != usize::MAX {
                    weights.push(g.stationary[idx]);
                    targets.push(idx);
                }
            }
            let total: f64 = weights.iter().sum();
            for (w, &target) in weights.iter().zip(&targets) {
                if target != row {
                    gen_b[(row, target)] += w / total;
                }
            }
        }
    }
    for row in 0..s {
        let off: f64 = (0..s).filter(|&c| c != row).map(|c| gen_b[(row, c)]).sum();
        gen_b[(row, row)] = -off;
    }
    let g_block = GeneratorMatrix {
        states: g.states.clone(),
        free: free.clone(),
        gen: gen_b,
        stationary: g.stationary.clone(),
        configs: (0..s).map(|x| g.config(x).to_vec()).collect(),
    };
    let gap_block = spectral_gap(&g_block);

    // worst conditioned within-block gap over realized boundary configurations
    let mut worst = f64::INFINITY;
    for block in &blocks.blocks {
        let boundary: Vec<usize> = free.iter().copied().filter(|v| !block.contains(v)).collect();
        let mut seen = std::collections::HashSet::new();
        for x in 0..s {
            let spins = g.config(x);
            let zeta: Vec<Spin> = boundary.iter().map(|&v| spins[v]).collect();
            if !seen.insert(zeta.clone()) {
                continue;
            }
            let mut frozen = constraint.frozen.clone();
            frozen.extend(boundary.iter().copied().zip(zeta.iter().copied()));
            let sub_constraint = Constraint {
                frozen,
                required_sat: constraint.required_sat.clone(),
            };
            let sub = build_generator(j, beta, &sub_constraint, max_free)?;
            let sub_gap = spectral_gap(&sub);
            let gap_val = if sub.num_states() <= 1 {
                // a fully constrained block relaxes instantly
                f64::INFINITY
            } else if sub_gap.disconnected {
                0.0
            } else {
                sub_gap.gap
            };
            worst = worst.min(gap_val);
        }
    }

    let chi = blocks.chi();
    let bound = gap_block.gap * worst / chi as f64;
    Ok(BlockGapReport {
        gap_single_site: gap_single_site.gap,
        gap_block: gap_block.gap,
        worst_block_gap: worst,
        chi,
        bound,
        holds: gap_single_site.gap >= bound - 1e-10 * bound.abs(),
    })
}

/// Canonical-path congestion report for the 4-state chain on a bond
/// `(i1, i2)` with boundary `tau`.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CongestionReport {
    /// `B = max_e (1/(pi_x q(x,y))) sum_{paths through e} pi_u pi_v |path|`.
    pub congestion: f64,
    pub gap: f64,
    /// `128 exp(2 beta max_l sum_j |J_{i_l j}|)`.
    pub upper_bound: f64,
    /// `gap^{-1} <= B` (the canonical-path theorem; a violation is a bug).
    pub lower_holds: bool,
    /// `B <= 128 exp(...)`.
    pub upper_holds: bool,
}

/// Enumerate the 16 canonical shortest paths of the 4-state chain on
/// `(sigma_{i1}, sigma_{i2})` with the rest of the configuration frozen to
/// `tau`; compute the congestion `B`, the exact gap, and check
/// `gap^{-1} <= B <= 128 exp(2 beta max_l sum_j |J_{i_l j}|)`.
///
/// Where two geodesics exist (opposite corners), the canonical path flips
/// coordinate 1 first.
pub fn congestion_4state(
    j: &CouplingMatrix,
    beta: f64,
    i1: usize,
    i2: usize,
    tau: &[Spin],
) -> Result<CongestionReport> {
    if i1 == i2 || i1 >= j.n() || i2 >= j.n() {
        return Err(Error::input("need two distinct vertices"));
    }
    let field = |v: usize| -> f64 {
        (0..j.n())
            .filter(|&w| w != i1 && w != i2)
            .map(|w| j.get(v, w) * tau[w] as f64)
            .sum()
    };
    let (h1, h2) = (field(i1), field(i2));
    let jb = j.get(i1, i2);
    // states 0..4 encode (sigma_{i1}, sigma_{i2}) as bits
    let spin = |s: usize, c: usize| -> f64 {
        if s >> c & 1 == 1 {
            1.0
        } else {
            -1.0
        }
    };
    let h = |s: usize| jb * spin(s, 0) * spin(s, 1) + h1 * spin(s, 0) + h2 * spin(s, 1);
    let log_w: Vec<f64> = (0..4).map(|s| beta * h(s)).collect();
    let log_z = crate::numerics::log_sum_exp(&log_w);
    let pi: Vec<f64> = log_w.iter().map(|&lw| (lw - log_z).exp()).collect();
    // heat-bath rates between states differing in one coordinate
    let mut q = [[0.0f64; 4]; 4];
    for s in 0..4usize {
        for c in 0..2usize {
            let t = s ^ (1 << c);
            let m = spin(s, c) * (jb * spin(s, 1 - c) + if c == 0 { h1 } else { h2 });
            q[s][t] = flip_rate(beta, m);
        }
    }

    let path = |from: usize, to: usize| -> Vec<(usize, usize)> {
        if from == to {
            return Vec::new();
        }
        match from ^ to {
            0b01 | 0b10 => vec![(from, to)],
            _ => {
                let mid = from ^ 0b01;
                vec![(from, mid), (mid, to)]
            }
        }
    };

    let mut congestion: f64 = 0.0;
    for x in 0..4usize {
        for c in 0..2usize {
            let y = x ^ (1 << c);
            if q[x][y] <= 0.0 {
                continue;
            }
            let mut load = 0.0;
            for u in 0..4usize {
                for v in 0..4usize {
                    let p = path(u, v);
                    if p.contains(&(x, y)) {
                        load += pi[u] * pi[v] * p.len() as f64;
                    }
                }
            }
            congestion = congestion.max(load / (pi[x] * q[x][y]));
        }
    }

    let mut gen = DMatrix::zeros(4, 4);
    for s in 0..4 {
        for t in 0..4 {
            if s != t {
                gen[(s, t)] = q[s][t];
            }
        }
        let off: f64 = (0..4).filter(|&t| t != s).map(|t| gen[(s, t)]).sum();
        gen[(s, s)] = -off;
    }
    let g = GeneratorMatrix {
        states: (0..4).collect(),
        free: vec![0, 1],
        gen,
        stationary: DVector::from_vec(pi.clone()),
        configs: (0..4)
            .map(|s| vec![spin(s, 0) as Spin, spin(s, 1) as Spin])
            .collect(),
    };
    let gap = spectral_gap(&g).gap;

    let upper_bound = 128.0 * (2.0 * beta * j.abs_row_sum(i1).max(j.abs_row_sum(i2))).exp();

    Ok(CongestionReport {
        congestion,
        gap,
        upper_bound,
        lower_holds: 1.0 / gap <= congestion * (1.0 + 1e-9),
        upper_holds: congestion <= upper_bound * (1.0 + 1e-9),
    })
}

/// Exact within-well mixing vs. exit timescales.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WellSeparationReport {
    /// `t_mix(1/4)` of the chain restricted to the well.
    pub t_mix_quarter: f64,
    /// Mean exit time from the well under the conditional-Gibbs start
    /// (linear solve on the unrestricted chain).
    pub mean_exit: f64,
    /// Worst-state expected exit time.
    pub max_exit: f64,
    pub ratio: f64,
    /// `D` making `t_mix <= exp(2 beta |J_(K+1)| + D N^{1/2 + 1/(2 alpha)})`
    /// an equality.
    pub fitted_d: f64,
}

/// Compare the exact mixing time of the well-restricted chain against the
/// exact mean exit time from the well on the unrestricted chain.
pub fn verify_well_separation(
    j: &CouplingMatrix,
    beta: f64,
    decomp: &WellDecomposition,
    label: &[Spin],
    max_free: usize,
) -> Result<WellSeparationReport> {
    // restricted chain: all well vertices frozen by the label
    let frozen = decomp.label_assignment(j, label)?;
    let restricted = build_generator(j, beta, &Constraint::freeze(frozen), max_free)?;
    let t_mix_quarter = mixing_time(&restricted, 0.25)?;

    // unrestricted chain on the full space; well interior = label matches
    let full = build_generator(j, beta, &Constraint::none(), max_free)?;
    let interior: Vec<usize> = (0..full.num_states())
        .filter(|&x| {
            matches!(
                decomp.skeleton(j, full.config(x)),
                crate::wells::WellLabel::Label(ref l) if l == label
            )
        })
        .collect();
    if interior.is_empty() {
        return Err(Error::input("label matches no configuration"));
    }
    // expected exit times: (-G restricted to the interior) h = 1
    let m = interior.len();
    let mut a = DMatrix::zeros(m, m);
    for (r, &x) in interior.iter().enumerate() {
        for (c, &y) in interior.iter().enumerate() {
            a[(r, c)] = -full.gen[(x, y)];
        }
    }
    let rhs = DVector::from_element(m, 1.0);
    let h = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Quadrature("exit-time linear solve is singular".into()))?;
    let pi_interior: f64 = interior.iter().map(|&x| full.stationary[x]).sum();
    let mean_exit: f64 = interior
        .iter()
        .enumerate()
        .map(|(r, &x)| full.stationary[x] / pi_interior * h[r])
        .sum();
    let max_exit = h.iter().copied().fold(0.0f64, f64::max);

    // fitted D from the mixing bound with L = K: the exponent carries the
    // largest non-relevant bond
    let k = decomp.k();
    let next_abs = if j.num_edges() > k { j.rank_abs(k) } else { 0.0 };
    let nf = j.n() as f64;
    let alpha = decomp.regime().alpha;
    let fitted_d = (t_mix_quarter.ln() - 2.0 * beta * next_abs) / nf.powf(0.5 + 0.5 / alpha);

    Ok(WellSeparationReport {
        t_mix_quarter,
        mean_exit,
        max_exit,
        ratio: t_mix_quarter / mean_exit,
        fitted_d,
    })
}
