//! The heavy-tailed coupling matrix: sampling, order statistics, the
//! relevant-edge set `E_{a,gamma}`, and the structural diagnostics
//! (row sums, spectral gaps in the order statistics, vertex disjointness)
//! that the metastability picture rests on.

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{random_spin, rng_from_seed};

/// Undirected edge with canonical orientation `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Edge {
    pub i: usize,
    pub j: usize,
}

impl Edge {
    pub fn new(a: usize, b: usize) -> Self {
        assert!(a != b, "self edge ({a},{a})");
        Edge {
            i: a.min(b),
            j: a.max(b),
        }
    }

    pub fn touches(&self, v: usize) -> bool {
        self.i == v || self.j == v
    }

    pub fn other(&self, v: usize) -> usize {
        if v == self.i {
            self.j
        } else {
            self.i
        }
    }
}

/// Tabulated survival function `t -> P(|X| > t)`: strictly increasing in `t`,
/// strictly decreasing values in `(0, 1]`. Evaluation interpolates linearly
/// in log-log coordinates and extrapolates the last segment's power law.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SurvivalTable {
    points: Vec<(f64, f64)>,
}

impl SurvivalTable {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::input("survival table needs at least two points"));
        }
        for w in points.windows(2) {
            if !(w[0].0 > 0.0 && w[1].0 > w[0].0) {
                return Err(Error::input("survival abscissae must be positive increasing"));
            }
            if !(w[1].1 < w[0].1) {
                return Err(Error::input("survival values must be strictly decreasing"));
            }
        }
        if points.iter().any(|&(_, s)| !(s > 0.0 && s <= 1.0)) {
            return Err(Error::input("survival values must lie in (0, 1]"));
        }
        Ok(SurvivalTable { points })
    }

    /// Exact Pareto table `P(|X| > t) = t^{-alpha}` for `t >= 1` on a grid;
    /// mostly useful for tests against the closed form.
    pub fn pareto(alpha: f64, t_max: f64, grid: usize) -> Result<Self> {
        let pts = (0..grid)
            .map(|k| {
                let t = (t_max.ln() * k as f64 / (grid - 1) as f64).exp();
                (t, t.powf(-alpha))
            })
            .collect();
        SurvivalTable::new(pts)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let pts = &self.points;
        if t <= pts[0].0 {
            return pts[0].1;
        }
        let (lt, idx) = (t.ln(), pts.partition_point(|&(x, _)| x < t));
        let (a, b) = if idx >= pts.len() {
            (pts[pts.len() - 2], pts[pts.len() - 1])
        } else {
            (pts[idx - 1], pts[idx])
        };
        let slope = (b.1.ln() - a.1.ln()) / (b.0.ln() - a.0.ln());
        (a.1.ln() + slope * (lt - a.0.ln())).exp()
    }

    /// Generalized inverse `inf { t : eval(t) <= u }` by bisection to relative
    /// tolerance 1e-12.
    pub fn inverse(&self, u: f64) -> f64 {
        assert!(u > 0.0 && u <= 1.0);
        if u >= self.points[0].1 {
            return self.points[0].0;
        }
        let mut lo = self.points[0].0;
        let mut hi = self.points[self.points.len() - 1].0;
        while self.eval(hi) > u {
            lo = hi;
            hi *= 2.0;
            if hi > 1e300 {
                return hi;
            }
        }
        while (hi - lo) > 1e-12 * hi {
            let m = 0.5 * (lo + hi);
            if self.eval(m) > u {
                lo = m;
            } else {
                hi = m;
            }
        }
        hi
    }
}

/// Base law for the off-diagonal entries, before planted overrides.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum BaseLaw {
    /// All entries zero (used for fully planted instances).
    Zero,
    /// `|J| = N^{-1/alpha} U^{-1/alpha}` with a fair-coin sign: density
    /// `(alpha / 2N) |x|^{-(1+alpha)}` on `|x| >= N^{-1/alpha}`.
    ParetoSymmetric,
    /// Symmetric `X` with tabulated survival `P(|X| > t)`; entries are
    /// `X / b_N` with `b_N = inf{ t : P(|X| > t) <= 1/N }`.
    GeneralTail(SurvivalTable),
}

/// Explicit override `J_{ij} = value` on top of the base law.
#[derive(Debug, Clone, Copy)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PlantedEdge {
    pub edge: Edge,
    pub value: f64,
}

/// Non-fatal warnings issued at law construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum LawWarning {
    /// `alpha` outside `(0, 1)`: sampling is fine but the metastability
    /// results target `alpha in (0, 1)`.
    AlphaOutsideTheory,
}

/// Law of the coupling matrix.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CouplingLaw {
    pub n: usize,
    pub alpha: f64,
    pub base: BaseLaw,
    pub planted: Vec<PlantedEdge>,
    /// Normalizer for [`BaseLaw::GeneralTail`], computed at construction.
    pub b_n: Option<f64>,
}

impl CouplingLaw {
    pub fn pareto(n: usize, alpha: f64) -> Result<Self> {
        Self::build(n, alpha, BaseLaw::ParetoSymmetric, Vec::new())
    }

    pub fn general_tail(n: usize, alpha: f64, table: SurvivalTable) -> Result<Self> {
        Self::build(n, alpha, BaseLaw::GeneralTail(table), Vec::new())
    }

    /// Planted values over a zero base.
    pub fn planted(n: usize, edges: Vec<PlantedEdge>) -> Result<Self> {
        // alpha only matters for base-law sampling; keep a theory-typical value
        Self::build(n, 0.5, BaseLaw::Zero, edges)
    }

    /// Add planted overrides to this law.
    pub fn with_planted(mut self, edges: Vec<PlantedEdge>) -> Result<Self> {
        self.planted.extend(edges);
        Self::build(self.n, self.alpha, self.base, self.planted)
    }

    fn build(n: usize, alpha: f64, base: BaseLaw, planted: Vec<PlantedEdge>) -> Result<Self> {
        if n < 2 {
            return Err(Error::input("need at least two vertices"));
        }
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(Error::input(format!("alpha must lie in (0,2), got {alpha}")));
        }
        let mut seen = std::collections::HashSet::new();
        for p in &planted {
            if p.edge.j >= n {
                return Err(Error::input(format!(
                    "planted edge ({},{}) out of range for n = {n}",
                    p.edge.i, p.edge.j
                )));
            }
            if !p.value.is_finite() {
                return Err(Error::input("planted value must be finite"));
            }
            if !seen.insert(p.edge) {
                return Err(Error::input(format!(
                    "duplicate planted edge ({},{})",
                    p.edge.i, p.edge.j
                )));
            }
        }
        let b_n = match &base {
            BaseLaw::GeneralTail(table) => Some(table.inverse(1.0 / n as f64)),
            _ => None,
        };
        Ok(CouplingLaw {
            n,
            alpha,
            base,
            planted,
            b_n,
        })
    }

    pub fn warnings(&self) -> Vec<LawWarning> {
        let mut w = Vec::new();
        if self.alpha >= 1.0 {
            w.push(LawWarning::AlphaOutsideTheory);
        }
        w
    }

    fn is_pure_pareto(&self) -> bool {
        matches!(self.base, BaseLaw::ParetoSymmetric) && self.planted.is_empty()
    }
}

/// `P(|J| > r N^{-1/alpha}) = r^{-alpha}` for `r >= 1` (and 1 below the
/// support floor). Only defined for the pure Pareto law.
pub fn tail_probability(law: &CouplingLaw, r: f64) -> Result<f64> {
    if !law.is_pure_pareto() {
        return Err(Error::UnsupportedVariant {
            required: "ParetoSymmetric",
        });
    }
    if !(r >= 0.0) {
        return Err(Error::input("scale multiple must be nonnegative"));
    }
    Ok(if r < 1.0 { 1.0 } else { r.powf(-law.alpha) })
}

/// Symmetric coupling matrix with zero diagonal and a rank index over edges
/// sorted by `|J|` descending (ties broken by lexicographic edge).
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CouplingMatrix {
    n: usize,
    /// Upper-triangular values, packed row-major: `(i,j), i < j`.
    vals: Vec<f64>,
    /// Edges in decreasing `|J|` order.
    rank: Vec<Edge>,
}

#[inline]
fn tri_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

impl CouplingMatrix {
    /// Build from explicit upper-triangular values (row-major, length
    /// `n(n-1)/2`).
    pub fn from_upper_tri(n: usize, vals: Vec<f64>) -> Result<Self> {
        if vals.len() != n * (n - 1) / 2 {
            return Err(Error::input("upper-triangular length mismatch"));
        }
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("couplings must be finite"));
        }
        let mut m = CouplingMatrix {
            n,
            vals,
            rank: Vec::new(),
        };
        m.build_rank();
        Ok(m)
    }

    fn build_rank(&mut self) {
        let mut edges: Vec<Edge> = (0..self.n)
            .flat_map(|i| (i + 1..self.n).map(move |j| Edge { i, j }))
            .collect();
        edges.sort_by(|a, b| {
            let va = self.get(a.i, a.j).abs();
            let vb = self.get(b.i, b.j).abs();
            vb.partial_cmp(&va).unwrap().then(a.cmp(b))
        });
        self.rank = edges;
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            0.0
        } else if i < j {
            self.vals[tri_index(self.n, i, j)]
        } else {
            self.vals[tri_index(self.n, j, i)]
        }
    }

    #[inline]
    pub fn edge_value(&self, e: Edge) -> f64 {
        self.get(e.i, e.j)
    }

    /// Edge at rank `l` (0-based: `rank_edge(0)` carries `|J_{(1)}|`).
    pub fn rank_edge(&self, l: usize) -> Edge {
        self.rank[l]
    }

    pub fn rank_edges(&self) -> &[Edge] {
        &self.rank
    }

    /// `|J|` of the rank-`l` edge (0-based).
    pub fn rank_abs(&self, l: usize) -> f64 {
        self.edge_value(self.rank[l]).abs()
    }

    pub fn num_edges(&self) -> usize {
        self.vals.len()
    }

    /// Row sum `sum_{j != i} |J_{ij}|`.
    pub fn abs_row_sum(&self, i: usize) -> f64 {
        (0..self.n).filter(|&j| j != i).map(|j| self.get(i, j).abs()).sum()
    }

    pub fn upper_tri(&self) -> &[f64] {
        &self.vals
    }
}

/// Planted edges for a weak background: every pair not in `exclude` gets
/// `|J|` uniform on `[lo, hi]` with a fair-coin sign. Combined with a few
/// large planted bonds over a zero base this gives the desk-scale surrogate
/// instances with controlled separation.
pub fn uniform_background_edges(
    n: usize,
    exclude: &[Edge],
    lo: f64,
    hi: f64,
    seed: u64,
) -> Vec<PlantedEdge> {
    assert!(0.0 <= lo && lo <= hi);
    let mut rng = rng_from_seed(seed);
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let e = Edge { i, j };
            let value =
                random_spin(&mut rng) as f64 * (lo + (hi - lo) * rng.gen::<f64>());
            if !exclude.contains(&e) {
                out.push(PlantedEdge { edge: e, value });
            }
        }
    }
    out
}

/// Draw a matrix from `law`, deterministically in `seed`.
///
/// Entries are sampled in row-major upper-triangular order; the Pareto case
/// uses the inverse CDF `|J| = N^{-1/alpha} U^{-1/alpha}` with an independent
/// fair-coin sign.
pub fn sample_matrix(law: &CouplingLaw, seed: u64) -> CouplingMatrix {
    let mut rng = rng_from_seed(seed);
    let n = law.n;
    let nf = n as f64;
    let mut vals = vec![0.0; n * (n - 1) / 2];
    match &law.base {
        BaseLaw::Zero => {}
        BaseLaw::ParetoSymmetric => {
            let scale = nf.powf(-1.0 / law.alpha);
            for v in vals.iter_mut() {
                let u: f64 = 1.0 - rng.gen::<f64>(); // in (0,1]
                *v = random_spin(&mut rng) as f64 * scale * u.powf(-1.0 / law.alpha);
            }
        }
        BaseLaw::GeneralTail(table) => {
            let b_n = law.b_n.expect("b_N computed at construction");
            for v in vals.iter_mut() {
                let u: f64 = 1.0 - rng.gen::<f64>();
                *v = random_spin(&mut rng) as f64 * table.inverse(u) / b_n;
            }
        }
    }
    for p in &law.planted {
        vals[tri_index(n, p.edge.i, p.edge.j)] = p.value;
    }
    CouplingMatrix::from_upper_tri(n, vals).expect("sampled values are finite")
}

/// Regime parameters `(beta, a, gamma)` with the derived quantities used
/// throughout: `xi`, `gamma_0`, a `rho` in the admissible window, the
/// relevance threshold `(a/2beta) N^gamma` and `ln t_{a,gamma} = a N^gamma`.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RegimeParams {
    pub beta: f64,
    pub a: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub n: usize,
    /// `(1 - alpha) / (1 + 2 alpha)`.
    pub xi: f64,
    /// `(5 alpha + 1) / (2 alpha (2 alpha + 1))`.
    pub gamma0: f64,
    /// Midpoint of the admissible `rho` window when it is nonempty, else a
    /// fallback in `(1/(2 alpha), 1/alpha)`; see [`RegimeParams::rho_in_window`].
    pub rho: f64,
    /// Whether `rho` satisfies `1 - alpha rho + rho < gamma - xi`.
    pub rho_in_window: bool,
    /// `(a / 2 beta) N^gamma`: bonds at or above this are `t`-relevant.
    pub threshold: f64,
    /// `a N^gamma`; the timescale itself may overflow `f64`, its log never.
    pub log_t_scale: f64,
}

impl RegimeParams {
    pub fn new(beta: f64, a: f64, gamma: f64, alpha: f64, n: usize) -> Result<Self> {
        if !(beta > 0.0) || !(a > 0.0) {
            return Err(Error::input("beta and a must be positive"));
        }
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(Error::input("alpha must lie in (0,2)"));
        }
        let nf = n as f64;
        let xi = (1.0 - alpha) / (1.0 + 2.0 * alpha);
        let gamma0 = (5.0 * alpha + 1.0) / (2.0 * alpha * (2.0 * alpha + 1.0));
        // rho window: rho > 1/(2 alpha) and 1 - alpha rho + rho < gamma - xi,
        // i.e. (for alpha < 1) rho > max(1/(2 alpha), (1 - gamma + xi)/(alpha - 1));
        // the binding upper limit 1/alpha comes from the row-sum lemmas.
        let rho_lo = 1.0 / (2.0 * alpha);
        let rho_hi = 1.0 / alpha;
        // solve 1 - alpha rho + rho < gamma - xi  =>  rho (1 - alpha) < gamma - xi - 1
        let rho = if alpha < 1.0 {
            let upper = (gamma - xi - 1.0) / (1.0 - alpha);
            if upper > rho_lo {
                0.5 * (rho_lo + upper.min(rho_hi))
            } else {
                0.5 * (rho_lo + rho_hi)
            }
        } else {
            0.5 * (rho_lo + rho_hi)
        };
        let rho_in_window = rho > rho_lo && 1.0 - alpha * rho + rho < gamma - xi;
        Ok(RegimeParams {
            beta,
            a,
            gamma,
            alpha,
            n,
            xi,
            gamma0,
            rho,
            rho_in_window,
            threshold: a / (2.0 * beta) * nf.powf(gamma),
            log_t_scale: a * nf.powf(gamma),
        })
    }

    /// Whether `gamma` lies in the theory window `(gamma_0, 1/alpha)`.
    pub fn gamma_in_theory_window(&self) -> bool {
        self.gamma > self.gamma0 && self.gamma < 1.0 / self.alpha
    }
}

/// The `t_{a,gamma}`-relevant edges, their vertices and the count `K`.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RelevantEdges {
    /// In rank order (decreasing `|J|`).
    pub edges: Vec<Edge>,
    /// Sorted endpoint set `V_{a,gamma}`.
    pub vertices: Vec<usize>,
    pub k: usize,
}

/// `E_{a,gamma} = { e : |J_e| >= (a/2beta) N^gamma }` (inclusive threshold),
/// in rank order.
pub fn relevant_edges(j: &CouplingMatrix, regime: &RegimeParams) -> RelevantEdges {
    let mut edges = Vec::new();
    for l in 0..j.num_edges() {
        if j.rank_abs(l) >= regime.threshold {
            edges.push(j.rank_edge(l));
        } else {
            break;
        }
    }
    let mut vertices: Vec<usize> = edges.iter().flat_map(|e| [e.i, e.j]).collect();
    vertices.sort_unstable();
    vertices.dedup();
    RelevantEdges {
        k: edges.len(),
        edges,
        vertices,
    }
}

/// Expected `K` under the pure Pareto law:
/// `(2 beta)^alpha / (2 a^alpha) * N^{1 - alpha gamma}`.
pub fn expected_k(regime: &RegimeParams) -> f64 {
    let nf = regime.n as f64;
    // N(N-1)/2 edges, each above threshold w.p. threshold^{-alpha} / N
    (nf - 1.0) / 2.0 * regime.threshold.powf(-regime.alpha)
}

/// Caller-supplied constants for the pass/fail columns of the diagnostics
/// report. The lemmas assert existence of such constants; they are not
/// explicit, so the caller picks them.
#[derive(Debug, Clone, Copy)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DiagnosticConstants {
    /// `C` in "non-maximal row sum <= C N^{1/(2 alpha)}".
    pub c_row: f64,
}

impl Default for DiagnosticConstants {
    fn default() -> Self {
        DiagnosticConstants { c_row: 1.0 }
    }
}

/// Structural scan of a sampled matrix against the high-probability events
/// the analysis conditions on.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DiagnosticsReport {
    pub rho: f64,
    pub rho_in_window: bool,
    /// (i) no row carries one entry `>= N^rho` and another `>= N^{1/(2 alpha)}`.
    pub no_row_pair: bool,
    /// (ii) max over rows with an entry `>= N^rho` of (row sum - row max);
    /// `None` when no row qualifies.
    pub max_nonmax_row_sum: Option<f64>,
    /// (ii) whether that maximum is `<= c_row N^{1/(2 alpha)}` (vacuously true).
    pub row_sum_ok: bool,
    /// (iii) `sum |J_ij|` over entries (i < j) below `N^rho`.
    pub small_entry_total: f64,
    /// (iv) the annulus `[(a(1-theta)/2beta) N^gamma, (a(1+theta)/2beta) N^gamma]`
    /// with `theta = N^{-xi}` contains no `|J|`.
    pub annulus_empty: bool,
    /// (v) interval occupancies `M_l` of `[N^gamma + l N^{gamma-xi}, ...)` never
    /// have `M_l + M_{l+1} >= 2`.
    pub spacing_ok: bool,
    /// (vi) the relevant edges `e_1..e_K` are pairwise vertex disjoint.
    pub top_edges_disjoint: bool,
    pub k: usize,
    /// All boolean flags above.
    pub all_pass: bool,
}

/// Scan `j` for the events of the row-sum and spacing lemmas at this regime.
pub fn structure_diagnostics(
    j: &CouplingMatrix,
    regime: &RegimeParams,
    consts: &DiagnosticConstants,
) -> DiagnosticsReport {
    let n = j.n();
    let nf = n as f64;
    let rho_cut = nf.powf(regime.rho);
    let half_alpha_cut = nf.powf(1.0 / (2.0 * regime.alpha));

    // (i) and (ii): row scans
    let mut no_row_pair = true;
    let mut max_nonmax_row_sum: Option<f64> = None;
    for i in 0..n {
        let mut row_max = 0.0f64;
        let mut row_sum = 0.0f64;
        let mut count_half = 0usize;
        let mut has_rho = false;
        for jj in 0..n {
            if jj == i {
                continue;
            }
            let v = j.get(i, jj).abs();
            row_sum += v;
            row_max = row_max.max(v);
            if v >= half_alpha_cut {
                count_half += 1;
            }
            if v >= rho_cut {
                has_rho = true;
            }
        }
        // a row with an entry >= N^rho >= N^{1/2alpha} always has count_half >= 1;
        // the bad event is a *second* large entry
        if has_rho && count_half >= 2 {
            no_row_pair = false;
        }
        if has_rho {
            let nonmax = row_sum - row_max;
            max_nonmax_row_sum =
                Some(max_nonmax_row_sum.map_or(nonmax, |m: f64| m.max(nonmax)));
        }
    }
    let row_sum_ok = match max_nonmax_row_sum {
        Some(m) => m <= consts.c_row * half_alpha_cut,
        None => true,
    };

    // (iii) total weight below N^rho
    let small_entry_total: f64 = j
        .upper_tri()
        .iter()
        .map(|v| v.abs())
        .filter(|&v| v < rho_cut)
        .sum();

    // (iv) annulus around the relevance threshold
    let theta = nf.powf(-regime.xi);
    let lo = regime.threshold * (1.0 - theta);
    let hi = regime.threshold * (1.0 + theta);
    let annulus_empty = !j
        .upper_tri()
        .iter()
        .any(|v| (lo..=hi).contains(&v.abs()));

    // (v) spacing of the point process at scale N^gamma
    let base = nf.powf(regime.gamma);
    let step = nf.powf(regime.gamma - regime.xi);
    let mut occupancy = std::collections::BTreeMap::<i64, usize>::new();
    for v in j.upper_tri().iter().map(|v| v.abs()) {
        if v >= base {
            let l = ((v - base) / step).floor() as i64;
            *occupancy.entry(l).or_insert(0) += 1;
        }
    }
    let mut spacing_ok = true;
    for (&l, &m) in &occupancy {
        let next = occupancy.get(&(l + 1)).copied().unwrap_or(0);
        if m + next >= 2 {
            spacing_ok = false;
            break;
        }
    }

    // (vi) vertex disjointness of the relevant edges
    let rel = relevant_edges(j, regime);
    let top_edges_disjoint = rel.vertices.len() == 2 * rel.k;

    let all_pass =
        no_row_pair && row_sum_ok && annulus_empty && spacing_ok && top_edges_disjoint;
    DiagnosticsReport {
        rho: regime.rho,
        rho_in_window: regime.rho_in_window,
        no_row_pair,
        max_nonmax_row_sum,
        row_sum_ok,
        small_entry_total,
        annulus_empty,
        spacing_ok,
        top_edges_disjoint,
        k: rel.k,
        all_pass,
    }
}
