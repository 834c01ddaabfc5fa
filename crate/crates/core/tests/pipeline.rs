//! Cross-module integration tests on planted surrogate instances: the
//! dynamics, wells, Y-process and exact layers have to agree with each other
//! end to end.

use levyglass::couplings::{
    sample_matrix, uniform_background_edges, CouplingLaw, CouplingMatrix, Edge, PlantedEdge,
    RegimeParams,
};
use levyglass::dynamics::{Engine, EngineKind};
use levyglass::hamiltonian::Constraint;
use levyglass::rng::{random_spins, task_rng};
use levyglass::stats::{tv_plugin, Histogram};
use levyglass::wells::{
    simulate_two_state, timescale_index, two_state_rates, RateMode, WellDecomposition, WellLabel,
    WindowCase,
};
use levyglass::yprocess::{self, YRateMode};

fn planted_with_bg(
    n: usize,
    big: &[(usize, usize, f64)],
    bg: (f64, f64),
    bg_seed: u64,
) -> CouplingMatrix {
    let exclude: Vec<Edge> = big.iter().map(|&(i, j, _)| Edge::new(i, j)).collect();
    let mut edges = uniform_background_edges(n, &exclude, bg.0, bg.1, bg_seed);
    edges.extend(big.iter().map(|&(i, j, value)| PlantedEdge {
        edge: Edge::new(i, j),
        value,
    }));
    sample_matrix(&CouplingLaw::planted(n, edges).unwrap(), 0)
}

fn surrogate_regime(n: usize, beta: f64, threshold: f64) -> RegimeParams {
    RegimeParams::new(beta, threshold * 2.0 * beta / n as f64, 1.0, 0.5, n).unwrap()
}

#[test]
fn case_one_critical_coordinate_matches_two_state_chain() {
    // single planted bond with 2 beta |J| = 8; observe at t = e^8, the
    // center of its resonance window, and compare the law of the critical
    // skeleton coordinate against the two-state chain M started in +
    let beta = 1.0;
    let m = planted_with_bg(7, &[(0, 1, 4.0)], (0.02, 0.12), 9);
    let decomp = WellDecomposition::new(&m, surrogate_regime(7, beta, 3.2)).unwrap();
    assert_eq!(decomp.k(), 1);

    let delta = (-3.0f64).exp();
    let t = (2.0 * beta * 4.0f64).exp();
    let idx = timescale_index(&decomp, t.ln(), delta).unwrap();
    assert_eq!(idx.l, 1);
    assert_eq!(idx.case, WindowCase::Resonance);

    let chain = two_state_rates(&m, beta, &decomp, 1, &[], &RateMode::exact()).unwrap();
    let table = levyglass::wells::well_gibbs(&m, beta, &decomp, &[1]).unwrap();

    let runs = 3000;
    let dyn_states: Vec<usize> = levyglass::par_map(runs, |i| {
        let mut rng = task_rng(71, i as u64);
        let x0 = table.sample(&mut rng);
        let mut engine = Engine::new(&m, beta, x0, EngineKind::RejectionFree, &[], 0.0);
        engine.advance(t, &mut rng, false, |_, _, _, _| true);
        match decomp.skeleton(&m, engine.spins()) {
            WellLabel::Label(l) => (l[0] == 1) as usize,
            WellLabel::Transit => 2,
        }
    });
    let m_states: Vec<usize> = (0..runs)
        .map(|i| (simulate_two_state(&chain, 1, t, 5000 + i as u64) == 1) as usize)
        .collect();
    // transit is rare on-window; fold it out and compare the +/- marginals
    let transit = dyn_states.iter().filter(|&&s| s == 2).count();
    assert!(transit < runs / 50, "transit count {transit}");
    let hd = Histogram::from_labels(2, dyn_states.into_iter().filter(|&s| s < 2));
    let hm = Histogram::from_labels(2, m_states.into_iter());
    let tv = tv_plugin(&hd, &hm, 300, 4);
    assert!(
        tv.estimate < 0.1,
        "critical-coordinate TV {} (floor {})",
        tv.estimate,
        tv.bias
    );
}

#[test]
fn burn_in_skeleton_is_uniform_over_satisfying_assignments() {
    // from uniform starts, once every big bond has aligned, the skeleton is
    // uniform over the 2^K labels
    let beta = 1.0;
    let m = planted_with_bg(8, &[(0, 1, 6.0), (2, 3, 5.0)], (0.02, 0.15), 0);
    let decomp = WellDecomposition::new(&m, surrogate_regime(8, beta, 4.8)).unwrap();
    let runs = 4000;
    let labels: Vec<usize> = levyglass::par_map(runs, |i| {
        let mut rng = task_rng(72, i as u64);
        let x0 = random_spins(&mut rng, 8);
        let mut engine = Engine::new(&m, beta, x0, EngineKind::RejectionFree, &[], 0.0);
        engine.advance(30.0, &mut rng, false, |_, _, _, _| true);
        decomp.skeleton(&m, engine.spins()).index().unwrap_or(4)
    });
    let transit = labels.iter().filter(|&&l| l == 4).count();
    assert!(transit < runs / 100, "transit count {transit}");
    let hist = Histogram::from_labels(4, labels.into_iter().filter(|&l| l < 4));
    let tv = levyglass::stats::tv_exact(&hist.probabilities(), &[0.25; 4]);
    assert!(tv < 0.05, "skeleton TV to uniform {tv}");
}

#[test]
fn engine_equivalence_multiple_betas() {
    let m = planted_with_bg(5, &[(0, 1, 1.2)], (0.05, 0.4), 21);
    for (pass, beta) in [(0u64, 0.4), (1, 1.5)] {
        let runs = 20_000;
        let mut hists = Vec::new();
        for (engine_id, kind) in [(0u64, EngineKind::Naive), (1, EngineKind::RejectionFree)] {
            let masks: Vec<usize> = levyglass::par_map(runs, |i| {
                let mut rng = task_rng(73 ^ (pass << 8) ^ (engine_id << 16), i as u64);
                let x0 = random_spins(&mut rng, 5);
                let mut engine = Engine::new(&m, beta, x0, kind, &[], 0.0);
                engine.advance(2.0, &mut rng, false, |_, _, _, _| true);
                engine
                    .spins()
                    .iter()
                    .enumerate()
                    .fold(0usize, |acc, (v, &s)| acc | (((s == 1) as usize) << v))
            });
            hists.push(Histogram::from_labels(32, masks));
        }
        let tv = tv_plugin(&hists[0], &hists[1], 300, 6);
        assert!(
            tv.estimate < tv.bias + 0.015,
            "beta {beta}: TV {} floor {}",
            tv.estimate,
            tv.bias
        );
    }
}

#[test]
fn restricted_y_occupies_conditioned_stationary_law() {
    // freeze the top coordinate of a K = 2 instance: long-run occupancy of
    // the restricted process matches the stationary law conditioned on it
    let beta = 0.9;
    let m = planted_with_bg(8, &[(0, 1, 4.5), (2, 3, 3.8)], (0.02, 0.2), 7);
    let decomp = WellDecomposition::new(&m, surrogate_regime(8, beta, 3.0)).unwrap();
    assert_eq!(decomp.k(), 2);
    let pi = yprocess::stationary_y(&m, beta, &decomp, 26).unwrap();

    // condition on coordinate 1 = +1 (label bit 0 set)
    let cond: Vec<f64> = {
        let total: f64 = pi[0b01] + pi[0b11];
        vec![pi[0b01] / total, pi[0b11] / total]
    };
    let runs = 4000;
    // long horizon in s-units so the free coordinate forgets y0
    let rate_free = (decomp.regime().log_t_scale
        + yprocess::y_rate(&m, beta, &decomp, 2, &[1, 1], &YRateMode::exact()).unwrap())
    .exp();
    let duration = 20.0 / rate_free;
    let states: Vec<usize> = levyglass::par_map(runs, |i| {
        let mut eval = yprocess::RateEvaluator::new(&m, beta, &decomp, YRateMode::exact());
        let mut rng = task_rng(74, i as u64);
        let y0 = vec![1, levyglass::rng::random_spin(&mut rng)];
        let traj =
            yprocess::simulate_y_restricted(&mut eval, y0, duration, 1, 900 + i as u64).unwrap();
        let y = traj.state_at(duration).unwrap();
        assert_eq!(y[0], 1, "frozen coordinate changed");
        (y[1] == 1) as usize
    });
    let hist = Histogram::from_labels(2, states.into_iter());
    let chi2 = levyglass::stats::chi2_gof(&hist, &cond);
    assert!(chi2.p_value > 0.005, "occupancy chi2 p {}", chi2.p_value);
}

#[test]
fn y_occupancy_matches_stationary_unrestricted() {
    let beta = 0.8;
    let m = planted_with_bg(8, &[(0, 1, 4.0), (2, 3, 3.5)], (0.02, 0.2), 13);
    let decomp = WellDecomposition::new(&m, surrogate_regime(8, beta, 3.0)).unwrap();
    let pi = yprocess::stationary_y(&m, beta, &decomp, 26).unwrap();
    let slowest = (decomp.regime().log_t_scale
        + yprocess::y_rate(&m, beta, &decomp, 1, &[1, 1], &YRateMode::exact()).unwrap())
    .exp();
    let duration = 25.0 / slowest;
    let runs = 4000;
    let states: Vec<usize> = levyglass::par_map(runs, |i| {
        let mut eval = yprocess::RateEvaluator::new(&m, beta, &decomp, YRateMode::exact());
        let mut rng = task_rng(75, i as u64);
        let y0: Vec<i8> = (0..2).map(|_| levyglass::rng::random_spin(&mut rng)).collect();
        let traj = yprocess::simulate_y(&mut eval, y0, duration, 1700 + i as u64).unwrap();
        WellLabel::Label(traj.state_at(duration).unwrap())
            .index()
            .unwrap()
    });
    let hist = Histogram::from_labels(4, states.into_iter());
    let chi2 = levyglass::stats::chi2_gof(&hist, &pi);
    assert!(chi2.p_value > 0.005, "occupancy chi2 p {}", chi2.p_value);
}

#[test]
fn high_temp_rate_simplification_trend() {
    // below beta_0 the Y rate approaches the bare 2 e^{-2 beta |J_(l)|} as
    // the conditioning weakens; the log-ratio shrinks with the background
    let beta = 0.1;
    let mut prev = f64::INFINITY;
    for (bg_hi, seed) in [(0.4, 31u64), (0.1, 32), (0.02, 33)] {
        let m = planted_with_bg(8, &[(0, 1, 5.0)], (0.0, bg_hi), seed);
        let decomp = WellDecomposition::new(&m, surrogate_regime(8, beta, 4.0)).unwrap();
        let lz = yprocess::y_rate(&m, beta, &decomp, 1, &[1], &YRateMode::exact()).unwrap();
        let bare = (2.0f64).ln() - 2.0 * beta * 5.0;
        let gap = (lz - bare).abs();
        assert!(gap < prev + 1e-12, "ratio trend broken at bg {bg_hi}: {gap} vs {prev}");
        prev = gap;
    }
    assert!(prev < 0.01, "decoupled limit not reached: {prev}");
}
