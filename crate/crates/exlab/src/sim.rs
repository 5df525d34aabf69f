//! Continuous-time simulation of the (boundary-driven) exclusion process by
//! the next-reaction method, plus empirical statistics: block averages,
//! local-function time averages with exact event-driven integration, and
//! stationarity diagnostics.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{ExlabError, Result};
use crate::graph::WeightedGraph;
use crate::states::{ExclusionConfig, FullSpace, StateSpace};

/// Initial distribution of the occupancy field.
#[derive(Debug, Clone)]
pub enum InitialLaw {
    /// Product Bernoulli(alpha), sampled from the seed's dedicated stream.
    Bernoulli(f64),
    Explicit(ExclusionConfig),
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub graph: WeightedGraph,
    pub initial: InitialLaw,
    /// Time horizon T.
    pub t_max: f64,
    /// Multiplies every edge rate (boundary rates are not accelerated).
    pub accel: f64,
    /// (vertex, birth rate lambda_plus, death rate lambda_minus).
    pub boundary: Vec<(usize, f64, f64)>,
    pub seed: u64,
    /// Snapshot interval; None records only the initial configuration.
    pub record_every: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum EventKind {
    Swap(usize, usize),
    Flip(usize),
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub initial: ExclusionConfig,
    pub events: Vec<Event>,
    pub snapshots: Vec<(f64, ExclusionConfig)>,
    pub t_max: f64,
}

impl Trajectory {
    /// Exact integral over [0, t_max] of a piecewise-constant observable of
    /// the configuration.
    pub fn integrate<F: FnMut(&ExclusionConfig) -> f64>(&self, mut obs: F) -> f64 {
        let mut cfg = self.initial;
        let mut last = 0.0;
        let mut total = 0.0;
        for ev in &self.events {
            total += obs(&cfg) * (ev.time - last);
            cfg = apply_event(cfg, ev.kind);
            last = ev.time;
        }
        total + obs(&cfg) * (self.t_max - last)
    }

    /// Configuration at time t (the state after every event at time <= t).
    pub fn state_at(&self, t: f64) -> ExclusionConfig {
        let mut cfg = self.initial;
        for ev in &self.events {
            if ev.time > t {
                break;
            }
            cfg = apply_event(cfg, ev.kind);
        }
        cfg
    }

    pub fn final_state(&self) -> ExclusionConfig {
        self.state_at(self.t_max)
    }

    /// CSV export: time, event type, first site, second site (blank for flips).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time,kind,a,b\n");
        for ev in &self.events {
            match ev.kind {
                EventKind::Swap(x, y) => {
                    out.push_str(&format!("{:.12e},swap,{x},{y}\n", ev.time))
                }
                EventKind::Flip(a) => out.push_str(&format!("{:.12e},flip,{a},\n", ev.time)),
            }
        }
        out
    }
}

fn apply_event(cfg: ExclusionConfig, kind: EventKind) -> ExclusionConfig {
    match kind {
        EventKind::Swap(x, y) => cfg.swap(x, y),
        EventKind::Flip(a) => cfg.flip(a),
    }
}

struct HeapEntry {
    time: f64,
    source: usize,
    version: u64,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    // Reversed: BinaryHeap is a max-heap and we want the earliest time.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.source.cmp(&self.source))
    }
}

/// Run one trajectory. Exact in law: every source (edge or boundary vertex)
/// carries an exponential clock at its current rate, resampled from the
/// source's own ChaCha stream whenever a neighboring event changes that rate.
/// Unproductive edges (equal occupancies) are never scheduled.
pub fn simulate(cfg: &SimConfig) -> Result<Trajectory> {
    let g = &cfg.graph;
    let n = g.n();
    if !(cfg.t_max > 0.0) {
        return Err(ExlabError::InvalidInput("t_max must be positive".into()));
    }
    if !(cfg.accel > 0.0) {
        return Err(ExlabError::InvalidInput("accel must be positive".into()));
    }
    for &(a, lp, lm) in &cfg.boundary {
        if a >= n {
            return Err(ExlabError::VertexOutOfRange { v: a, n });
        }
        if !(lp >= 0.0 && lm >= 0.0 && lp.is_finite() && lm.is_finite()) {
            return Err(ExlabError::InvalidInput("boundary rates must be finite and nonnegative".into()));
        }
    }

    let mut init_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    init_rng.set_stream(0);
    let mut state = match &cfg.initial {
        InitialLaw::Explicit(c) => {
            if c.n != n {
                return Err(ExlabError::SpaceMismatch { expected: n, got: c.n });
            }
            *c
        }
        InitialLaw::Bernoulli(alpha) => {
            if !(0.0..=1.0).contains(alpha) {
                return Err(ExlabError::InvalidInput(format!("alpha={alpha} outside [0,1]")));
            }
            let occupied: Vec<usize> =
                (0..n).filter(|_| init_rng.gen_bool(*alpha)).collect();
            ExclusionConfig::from_occupied(n, &occupied)
        }
    };

    let m = g.edges().len();
    let sources = m + cfg.boundary.len();
    // One independent stream per source: reproducible regardless of how the
    // simulation is scheduled.
    let mut rngs: Vec<ChaCha8Rng> = (0..sources)
        .map(|s| {
            let mut r = ChaCha8Rng::seed_from_u64(cfg.seed);
            r.set_stream(1 + s as u64);
            r
        })
        .collect();
    let mut versions = vec![0u64; sources];
    let mut heap = BinaryHeap::new();

    let rate = |state: &ExclusionConfig, source: usize| -> f64 {
        if source < m {
            let (x, y, c) = g.edges()[source];
            if state.occupied(x) != state.occupied(y) {
                cfg.accel * c
            } else {
                0.0
            }
        } else {
            let (a, lp, lm) = cfg.boundary[source - m];
            if state.occupied(a) {
                lm
            } else {
                lp
            }
        }
    };

    // Edge sources touching each vertex, for rescheduling after an event.
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (s, &(x, y, _)) in g.edges().iter().enumerate() {
        incident[x].push(s);
        incident[y].push(s);
    }
    for (i, &(a, _, _)) in cfg.boundary.iter().enumerate() {
        incident[a].push(m + i);
    }

    let conservative = cfg.boundary.iter().all(|&(_, lp, lm)| lp == 0.0 && lm == 0.0);
    let particles = state.count();

    macro_rules! schedule {
        ($state:expr, $source:expr, $now:expr) => {{
            let r = rate($state, $source);
            versions[$source] += 1;
            if r > 0.0 {
                let u: f64 = rngs[$source].gen_range(f64::MIN_POSITIVE..1.0);
                heap.push(HeapEntry {
                    time: $now - u.ln() / r,
                    source: $source,
                    version: versions[$source],
                });
            }
        }};
    }

    for s in 0..sources {
        schedule!(&state, s, 0.0);
    }

    let mut events = Vec::new();
    let mut snapshots = vec![(0.0, state)];
    let mut next_record = cfg.record_every.unwrap_or(f64::INFINITY);

    while let Some(entry) = heap.pop() {
        if entry.version != versions[entry.source] {
            continue;
        }
        let t = entry.time;
        if t > cfg.t_max {
            break;
        }
        while next_record <= t && next_record <= cfg.t_max {
            snapshots.push((next_record, state));
            next_record += cfg.record_every.unwrap();
        }
        let kind = if entry.source < m {
            let (x, y, _) = g.edges()[entry.source];
            EventKind::Swap(x, y)
        } else {
            EventKind::Flip(cfg.boundary[entry.source - m].0)
        };
        state = apply_event(state, kind);
        if conservative {
            assert_eq!(state.count(), particles, "conservation violated");
        }
        events.push(Event { time: t, kind });
        let touched: Vec<usize> = match kind {
            EventKind::Swap(x, y) => {
                let mut v = incident[x].clone();
                v.extend_from_slice(&incident[y]);
                v
            }
            EventKind::Flip(a) => incident[a].clone(),
        };
        let mut seen = vec![false; sources];
        for s in touched {
            if !seen[s] {
                seen[s] = true;
                schedule!(&state, s, t);
            }
        }
    }
    while next_record <= cfg.t_max {
        snapshots.push((next_record, state));
        next_record += cfg.record_every.unwrap();
    }

    Ok(Trajectory { initial: snapshots[0].1, events, snapshots, t_max: cfg.t_max })
}

/// A function of a local occupancy patch around a vertex.
pub struct LocalFunctionBundle {
    pub radius: usize,
    /// phi(x, configuration); must only read the ball of the given radius.
    pub eval: Box<dyn Fn(usize, &ExclusionConfig) -> f64 + Sync>,
}

impl LocalFunctionBundle {
    /// Indicator of occupancy at x itself.
    pub fn occupancy() -> Self {
        LocalFunctionBundle { radius: 0, eval: Box::new(|x, cfg| cfg.occupied(x) as u8 as f64) }
    }

    /// Expected value under the Bernoulli(alpha) product measure, by exact
    /// enumeration of occupancy patterns on the patch. Polynomial in alpha.
    pub fn expected(&self, g: &WeightedGraph, x: usize, alpha: f64) -> f64 {
        let ball = g.ball(x, self.radius);
        let b = ball.len();
        assert!(b <= 25, "patch too large for exact enumeration");
        let mut total = 0.0;
        for mask in 0u32..(1 << b) {
            let occupied: Vec<usize> = ball
                .iter()
                .enumerate()
                .filter(|&(i, _)| mask >> i & 1 == 1)
                .map(|(_, &v)| v)
                .collect();
            let cfg = ExclusionConfig::from_occupied(g.n(), &occupied);
            let k = occupied.len() as i32;
            let weight = alpha.powi(k) * (1.0 - alpha).powi(b as i32 - k);
            if weight > 0.0 {
                total += weight * (self.eval)(x, &cfg);
            }
        }
        total
    }
}

/// Block occupation average at the snapshot times:
/// |B(x,r)|^{-1} sum_{z in B} eta_t(z).
pub fn empirical_block_average(
    traj: &Trajectory,
    g: &WeightedGraph,
    x: usize,
    radius: usize,
) -> Vec<(f64, f64)> {
    let ball = g.ball(x, radius);
    let inv = 1.0 / ball.len() as f64;
    traj.snapshots
        .iter()
        .map(|&(t, cfg)| {
            let count: usize = ball.iter().filter(|&&z| cfg.occupied(z)).count();
            (t, count as f64 * inv)
        })
        .collect()
}

/// Time average of U(x, eta) = phi_x(eta) - Phi_x(<eta>_{B(x, avg_radius)}),
/// integrated exactly between events.
pub fn time_average_u(
    traj: &Trajectory,
    g: &WeightedGraph,
    bundle: &LocalFunctionBundle,
    x: usize,
    avg_radius: usize,
) -> f64 {
    // Phi_x is a polynomial of degree <= patch size; precompute coefficients
    // by evaluation at the empirical block densities, which take at most
    // |ball| + 1 values.
    let ball = g.ball(x, avg_radius);
    let b = ball.len();
    let phi_at: Vec<f64> =
        (0..=b).map(|k| bundle.expected(g, x, k as f64 / b as f64)).collect();
    let total = traj.integrate(|cfg| {
        let k = ball.iter().filter(|&&z| cfg.occupied(z)).count();
        (bundle.eval)(x, cfg) - phi_at[k]
    });
    total / traj.t_max
}

#[derive(Debug, Clone, Serialize)]
pub struct ChiSquareOutcome {
    pub statistic: f64,
    pub df: usize,
    pub threshold: f64,
    pub quantile: f64,
    pub pass: bool,
}

/// Pearson chi-square of snapshot configuration counts against a target law
/// on the full space, at the given quantile of the reference distribution.
/// Cells with zero target probability must carry zero observations.
pub fn stationarity_chi_square(
    snapshots: &[ExclusionConfig],
    n: usize,
    target: &[f64],
    quantile: f64,
) -> Result<ChiSquareOutcome> {
    let space = FullSpace::new(n)?;
    if target.len() != space.size() {
        return Err(ExlabError::SpaceMismatch { expected: space.size(), got: target.len() });
    }
    let mut counts = vec![0usize; space.size()];
    for cfg in snapshots {
        counts[space.index(*cfg)] += 1;
    }
    let total = snapshots.len() as f64;
    let mut stat = 0.0;
    let mut df = 0usize;
    for (idx, &p) in target.iter().enumerate() {
        if p == 0.0 {
            if counts[idx] > 0 {
                return Err(ExlabError::InvalidInput(format!(
                    "observed configuration {idx} has zero target probability"
                )));
            }
            continue;
        }
        let expected = total * p;
        let d = counts[idx] as f64 - expected;
        stat += d * d / expected;
        df += 1;
    }
    if df < 2 {
        return Err(ExlabError::InvalidInput("need at least two support cells".into()));
    }
    let dist = ChiSquared::new((df - 1) as f64).expect("df >= 1");
    let threshold = dist.inverse_cdf(quantile);
    Ok(ChiSquareOutcome { statistic: stat, df: df - 1, threshold, quantile, pass: stat <= threshold })
}

/// The uniform measure on the k-particle sector, as a full-space vector.
/// This is nu_alpha conditioned on particle count for any alpha.
pub fn sector_conditioned_law(n: usize, k: usize) -> Result<Vec<f64>> {
    let space = FullSpace::new(n)?;
    let count = crate::states::binomial_u128(n, k) as f64;
    Ok((0..space.size())
        .map(|idx| if space.config(idx).count() == k { 1.0 / count } else { 0.0 })
        .collect())
}

/// Empirical detailed-balance diagnostic: for each unordered pair of
/// configurations linked by an observed event, the larger count of the two
/// directions over the total, maximized over pairs with enough data.
pub fn edge_flux_asymmetry(traj: &Trajectory, n: usize, min_count: usize) -> Result<f64> {
    let space = FullSpace::new(n)?;
    let mut counts: std::collections::HashMap<(usize, usize), (usize, usize)> =
        std::collections::HashMap::new();
    let mut cfg = traj.initial;
    for ev in &traj.events {
        let from = space.index(cfg);
        cfg = apply_event(cfg, ev.kind);
        let to = space.index(cfg);
        if from == to {
            continue;
        }
        let key = (from.min(to), from.max(to));
        let entry = counts.entry(key).or_insert((0, 0));
        if from < to {
            entry.0 += 1;
        } else {
            entry.1 += 1;
        }
    }
    let mut worst = 0.0f64;
    for &(a, b) in counts.values() {
        let total = a + b;
        if total >= min_count {
            let dev = (a as f64 - b as f64).abs() / total as f64;
            worst = worst.max(dev);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::Measure;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;

    fn base_config(g: &WeightedGraph, initial: InitialLaw, t_max: f64, seed: u64) -> SimConfig {
        SimConfig {
            graph: g.clone(),
            initial,
            t_max,
            accel: 1.0,
            boundary: Vec::new(),
            seed,
            record_every: None,
        }
    }

    #[test]
    fn reproducible_and_legal() {
        let g = WeightedGraph::complete(4, 1.0).unwrap();
        let cfg = base_config(&g, InitialLaw::Bernoulli(0.5), 50.0, 42);
        let a = simulate(&cfg).unwrap();
        let b = simulate(&cfg).unwrap();
        assert_eq!(a.events.len(), b.events.len());
        for (x, y) in a.events.iter().zip(&b.events) {
            assert_eq!(x.time, y.time);
            assert_eq!(x.kind, y.kind);
        }
        // Strictly increasing times, legal swaps only.
        let mut state = a.initial;
        let mut last = 0.0;
        for ev in &a.events {
            assert!(ev.time > last);
            last = ev.time;
            if let EventKind::Swap(x, y) = ev.kind {
                assert_ne!(state.occupied(x), state.occupied(y));
            }
            state = apply_event(state, ev.kind);
        }
    }

    #[test]
    fn frozen_configurations() {
        let g = WeightedGraph::complete(4, 1.0).unwrap();
        for occupied in [vec![], vec![0, 1, 2, 3]] {
            let cfg = base_config(
                &g,
                InitialLaw::Explicit(ExclusionConfig::from_occupied(4, &occupied)),
                100.0,
                1,
            );
            assert!(simulate(&cfg).unwrap().events.is_empty());
        }
    }

    #[test]
    fn conservation_without_boundary() {
        let g = WeightedGraph::complete(5, 1.0).unwrap();
        let cfg = base_config(&g, InitialLaw::Bernoulli(0.4), 30.0, 7);
        let traj = simulate(&cfg).unwrap();
        let k = traj.initial.count();
        assert_eq!(traj.final_state().count(), k);
    }

    #[test]
    fn boundary_flips_change_count() {
        let g = WeightedGraph::path(2, 1.0).unwrap();
        let mut cfg = base_config(
            &g,
            InitialLaw::Explicit(ExclusionConfig::empty(3)),
            20.0,
            3,
        );
        cfg.boundary = vec![(0, 1.0, 1.0), (2, 0.5, 2.0)];
        let traj = simulate(&cfg).unwrap();
        assert!(traj.events.iter().any(|e| matches!(e.kind, EventKind::Flip(_))));
    }

    #[test]
    fn single_particle_matches_matrix_exponential() {
        // One particle on a path: occupation law at time t from exp(-tL).
        let g = WeightedGraph::path(2, 1.0).unwrap();
        let n = 3;
        let mut lap = DMatrix::zeros(n, n);
        for &(u, v, c) in g.edges() {
            lap[(u, u)] += c;
            lap[(v, v)] += c;
            lap[(u, v)] -= c;
            lap[(v, u)] -= c;
        }
        let t = 0.7;
        let p = (-lap * t).exp();
        let trials = 4000;
        let mut hits = vec![0usize; n];
        for seed in 0..trials {
            let cfg = base_config(
                &g,
                InitialLaw::Explicit(ExclusionConfig::from_occupied(n, &[0])),
                t,
                seed as u64,
            );
            let pos = (0..n)
                .find(|&v| simulate(&cfg).unwrap().final_state().occupied(v))
                .unwrap();
            hits[pos] += 1;
        }
        for v in 0..n {
            let expect = p[(0, v)];
            let freq = hits[v] as f64 / trials as f64;
            let se = (expect * (1.0 - expect) / trials as f64).sqrt();
            assert!(
                (freq - expect).abs() <= 4.0 * se + 1e-3,
                "v={v} freq={freq} expect={expect}"
            );
        }
    }

    #[test]
    fn block_average_conservation_and_identity() {
        let g = WeightedGraph::complete(4, 1.0).unwrap();
        let mut cfg = base_config(
            &g,
            InitialLaw::Explicit(ExclusionConfig::from_occupied(4, &[0, 2])),
            10.0,
            5,
        );
        cfg.record_every = Some(0.5);
        let traj = simulate(&cfg).unwrap();
        // Radius >= diameter: global density, constant.
        for (_, avg) in empirical_block_average(&traj, &g, 0, 3) {
            assert_relative_eq!(avg, 0.5, epsilon = 1e-12);
        }
        // Radius 0: the occupancy itself.
        let series = empirical_block_average(&traj, &g, 1, 0);
        for (t, avg) in series {
            assert_eq!(avg, traj.state_at(t).occupied(1) as u8 as f64);
        }
    }

    #[test]
    fn bundle_expected_values() {
        let g = WeightedGraph::path(3, 1.0).unwrap();
        let occ = LocalFunctionBundle::occupancy();
        for alpha in [0.0, 0.3, 1.0] {
            assert_relative_eq!(occ.expected(&g, 1, alpha), alpha, epsilon = 1e-12);
        }
        // Product over the edge (1,2): alpha^2.
        let pair = LocalFunctionBundle {
            radius: 1,
            eval: Box::new(|x, cfg| {
                (cfg.occupied(x) && cfg.occupied(x + 1)) as u8 as f64
            }),
        };
        for alpha in [0.2, 0.5, 0.8] {
            assert_relative_eq!(pair.expected(&g, 1, alpha), alpha * alpha, epsilon = 1e-12);
        }
    }

    #[test]
    fn time_average_u_density_fluctuation() {
        // phi_x = eta(x), block = whole graph: U = eta_t(x) - global density;
        // integrating exactly, |time average| <= 1 and is 0 for symmetric
        // frozen cases.
        let g = WeightedGraph::complete(3, 1.0).unwrap();
        let cfg = base_config(
            &g,
            InitialLaw::Explicit(ExclusionConfig::from_occupied(3, &[0])),
            200.0,
            11,
        );
        let traj = simulate(&cfg).unwrap();
        let u = time_average_u(&traj, &g, &LocalFunctionBundle::occupancy(), 0, 2);
        // Single particle on K_3: occupation of each site tends to 1/3, block
        // density is exactly 1/3, so U averages toward 0.
        assert!(u.abs() < 0.1, "u={u}");
    }

    #[test]
    fn stationarity_chi_square_on_sector() {
        let g = WeightedGraph::complete(4, 1.0).unwrap();
        let mut cfg = base_config(
            &g,
            InitialLaw::Explicit(ExclusionConfig::from_occupied(4, &[0, 1])),
            4000.0,
            17,
        );
        cfg.record_every = Some(2.0);
        let traj = simulate(&cfg).unwrap();
        let snaps: Vec<ExclusionConfig> = traj
            .snapshots
            .iter()
            .filter(|&&(t, _)| t >= 100.0)
            .map(|&(_, c)| c)
            .collect();
        let target = sector_conditioned_law(4, 2).unwrap();
        let out = stationarity_chi_square(&snaps, 4, &target, 0.999).unwrap();
        assert_eq!(out.df, 5);
        assert!(out.pass, "chi2={} threshold={}", out.statistic, out.threshold);
    }

    #[test]
    fn chi_square_rejects_wrong_law() {
        let g = WeightedGraph::complete(4, 1.0).unwrap();
        let mut cfg = base_config(
            &g,
            InitialLaw::Explicit(ExclusionConfig::from_occupied(4, &[0, 1])),
            4000.0,
            19,
        );
        cfg.record_every = Some(2.0);
        let traj = simulate(&cfg).unwrap();
        let snaps: Vec<ExclusionConfig> =
            traj.snapshots.iter().map(|&(_, c)| c).collect();
        // Skewed law on the same sector support.
        let space = FullSpace::new(4).unwrap();
        let mut target = vec![0.0; space.size()];
        let support: Vec<usize> =
            (0..space.size()).filter(|&i| space.config(i).count() == 2).collect();
        let mut mass = 0.0;
        for (rank, &idx) in support.iter().enumerate() {
            target[idx] = (rank + 1) as f64;
            mass += target[idx];
        }
        for v in target.iter_mut() {
            *v /= mass;
        }
        let out = stationarity_chi_square(&snaps, 4, &target, 0.999).unwrap();
        assert!(!out.pass);
    }

    #[test]
    fn detailed_balance_flux() {
        let g = WeightedGraph::complete(4, 1.0).unwrap();
        let cfg = base_config(
            &g,
            InitialLaw::Explicit(ExclusionConfig::from_occupied(4, &[0, 1])),
            3000.0,
            23,
        );
        let traj = simulate(&cfg).unwrap();
        let worst = edge_flux_asymmetry(&traj, 4, 200).unwrap();
        assert!(worst < 0.15, "worst asymmetry {worst}");
    }

    #[test]
    fn acceleration_scales_event_count() {
        let g = WeightedGraph::complete(4, 1.0).unwrap();
        let mut slow = base_config(&g, InitialLaw::Explicit(ExclusionConfig::from_occupied(4, &[0, 1])), 500.0, 29);
        let mut fast = slow.clone();
        fast.accel = 5.0;
        slow.t_max = 500.0;
        fast.t_max = 100.0;
        let a = simulate(&slow).unwrap().events.len() as f64;
        let b = simulate(&fast).unwrap().events.len() as f64;
        // Same expected number of events; allow Monte Carlo slack.
        assert!((a / b - 1.0).abs() < 0.15, "a={a} b={b}");
    }

    #[test]
    fn stationary_block_average_near_alpha() {
        let g = WeightedGraph::complete(5, 1.0).unwrap();
        let alpha = 0.6;
        let mut mean = 0.0;
        let trials = 200;
        for seed in 0..trials {
            let cfg = base_config(&g, InitialLaw::Bernoulli(alpha), 20.0, 1000 + seed);
            let traj = simulate(&cfg).unwrap();
            mean += traj.integrate(|c| c.count() as f64 / 5.0) / traj.t_max;
        }
        mean /= trials as f64;
        // SE of the mean of trial densities ~ sqrt(alpha(1-alpha)/5)/sqrt(trials).
        let se = (alpha * (1.0 - alpha) / 5.0_f64).sqrt() / (trials as f64).sqrt();
        assert!((mean - alpha).abs() < 4.0 * se, "mean={mean}");
        // Measure sanity: the Bernoulli law integrates densities to alpha.
        let space = FullSpace::new(5).unwrap();
        let mu = Measure::bernoulli(&space, alpha).unwrap();
        assert_relative_eq!(
            mu.integrate(|i| space.config(i).count() as f64 / 5.0),
            alpha,
            epsilon = 1e-12
        );
    }
}
