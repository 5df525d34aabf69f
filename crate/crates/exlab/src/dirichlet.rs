//! Generators and Dirichlet energies for the exclusion (full-space and
//! per-sector), interchange, and boundary-driven processes; gradients, the
//! sector decomposition, and energies along a reduction sequence.

use serde::Serialize;

use crate::error::{ExlabError, Result};
use crate::graph::WeightedGraph;
use crate::network::{effective_resistance, Network};
use crate::states::{
    lift_function, sector_mass, FullSpace, Measure, PermSpace, SectorSpace, StateFunction,
    StateSpace,
};

/// Which process a generator drives.
#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorKind {
    /// Exclusion on the full space {0,1}^V.
    ExclusionFull,
    /// Exclusion restricted to the k-particle sector.
    ExclusionSector(usize),
    /// Interchange process on permutations.
    Interchange,
    /// Exclusion plus reservoir flips at boundary vertices:
    /// (vertex, lambda_plus, lambda_minus).
    Boundary(Vec<(usize, f64, f64)>),
}

/// Pointwise gradient along the swap involution:
/// (grad_xy f)(s) = f(s^{xy}) - f(s).
pub fn gradient_xy<S: StateSpace>(
    space: &S,
    f: &StateFunction,
    x: usize,
    y: usize,
) -> Result<StateFunction> {
    f.check_space(space)?;
    let values = (0..space.size())
        .map(|idx| f[space.swap_index(idx, x, y)] - f[idx])
        .collect();
    Ok(StateFunction(values))
}

fn bulk_generator<S: StateSpace>(space: &S, g: &WeightedGraph, f: &StateFunction) -> Vec<f64> {
    let mut out = vec![0.0; space.size()];
    for &(x, y, c) in g.edges() {
        for idx in 0..space.size() {
            out[idx] += c * (f[space.swap_index(idx, x, y)] - f[idx]);
        }
    }
    out
}

/// Apply a generator to a state function.
///
/// The sector and interchange kinds take `f` on their own space; the boundary
/// kind takes `f` on the full space.
pub fn apply_generator(
    kind: &GeneratorKind,
    g: &WeightedGraph,
    f: &StateFunction,
) -> Result<StateFunction> {
    match kind {
        GeneratorKind::ExclusionFull => {
            let space = FullSpace::new(g.n())?;
            f.check_space(&space)?;
            Ok(StateFunction(bulk_generator(&space, g, f)))
        }
        GeneratorKind::ExclusionSector(k) => {
            let space = SectorSpace::new(g.n(), *k)?;
            f.check_space(&space)?;
            Ok(StateFunction(bulk_generator(&space, g, f)))
        }
        GeneratorKind::Interchange => {
            let space = PermSpace::new(g.n())?;
            f.check_space(&space)?;
            Ok(StateFunction(bulk_generator(&space, g, f)))
        }
        GeneratorKind::Boundary(rates) => {
            let space = FullSpace::new(g.n())?;
            f.check_space(&space)?;
            let mut out = bulk_generator(&space, g, f);
            for &(a, lambda_plus, lambda_minus) in rates {
                if a >= g.n() {
                    return Err(ExlabError::VertexOutOfRange { v: a, n: g.n() });
                }
                for idx in 0..space.size() {
                    let cfg = space.config(idx);
                    let rate = if cfg.occupied(a) { lambda_minus } else { lambda_plus };
                    let flipped = space.index(cfg.flip(a));
                    out[idx] += rate * (f[flipped] - f[idx]);
                }
            }
            Ok(StateFunction(out))
        }
    }
}

/// Dirichlet energy (1/2) sum_{xy in E} c_xy mu[(grad_xy f)^2], computed over
/// the edges of an arbitrary labelled network so it also serves reduced
/// graphs.
pub fn energy_over_network<S: StateSpace>(
    space: &S,
    net: &Network,
    mu: &Measure,
    f: &StateFunction,
) -> Result<f64> {
    f.check_space(space)?;
    if mu.len() != space.size() {
        return Err(ExlabError::SpaceMismatch { expected: space.size(), got: mu.len() });
    }
    let mut total = 0.0;
    for (x, y, c) in net.edges() {
        let sq = mu.integrate(|idx| {
            let d = f[space.swap_index(idx, x, y)] - f[idx];
            d * d
        });
        total += 0.5 * c * sq;
    }
    Ok(total)
}

/// Dirichlet energy on a graph.
pub fn energy<S: StateSpace>(
    space: &S,
    g: &WeightedGraph,
    mu: &Measure,
    f: &StateFunction,
) -> Result<f64> {
    energy_over_network(space, &Network::from_graph(g), mu, f)
}

/// Energy via the generator route mu[f (-Lf)]; used to cross-check the edge
/// sum.
pub fn energy_via_generator(
    kind: &GeneratorKind,
    g: &WeightedGraph,
    mu: &Measure,
    f: &StateFunction,
) -> Result<f64> {
    let lf = apply_generator(kind, g, f)?;
    Ok(mu.integrate(|idx| -f[idx] * lf[idx]))
}

/// Restriction of a full-space function to the k-particle sector. Because
/// sectors partition {0,1}^V, restriction is the orthogonal projection.
pub fn project_sector(f: &StateFunction, n: usize, k: usize) -> Result<StateFunction> {
    let full = FullSpace::new(n)?;
    f.check_space(&full)?;
    let sector = SectorSpace::new(n, k)?;
    let values = (0..sector.size()).map(|i| f[full.index(sector.config(i))]).collect();
    Ok(StateFunction(values))
}

/// Reassemble a full-space function from its sector restrictions.
pub fn assemble_sectors(parts: &[StateFunction], n: usize) -> Result<StateFunction> {
    let full = FullSpace::new(n)?;
    let mut values = vec![0.0; full.size()];
    for (k, part) in parts.iter().enumerate() {
        let sector = SectorSpace::new(n, k)?;
        part.check_space(&sector)?;
        for i in 0..sector.size() {
            values[full.index(sector.config(i))] = part[i];
        }
    }
    Ok(StateFunction(values))
}

/// One sector's contribution to the energy decomposition.
#[derive(Debug, Clone, Serialize)]
pub struct SectorTerm {
    pub k: usize,
    pub mass: f64,
    pub energy: f64,
    /// Same sector energy evaluated through the lifted interchange process.
    pub lifted_energy: f64,
}

/// The three routes of the sector decomposition:
/// E^EX_{nu_alpha}(f) = sum_k mass_k E^EX_k(f_k) = sum_k mass_k E^IP(f_k o pi_k).
#[derive(Debug, Clone, Serialize)]
pub struct EnergyDecomposition {
    pub alpha: f64,
    pub total: f64,
    pub sectors: Vec<SectorTerm>,
    pub sector_sum: f64,
    pub lifted_sum: f64,
}

impl EnergyDecomposition {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).unwrap()
    }
}

pub fn decompose_energy(
    g: &WeightedGraph,
    alpha: f64,
    f: &StateFunction,
) -> Result<EnergyDecomposition> {
    let n = g.n();
    let full = FullSpace::new(n)?;
    let nu_alpha = Measure::bernoulli(&full, alpha)?;
    let total = energy(&full, g, &nu_alpha, f)?;
    let perms = PermSpace::new(n)?;
    let nu = Measure::uniform(perms.size());
    let mut sectors = Vec::with_capacity(n + 1);
    let mut sector_sum = 0.0;
    let mut lifted_sum = 0.0;
    for k in 0..=n {
        let space = SectorSpace::new(n, k)?;
        let nu_k = Measure::uniform(space.size());
        let fk = project_sector(f, n, k)?;
        let e_k = energy(&space, g, &nu_k, &fk)?;
        let lifted = lift_function(&fk, &space, &perms)?;
        let e_ip = energy(&perms, g, &nu, &lifted)?;
        let mass = sector_mass(n, k, alpha);
        sector_sum += mass * e_k;
        lifted_sum += mass * e_ip;
        sectors.push(SectorTerm { k, mass, energy: e_k, lifted_energy: e_ip });
    }
    Ok(EnergyDecomposition { alpha, total, sectors, sector_sum, lifted_sum })
}

/// Which measure/space a reduction energy chain runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainKind {
    ExclusionFull,
    ExclusionSector(usize),
    Interchange,
}

/// Energies E_{(G_i, c_i)}(f) along the reduction sequence removing all of
/// V \ {x, y} in ascending order. The function stays on the original state
/// space; only the surviving edges and their conductances change.
pub fn reduced_energy_chain(
    g: &WeightedGraph,
    x: usize,
    y: usize,
    kind: ChainKind,
    alpha: f64,
    f: &StateFunction,
) -> Result<Vec<f64>> {
    let (_, trace) = effective_resistance(g, x, y)?;
    let mut nets: Vec<&Network> = vec![&trace.initial];
    nets.extend(trace.steps.iter().map(|s| &s.network));
    let n = g.n();
    match kind {
        ChainKind::ExclusionFull => {
            let space = FullSpace::new(n)?;
            let mu = Measure::bernoulli(&space, alpha)?;
            nets.iter().map(|net| energy_over_network(&space, net, &mu, f)).collect()
        }
        ChainKind::ExclusionSector(k) => {
            let space = SectorSpace::new(n, k)?;
            let mu = Measure::uniform(space.size());
            nets.iter().map(|net| energy_over_network(&space, net, &mu, f)).collect()
        }
        ChainKind::Interchange => {
            let space = PermSpace::new(n)?;
            let mu = Measure::uniform(space.size());
            nets.iter().map(|net| energy_over_network(&space, net, &mu, f)).collect()
        }
    }
}
