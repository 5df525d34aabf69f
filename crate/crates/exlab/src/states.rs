//! Configuration spaces for the three processes: the full exclusion space
//! {0,1}^V, k-particle sectors, and permutations (interchange), together with
//! indexing bijections, swap actions, the contraction pi_k, and reference
//! measures.
//!
//! Vertices and particles are 0-based internally; the 1..n labelling used in
//! pen-and-paper arguments maps to 0..n-1 by subtracting one.

use serde::{Deserialize, Serialize};

use crate::error::{ExlabError, Result};

/// Full exclusion spaces are capped at 2^22 states.
pub const FULL_SPACE_MAX_N: usize = 22;
/// Sector and permutation spaces are capped here; every verification is
/// exhaustive by design.
pub const SPACE_CAP: u128 = 50_000_000;

/// Occupancy bit-vector over the vertex set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ExclusionConfig {
    pub bits: u32,
    pub n: usize,
}

impl ExclusionConfig {
    pub fn empty(n: usize) -> Self {
        ExclusionConfig { bits: 0, n }
    }

    pub fn from_occupied(n: usize, occupied: &[usize]) -> Self {
        let mut bits = 0u32;
        for &v in occupied {
            bits |= 1 << v;
        }
        ExclusionConfig { bits, n }
    }

    pub fn occupied(&self, x: usize) -> bool {
        self.bits >> x & 1 == 1
    }

    pub fn count(&self) -> usize {
        self.bits.count_ones() as usize
    }

    /// Exchange the occupancies at x and y.
    pub fn swap(&self, x: usize, y: usize) -> Self {
        let bx = self.bits >> x & 1;
        let by = self.bits >> y & 1;
        let mut bits = self.bits & !(1 << x) & !(1 << y);
        bits |= by << x | bx << y;
        ExclusionConfig { bits, n: self.n }
    }

    /// Flip the occupancy at a (boundary reservoir action).
    pub fn flip(&self, a: usize) -> Self {
        ExclusionConfig { bits: self.bits ^ (1 << a), n: self.n }
    }
}

/// A permutation in one-line notation over vertices: `at[v]` is the particle
/// occupying vertex v.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation(pub Vec<usize>);

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation((0..n).collect())
    }

    /// Compose with the transposition of vertices x and y: the particles at
    /// x and y exchange places.
    pub fn transpose(&self, x: usize, y: usize) -> Self {
        let mut next = self.0.clone();
        next.swap(x, y);
        Permutation(next)
    }

    /// The contraction pi_k: the set of vertices occupied by particles 0..k-1.
    pub fn project(&self, k: usize) -> ExclusionConfig {
        let n = self.0.len();
        let mut bits = 0u32;
        for (v, &p) in self.0.iter().enumerate() {
            if p < k {
                bits |= 1 << v;
            }
        }
        ExclusionConfig { bits, n }
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// Common interface of the three enumerated configuration spaces.
pub trait StateSpace {
    fn size(&self) -> usize;
    fn vertex_count(&self) -> usize;
    /// Index of the state reached by exchanging the contents of x and y.
    fn swap_index(&self, idx: usize, x: usize, y: usize) -> usize;
}

/// Precomputed swap action as an index permutation (for hot loops).
pub fn swap_table<S: StateSpace>(space: &S, x: usize, y: usize) -> Vec<usize> {
    (0..space.size()).map(|i| space.swap_index(i, x, y)).collect()
}

/// {0,1}^V indexed by the occupancy bits themselves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FullSpace {
    n: usize,
}

impl FullSpace {
    pub fn new(n: usize) -> Result<Self> {
        if n > FULL_SPACE_MAX_N {
            return Err(ExlabError::StateSpaceTooLarge { size: 1u128 << n, cap: 1 << FULL_SPACE_MAX_N });
        }
        Ok(FullSpace { n })
    }

    pub fn config(&self, idx: usize) -> ExclusionConfig {
        ExclusionConfig { bits: idx as u32, n: self.n }
    }

    pub fn index(&self, cfg: ExclusionConfig) -> usize {
        cfg.bits as usize
    }
}

impl StateSpace for FullSpace {
    fn size(&self) -> usize {
        1 << self.n
    }
    fn vertex_count(&self) -> usize {
        self.n
    }
    fn swap_index(&self, idx: usize, x: usize, y: usize) -> usize {
        self.index(self.config(idx).swap(x, y))
    }
}

/// k-subsets of V in combinatorial-number-system order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SectorSpace {
    n: usize,
    k: usize,
    size: usize,
}

impl SectorSpace {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if k > n {
            return Err(ExlabError::InvalidInput(format!("sector k={k} exceeds n={n}")));
        }
        let size = binomial(n, k);
        if size > SPACE_CAP {
            return Err(ExlabError::StateSpaceTooLarge { size, cap: SPACE_CAP });
        }
        Ok(SectorSpace { n, k, size: size as usize })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Rank of a k-subset: sum of C(c_i, i+1) over sorted members c_0 < c_1 < ...
    pub fn index(&self, cfg: ExclusionConfig) -> usize {
        debug_assert_eq!(cfg.count(), self.k);
        let mut rank: u128 = 0;
        let mut i = 0;
        for v in 0..self.n {
            if cfg.occupied(v) {
                rank += binomial(v, i + 1);
                i += 1;
            }
        }
        rank as usize
    }

    pub fn config(&self, idx: usize) -> ExclusionConfig {
        let mut rank = idx as u128;
        let mut bits = 0u32;
        let mut pick = self.k;
        let mut v = self.n;
        while pick > 0 {
            v -= 1;
            let b = binomial(v, pick);
            if rank >= b {
                rank -= b;
                bits |= 1 << v;
                pick -= 1;
            }
        }
        ExclusionConfig { bits, n: self.n }
    }
}

impl StateSpace for SectorSpace {
    fn size(&self) -> usize {
        self.size
    }
    fn vertex_count(&self) -> usize {
        self.n
    }
    fn swap_index(&self, idx: usize, x: usize, y: usize) -> usize {
        self.index(self.config(idx).swap(x, y))
    }
}

/// Permutations of n labels, ranked by the Lehmer code (factorial number
/// system).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PermSpace {
    n: usize,
    size: usize,
}

impl PermSpace {
    pub fn new(n: usize) -> Result<Self> {
        let size = factorial(n);
        if size > SPACE_CAP {
            return Err(ExlabError::StateSpaceTooLarge { size, cap: SPACE_CAP });
        }
        Ok(PermSpace { n, size: size as usize })
    }

    pub fn index(&self, perm: &Permutation) -> usize {
        let n = self.n;
        let mut rank = 0usize;
        let mut seen = vec![false; n];
        for i in 0..n {
            let smaller = (0..perm.0[i]).filter(|&j| !seen[j]).count();
            rank = rank * (n - i) + smaller;
            seen[perm.0[i]] = true;
        }
        rank
    }

    pub fn perm(&self, idx: usize) -> Permutation {
        let n = self.n;
        let mut digits = vec![0usize; n];
        let mut rem = idx;
        for i in (0..n).rev() {
            let base = n - i;
            digits[i] = rem % base;
            rem /= base;
        }
        let mut available: Vec<usize> = (0..n).collect();
        let mut out = Vec::with_capacity(n);
        for &d in &digits {
            out.push(available.remove(d));
        }
        Permutation(out)
    }
}

impl StateSpace for PermSpace {
    fn size(&self) -> usize {
        self.size
    }
    fn vertex_count(&self) -> usize {
        self.n
    }
    fn swap_index(&self, idx: usize, x: usize, y: usize) -> usize {
        self.index(&self.perm(idx).transpose(x, y))
    }
}

/// A real vector indexed by a state space, with flat-binary and JSON
/// serialization for small spaces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFunction(pub Vec<f64>);

impl StateFunction {
    pub fn constant(size: usize, value: f64) -> Self {
        StateFunction(vec![value; size])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn check_space<S: StateSpace>(&self, space: &S) -> Result<()> {
        if self.0.len() != space.size() {
            return Err(ExlabError::SpaceMismatch { expected: space.size(), got: self.0.len() });
        }
        Ok(())
    }

    /// Little-endian 8-byte reals with a u64 length prefix.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + 8 * self.0.len());
        out.extend_from_slice(&(self.0.len() as u64).to_le_bytes());
        for v in &self.0 {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 8 {
            return Err(ExlabError::InvalidInput("truncated state function".into()));
        }
        let len = u64::from_le_bytes(bytes[..8].try_into().unwrap()) as usize;
        if bytes.len() != 8 + 8 * len {
            return Err(ExlabError::InvalidInput("state function length mismatch".into()));
        }
        let values = bytes[8..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(StateFunction(values))
    }
}

impl std::ops::Index<usize> for StateFunction {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Probability weights over an enumerated space. Log-weights are kept
/// alongside so extreme densities stay representable; integrals use
/// compensated summation.
#[derive(Debug, Clone)]
pub struct Measure {
    weights: Vec<f64>,
    log_weights: Vec<f64>,
}

impl Measure {
    pub fn uniform(size: usize) -> Self {
        let w = 1.0 / size as f64;
        Measure { weights: vec![w; size], log_weights: vec![-(size as f64).ln(); size] }
    }

    /// Product Bernoulli measure with marginal alpha on the full space.
    pub fn bernoulli(space: &FullSpace, alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(ExlabError::InvalidInput(format!("alpha={alpha} outside [0,1]")));
        }
        let n = space.vertex_count();
        let mut weights = Vec::with_capacity(space.size());
        let mut log_weights = Vec::with_capacity(space.size());
        for idx in 0..space.size() {
            let k = space.config(idx).count();
            weights.push(alpha.powi(k as i32) * (1.0 - alpha).powi((n - k) as i32));
            let lo = if k > 0 { k as f64 * alpha.ln() } else { 0.0 };
            let lv = if n - k > 0 { (n - k) as f64 * (1.0 - alpha).ln() } else { 0.0 };
            log_weights.push(lo + lv);
        }
        Ok(Measure { weights, log_weights })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weight(&self, idx: usize) -> f64 {
        self.weights[idx]
    }

    pub fn log_weight(&self, idx: usize) -> f64 {
        self.log_weights[idx]
    }

    /// Compensated (Kahan) integral of h against this measure.
    pub fn integrate<F: Fn(usize) -> f64>(&self, h: F) -> f64 {
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for (idx, &w) in self.weights.iter().enumerate() {
            let term = w * h(idx) - comp;
            let t = sum + term;
            comp = (t - sum) - term;
            sum = t;
        }
        sum
    }

    pub fn integrate_fn(&self, f: &StateFunction) -> f64 {
        self.integrate(|i| f[i])
    }
}

/// Total Bernoulli mass of sector k: C(n,k) alpha^k (1-alpha)^(n-k).
pub fn sector_mass(n: usize, k: usize, alpha: f64) -> f64 {
    binomial(n, k) as f64 * alpha.powi(k as i32) * (1.0 - alpha).powi((n - k) as i32)
}

/// Lift a sector function through pi_k to the permutation space.
pub fn lift_function(
    f: &StateFunction,
    sector: &SectorSpace,
    perms: &PermSpace,
) -> Result<StateFunction> {
    f.check_space(sector)?;
    if sector.vertex_count() != perms.vertex_count() {
        return Err(ExlabError::SpaceMismatch {
            expected: sector.vertex_count(),
            got: perms.vertex_count(),
        });
    }
    let k = sector.k();
    let values = (0..perms.size())
        .map(|idx| f[sector.index(perms.perm(idx).project(k))])
        .collect();
    Ok(StateFunction(values))
}

pub fn binomial_u128(n: usize, k: usize) -> u128 {
    binomial(n, k)
}

pub fn factorial_u128(n: usize) -> u128 {
    factorial(n)
}
