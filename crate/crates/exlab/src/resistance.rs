//! Effective resistance via linear algebra (the independent oracle),
//! harmonic extensions, random-walk Dirichlet energy, and the star-removal
//! energy identity.

use nalgebra::DMatrix;

use crate::error::{ExlabError, Result};
use crate::graph::WeightedGraph;
use crate::report::VerificationReport;

/// Hard cap for the dense symmetric factorizations in this module.
pub const DENSE_LIMIT: usize = 2000;

/// A real-valued function on the vertex set.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexFunction(pub Vec<f64>);

impl VertexFunction {
    pub fn constant(n: usize, value: f64) -> Self {
        VertexFunction(vec![value; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl std::ops::Index<usize> for VertexFunction {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Random-walk Dirichlet energy: sum over edges of c_zw [h(z) - h(w)]^2
/// (no 1/2 prefactor; the sum runs over edges, not ordered pairs).
pub fn el_energy(g: &WeightedGraph, h: &VertexFunction) -> f64 {
    g.edges()
        .iter()
        .map(|&(u, v, c)| {
            let d = h[u] - h[v];
            c * d * d
        })
        .sum()
}

fn dense_laplacian(g: &WeightedGraph) -> DMatrix<f64> {
    let n = g.n();
    let mut lap = DMatrix::zeros(n, n);
    for &(u, v, c) in g.edges() {
        lap[(u, u)] += c;
        lap[(v, v)] += c;
        lap[(u, v)] -= c;
        lap[(v, u)] -= c;
    }
    lap
}

fn check_dense_limit(n: usize) -> Result<()> {
    if n > DENSE_LIMIT {
        Err(ExlabError::DenseSolveTooLarge { n, limit: DENSE_LIMIT })
    } else {
        Ok(())
    }
}

/// Effective resistance from the grounded Laplacian: solve L_{-y} v = e_x and
/// read off v(x). Never touches the reduction path.
pub fn effective_resistance_oracle(g: &WeightedGraph, x: usize, y: usize) -> Result<f64> {
    if x == y {
        return Err(ExlabError::SameVertex { v: x });
    }
    check_dense_limit(g.n())?;
    let lap = dense_laplacian(g);
    let grounded = lap.clone().remove_row(y).remove_column(y);
    let chol = grounded.cholesky().ok_or(ExlabError::SingularSystem)?;
    let xi = if x < y { x } else { x - 1 };
    let mut rhs = nalgebra::DVector::zeros(g.n() - 1);
    rhs[xi] = 1.0;
    let sol = chol.solve(&rhs);
    Ok(sol[xi])
}

/// Inverse of the Laplacian grounded at `ground`, for all-pairs resistance
/// queries: R(x, y) = M[x,x] + M[y,y] - 2 M[x,y] with the `ground` row/column
/// treated as zero.
pub struct GroundedInverse {
    ground: usize,
    inv: DMatrix<f64>,
}

impl GroundedInverse {
    pub fn new(g: &WeightedGraph, ground: usize) -> Result<Self> {
        check_dense_limit(g.n())?;
        let lap = dense_laplacian(g);
        let grounded = lap.remove_row(ground).remove_column(ground);
        let chol = grounded.cholesky().ok_or(ExlabError::SingularSystem)?;
        Ok(GroundedInverse { ground, inv: chol.inverse() })
    }

    fn entry(&self, a: usize, b: usize) -> f64 {
        if a == self.ground || b == self.ground {
            return 0.0;
        }
        let ai = if a < self.ground { a } else { a - 1 };
        let bi = if b < self.ground { b } else { b - 1 };
        self.inv[(ai, bi)]
    }

    pub fn resistance(&self, x: usize, y: usize) -> f64 {
        self.entry(x, x) + self.entry(y, y) - 2.0 * self.entry(x, y)
    }
}

/// The unit-voltage harmonic function: h(x) = 1, h(y) = 0, (Lh)(z) = 0
/// elsewhere.
pub fn harmonic_extension(g: &WeightedGraph, x: usize, y: usize) -> Result<VertexFunction> {
    if x == y {
        return Err(ExlabError::SameVertex { v: x });
    }
    check_dense_limit(g.n())?;
    let n = g.n();
    let interior: Vec<usize> = (0..n).filter(|&v| v != x && v != y).collect();
    let mut h = vec![0.0; n];
    h[x] = 1.0;
    if interior.is_empty() {
        return Ok(VertexFunction(h));
    }
    let pos: std::collections::HashMap<usize, usize> =
        interior.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let m = interior.len();
    let mut a = DMatrix::zeros(m, m);
    let mut rhs = nalgebra::DVector::zeros(m);
    for (i, &v) in interior.iter().enumerate() {
        for &(w, c) in g.neighbors(v) {
            a[(i, i)] += c;
            if let Some(&j) = pos.get(&w) {
                a[(i, j)] -= c;
            } else if w == x {
                rhs[i] += c; // h(x) = 1
            }
        }
    }
    let chol = a.cholesky().ok_or(ExlabError::SingularSystem)?;
    let sol = chol.solve(&rhs);
    for (i, &v) in interior.iter().enumerate() {
        h[v] = sol[i];
    }
    Ok(VertexFunction(h))
}

/// Laplacian applied at one vertex: (Lf)(x) = sum_y c_xy [f(y) - f(x)].
pub fn laplacian_at(g: &WeightedGraph, f: &VertexFunction, x: usize) -> f64 {
    g.neighbors(x).iter().map(|&(y, c)| c * (f[y] - f[x])).sum()
}

/// Star-removal energy identity at x:
/// sum_y c_xy [f(x)-f(y)]^2 = sum_{y<z in N(x)} c*_yz [f(y)-f(z)]^2
///                            + [(Lf)(x)]^2 / sum_y c_xy.
pub fn check_energy_identity(
    g: &WeightedGraph,
    x: usize,
    f: &VertexFunction,
    tol: f64,
) -> VerificationReport {
    let star = g.neighbors(x);
    let lhs: f64 = star
        .iter()
        .map(|&(y, c)| {
            let d = f[x] - f[y];
            c * d * d
        })
        .sum();
    let total: f64 = star.iter().map(|&(_, c)| c).sum();
    let mut mesh = 0.0;
    for i in 0..star.len() {
        for j in i + 1..star.len() {
            let (y, cy) = star[i];
            let (z, cz) = star[j];
            let d = f[y] - f[z];
            mesh += cy * cz / total * d * d;
        }
    }
    let lf = laplacian_at(g, f, x);
    let rhs = mesh + lf * lf / total;
    VerificationReport::identity(
        "energy-identity-2.2",
        &format!("x={x}"),
        lhs,
        rhs,
        tol,
    )
}

/// Dirichlet's principle: among potentials with h(x) = 1, h(y) = 0 the
/// harmonic one minimizes the energy, and the minimum is 1/R_eff(x, y).
/// The report certifies el_energy(h) >= 1/R_eff for the given h.
pub fn check_dirichlet_principle(
    g: &WeightedGraph,
    x: usize,
    y: usize,
    h: &VertexFunction,
    tol: f64,
) -> Result<VerificationReport> {
    if h.len() != g.n() {
        return Err(ExlabError::InvalidInput(format!(
            "potential has {} entries for {} vertices",
            h.len(),
            g.n()
        )));
    }
    if h[x] != 1.0 || h[y] != 0.0 {
        return Err(ExlabError::InvalidInput("potential must satisfy h(x)=1, h(y)=0".into()));
    }
    let r = effective_resistance_oracle(g, x, y)?;
    Ok(VerificationReport::inequality(
        "dirichlet-principle",
        &format!("n={} x={x} y={y}", g.n()),
        1.0 / r,
        el_energy(g, h),
        tol,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::effective_resistance;
    use approx::assert_relative_eq;

    #[test]
    fn oracle_single_edge() {
        let g = WeightedGraph::new(2, &[(0, 1, 4.0)]).unwrap();
        assert_relative_eq!(effective_resistance_oracle(&g, 0, 1).unwrap(), 0.25);
    }

    #[test]
    fn oracle_unit_square_antipodal() {
        // Two length-2 unit paths in parallel.
        let g = WeightedGraph::new(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)]).unwrap();
        assert_relative_eq!(effective_resistance_oracle(&g, 0, 2).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn oracle_matches_reduction_on_triangle() {
        let g = WeightedGraph::new(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        for (x, y) in [(0, 1), (0, 2), (1, 2)] {
            let (r, _) = effective_resistance(&g, x, y).unwrap();
            let o = effective_resistance_oracle(&g, x, y).unwrap();
            assert_relative_eq!(r, o, epsilon = 1e-12);
            assert_relative_eq!(o, 2.0 / 3.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn grounded_inverse_matches_pairwise_oracle() {
        let g = WeightedGraph::new(4, &[(0, 1, 2.0), (1, 2, 0.5), (2, 3, 1.0), (0, 3, 3.0), (1, 3, 1.5)])
            .unwrap();
        let inv = GroundedInverse::new(&g, 0).unwrap();
        for x in 0..4 {
            for y in x + 1..4 {
                assert_relative_eq!(
                    inv.resistance(x, y),
                    effective_resistance_oracle(&g, x, y).unwrap(),
                    epsilon = 1e-11
                );
            }
        }
    }

    #[test]
    fn el_energy_examples() {
        let g = WeightedGraph::new(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        assert_eq!(el_energy(&g, &VertexFunction::constant(3, 7.0)), 0.0);
        assert_relative_eq!(el_energy(&g, &VertexFunction(vec![1.0, 0.0, 0.0])), 2.0);
        let e = WeightedGraph::new(2, &[(0, 1, 3.0)]).unwrap();
        assert_relative_eq!(el_energy(&e, &VertexFunction(vec![1.0, 0.0])), 3.0);
    }

    #[test]
    fn harmonic_extension_examples() {
        let e = WeightedGraph::new(2, &[(0, 1, 1.0)]).unwrap();
        assert_eq!(harmonic_extension(&e, 0, 1).unwrap().0, vec![1.0, 0.0]);

        let p = WeightedGraph::path(2, 1.0).unwrap();
        let h = harmonic_extension(&p, 0, 2).unwrap();
        assert_relative_eq!(h[1], 0.5, epsilon = 1e-12);

        let t = WeightedGraph::new(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        let h = harmonic_extension(&t, 0, 1).unwrap();
        assert_relative_eq!(h[2], 0.5, epsilon = 1e-12);
        // Energy of the harmonic function equals 1 / R_eff.
        let r = effective_resistance_oracle(&t, 0, 1).unwrap();
        assert_relative_eq!(el_energy(&t, &h), 1.0 / r, epsilon = 1e-12);
    }

    #[test]
    fn energy_identity_cases() {
        let t = WeightedGraph::new(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        // Constant: both sides 0.
        let rep = check_energy_identity(&t, 0, &VertexFunction::constant(3, 2.0), 1e-10);
        assert!(rep.pass);
        assert_eq!(rep.lhs, 0.0);
        // Harmonic at x: correction term vanishes.
        let h = harmonic_extension(&t, 0, 1).unwrap();
        assert_relative_eq!(laplacian_at(&t, &h, 2), 0.0, epsilon = 1e-12);
        let rep = check_energy_identity(&t, 2, &h, 1e-10);
        assert!(rep.pass);
    }

    #[test]
    fn dense_limit_enforced() {
        // Construction cost makes an actual 2001-vertex graph cheap enough: a path.
        let g = WeightedGraph::path(2200, 1.0).unwrap();
        assert!(matches!(
            effective_resistance_oracle(&g, 0, 1),
            Err(ExlabError::DenseSolveTooLarge { .. })
        ));
    }
}
