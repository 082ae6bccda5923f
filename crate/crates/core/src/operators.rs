//! The graph Laplacian, the energy form, grounded systems with their Green
//! (Gram) matrix `M`, and the map `Φ: δ_x ↦ w_x`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::network::{Network, VertexFunction, VertexId};
use crate::solvers::{cg_solve, CgConfig};
use crate::sparse::CsrMatrix;

/// Largest grounded dimension for which the Green matrix is stored densely.
pub const DENSE_GREEN_CAP: usize = 2000;

/// Relative tolerance used for the grounded solves behind `Φ` and monopoles.
pub const SOLVE_TOL: f64 = 1e-13;

/// Sparse Laplacian: `c(x)` on the diagonal and `-c_xy` off it.
pub fn laplacian(net: &Network) -> CsrMatrix {
    let c = net.net_conductances();
    let mut triplets = Vec::with_capacity(net.vertex_count() + 2 * net.edges().len());
    for (x, &cx) in c.iter().enumerate() {
        triplets.push((x, x, cx));
    }
    for e in net.edges() {
        triplets.push((e.u, e.v, -e.conductance));
        triplets.push((e.v, e.u, -e.conductance));
    }
    CsrMatrix::from_triplets(net.vertex_count(), triplets)
}

/// `(Δu)(x) = Σ_{y~x} c_xy (u(x) - u(y))` at every vertex, ground included.
pub fn apply_laplacian(net: &Network, u: &VertexFunction) -> Result<VertexFunction> {
    u.check_len(net.vertex_count())?;
    Ok((0..net.vertex_count())
        .map(|x| {
            net.neighbors(x)
                .iter()
                .map(|&(y, c)| c * (u[x] - u[y]))
                .sum()
        })
        .collect::<Vec<_>>()
        .into())
}

/// Energy form `E(u, v)`, summed once per undirected edge.
pub fn energy(net: &Network, u: &VertexFunction, v: &VertexFunction) -> Result<f64> {
    u.check_len(net.vertex_count())?;
    v.check_len(net.vertex_count())?;
    Ok(net
        .edges()
        .iter()
        .map(|e| e.conductance * (u[e.u] - u[e.v]) * (v[e.u] - v[e.v]))
        .sum())
}

/// Returns `(E(u, v), <u, Δv>)`; the two agree on any finite network.
pub fn summation_by_parts_check(
    net: &Network,
    u: &VertexFunction,
    v: &VertexFunction,
) -> Result<(f64, f64)> {
    let e = energy(net, u, v)?;
    let lv = apply_laplacian(net, v)?;
    Ok((e, u.dot(&lv)))
}

/// The Laplacian with the ground row and column removed, together with the
/// host network it came from.
#[derive(Debug, Clone)]
pub struct GroundedSystem {
    host: Network,
    ground: VertexId,
    vertices: Vec<VertexId>,
    index: Vec<Option<usize>>,
    matrix: CsrMatrix,
    green: Option<DMatrix<f64>>,
}

impl GroundedSystem {
    /// Grounds the host at its designated ground vertex.
    pub fn new(host: Network) -> Result<Self> {
        let g = host.ground().ok_or(Error::MissingGround)?;
        Self::build(host, g)
    }

    /// Grounds the host at `ground`, overriding any designated ground.
    pub fn at(host: &Network, ground: VertexId) -> Result<Self> {
        host.check_vertex(ground)?;
        Self::build(host.clone().with_ground(ground)?, ground)
    }

    fn build(host: Network, ground: VertexId) -> Result<Self> {
        let n = host.vertex_count();
        if n < 2 {
            return Err(Error::InvalidParameter(
                "grounding needs at least two vertices".into(),
            ));
        }
        let vertices: Vec<VertexId> = (0..n).filter(|&x| x != ground).collect();
        let mut index = vec![None; n];
        for (i, &x) in vertices.iter().enumerate() {
            index[x] = Some(i);
        }
        let full = laplacian(&host);
        let mut triplets = Vec::with_capacity(full.nnz());
        for &x in &vertices {
            for (y, v) in full.row(x) {
                if let (Some(i), Some(j)) = (index[x], index[y]) {
                    triplets.push((i, j, v));
                }
            }
        }
        let matrix = CsrMatrix::from_triplets(vertices.len(), triplets);
        Ok(GroundedSystem {
            host,
            ground,
            vertices,
            index,
            matrix,
            green: None,
        })
    }

    pub fn host(&self) -> &Network {
        &self.host
    }

    pub fn ground(&self) -> VertexId {
        self.ground
    }

    /// Dimension of the reduced system (host vertex count minus one).
    pub fn dim(&self) -> usize {
        self.vertices.len()
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn green(&self) -> Option<&DMatrix<f64>> {
        self.green.as_ref()
    }

    /// Reduced index of a host vertex; `None` for the ground.
    pub fn reduced_index(&self, x: VertexId) -> Option<usize> {
        self.index.get(x).copied().flatten()
    }

    pub fn vertex(&self, i: usize) -> VertexId {
        self.vertices[i]
    }

    pub(crate) fn reduced_index_checked(&self, x: VertexId) -> Result<usize> {
        self.host.check_vertex(x)?;
        self.reduced_index(x).ok_or(Error::SupportTouchesGround)
    }

    /// Stores `M` densely. Refuses above `DENSE_GREEN_CAP`.
    pub fn materialize_green(&mut self) -> Result<&DMatrix<f64>> {
        if self.green.is_none() {
            self.green = Some(dense_inverse(&self.matrix)?);
        }
        Ok(self.green.as_ref().unwrap())
    }

    pub fn with_green(mut self) -> Result<Self> {
        self.materialize_green()?;
        Ok(self)
    }

    /// Restriction of a host function to non-ground vertices; it must vanish at the ground.
    pub fn restrict(&self, f: &VertexFunction) -> Result<Vec<f64>> {
        f.check_len(self.host.vertex_count())?;
        if f[self.ground] != 0.0 {
            return Err(Error::SupportTouchesGround);
        }
        Ok(self.vertices.iter().map(|&x| f[x]).collect())
    }

    /// Extension by zero at the ground.
    pub fn extend(&self, v: &[f64]) -> VertexFunction {
        let mut out = vec![0.0; self.host.vertex_count()];
        for (i, &x) in self.vertices.iter().enumerate() {
            out[x] = v[i];
        }
        out.into()
    }

    /// Solves the reduced system `L_g u = rhs`.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        match &self.green {
            Some(m) => Ok((m * nalgebra::DVector::from_column_slice(rhs))
                .iter()
                .copied()
                .collect()),
            None => Ok(cg_solve(&self.matrix, rhs, &CgConfig::with_tol(SOLVE_TOL))?.x),
        }
    }

    /// Dirichlet Laplacian: `Δu` on non-ground vertices, zero at the ground.
    pub fn apply_dirichlet(&self, u: &VertexFunction) -> Result<VertexFunction> {
        let mut lu = apply_laplacian(&self.host, u)?;
        lu[self.ground] = 0.0;
        Ok(lu)
    }

    /// Grounded monopole `w_x`: `Δw_x = δ_x` off the ground, `w_x(ground) = 0`.
    pub fn monopole(&self, x: VertexId) -> Result<VertexFunction> {
        let i = self.reduced_index_checked(x)?;
        let mut rhs = vec![0.0; self.dim()];
        rhs[i] = 1.0;
        Ok(self.extend(&self.solve(&rhs)?))
    }

    /// Effective resistance `(δ_x - δ_y)^T M (δ_x - δ_y)`; the ground counts as `M`'s zero row.
    pub fn green_resistance(&self, x: VertexId, y: VertexId) -> Result<f64> {
        self.host.check_vertex(x)?;
        self.host.check_vertex(y)?;
        if x == y {
            return Ok(0.0);
        }
        let mut rhs = vec![0.0; self.dim()];
        if let Some(i) = self.reduced_index(x) {
            rhs[i] += 1.0;
        }
        if let Some(j) = self.reduced_index(y) {
            rhs[j] -= 1.0;
        }
        let u = self.extend(&self.solve(&rhs)?);
        Ok(u[x] - u[y])
    }
}

fn dense_inverse(matrix: &CsrMatrix) -> Result<DMatrix<f64>> {
    let n = matrix.dim();
    if n > DENSE_GREEN_CAP {
        return Err(Error::DimensionCap {
            n,
            cap: DENSE_GREEN_CAP,
        });
    }
    let chol = matrix.to_dense().cholesky().ok_or(Error::SingularMatrix)?;
    Ok(chol.inverse())
}

/// The Gram matrix `M_xy = <w_x, w_y>_E`, i.e. the inverse of the grounded Laplacian.
pub fn gram_matrix(gs: &GroundedSystem) -> Result<DMatrix<f64>> {
    match gs.green() {
        Some(m) => Ok(m.clone()),
        None => dense_inverse(gs.matrix()),
    }
}

/// `Φξ = Σ_x ξ(x) w_x = Mξ`, extended by zero at the ground.
pub fn phi_map(gs: &GroundedSystem, xi: &VertexFunction) -> Result<VertexFunction> {
    let reduced = gs.restrict(xi)?;
    Ok(gs.extend(&gs.solve(&reduced)?))
}

/// Solves the Dirichlet problem: `Δh = rhs` on free vertices and `h = u` on
/// fixed ones. With `rhs = 0` this is the harmonic extension of `u` off the fixed set.
pub fn dirichlet_solve(
    net: &Network,
    fixed: &[bool],
    u: &VertexFunction,
    rhs: &[f64],
) -> Result<VertexFunction> {
    let n = net.vertex_count();
    u.check_len(n)?;
    if fixed.len() != n || rhs.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: if fixed.len() != n { fixed.len() } else { rhs.len() },
        });
    }
    let mut index = vec![None; n];
    let mut free = Vec::new();
    for x in 0..n {
        if !fixed[x] {
            index[x] = Some(free.len());
            free.push(x);
        }
    }
    let mut out = u.clone();
    if free.is_empty() {
        return Ok(out);
    }
    if free.len() == n {
        return Err(Error::MissingGround);
    }
    let mut triplets = Vec::new();
    let mut b = vec![0.0; free.len()];
    for (i, &x) in free.iter().enumerate() {
        b[i] = rhs[x];
        let mut cx = 0.0;
        for &(y, c) in net.neighbors(x) {
            cx += c;
            match index[y] {
                Some(j) => triplets.push((i, j, -c)),
                None => b[i] += c * u[y],
            }
        }
        triplets.push((i, i, cx));
    }
    let a = CsrMatrix::from_triplets(free.len(), triplets);
    let h = cg_solve(&a, &b, &CgConfig::with_tol(SOLVE_TOL))?.x;
    for (i, &x) in free.iter().enumerate() {
        out[x] = h[i];
    }
    Ok(out)
}
