//! Spectral measures of grounded systems, the moment and Radon-Nikodym
//! identities between the `ℓ²` and energy geometries, spectral resistance,
//! and Dirichlet-truncation estimates of the spectral gap.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{Exhaustion, VertexFunction, VertexId};
use crate::operators::{energy, phi_map, GroundedSystem};
use crate::solvers::{dense_eig, lanczos_smallest, LanczosEstimate, SpectralDecomposition};

/// Label attached to every Dirichlet gap value in reports.
pub const GAP_LABEL: &str = "upper estimate of γ";

/// Default Lanczos iteration budget for gap estimates.
pub const GAP_LANCZOS_ITERS: usize = 400;

/// Masses below this fraction of the total are dropped from a measure.
const ATOM_FLOOR: f64 = 1e-24;

/// Point masses `(λ, mass)` of a finite spectral measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteSpectralMeasure {
    pub atoms: Vec<(f64, f64)>,
    pub total: f64,
}

impl DiscreteSpectralMeasure {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lambda,mass\n");
        for (l, m) in &self.atoms {
            writeln!(out, "{l:.15e},{m:.15e}").unwrap();
        }
        out
    }

    /// `∫ f dμ`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.atoms.iter().map(|&(l, m)| f(l) * m).sum()
    }
}

/// Eigendecomposition of a grounded system, reused across spectral queries.
#[derive(Debug, Clone)]
pub struct GroundedSpectrum<'a> {
    pub system: &'a GroundedSystem,
    pub decomposition: SpectralDecomposition,
}

impl<'a> GroundedSpectrum<'a> {
    pub fn new(system: &'a GroundedSystem) -> Result<Self> {
        let decomposition = dense_eig(&system.matrix().to_dense())?;
        Ok(GroundedSpectrum {
            system,
            decomposition,
        })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.decomposition.eigenvalues
    }

    /// Coefficients `<φ_i, ξ>` in the `ℓ²` eigenbasis.
    fn coefficients(&self, reduced: &[f64]) -> Vec<f64> {
        let v = &self.decomposition.eigenvectors;
        (0..v.ncols())
            .map(|i| v.column(i).iter().zip(reduced).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn restrict_any(&self, xi: &VertexFunction) -> Result<Vec<f64>> {
        xi.check_len(self.system.host().vertex_count())?;
        Ok((0..self.system.dim())
            .map(|i| xi[self.system.vertex(i)])
            .collect())
    }

    /// `μ_ξ`: atoms `(λ_i, <φ_i, ξ>²)`. Atoms with negligible mass are dropped.
    pub fn measure(&self, xi: &VertexFunction) -> Result<DiscreteSpectralMeasure> {
        let reduced = self.system.restrict(xi)?;
        let coef = self.coefficients(&reduced);
        let total: f64 = coef.iter().map(|c| c * c).sum();
        let atoms = self
            .eigenvalues()
            .iter()
            .zip(&coef)
            .map(|(&l, c)| (l, c * c))
            .filter(|&(_, m)| m > ATOM_FLOOR * total)
            .collect();
        Ok(DiscreteSpectralMeasure { atoms, total })
    }

    /// Spectral measure of `Φξ` in the energy geometry. Each eigenvector,
    /// extended by zero at the ground, has energy `λ_i`, so the mass at `λ_i`
    /// is `E(φ_i, Φξ)² / λ_i`.
    pub fn energy_measure(&self, xi: &VertexFunction) -> Result<DiscreteSpectralMeasure> {
        let net = self.system.host();
        let phi_xi = phi_map(self.system, xi)?;
        let mut atoms = Vec::with_capacity(self.system.dim());
        for (i, &l) in self.eigenvalues().iter().enumerate() {
            let phi_i = self.system.extend(&self.decomposition.eigenvector(i));
            let e = energy(net, &phi_i, &phi_xi)?;
            atoms.push((l, e * e / l));
        }
        let total = atoms.iter().map(|a| a.1).sum();
        Ok(DiscreteSpectralMeasure { atoms, total })
    }

    /// Largest `|λ_i mass^F_i - mass_i|` over atoms, relative to `‖ξ‖²`.
    pub fn radon_nikodym_deviation(&self, xi: &VertexFunction) -> Result<f64> {
        let reduced = self.system.restrict(xi)?;
        let coef = self.coefficients(&reduced);
        let total: f64 = coef.iter().map(|c| c * c).sum();
        if total == 0.0 {
            return Ok(0.0);
        }
        let energy_side = self.energy_measure(xi)?;
        Ok(energy_side
            .atoms
            .iter()
            .zip(&coef)
            .map(|(&(l, mf), c)| (l * mf - c * c).abs())
            .fold(0.0, f64::max)
            / total)
    }

    /// `Σ_i λ_i^{-1} <φ_i, δ_x - δ_y>²`. The ground contributes a zero vector.
    pub fn resistance(&self, x: VertexId, y: VertexId) -> Result<f64> {
        let host = self.system.host();
        host.check_vertex(x)?;
        host.check_vertex(y)?;
        if x == y {
            return Ok(0.0);
        }
        let n = host.vertex_count();
        let d = VertexFunction::delta(n, x).sub(&VertexFunction::delta(n, y));
        let coef = self.coefficients(&self.restrict_any(&d)?);
        Ok(self
            .eigenvalues()
            .iter()
            .zip(&coef)
            .map(|(l, c)| c * c / l)
            .sum())
    }
}

pub fn spectral_measure(gs: &GroundedSystem, xi: &VertexFunction) -> Result<DiscreteSpectralMeasure> {
    GroundedSpectrum::new(gs)?.measure(xi)
}

pub fn radon_nikodym_check(gs: &GroundedSystem, xi: &VertexFunction) -> Result<f64> {
    GroundedSpectrum::new(gs)?.radon_nikodym_deviation(xi)
}

pub fn spectral_resistance(gs: &GroundedSystem, x: VertexId, y: VertexId) -> Result<f64> {
    GroundedSpectrum::new(gs)?.resistance(x, y)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub n: usize,
    /// `E(Φξ, Δ^{n+1} Φξ)` with the Dirichlet Laplacian.
    pub lhs: f64,
    /// `ξᵀ L^n ξ` on the reduced system.
    pub rhs: f64,
    pub rel_deviation: f64,
}

/// Compares energy-side and `ℓ²`-side moments for `n = 0..=n_max`.
pub fn moment_identity_check(
    gs: &GroundedSystem,
    xi: &VertexFunction,
    n_max: usize,
) -> Result<Vec<MomentRow>> {
    if n_max > 8 {
        return Err(Error::InvalidParameter("n_max must be at most 8".into()));
    }
    let net = gs.host();
    let phi_xi = phi_map(gs, xi)?;
    let reduced = gs.restrict(xi)?;
    let mut power = gs.apply_dirichlet(&phi_xi)?;
    let mut l_power = reduced.clone();
    let mut rows = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let lhs = energy(net, &phi_xi, &power)?;
        let rhs: f64 = reduced.iter().zip(&l_power).map(|(a, b)| a * b).sum();
        let scale = lhs.abs().max(rhs.abs());
        let rel_deviation = if scale == 0.0 { 0.0 } else { (lhs - rhs).abs() / scale };
        rows.push(MomentRow {
            n,
            lhs,
            rhs,
            rel_deviation,
        });
        power = gs.apply_dirichlet(&power)?;
        l_power = gs.matrix().mul_vec(&l_power);
    }
    Ok(rows)
}

/// Dirichlet gap estimates over a depth schedule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapStudy {
    pub family: String,
    pub label: &'static str,
    pub depths: Vec<usize>,
    pub lambda_min: Vec<f64>,
    pub lanczos: Vec<LanczosEstimate>,
    /// Set when the sequence is non-increasing.
    pub monotone: bool,
}

impl GapStudy {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("depth,lambda_min\n");
        for (d, l) in self.depths.iter().zip(&self.lambda_min) {
            writeln!(out, "{d},{l:.12}").unwrap();
        }
        out
    }
}

/// `λ_min` of truncation `k` grounded at `ω` at each depth, by Lanczos.
/// Each value bounds `inf spec Δ` from above.
pub fn dirichlet_gap(family: &Exhaustion, depths: &[usize], seed: u64) -> Result<GapStudy> {
    if depths.is_empty() || depths.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "depths must be nonempty and strictly increasing".into(),
        ));
    }
    let mut lanczos = Vec::with_capacity(depths.len());
    for &k in depths {
        let collapse = family.wired_truncation(k)?;
        if collapse.boundary_empty {
            return Err(Error::MissingGround);
        }
        let gs = GroundedSystem::new(collapse.network)?;
        let iters = GAP_LANCZOS_ITERS.max(10).min(gs.dim().max(10));
        lanczos.push(lanczos_smallest(gs.matrix(), iters, seed)?);
    }
    let lambda_min: Vec<f64> = lanczos.iter().map(|e| e.value).collect();
    let monotone = lambda_min.windows(2).all(|w| w[1] <= w[0] + 1e-9);
    Ok(GapStudy {
        family: family.name(),
        label: GAP_LABEL,
        depths: depths.to_vec(),
        lambda_min,
        lanczos,
        monotone,
    })
}

/// `2/γ`, the resistance bound implied by a spectral gap `γ`.
pub fn gap_resistance_bound(gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::NonpositiveGap(gamma));
    }
    Ok(2.0 / gamma)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InverseSqrtReport {
    /// `Σ λ_i^{-1} <φ_i, ξ>²`.
    pub spectral: f64,
    /// `E(Φξ)`.
    pub energy: f64,
    /// `(λ, quadrature of π^{-1/2} ∫ t^{-1/2} e^{-tλ} dt, λ^{-1/2})` at sampled eigenvalues.
    pub bochner: Vec<(f64, f64, f64)>,
}

impl InverseSqrtReport {
    pub fn max_bochner_error(&self) -> f64 {
        self.bochner
            .iter()
            .map(|&(_, q, e)| (q - e).abs())
            .fold(0.0, f64::max)
    }
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn adaptive_simpson(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    (fa, fm, fb): (f64, f64, f64),
    whole: f64,
    tol: f64,
    depth: usize,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
        return left + right + (left + right - whole) / 15.0;
    }
    adaptive_simpson(f, a, m, (fa, flm, fm), left, 0.5 * tol, depth - 1)
        + adaptive_simpson(f, m, b, (fm, frm, fb), right, 0.5 * tol, depth - 1)
}

/// Evaluates `π^{-1/2} ∫_0^∞ t^{-1/2} e^{-tλ} dt` by adaptive Simpson after
/// the substitution `t = s²`, which removes the endpoint singularity.
pub fn bochner_integral(lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter("λ must be positive".into()));
    }
    let f = |s: f64| (-lambda * s * s).exp();
    let b = (50.0 / lambda).sqrt();
    let (fa, fm, fb) = (f(0.0), f(0.5 * b), f(b));
    let whole = simpson(0.0, b, fa, fm, fb);
    let integral = adaptive_simpson(&f, 0.0, b, (fa, fm, fb), whole, 1e-12, 40);
    Ok(2.0 * integral / std::f64::consts::PI.sqrt())
}

/// `‖Δ^{-1/2} ξ‖²` computed spectrally and as `E(Φξ)`, plus the scalar Bochner
/// check at the smallest, a middle, and the largest eigenvalue.
pub fn inverse_sqrt_energy(gs: &GroundedSystem, xi: &VertexFunction) -> Result<InverseSqrtReport> {
    let spectrum = GroundedSpectrum::new(gs)?;
    let measure = spectrum.measure(xi)?;
    let spectral = measure.integrate(|l| 1.0 / l);
    let phi_xi = phi_map(gs, xi)?;
    let energy = energy(gs.host(), &phi_xi, &phi_xi)?;
    let ls = spectrum.eigenvalues();
    let mut picks = vec![0, ls.len() / 2, ls.len() - 1];
    picks.dedup();
    let bochner = picks
        .into_iter()
        .map(|i| Ok((ls[i], bochner_integral(ls[i])?, ls[i].powf(-0.5))))
        .collect::<Result<Vec<_>>>()?;
    Ok(InverseSqrtReport {
        spectral,
        energy,
        bochner,
    })
}
