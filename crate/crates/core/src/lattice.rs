//! Torus integrals for the integer lattice `Z^d` with unit conductances.
//!
//! Every quantity is an average over the torus `(-π, π]^d` of a function of
//! the symbol `S(t) = 4 Σ sin²(t_k/2)`. Averages are taken on shifted midpoint
//! grids, which never touch `t = 0`, and improved by Richardson extrapolation
//! across grid doublings. All integrands used here are even in each
//! coordinate, so only the positive orthant of the grid is visited.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{Exhaustion, VertexFunction};
use crate::operators::GroundedSystem;
use crate::spectral::GroundedSpectrum;

/// Largest supported dimension.
pub const MAX_DIM: usize = 5;

/// Largest orthant grid (points) accepted by the `ℓ²` probe.
pub const ELL2_POINT_BUDGET: usize = 1 << 24;

/// Increment ratio separating convergent from divergent dyadic sequences.
pub const RATIO_THRESHOLD: f64 = 0.75;

pub const PREFACTOR_NOTE: &str = "resistance integrand uses 4 sin²((x-y)·t/2)/S(t); \
without the factor 4 the d=1 adjacent value would be 1/4 instead of 1";

pub const ENERGY_NOTE: &str = "monopole energy is E(w_o) = (2π)^-d ∫ dt/S(t), \
the normalized integral itself rather than its square root";

/// `S(t) = 4 Σ_k sin²(t_k / 2)`.
pub fn symbol(t: &[f64]) -> f64 {
    t.iter().map(|&x| 4.0 * (0.5 * x).sin().powi(2)).sum()
}

fn check_dim(d: usize) -> Result<()> {
    if d == 0 || d > MAX_DIM {
        return Err(Error::DimensionCap { n: d, cap: MAX_DIM });
    }
    Ok(())
}

fn check_point(d: usize, p: &[i64]) -> Result<()> {
    if p.len() != d {
        return Err(Error::LengthMismatch {
            expected: d,
            found: p.len(),
        });
    }
    Ok(())
}

/// Shifted midpoint rule with a refinement schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusQuadrature {
    pub d: usize,
    /// Points per axis on the coarsest level; even.
    pub grid: usize,
    /// Number of grid doublings after the coarsest level.
    pub refinements: usize,
    /// Largest accepted change between the last two extrapolated values.
    pub tolerance: f64,
}

impl TorusQuadrature {
    /// Default schedule for dimension `d`: the finest grid has `128^3`-class cost.
    pub fn new(d: usize) -> Result<Self> {
        check_dim(d)?;
        let grid = match d {
            1 => 256,
            2 => 64,
            3 => 32,
            4 => 16,
            _ => 8,
        };
        Ok(TorusQuadrature {
            d,
            grid,
            refinements: 2,
            tolerance: 1e-5,
        })
    }

    pub fn with_grid(mut self, grid: usize, refinements: usize) -> Result<Self> {
        if grid < 2 || grid % 2 != 0 || refinements == 0 {
            return Err(Error::InvalidParameter(
                "grid must be even and at least 2, with one or more refinements".into(),
            ));
        }
        self.grid = grid;
        self.refinements = refinements;
        Ok(self)
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Result<Self> {
        if !(tolerance > 0.0) {
            return Err(Error::InvalidParameter("tolerance must be positive".into()));
        }
        self.tolerance = tolerance;
        Ok(self)
    }

    pub fn grids(&self) -> Vec<usize> {
        (0..=self.refinements).map(|i| self.grid << i).collect()
    }

    /// Averages the integrand on each grid and extrapolates pairs of levels
    /// with an error model of order `h^order`.
    fn run(&self, integrand: &Integrand, order: i32, notes: Vec<String>) -> QuadratureReport {
        let raw: Vec<f64> = self
            .grids()
            .into_iter()
            .map(|m| orthant_mean(self.d, m, integrand))
            .collect();
        let factor = 2f64.powi(order);
        let mut levels = vec![RefinementLevel {
            grid: self.grid,
            raw: raw[0],
            extrapolated: None,
        }];
        for i in 1..raw.len() {
            levels.push(RefinementLevel {
                grid: self.grid << i,
                raw: raw[i],
                extrapolated: Some((factor * raw[i] - raw[i - 1]) / (factor - 1.0)),
            });
        }
        let ex: Vec<f64> = levels.iter().filter_map(|l| l.extrapolated).collect();
        let value = *ex.last().unwrap();
        let difference = if ex.len() >= 2 {
            (ex[ex.len() - 1] - ex[ex.len() - 2]).abs()
        } else {
            (raw[raw.len() - 1] - raw[raw.len() - 2]).abs()
        };
        QuadratureReport {
            value,
            grid: *self.grids().last().unwrap(),
            refinements: levels,
            converged: difference < self.tolerance,
            difference,
            tolerance: self.tolerance,
            discrepancy_notes: notes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementLevel {
    pub grid: usize,
    pub raw: f64,
    pub extrapolated: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureReport {
    pub value: f64,
    /// Finest grid used, in points per axis.
    pub grid: usize,
    pub refinements: Vec<RefinementLevel>,
    pub converged: bool,
    pub difference: f64,
    pub tolerance: f64,
    pub discrepancy_notes: Vec<String>,
}

impl QuadratureReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The report, or `UnconvergedQuadrature` when the last levels disagree.
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::UnconvergedQuadrature {
                difference: self.difference,
                tolerance: self.tolerance,
            })
        }
    }
}

/// Integrands of the form `N(t) / S(t)^power`.
#[derive(Debug, Clone)]
enum Integrand {
    /// `Σ_i c_i Π_k cos(a_ik t_k) / S`.
    CosProducts(Vec<(f64, Vec<i64>)>),
    /// `Σ_k 4 sin²(t_k/2) / S²`, the energy of `w_o` split over edge directions.
    EdgeEnergy,
}

/// Mean of the integrand over the shifted midpoint grid with `m` points per
/// axis. Only the positive orthant is evaluated. Rows along the first axis are
/// summed independently and then added in index order, so the result does not
/// depend on the thread count.
fn orthant_mean(d: usize, m: usize, integrand: &Integrand) -> f64 {
    let half = m / 2;
    let h = 2.0 * PI / m as f64;
    let t: Vec<f64> = (0..half).map(|j| (j as f64 + 0.5) * h).collect();
    let sin2: Vec<f64> = t.iter().map(|&x| 4.0 * (0.5 * x).sin().powi(2)).collect();
    let cos_tables: Vec<(f64, Vec<Vec<f64>>)> = match integrand {
        Integrand::CosProducts(terms) => terms
            .iter()
            .map(|(c, a)| {
                let tables = a
                    .iter()
                    .map(|&ak| t.iter().map(|&x| (ak as f64 * x).cos()).collect())
                    .collect();
                (*c, tables)
            })
            .collect(),
        Integrand::EdgeEnergy => Vec::new(),
    };
    let eval = |idx: &[usize]| -> f64 {
        let s: f64 = idx.iter().map(|&j| sin2[j]).sum();
        match integrand {
            Integrand::CosProducts(_) => {
                let num: f64 = cos_tables
                    .iter()
                    .map(|(c, tables)| {
                        c * idx
                            .iter()
                            .zip(tables)
                            .map(|(&j, tab)| tab[j])
                            .product::<f64>()
                    })
                    .sum();
                num / s
            }
            Integrand::EdgeEnergy => idx.iter().map(|&j| sin2[j] / (s * s)).sum(),
        }
    };
    let rows: Vec<f64> = (0..half)
        .into_par_iter()
        .map(|first| {
            let mut idx = vec![0usize; d];
            idx[0] = first;
            let mut sum = 0.0;
            let mut comp = 0.0;
            loop {
                let y = eval(&idx) - comp;
                let next = sum + y;
                comp = (next - sum) - y;
                sum = next;
                let mut k = d - 1;
                loop {
                    if k == 0 {
                        return sum;
                    }
                    idx[k] += 1;
                    if idx[k] < half {
                        break;
                    }
                    idx[k] = 0;
                    k -= 1;
                }
            }
        })
        .collect();
    rows.iter().sum::<f64>() / (half as f64).powi(d as i32)
}

/// Effective resistance `(2π)^-d ∫ 4 sin²((x-y)·t/2) / S(t) dt`.
pub fn lattice_resistance(q: &TorusQuadrature, x: &[i64], y: &[i64]) -> Result<QuadratureReport> {
    check_point(q.d, x)?;
    check_point(q.d, y)?;
    let z: Vec<i64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let integrand = Integrand::CosProducts(vec![(2.0, vec![0; q.d]), (-2.0, z)]);
    q.run(&integrand, q.d as i32, vec![PREFACTOR_NOTE.to_string()])
        .require_converged()
}

/// Dipole `v_x(y) = (2π)^-d ∫ (cos((x-y)·t) - cos(y·t)) / S(t) dt`. This
/// representative is antisymmetric about `x/2`, so `v_x(x) = R(0,x)/2` and
/// `v_x(0) = -R(0,x)/2`.
pub fn lattice_dipole_value(q: &TorusQuadrature, x: &[i64], y: &[i64]) -> Result<QuadratureReport> {
    check_point(q.d, x)?;
    check_point(q.d, y)?;
    if x.iter().all(|&c| c == 0) {
        return Err(Error::SameVertex);
    }
    let xy: Vec<i64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let integrand = Integrand::CosProducts(vec![(1.0, xy), (-1.0, y.to_vec())]);
    q.run(&integrand, q.d as i32, Vec::new()).require_converged()
}

/// The dipole shifted to vanish at the origin: `v_x(y) - v_x(0)`.
pub fn lattice_dipole_value_normalized(
    q: &TorusQuadrature,
    x: &[i64],
    y: &[i64],
) -> Result<QuadratureReport> {
    check_point(q.d, x)?;
    check_point(q.d, y)?;
    if x.iter().all(|&c| c == 0) {
        return Err(Error::SameVertex);
    }
    let zero = vec![0; q.d];
    let xy: Vec<i64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let integrand = Integrand::CosProducts(vec![
        (1.0, xy),
        (-1.0, y.to_vec()),
        (-1.0, x.to_vec()),
        (1.0, zero),
    ]);
    q.run(&integrand, q.d as i32, Vec::new()).require_converged()
}

/// Monopole `w_o(x) = (2π)^-d ∫ cos(x·t) / S(t) dt`; requires `d ≥ 3`.
pub fn lattice_monopole_value(q: &TorusQuadrature, x: &[i64]) -> Result<QuadratureReport> {
    check_point(q.d, x)?;
    if q.d <= 2 {
        return Err(Error::RecurrentLattice(q.d));
    }
    let integrand = Integrand::CosProducts(vec![(1.0, x.to_vec())]);
    q.run(&integrand, q.d as i32 - 2, Vec::new()).require_converged()
}

/// `E(w_o)` as the sum over edge directions of `(2π)^-d ∫ 4 sin²(t_k/2) / S²`.
/// Summation by parts makes this equal to `w_o(0)`.
pub fn monopole_energy(q: &TorusQuadrature) -> Result<QuadratureReport> {
    if q.d <= 2 {
        return Err(Error::RecurrentLattice(q.d));
    }
    q.run(&Integrand::EdgeEnergy, q.d as i32 - 2, vec![ENERGY_NOTE.to_string()])
        .require_converged()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Transient,
    Recurrent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransienceReport {
    pub d: usize,
    pub verdict: Verdict,
    /// `d ≥ 3`.
    pub expected: Verdict,
    pub grids: Vec<usize>,
    /// Raw midpoint averages of `1/S` at each grid.
    pub values: Vec<f64>,
    /// Ratios of successive increments of `values`.
    pub increment_ratios: Vec<f64>,
    /// Slope of `log(values)` against `log(grid)` over the last two levels.
    pub growth_exponent: f64,
    /// Change between the last two extrapolated values (transient case only).
    pub cauchy_difference: Option<f64>,
}

impl TransienceReport {
    pub fn consistent(&self) -> bool {
        self.verdict == self.expected
    }

    /// Values increase strictly at every refinement.
    pub fn monotone_growth(&self) -> bool {
        self.values.windows(2).all(|w| w[1] > w[0])
    }
}

/// Decides transience numerically from the behaviour of `∫ 1/S` under grid
/// refinement: divergent integrals keep growing by increments that do not
/// shrink, convergent ones have geometrically shrinking increments.
pub fn transience_probe(d: usize) -> Result<TransienceReport> {
    check_dim(d)?;
    let grids: Vec<usize> = match d {
        1 | 2 | 3 => vec![8, 16, 32, 64],
        4 => vec![6, 12, 24, 48],
        _ => vec![4, 8, 16, 32],
    };
    let integrand = Integrand::CosProducts(vec![(1.0, vec![0; d])]);
    let values: Vec<f64> = grids.iter().map(|&m| orthant_mean(d, m, &integrand)).collect();
    let inc: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let increment_ratios: Vec<f64> = inc.windows(2).map(|w| w[1] / w[0]).collect();
    let last_ratio = *increment_ratios.last().unwrap();
    let verdict = if last_ratio.abs() < RATIO_THRESHOLD {
        Verdict::Transient
    } else {
        Verdict::Recurrent
    };
    let n = values.len();
    let growth_exponent = (values[n - 1] / values[n - 2]).ln() / 2f64.ln();
    let cauchy_difference = (verdict == Verdict::Transient).then(|| {
        let f = 2f64.powi(d as i32 - 2);
        let e1 = (f * values[n - 2] - values[n - 3]) / (f - 1.0);
        let e2 = (f * values[n - 1] - values[n - 2]) / (f - 1.0);
        (e2 - e1).abs()
    });
    let expected = if d >= 3 {
        Verdict::Transient
    } else {
        Verdict::Recurrent
    };
    Ok(TransienceReport {
        d,
        verdict,
        expected,
        grids,
        values,
        increment_ratios,
        growth_exponent,
        cauchy_difference,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbeKind {
    Dipole,
    Monopole,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ell2Report {
    pub kind: ProbeKind,
    pub d: usize,
    pub grid: usize,
    pub radii: Vec<usize>,
    /// `Σ_{|y|_1 ≤ r} f(y)²` for each radius.
    pub partial_sums: Vec<f64>,
    pub increment_ratios: Vec<f64>,
    /// Slope of `log(partial sum)` against `log(r)` over the last two radii.
    pub slope: f64,
    pub bounded: bool,
    pub uncertainty: String,
}

/// Grid transform `T(y) = mean_t cos(y·t)/S(t)` for every `y ∈ [0, r]^d`,
/// evaluated axis by axis. Indexing is row-major in `y`.
fn cosine_transform(d: usize, m: usize, r: usize) -> Vec<f64> {
    let half = m / 2;
    let h = 2.0 * PI / m as f64;
    let t: Vec<f64> = (0..half).map(|j| (j as f64 + 0.5) * h).collect();
    let sin2: Vec<f64> = t.iter().map(|&x| 4.0 * (0.5 * x).sin().powi(2)).collect();
    let cos: Vec<Vec<f64>> = (0..=r)
        .map(|y| t.iter().map(|&x| (y as f64 * x).cos()).collect())
        .collect();
    // Start with F on the full orthant grid; axes are replaced one at a time
    // by the frequency index, from the last axis to the first.
    let mut shape = vec![half; d];
    let total: usize = shape.iter().product();
    let mut data: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|lin| {
            let mut rem = lin;
            let mut s = 0.0;
            for _ in 0..d {
                s += sin2[rem % half];
                rem /= half;
            }
            1.0 / s
        })
        .collect();
    for axis in (0..d).rev() {
        let inner: usize = shape[axis + 1..].iter().product();
        let outer: usize = shape[..axis].iter().product();
        let mut next = vec![0.0; outer * (r + 1) * inner];
        next.par_chunks_mut((r + 1) * inner)
            .enumerate()
            .for_each(|(o, chunk)| {
                for y in 0..=r {
                    let row = &mut chunk[y * inner..(y + 1) * inner];
                    for j in 0..half {
                        let c = cos[y][j];
                        let src = &data[(o * half + j) * inner..(o * half + j + 1) * inner];
                        row.iter_mut().zip(src).for_each(|(a, b)| *a += c * b);
                    }
                }
            });
        shape[axis] = r + 1;
        data = next;
    }
    let norm = (half as f64).powi(d as i32);
    data.iter_mut().for_each(|v| *v /= norm);
    data
}

fn lattice_points(d: usize, r: usize) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut p = vec![-(r as i64); d];
    loop {
        if p.iter().map(|c| c.unsigned_abs() as usize).sum::<usize>() <= r {
            out.push(p.clone());
        }
        let mut k = d;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            p[k] += 1;
            if p[k] <= r as i64 {
                break;
            }
            p[k] = -(r as i64);
        }
    }
}

/// Tests whether the dipole `v_{e_1}` or the monopole `w_o` is square
/// summable, from partial sums of `f²` over `ℓ¹` balls of the given radii.
/// The dipole uses the representative antisymmetric about `e_1/2`.
pub fn ell2_membership_probe(kind: ProbeKind, d: usize, radii: &[usize]) -> Result<Ell2Report> {
    check_dim(d)?;
    if radii.len() < 3 || radii.windows(2).any(|w| w[0] >= w[1]) || radii[0] == 0 {
        return Err(Error::InvalidParameter(
            "need at least three increasing positive radii".into(),
        ));
    }
    if kind == ProbeKind::Monopole && d <= 2 {
        return Err(Error::RecurrentLattice(d));
    }
    let rmax = *radii.last().unwrap();
    if rmax > 20 {
        return Err(Error::InvalidParameter("radii are limited to 20".into()));
    }
    let mut m = (8 * rmax).max(32);
    m += m % 4;
    if (m / 2).pow(d as u32) > ELL2_POINT_BUDGET {
        return Err(Error::GridTooLarge { grid: m, dim: d });
    }
    let span = rmax + 1;
    let fine = cosine_transform(d, m, span);
    let coarse = cosine_transform(d, m / 2, span);
    let order = match kind {
        ProbeKind::Dipole => d as i32,
        ProbeKind::Monopole => d as i32 - 2,
    };
    let factor = 2f64.powi(order);
    let at = |table: &[f64], y: &[i64]| -> f64 {
        let mut lin = 0;
        for &c in y {
            lin = lin * (span + 1) + c.unsigned_abs() as usize;
        }
        table[lin]
    };
    let value = |table: &[f64], y: &[i64]| -> f64 {
        match kind {
            ProbeKind::Monopole => at(table, y),
            ProbeKind::Dipole => {
                let mut xy = y.to_vec();
                xy[0] = 1 - xy[0];
                at(table, &xy) - at(table, y)
            }
        }
    };
    let points = lattice_points(d, rmax);
    let mut partial_sums = vec![0.0; radii.len()];
    for p in &points {
        let f = value(&fine, p);
        let c = value(&coarse, p);
        let v = (factor * f - c) / (factor - 1.0);
        let norm: usize = p.iter().map(|c| c.unsigned_abs() as usize).sum();
        for (i, &r) in radii.iter().enumerate() {
            if norm <= r {
                partial_sums[i] += v * v;
            }
        }
    }
    let inc: Vec<f64> = partial_sums.windows(2).map(|w| w[1] - w[0]).collect();
    let increment_ratios: Vec<f64> = inc.windows(2).map(|w| w[1] / w[0]).collect();
    let n = radii.len();
    let slope = (partial_sums[n - 1] / partial_sums[n - 2]).ln()
        / (radii[n - 1] as f64 / radii[n - 2] as f64).ln();
    let bounded = increment_ratios.last().unwrap().abs() < RATIO_THRESHOLD;
    Ok(Ell2Report {
        kind,
        d,
        grid: m,
        radii: radii.to_vec(),
        partial_sums,
        increment_ratios,
        slope,
        bounded,
        uncertainty: format!(
            "radii up to {rmax}; verdict from the last increment ratio against {RATIO_THRESHOLD}; \
             ratios near the threshold are inconclusive"
        ),
    })
}

/// Compares the spectral resistance on the wired truncation at `depth` with
/// the torus integral. Returns `(spectral, quadrature)`.
pub fn fourier_spectral_consistency(
    d: usize,
    x: &[i64],
    y: &[i64],
    depth: usize,
) -> Result<(f64, f64)> {
    let q = TorusQuadrature::new(d)?;
    let quad = lattice_resistance(&q, x, y)?.value;
    let family = Exhaustion::Lattice { dim: d };
    let wired = family.wired_truncation(depth)?.network;
    let gs = GroundedSystem::new(wired)?;
    let spectrum = GroundedSpectrum::new(&gs)?;
    let host = gs.host();
    let locate = |p: &[i64]| {
        let label = crate::network::lattice_label(p);
        host.vertex_by_label(&label)
            .map_err(|_| Error::VertexOutsideTruncation(label))
    };
    let spectral = spectrum.resistance(locate(x)?, locate(y)?)?;
    Ok((spectral, quad))
}

/// Values of the monopole on the lattice cross-checked pointwise: returns
/// `c(0) w_o(0) - Σ_{y~0} w_o(y)`, which is `1` for a true monopole.
pub fn fourier_kronecker_residual(q: &TorusQuadrature) -> Result<f64> {
    let d = q.d;
    let w0 = lattice_monopole_value(q, &vec![0; d])?.value;
    let mut e1 = vec![0; d];
    e1[0] = 1;
    let w1 = lattice_monopole_value(q, &e1)?.value;
    Ok(2.0 * d as f64 * (w0 - w1))
}

/// The symbol's values on the orthant midpoint grid with `m` points per axis.
pub fn symbol_on_grid(d: usize, m: usize) -> VertexFunction {
    let half = m / 2;
    let h = 2.0 * PI / m as f64;
    let total = half.pow(d as u32);
    (0..total)
        .map(|lin| {
            let mut rem = lin;
            let t: Vec<f64> = (0..d)
                .map(|_| {
                    let j = rem % half;
                    rem /= half;
                    (j as f64 + 0.5) * h
                })
                .collect();
            symbol(&t)
        })
        .collect::<Vec<_>>()
        .into()
}

#[cfg(test)]
mod tests {
    use super::*;

    const WATSON: f64 = 0.2527310098586587;

    #[test]
    fn symbol_examples() {
        assert!((symbol(&[PI]) - 4.0).abs() < 1e-15);
        assert!((symbol(&[PI, PI]) - 8.0).abs() < 1e-14);
        assert_eq!(symbol(&[0.0, 0.0, 0.0]), 0.0);
        assert!(symbol_on_grid(3, 16).iter().all(|&s| s > 0.0));
    }

    #[test]
    fn resistance_examples() {
        let r1 = lattice_resistance(&TorusQuadrature::new(1).unwrap(), &[0], &[1]).unwrap();
        assert!((r1.value - 1.0).abs() < 1e-12 && r1.converged);
        let r2 = lattice_resistance(&TorusQuadrature::new(2).unwrap(), &[0, 0], &[1, 0]).unwrap();
        assert!((r2.value - 0.5).abs() < 1e-10);
        let r3 = lattice_resistance(&TorusQuadrature::new(3).unwrap(), &[0, 0, 0], &[0, 1, 0])
            .unwrap();
        assert!((r3.value - 1.0 / 3.0).abs() < 1e-10);
        assert_eq!(r3.discrepancy_notes, vec![PREFACTOR_NOTE.to_string()]);
        // Diagonal neighbour in Z², known to be 2/π.
        let rd = lattice_resistance(&TorusQuadrature::new(2).unwrap(), &[0, 0], &[1, 1]).unwrap();
        assert!((rd.value - 2.0 / PI).abs() < 1e-5);
    }

    #[test]
    fn dipole_examples() {
        let q1 = TorusQuadrature::new(1).unwrap();
        assert!((lattice_dipole_value(&q1, &[1], &[1]).unwrap().value - 0.5).abs() < 1e-12);
        assert!(lattice_dipole_value_normalized(&q1, &[1], &[0]).unwrap().value.abs() < 1e-12);
        let q2 = TorusQuadrature::new(2).unwrap();
        let v = lattice_dipole_value(&q2, &[1, 0], &[1, 0]).unwrap().value;
        assert!((v - 0.25).abs() < 1e-9);
        let n = lattice_dipole_value_normalized(&q2, &[1, 0], &[1, 0]).unwrap().value;
        assert!((n - 0.5).abs() < 1e-9);
        assert_eq!(
            lattice_dipole_value(&q2, &[0, 0], &[1, 0]).unwrap_err(),
            Error::SameVertex
        );
    }

    #[test]
    fn monopole_examples() {
        let q = TorusQuadrature::new(3).unwrap();
        let w0 = lattice_monopole_value(&q, &[0, 0, 0]).unwrap();
        assert!(w0.converged && (w0.value - WATSON).abs() < 1e-5);
        let w1 = lattice_monopole_value(&q, &[1, 0, 0]).unwrap().value;
        assert!((w1 - (w0.value - 1.0 / 6.0)).abs() < 1e-6);
        assert!((fourier_kronecker_residual(&q).unwrap() - 1.0).abs() < 1e-9);
        let q2 = TorusQuadrature::new(2).unwrap();
        assert_eq!(
            lattice_monopole_value(&q2, &[0, 0]).unwrap_err(),
            Error::RecurrentLattice(2)
        );
    }

    #[test]
    fn energy_examples() {
        let q = TorusQuadrature::new(3).unwrap();
        let e = monopole_energy(&q).unwrap();
        let w0 = lattice_monopole_value(&q, &[0, 0, 0]).unwrap();
        assert!((e.value - w0.value).abs() < 1e-8);
        let e4 = monopole_energy(&TorusQuadrature::new(4).unwrap()).unwrap();
        assert!(e4.converged && (e4.value - 0.15493339023105765).abs() < 1e-4);
        assert_eq!(
            monopole_energy(&TorusQuadrature::new(2).unwrap()).unwrap_err(),
            Error::RecurrentLattice(2)
        );
    }

    #[test]
    fn transience_examples() {
        for d in 1..=5 {
            let r = transience_probe(d).unwrap();
            assert!(r.consistent(), "d={d}: {r:?}");
            if d <= 2 {
                assert!(r.monotone_growth());
            } else {
                assert!(r.cauchy_difference.unwrap() < 1e-3);
            }
        }
        let r1 = transience_probe(1).unwrap();
        assert!((r1.growth_exponent - 1.0).abs() < 0.05);
    }

    #[test]
    fn cosine_transform_matches_direct_average() {
        let t = cosine_transform(2, 16, 3);
        let integrand = Integrand::CosProducts(vec![(1.0, vec![2, 1])]);
        let direct = orthant_mean(2, 16, &integrand);
        assert!((t[2 * 4 + 1] - direct).abs() < 1e-12);
    }

    #[test]
    fn ell2_examples() {
        let d3 = ell2_membership_probe(ProbeKind::Dipole, 3, &[2, 4, 8, 16]).unwrap();
        assert!(d3.bounded, "{d3:?}");
        let d2 = ell2_membership_probe(ProbeKind::Dipole, 2, &[2, 4, 8, 16]).unwrap();
        assert!(!d2.bounded, "{d2:?}");
        let m3 = ell2_membership_probe(ProbeKind::Monopole, 3, &[2, 4, 8, 16]).unwrap();
        assert!(!m3.bounded, "{m3:?}");
        assert_eq!(
            ell2_membership_probe(ProbeKind::Monopole, 2, &[2, 4, 8]).unwrap_err(),
            Error::RecurrentLattice(2)
        );
    }

    #[test]
    fn spectral_consistency_examples() {
        let (s, q) = fourier_spectral_consistency(2, &[0, 0], &[1, 0], 10).unwrap();
        assert!((s - q).abs() < 0.02 && (q - 0.5).abs() < 1e-9);
        let (s, q) = fourier_spectral_consistency(1, &[0], &[1], 20).unwrap();
        assert!((q - 1.0).abs() < 1e-12 && (s - 41.0 / 42.0).abs() < 1e-9);
    }
}
