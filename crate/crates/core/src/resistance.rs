//! Dipoles, monopoles, free and wired effective resistance, and the
//! finite-scale Royden split.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{Exhaustion, Network, VertexFunction, VertexId};
use crate::operators::{dirichlet_solve, energy, GroundedSystem};

/// Slack allowed in the depth monotonicity checks.
pub const MONOTONE_SLACK: f64 = 1e-9;

/// Relative free/wired gap below which a bracket is declared converged.
pub const BRACKET_TOL: f64 = 1e-3;

/// Dipole `v` with `Δv = δ_x - δ_y` and `v(y) = 0`. Any designated ground is ignored.
pub fn dipole_solve(net: &Network, x: VertexId, y: VertexId) -> Result<VertexFunction> {
    net.check_vertex(x)?;
    net.check_vertex(y)?;
    if x == y {
        return Err(Error::SameVertex);
    }
    GroundedSystem::at(net, y)?.monopole(x)
}

/// Effective resistance `v(x) - v(y)` of the dipole, which also equals `E(v)`.
/// Every vertex, a designated ground included, is treated as ordinary.
pub fn free_resistance(net: &Network, x: VertexId, y: VertexId) -> Result<f64> {
    net.check_vertex(x)?;
    net.check_vertex(y)?;
    if x == y {
        return Ok(0.0);
    }
    let v = dipole_solve(net, x, y)?;
    Ok(v[x] - v[y])
}

/// Alias of [`free_resistance`] for networks that are not truncations.
pub fn effective_resistance(net: &Network, x: VertexId, y: VertexId) -> Result<f64> {
    free_resistance(net, x, y)
}

fn locate(net: &Network, label: &str) -> Result<VertexId> {
    net.vertex_by_label(label)
        .map_err(|_| Error::VertexOutsideTruncation(label.to_string()))
}

/// Free resistance between two labelled vertices of truncation `k`.
pub fn free_resistance_at_depth(family: &Exhaustion, k: usize, x: &str, y: &str) -> Result<f64> {
    let net = family.truncation(k)?;
    free_resistance(&net, locate(&net, x)?, locate(&net, y)?)
}

/// Resistance between two labelled vertices of truncation `k` wired inside
/// truncation `k + 1`, with `ω` an ordinary vertex.
pub fn wired_resistance_at_depth(family: &Exhaustion, k: usize, x: &str, y: &str) -> Result<f64> {
    let inner = family.truncation(k)?;
    locate(&inner, x)?;
    locate(&inner, y)?;
    let wired = family.wired_truncation(k)?.network;
    free_resistance(&wired, locate(&wired, x)?, locate(&wired, y)?)
}

/// Free and wired resistance of one pair across a depth schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResistanceBracket {
    pub x: String,
    pub y: String,
    pub depths: Vec<usize>,
    pub wired_values: Vec<f64>,
    pub free_values: Vec<f64>,
    pub gap_tolerance: f64,
    pub converged: bool,
}

impl ResistanceBracket {
    pub fn final_wired(&self) -> f64 {
        *self.wired_values.last().unwrap()
    }

    pub fn final_free(&self) -> f64 {
        *self.free_values.last().unwrap()
    }

    pub fn width(&self) -> f64 {
        self.final_free() - self.final_wired()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("depth,wired,free,gap\n");
        for ((d, w), f) in self.depths.iter().zip(&self.wired_values).zip(&self.free_values) {
            writeln!(out, "{d},{w:.12},{f:.12},{:.12}", f - w).unwrap();
        }
        out
    }
}

/// Computes the bracket and enforces monotonicity in depth and `wired ≤ free`.
pub fn resistance_bracket(
    family: &Exhaustion,
    x: &str,
    y: &str,
    depths: &[usize],
) -> Result<ResistanceBracket> {
    if depths.is_empty() || depths.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "depths must be nonempty and strictly increasing".into(),
        ));
    }
    let pairs = depths
        .par_iter()
        .map(|&k| {
            Ok((
                wired_resistance_at_depth(family, k, x, y)?,
                free_resistance_at_depth(family, k, x, y)?,
            ))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let (wired_values, free_values): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    for i in 0..depths.len() {
        let slack = MONOTONE_SLACK * free_values[i].abs().max(1.0);
        if wired_values[i] > free_values[i] + slack {
            return Err(Error::MonotonicityViolated(format!(
                "wired {} exceeds free {} at depth {}",
                wired_values[i], free_values[i], depths[i]
            )));
        }
        if i > 0 {
            if wired_values[i] + slack < wired_values[i - 1] {
                return Err(Error::MonotonicityViolated(format!(
                    "wired value decreased at depth {}",
                    depths[i]
                )));
            }
            if free_values[i] > free_values[i - 1] + slack {
                return Err(Error::MonotonicityViolated(format!(
                    "free value increased at depth {}",
                    depths[i]
                )));
            }
        }
    }
    let (w, f) = (*wired_values.last().unwrap(), *free_values.last().unwrap());
    let converged = f == 0.0 || (f - w) / f < BRACKET_TOL;
    Ok(ResistanceBracket {
        x: x.to_string(),
        y: y.to_string(),
        depths: depths.to_vec(),
        wired_values,
        free_values,
        gap_tolerance: BRACKET_TOL,
        converged,
    })
}

/// Grounded monopole on a wired truncation.
#[derive(Debug, Clone)]
pub struct MonopoleSolution {
    /// The collapsed network, grounded at `ω`.
    pub network: Network,
    pub center: VertexId,
    /// Vanishes at the ground.
    pub values: VertexFunction,
    pub energy: f64,
}

/// Monopole at `x` on truncation `k` wired inside `k + 1`, vanishing at `ω`.
pub fn monopole_solve(family: &Exhaustion, k: usize, x: &str) -> Result<MonopoleSolution> {
    let collapse = family.wired_truncation(k)?;
    if collapse.boundary_empty {
        return Err(Error::MissingGround);
    }
    let network = collapse.network;
    let center = locate(&network, x)?;
    let gs = GroundedSystem::new(network.clone())?;
    let values = gs.monopole(center)?;
    let energy = energy(&network, &values, &values)?;
    Ok(MonopoleSolution {
        network,
        center,
        values,
        energy,
    })
}

/// Least-squares fit of `a + b/k + c/k²` to `(k, value)` samples; returns `a`.
/// Two samples fit `a + b/k` only.
pub fn extrapolate_in_depth(depths: &[usize], values: &[f64]) -> Result<f64> {
    if depths.len() != values.len() {
        return Err(Error::LengthMismatch {
            expected: depths.len(),
            found: values.len(),
        });
    }
    let terms = match depths.len() {
        0 | 1 => {
            return Err(Error::InvalidParameter(
                "extrapolation needs at least two depths".into(),
            ))
        }
        2 => 2,
        _ => 3,
    };
    let a = nalgebra::DMatrix::from_fn(depths.len(), terms, |i, j| {
        (depths[i] as f64).powi(-(j as i32))
    });
    let b = nalgebra::DVector::from_column_slice(values);
    let coef = a
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok(coef[0])
}

/// Splits `u` into `fin`, vanishing on `boundary`, and `harm`, which agrees with
/// `u` on `boundary` and is harmonic elsewhere.
pub fn royden_split_on(
    net: &Network,
    boundary: &[VertexId],
    u: &VertexFunction,
) -> Result<(VertexFunction, VertexFunction)> {
    let n = net.vertex_count();
    u.check_len(n)?;
    let mut fixed = vec![false; n];
    for &b in boundary {
        net.check_vertex(b)?;
        fixed[b] = true;
    }
    let harm = if boundary.is_empty() {
        VertexFunction::zeros(n)
    } else {
        dirichlet_solve(net, &fixed, u, &vec![0.0; n])?
    };
    Ok((u.sub(&harm), harm))
}

/// Royden split on truncation `k`, using the vertices with neighbours outside it as boundary.
pub fn royden_split(
    family: &Exhaustion,
    k: usize,
    u: &VertexFunction,
) -> Result<(VertexFunction, VertexFunction)> {
    let net = family.truncation(k)?;
    royden_split_on(&net, &family.boundary(k)?, u)
}

/// Returns `(sup_y |v(y)|, R^F(x, o))` where `v = w_x - w_o` is built from the
/// grounded monopoles on the wired truncation and normalised to vanish at `o`.
/// On a finite family the free dipole is used instead.
pub fn sup_norm_bound_check(family: &Exhaustion, k: usize, x: &str) -> Result<(f64, f64)> {
    let free = family.truncation(k)?;
    let o_label = free.label(free.origin());
    let xf = locate(&free, x)?;
    if xf == free.origin() {
        return Err(Error::SameVertex);
    }
    let r_free = free_resistance(&free, xf, free.origin())?;
    let collapse = family.wired_truncation(k)?;
    let sup = if collapse.boundary_empty {
        dipole_solve(&free, xf, free.origin())?.sup_norm()
    } else {
        let net = collapse.network;
        let gs = GroundedSystem::new(net.clone())?;
        let o = locate(&net, &o_label)?;
        let v = gs.monopole(locate(&net, x)?)?.sub(&gs.monopole(o)?);
        let v = v.shifted(-v[o]);
        v.sup_norm()
    };
    Ok((sup, r_free))
}
