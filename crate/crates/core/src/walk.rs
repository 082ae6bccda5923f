//! The reversible random walk with transition probabilities `c_xy / c(x)`:
//! exact escape probabilities, Monte Carlo estimates, and the walk formula
//! for effective resistance.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{Network, VertexFunction, VertexId};
use crate::operators::dirichlet_solve;

/// Chains up to this many transient states are solved by dense LU.
pub const DENSE_CHAIN_CAP: usize = 2000;

pub const DEFAULT_STEP_CAP: usize = 1_000_000;

/// `p(x, y) = c_xy / c(x)`.
pub fn transition_prob(net: &Network, x: VertexId, y: VertexId) -> Result<f64> {
    net.check_vertex(y)?;
    let cx = net.net_conductance(x)?;
    if cx == 0.0 {
        return Err(Error::IsolatedVertex(x));
    }
    Ok(net.conductance(x, y) / cx)
}

/// Which vertices end an excursion from `o` as a failure besides `o` itself.
fn failure_set(net: &Network, o: VertexId, x: VertexId, absorb_at_ground: bool) -> Result<Vec<bool>> {
    net.check_vertex(o)?;
    net.check_vertex(x)?;
    if o == x {
        return Err(Error::SameVertex);
    }
    let mut fail = vec![false; net.vertex_count()];
    if absorb_at_ground {
        let g = net.ground().ok_or(Error::MissingGround)?;
        if g == o || g == x {
            return Err(Error::InvalidParameter(
                "the absorbing ground must differ from both endpoints".into(),
            ));
        }
        fail[g] = true;
    }
    Ok(fail)
}

/// `P_o(τ_x < τ_o⁺)` from the harmonic potential that is `1` at `x` and `0`
/// at `o`: one step from `o`, then the potential.
pub fn hitting_probability_exact(net: &Network, o: VertexId, x: VertexId) -> Result<f64> {
    hitting_probability_potential(net, o, x, false)
}

/// Potential-based escape probability. With `absorb_at_ground` the walk also
/// fails on reaching the designated ground.
pub fn hitting_probability_potential(
    net: &Network,
    o: VertexId,
    x: VertexId,
    absorb_at_ground: bool,
) -> Result<f64> {
    let mut fixed = failure_set(net, o, x, absorb_at_ground)?;
    fixed[o] = true;
    fixed[x] = true;
    let n = net.vertex_count();
    let h = dirichlet_solve(net, &fixed, &VertexFunction::delta(n, x), &vec![0.0; n])?;
    let co = net.net_conductance(o)?;
    Ok(net.neighbors(o).iter().map(|&(y, c)| c / co * h[y]).sum())
}

/// Escape probability from the absorbing-chain system `(I - Q) h = b` on the
/// transient states, where `b(y) = p(y, x)`. Independent of the potential solve.
pub fn hitting_probability_chain(
    net: &Network,
    o: VertexId,
    x: VertexId,
    absorb_at_ground: bool,
) -> Result<f64> {
    let fail = failure_set(net, o, x, absorb_at_ground)?;
    let n = net.vertex_count();
    let transient: Vec<VertexId> = (0..n).filter(|&y| y != o && y != x && !fail[y]).collect();
    let mut index = vec![usize::MAX; n];
    for (i, &y) in transient.iter().enumerate() {
        index[y] = i;
    }
    let t = transient.len();
    let mut h = vec![0.0; t];
    if t > 0 {
        let mut b = vec![0.0; t];
        for (i, &y) in transient.iter().enumerate() {
            b[i] = transition_prob(net, y, x)?;
        }
        if t <= DENSE_CHAIN_CAP {
            let mut a = DMatrix::<f64>::identity(t, t);
            for (i, &y) in transient.iter().enumerate() {
                let cy = net.net_conductance(y)?;
                for &(z, c) in net.neighbors(y) {
                    if index[z] != usize::MAX {
                        a[(i, index[z])] -= c / cy;
                    }
                }
            }
            let sol = a
                .lu()
                .solve(&DVector::from_vec(b))
                .ok_or(Error::SingularMatrix)?;
            h.copy_from_slice(sol.as_slice());
        } else {
            gauss_seidel(net, &transient, &index, &b, &mut h)?;
        }
    }
    let mut p = transition_prob(net, o, x)?;
    for &(y, _) in net.neighbors(o) {
        if index[y] != usize::MAX {
            p += transition_prob(net, o, y)? * h[index[y]];
        }
    }
    Ok(p)
}

fn gauss_seidel(
    net: &Network,
    transient: &[VertexId],
    index: &[usize],
    b: &[f64],
    h: &mut [f64],
) -> Result<()> {
    let conductances: Vec<f64> = transient
        .iter()
        .map(|&y| net.net_conductance(y))
        .collect::<Result<_>>()?;
    for sweep in 0..200_000 {
        let mut change = 0.0f64;
        for (i, &y) in transient.iter().enumerate() {
            let mut v = b[i];
            for &(z, c) in net.neighbors(y) {
                if index[z] != usize::MAX {
                    v += c / conductances[i] * h[index[z]];
                }
            }
            change = change.max((v - h[i]).abs());
            h[i] = v;
        }
        if change < 1e-15 {
            return Ok(());
        }
        if sweep == 199_999 {
            return Err(Error::MaxIterExceeded {
                iterations: sweep + 1,
                rel_residual: change,
                best: h.to_vec(),
            });
        }
    }
    Ok(())
}

/// `1 / (c(o) P_o(τ_x < τ_o⁺))`.
pub fn resistance_via_walk(net: &Network, o: VertexId, x: VertexId) -> Result<f64> {
    let p = hitting_probability_exact(net, o, x)?;
    Ok(1.0 / (net.net_conductance(o)? * p))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub episodes: usize,
    pub step_cap: usize,
    pub seed: u64,
    pub absorb_at_ground: bool,
}

impl McConfig {
    pub fn new(episodes: usize, seed: u64) -> Self {
        McConfig {
            episodes,
            step_cap: DEFAULT_STEP_CAP,
            seed,
            absorb_at_ground: false,
        }
    }
}

/// Monte Carlo estimate of an escape probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkEstimate {
    /// `successes / (episodes - truncated)`.
    pub p_hat: f64,
    pub ci95: f64,
    pub episodes: usize,
    pub successes: usize,
    pub failures: usize,
    /// Episodes stopped by the step cap; excluded from `p_hat`.
    pub truncated: usize,
    pub seed: u64,
}

impl WalkEstimate {
    pub fn truncated_fraction(&self) -> f64 {
        self.truncated as f64 / self.episodes as f64
    }

    /// True when `exact` lies within `k` half-widths of the estimate.
    pub fn covers(&self, exact: f64, k: f64) -> bool {
        (self.p_hat - exact).abs() <= k * self.ci95
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("estimate serializes")
    }
}

#[derive(Clone, Copy)]
enum Outcome {
    Success,
    Failure,
    Truncated,
}

/// Simulates excursions from `o` until they reach `x` (success), return to `o`
/// or an absorbing ground (failure), or exceed the step cap. Episode `i` draws
/// from its own ChaCha stream `(seed, i)`, so the result does not depend on
/// scheduling.
pub fn hitting_probability_mc(
    net: &Network,
    o: VertexId,
    x: VertexId,
    cfg: &McConfig,
) -> Result<WalkEstimate> {
    let fail = failure_set(net, o, x, cfg.absorb_at_ground)?;
    if cfg.episodes < 100 {
        return Err(Error::InvalidParameter("at least 100 episodes are required".into()));
    }
    let n = net.vertex_count();
    let mut cumulative: Vec<Vec<(f64, VertexId)>> = Vec::with_capacity(n);
    for y in 0..n {
        let cy = net.net_conductance(y)?;
        let mut acc = 0.0;
        let mut row: Vec<(f64, VertexId)> = net
            .neighbors(y)
            .iter()
            .map(|&(z, c)| {
                acc += c / cy;
                (acc, z)
            })
            .collect();
        if let Some(last) = row.last_mut() {
            last.0 = f64::INFINITY;
        }
        cumulative.push(row);
    }
    let step = |rng: &mut ChaCha8Rng, y: VertexId| -> VertexId {
        let row = &cumulative[y];
        let u: f64 = rng.random();
        let k = row.partition_point(|&(c, _)| c <= u);
        row[k.min(row.len() - 1)].1
    };
    let episode = |i: usize| -> Outcome {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(i as u64);
        let mut y = o;
        for _ in 0..cfg.step_cap {
            y = step(&mut rng, y);
            if y == x {
                return Outcome::Success;
            }
            if y == o || fail[y] {
                return Outcome::Failure;
            }
        }
        Outcome::Truncated
    };
    let (successes, failures, truncated) = (0..cfg.episodes)
        .into_par_iter()
        .map(|i| match episode(i) {
            Outcome::Success => (1usize, 0usize, 0usize),
            Outcome::Failure => (0, 1, 0),
            Outcome::Truncated => (0, 0, 1),
        })
        .reduce(|| (0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    let effective = cfg.episodes - truncated;
    let (p_hat, ci95) = if effective == 0 {
        (0.0, 1.0)
    } else {
        let p = successes as f64 / effective as f64;
        (p, 1.96 * (p * (1.0 - p) / effective as f64).sqrt())
    };
    Ok(WalkEstimate {
        p_hat,
        ci95,
        episodes: cfg.episodes,
        successes,
        failures,
        truncated,
        seed: cfg.seed,
    })
}

/// Largest `|c(x) p(x,y) - c(y) p(y,x)|` over edges.
pub fn detailed_balance_defect(net: &Network) -> Result<f64> {
    let mut worst = 0.0f64;
    for e in net.edges() {
        let a = net.net_conductance(e.u)? * transition_prob(net, e.u, e.v)?;
        let b = net.net_conductance(e.v)? * transition_prob(net, e.v, e.u)?;
        worst = worst.max((a - b).abs());
    }
    Ok(worst)
}
