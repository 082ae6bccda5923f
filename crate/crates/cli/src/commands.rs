use std::fs;
use std::path::Path;

use serde_json::{json, Value};
use thiserror::Error;

use resnet_core::lattice::{self, ProbeKind, TorusQuadrature};
use resnet_core::network::{complete_graph, parse_lattice_point, path_graph};
use resnet_core::spectral::{self, GroundedSpectrum};
use resnet_core::verify::{self, VerifyOptions};
use resnet_core::walk::{self, McConfig};
use resnet_core::{free_resistance, resistance_bracket, Exhaustion, GroundedSystem, Network, VertexFunction};

use crate::args::{
    Ell2Kind, GenerateArgs, LatticeArgs, ResistanceArgs, Source, SpectralArgs, VerifyArgs, WalkArgs,
};

/// Agreement required between the two exact walk solvers and the resistance identity.
const WALK_IDENTITY_TOL: f64 = 1e-9;
/// Allowed deviation of a spectral measure's total mass from `‖ξ‖²`.
const MEASURE_TOTAL_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] resnet_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }

    /// Variant name of the underlying error.
    pub fn kind(&self) -> String {
        match self {
            CliError::Usage(_) => "Usage".into(),
            CliError::Io { .. } => "Io".into(),
            CliError::Core(e) => format!("{e:?}")
                .chars()
                .take_while(|c| c.is_alphanumeric())
                .collect(),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// What a command produced: the JSON body, CSV side files and whether every
/// checked property held.
pub struct Outcome {
    pub inputs: Value,
    pub outputs: Value,
    pub provenance: Value,
    pub csv: Vec<(&'static str, String)>,
    pub ok: bool,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn measured(value: f64, tolerance: f64, converged: bool) -> Value {
    json!({ "value": value, "tolerance": tolerance, "converged": converged })
}

impl Source {
    pub fn family(&self) -> CliResult<Exhaustion> {
        if let Some(d) = self.lattice {
            if d == 0 {
                return Err(usage("--lattice needs a positive dimension"));
            }
            return Ok(Exhaustion::Lattice { dim: d });
        }
        if self.tree {
            return Ok(Exhaustion::BinaryTree);
        }
        if let Some(n) = self.path {
            return Ok(Exhaustion::Finite(path_graph(n).map_err(|e| usage(e.to_string()))?));
        }
        if self.k3 {
            return Ok(Exhaustion::Finite(complete_graph(3)?));
        }
        if let Some(n) = self.complete {
            return Ok(Exhaustion::Finite(complete_graph(n).map_err(|e| usage(e.to_string()))?));
        }
        if let Some(path) = &self.network {
            let text = fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.display().to_string(),
                source,
            })?;
            return Ok(Exhaustion::Finite(Network::from_json(&text)?));
        }
        if let Some(spec) = &self.family {
            return Exhaustion::parse(spec).map_err(|e| usage(e.to_string()));
        }
        Err(usage("no network source given"))
    }
}

fn finite_or_depth(family: &Exhaustion, depth: Option<usize>, wired: bool) -> CliResult<Network> {
    if let Exhaustion::Finite(net) = family {
        return Ok(net.clone());
    }
    let k = depth.ok_or_else(|| usage(format!("--depth is required for {}", family.name())))?;
    Ok(if wired {
        family.wired_truncation(k)?.network
    } else {
        family.truncation(k)?
    })
}

fn locate(net: &Network, label: &str) -> CliResult<usize> {
    net.vertex_by_label(label)
        .map_err(|_| usage(format!("no vertex labelled {label:?} in this network")))
}

pub fn resistance(args: &ResistanceArgs) -> CliResult<Outcome> {
    let family = args.source.family()?;
    let (x, y) = (&args.pair[0], &args.pair[1]);
    let bracket = resistance_bracket(&family, x, y, &args.depths)?;
    let mut outputs = json!({
        "wired": measured(bracket.final_wired(), bracket.gap_tolerance, bracket.converged),
        "free": measured(bracket.final_free(), bracket.gap_tolerance, bracket.converged),
        "width": bracket.width(),
        "closed": bracket.converged,
        "bracket": bracket,
    });
    let mut ok = true;
    if let Some(gamma) = args.gap {
        let bound = spectral::gap_resistance_bound(gamma)?;
        let holds = bracket.final_wired() <= bound;
        ok &= holds;
        outputs["gap_bound"] = json!({ "gamma": gamma, "two_over_gamma": bound, "wired_within_bound": holds });
    }
    Ok(Outcome {
        inputs: json!({ "family": family.name(), "pair": [x, y], "depths": args.depths }),
        outputs,
        provenance: json!({ "depths": args.depths, "gap_tolerance": bracket.gap_tolerance }),
        csv: vec![("bracket.csv", bracket.to_csv())],
        ok,
    })
}

fn measure_ground(net: &Network, family: &Exhaustion, ground: Option<&str>) -> CliResult<usize> {
    if let Some(label) = ground {
        return locate(net, label);
    }
    if let Some(g) = net.ground() {
        return Ok(g);
    }
    match family {
        Exhaustion::Finite(_) => Ok(net.vertex_count() - 1),
        _ => Err(usage("truncation has no ground vertex")),
    }
}

pub fn spectral(args: &SpectralArgs) -> CliResult<Outcome> {
    let family = args.source.family()?;
    let mut outputs = json!({});
    let mut csv = Vec::new();
    let mut ok = true;
    if let Some(depths) = &args.depths {
        let study = spectral::dirichlet_gap(&family, depths, args.seed)?;
        let last = *study.lambda_min.last().unwrap();
        ok &= study.monotone;
        outputs["gap"] = json!({
            "label": study.label,
            "depths": study.depths,
            "lambda_min": study.lambda_min,
            "residual_bounds": study.lanczos.iter().map(|e| e.residual_bound).collect::<Vec<_>>(),
            "monotone": study.monotone,
            "resistance_bound": spectral::gap_resistance_bound(last).ok(),
        });
        csv.push(("gap.csv", study.to_csv()));
    }
    if let Some(m) = &args.measure {
        if m[0] != "delta" {
            return Err(usage(format!("unsupported measure source {:?}; expected delta", m[0])));
        }
        let net = finite_or_depth(&family, args.depth, true)?;
        let g = measure_ground(&net, &family, args.ground.as_deref())?;
        let p = locate(&net, &m[1])?;
        if p == g {
            return Err(usage("the measure source sits on the ground vertex"));
        }
        let gs = GroundedSystem::at(&net, g)?;
        let xi = VertexFunction::delta(net.vertex_count(), p);
        let spectrum = GroundedSpectrum::new(&gs)?;
        let mu = spectrum.measure(&xi)?;
        let rn = spectrum.radon_nikodym_deviation(&xi)?;
        let total_ok = (mu.total - 1.0).abs() <= MEASURE_TOTAL_TOL;
        ok &= total_ok;
        outputs["measure"] = json!({
            "source": format!("delta {}", m[1]),
            "ground": net.label(g),
            "atoms": mu.atoms.len(),
            "total": measured(mu.total, MEASURE_TOTAL_TOL, total_ok),
            "green_value": mu.integrate(|l| 1.0 / l),
            "radon_nikodym_deviation": rn,
        });
        csv.push(("measure.csv", mu.to_csv()));
    }
    Ok(Outcome {
        inputs: json!({
            "family": family.name(),
            "depths": args.depths,
            "measure": args.measure,
            "depth": args.depth,
        }),
        outputs,
        provenance: json!({ "seed": args.seed, "lanczos_iterations": spectral::GAP_LANCZOS_ITERS }),
        csv,
        ok,
    })
}

fn point(d: usize, s: &str) -> CliResult<Vec<i64>> {
    let p = parse_lattice_point(s).map_err(|e| usage(e.to_string()))?;
    if p.len() != d {
        return Err(usage(format!("point {s:?} does not have {d} coordinates")));
    }
    Ok(p)
}

fn quadrature(args: &LatticeArgs) -> CliResult<TorusQuadrature> {
    let mut q = TorusQuadrature::new(args.d).map_err(|e| usage(e.to_string()))?;
    if let Some(grid) = args.grid {
        q = q.with_grid(grid, args.refinements).map_err(|e| usage(e.to_string()))?;
    }
    if let Some(tol) = args.tolerance {
        q = q.with_tolerance(tol).map_err(|e| usage(e.to_string()))?;
    }
    Ok(q)
}

pub fn lattice(args: &LatticeArgs) -> CliResult<Outcome> {
    let d = args.d;
    let q = quadrature(args)?;
    let mut ok = true;
    let mut csv = Vec::new();
    let (operation, outputs) = if let Some(pair) = &args.resistance {
        let (x, y) = (point(d, &pair[0])?, point(d, &pair[1])?);
        ("resistance", json!({ "resistance": lattice::lattice_resistance(&q, &x, &y)? }))
    } else if let Some(pair) = &args.dipole {
        let (x, y) = (point(d, &pair[0])?, point(d, &pair[1])?);
        (
            "dipole",
            json!({
                "dipole": lattice::lattice_dipole_value(&q, &x, &y)?,
                "dipole_normalized": lattice::lattice_dipole_value_normalized(&q, &x, &y)?,
            }),
        )
    } else if let Some(x) = &args.monopole {
        let x = point(d, x)?;
        ("monopole", json!({ "monopole": lattice::lattice_monopole_value(&q, &x)? }))
    } else if args.monopole_energy {
        ("monopole_energy", json!({ "monopole_energy": lattice::monopole_energy(&q)? }))
    } else if args.transience {
        let report = lattice::transience_probe(d)?;
        ok &= report.consistent();
        let mut table = String::from("grid,value\n");
        for (g, v) in report.grids.iter().zip(&report.values) {
            table.push_str(&format!("{g},{v:.12}\n"));
        }
        csv.push(("transience.csv", table));
        ("transience", json!({ "transience": report, "consistent": ok }))
    } else if let Some(kind) = args.ell2 {
        let kind = match kind {
            Ell2Kind::Dipole => ProbeKind::Dipole,
            Ell2Kind::Monopole => ProbeKind::Monopole,
        };
        let report = lattice::ell2_membership_probe(kind, d, &args.radii)?;
        let mut table = String::from("radius,partial_sum\n");
        for (r, s) in report.radii.iter().zip(&report.partial_sums) {
            table.push_str(&format!("{r},{s:.12}\n"));
        }
        csv.push(("ell2.csv", table));
        ("ell2", json!({ "ell2": report }))
    } else {
        return Err(usage("no lattice operation given"));
    };
    Ok(Outcome {
        inputs: json!({ "d": d, "operation": operation }),
        outputs,
        provenance: json!({ "quadrature": q, "grids": q.grids() }),
        csv,
        ok,
    })
}

pub fn walk(args: &WalkArgs) -> CliResult<Outcome> {
    let family = args.source.family()?;
    let net = finite_or_depth(&family, args.depth, true)?;
    let (o, x) = (locate(&net, &args.pair[0])?, locate(&net, &args.pair[1])?);
    if o == x {
        return Err(usage("start and target must differ"));
    }
    if args.absorb_at_ground && net.ground().is_none() {
        return Err(usage("--absorb-at-ground needs a wired truncation"));
    }
    let absorb = args.absorb_at_ground;
    let potential = walk::hitting_probability_potential(&net, o, x, absorb)?;
    let chain = walk::hitting_probability_chain(&net, o, x, absorb)?;
    let solvers_agree = (potential - chain).abs() <= WALK_IDENTITY_TOL * potential.max(1e-300);
    let mut ok = solvers_agree;
    let mut outputs = json!({
        "exact": measured(potential, WALK_IDENTITY_TOL, solvers_agree),
        "exact_chain": chain,
    });
    if !absorb {
        let r = free_resistance(&net, x, o)?;
        let via_walk = 1.0 / (net.net_conductance(o)? * potential);
        let holds = (via_walk - r).abs() <= WALK_IDENTITY_TOL * r;
        ok &= holds;
        outputs["resistance"] = measured(r, WALK_IDENTITY_TOL, true);
        outputs["resistance_via_walk"] = measured(via_walk, WALK_IDENTITY_TOL, holds);
    }
    let cfg = McConfig {
        episodes: args.episodes,
        step_cap: args.step_cap,
        seed: args.seed,
        absorb_at_ground: absorb,
    };
    let mc = walk::hitting_probability_mc(&net, o, x, &cfg)?;
    outputs["monte_carlo"] = json!({
        "p_hat": mc.p_hat,
        "ci95": mc.ci95,
        "episodes": mc.episodes,
        "truncated": mc.truncated,
        "seed": mc.seed,
        "within_3_ci95": mc.covers(potential, 3.0),
    });
    Ok(Outcome {
        inputs: json!({
            "family": family.name(),
            "pair": args.pair,
            "depth": args.depth,
            "absorb_at_ground": absorb,
        }),
        outputs,
        provenance: json!({ "monte_carlo": cfg, "exact_tolerance": WALK_IDENTITY_TOL }),
        csv: Vec::new(),
        ok,
    })
}

pub fn verify(args: &VerifyArgs) -> CliResult<Outcome> {
    let report = verify::run_suite(VerifyOptions {
        module: args.module.clone(),
        inject_fault: args.inject_fault,
    });
    let ok = report.passed;
    Ok(Outcome {
        inputs: json!({ "module": args.module, "inject_fault": args.inject_fault }),
        outputs: json!({ "passed": report.passed, "total": report.total, "failed": report.failed, "checks": report.checks }),
        provenance: json!({ "fixtures": verify::stock_fixtures().iter().map(|(n, _)| n.clone()).collect::<Vec<_>>() }),
        csv: Vec::new(),
        ok,
    })
}

pub fn generate(args: &GenerateArgs) -> CliResult<String> {
    let family = args.source.family()?;
    Ok(finite_or_depth(&family, args.depth, args.wired)?.to_json())
}

pub fn write_csv(dir: &Path, files: &[(&'static str, String)]) -> CliResult<()> {
    let io = |source| CliError::Io {
        path: dir.display().to_string(),
        source,
    };
    fs::create_dir_all(dir).map_err(io)?;
    for (name, body) in files {
        fs::write(dir.join(name), body).map_err(|source| CliError::Io {
            path: dir.join(name).display().to_string(),
            source,
        })?;
    }
    Ok(())
}
