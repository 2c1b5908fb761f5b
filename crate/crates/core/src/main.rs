use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;

use nanoloc::config::{ConfigError, ScenarioConfig};
use nanoloc::energy::harvest;
use nanoloc::harness::{run_sweep, run_trial_detailed, SweepResult};
use nanoloc::localization::LocationEstimate;
use nanoloc::report::{self, ReportError};
use nanoloc::routing::{
    build_wake_graph, plan_wakeup, route_vertices, select_route_to_surface, RoutingError, VertexId,
};
use nanoloc::geometry::NodeId;

#[derive(Parser)]
#[command(name = "nanoloc", version, about = "Nanonetwork localization simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured scenario for `trials` trials and write the per-iteration CSV.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Defaults to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep range × density; writes results.csv, summary.csv and heatmap.svg.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Communication ranges in cm, comma separated.
        #[arg(long, value_delimiter = ',')]
        ranges: Vec<f64>,
        /// Node densities per cm³, comma separated.
        #[arg(long, value_delimiter = ',')]
        densities: Vec<f64>,
        #[arg(long)]
        trials: Option<u32>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Localize trial 0, then route from a node to the surface and plan its wake-up beams.
    Route {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        node: u32,
    },
    /// Check a configuration file.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

enum Failure {
    Invalid(String),
    Io(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        if e.is_validation() {
            Failure::Invalid(e.to_string())
        } else {
            Failure::Io(e.to_string())
        }
    }
}

impl From<ReportError> for Failure {
    fn from(e: ReportError) -> Self {
        Failure::Io(e.to_string())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("NANOLOC_LOG", "warn")).init();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

/// `println!` that reports a closed or failing stdout instead of panicking.
macro_rules! say {
    ($($arg:tt)*) => {
        writeln!(std::io::stdout(), $($arg)*).map_err(|e| Failure::Io(format!("cannot write stdout: {e}")))?
    };
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Run { config, seed, out } => {
            let mut cfg = ScenarioConfig::load(&config)?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let result = run_sweep(&[cfg.comm_range_cm], &[cfg.density_per_cm3], &cfg)?;
            match out {
                Some(path) => report::emit_csv(&result, &path)?,
                None => std::io::stdout()
                    .write_all(report::csv_string(&result).as_bytes())
                    .map_err(|e| Failure::Io(format!("cannot write stdout: {e}")))?,
            }
            Ok(())
        }
        Command::Sweep {
            config,
            ranges,
            densities,
            trials,
            out,
        } => {
            let mut cfg = ScenarioConfig::load(&config)?;
            if let Some(t) = trials {
                cfg.trials = t;
                cfg.validate()?;
            }
            let ranges = if ranges.is_empty() { vec![cfg.comm_range_cm] } else { ranges };
            let densities = if densities.is_empty() { vec![cfg.density_per_cm3] } else { densities };
            info!("sweeping {} ranges x {} densities x {} trials", ranges.len(), densities.len(), cfg.trials);
            let result = run_sweep(&ranges, &densities, &cfg)?;
            write_sweep(&result, &out)
        }
        Command::Route { config, node } => {
            let cfg = ScenarioConfig::load(&config)?;
            route(&cfg, NodeId(node))
        }
        Command::Validate { config } => {
            ScenarioConfig::load(&config)?;
            say!("{}: ok", config.display());
            Ok(())
        }
    }
}

fn write_sweep(result: &SweepResult, dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("cannot create {}: {e}", dir.display())))?;
    report::emit_csv(result, &dir.join("results.csv"))?;
    report::emit_summary_csv(result, &dir.join("summary.csv"))?;
    report::emit_heatmap(result, &dir.join("heatmap.svg"))?;
    for c in &result.cells {
        say!(
            "range {} cm, density {}/cm3: median {} iterations over {} trials",
            report::format_sig(c.range_cm),
            report::format_sig(c.density_per_cm3),
            report::format_sig(c.median_terminal_iteration),
            c.trials
        );
    }
    Ok(())
}

fn route(cfg: &ScenarioConfig, node: NodeId) -> Result<(), Failure> {
    let outcome = run_trial_detailed(cfg, 0)?;
    let state = &outcome.state;
    if state.node_set().get(node).is_none() {
        return Err(Failure::Invalid(format!(
            "node {node} does not exist (trial 0 has {} nodes)",
            state.node_set().len()
        )));
    }
    let estimates: Vec<LocationEstimate> = state.estimates().cloned().collect();
    if state.estimate(node).is_none() {
        return Err(Failure::Invalid(format!("node {node} was never localized")));
    }

    // every node harvests from the initial level at its physical position
    let profile = cfg.harvest_profile();
    let initial = cfg.initial_energy();
    let energy_of = |id: NodeId| {
        let p = state.node_set().get(id).expect("estimate of a placed node").position;
        harvest(initial, &profile, p, cfg.harvest_duration_s).stored()
    };
    let region = cfg.region().map_err(|e| Failure::Invalid(e.to_string()))?;
    let anchors = region.boundary_anchors(cfg.anchor_count);
    let vertices = route_vertices(&estimates, energy_of, &anchors);
    let graph = build_wake_graph(vertices, &cfg.channel(), &cfg.routing())
        .map_err(|e| Failure::Invalid(e.to_string()))?;
    info!("wake graph: {} vertices, {} edges", graph.vertices().len(), graph.edge_count());

    let route = select_route_to_surface(&graph, VertexId::Node(node))
        .map_err(|e| Failure::Invalid(e.to_string()))?;
    say!("route cost {} dB over {} hops", report::format_sig(route.cost), route.hops.len() - 1);
    for hop in &route.hops {
        let v = graph.vertex(*hop).expect("route vertex in graph");
        say!(
            "  {hop}  at ({}, {}) mm",
            report::format_sig(v.position.x),
            report::format_sig(v.position.y)
        );
    }

    let relay_nodes: Vec<NodeId> = route
        .hops
        .iter()
        .filter_map(|h| match h {
            VertexId::Node(id) => Some(*id),
            VertexId::Anchor(_) => None,
        })
        .collect();
    say!("wake-up plan:");
    for id in relay_nodes {
        let planned = plan_wakeup(
            &[id],
            &estimates,
            region,
            cfg.wake_half_width_deg.to_radians(),
            cfg.wake_min_half_width_deg.to_radians(),
        );
        match planned {
            Ok(plan) => {
                let hop = &plan.hops[0];
                let origins: Vec<String> = hop
                    .beams
                    .iter()
                    .map(|b| format!("({}, {})", report::format_sig(b.origin().x), report::format_sig(b.origin().y)))
                    .collect();
                say!(
                    "  node {id}: half width {} deg from {}",
                    report::format_sig(hop.half_width.to_degrees()),
                    origins.join(" and ")
                );
            }
            Err(RoutingError::Ambiguous { others, .. }) => {
                say!("  node {id}: not individually addressable, {others} other node(s) share the narrowest beams")
            }
            Err(e) => return Err(Failure::Invalid(e.to_string())),
        }
    }
    Ok(())
}
