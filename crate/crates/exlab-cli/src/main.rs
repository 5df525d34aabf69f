//! `exlab` binary: network reduction, verification batches, spectral gaps,
//! gasket tables, and exclusion-process simulation from the command line.
//!
//! Exit codes: 0 success / all checks pass, 1 failed verification, 2 usage
//! error.

use std::io::{IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use exlab::network::{effective_resistance, reduce_to, Network};
use exlab::report::{BatchSummary, VerificationReport};
use exlab::resistance::effective_resistance_oracle;
use exlab::sg::sg_graph;
use exlab::sim::{simulate, InitialLaw, SimConfig};
use exlab::spectral::{gap_exclusion, gap_interchange, gap_random_walk, GapResult};
use exlab::states::ExclusionConfig;
use exlab::suite::{run_selector, run_sg_scaling, Selector, SuiteOptions};
use exlab::WeightedGraph;

#[derive(Parser)]
#[command(name = "exlab", version, about = "electric networks, exclusion processes, and their inequalities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Where reports go; stdout if omitted.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// jsonl, csv, or table; default picks table on a terminal.
    #[arg(long, global = true, value_enum, default_value_t = Format::Auto)]
    format: Format,
    /// Upper bound on worker threads (env MPL_LAB_THREADS as fallback).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Auto,
    Jsonl,
    Csv,
    Table,
}

#[derive(Subcommand)]
enum Command {
    /// Effective resistance between two vertices, by star-mesh reduction.
    Resistance {
        #[arg(long)]
        graph: PathBuf,
        /// The two terminal vertices.
        #[arg(long, num_args = 2)]
        pair: Vec<usize>,
        /// Cross-check against the grounded-Laplacian solve.
        #[arg(long)]
        oracle: bool,
        /// Print the reduction trace as JSON.
        #[arg(long)]
        trace: bool,
    },
    /// Reduce a network onto a set of kept vertices; emits the audit trail.
    Reduce {
        #[arg(long)]
        graph: PathBuf,
        /// Comma-separated vertex ids to keep.
        #[arg(long, value_delimiter = ',', required = true)]
        keep: Vec<usize>,
    },
    /// Run a verification batch.
    Verify {
        /// mpl, ip-mpl, octopus, dirichlet, identity-2.2, projection-4.7,
        /// decomposition-4.9, sweep, assumption-a, optimal, aldous,
        /// sg-scaling, resistance, stationarity, or all.
        selector: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Instance count; defaults to the documented batch size.
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        /// Deepest gasket level for sg-scaling.
        #[arg(long, default_value_t = 6)]
        max_level: usize,
        /// Skip the K_7 interchange eigensolve in the aldous batch.
        #[arg(long)]
        no_k7: bool,
        /// Check a fixed graph instead of the random batch (mpl, ip-mpl,
        /// octopus, dirichlet, identity-2.2 only).
        #[arg(long)]
        graph: Option<PathBuf>,
    },
    /// Spectral gaps of the random-walk, exclusion, and interchange chains.
    Spectral {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_enum, default_value_t = ProcessKind::All)]
        process: ProcessKind,
        /// Particle count for the exclusion gap; all sectors if omitted.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Sierpinski gasket graphs and their resistance scaling.
    Sg {
        #[arg(long)]
        level: usize,
        /// Emit the same-cell scaling table up to this level.
        #[arg(long)]
        scaling: bool,
        /// Write the graph as an edge list instead of the summary.
        #[arg(long)]
        emit_graph: bool,
    },
    /// Simulate the (boundary-driven) exclusion process.
    Simulate {
        #[arg(long, conflicts_with = "sg_level")]
        graph: Option<PathBuf>,
        #[arg(long)]
        sg_level: Option<usize>,
        /// Bernoulli density for the initial configuration.
        #[arg(long, conflicts_with = "occupied")]
        alpha: Option<f64>,
        /// Comma-separated initially occupied vertices.
        #[arg(long, value_delimiter = ',')]
        occupied: Option<Vec<usize>>,
        /// Time horizon.
        #[arg(long, default_value_t = 10.0)]
        t: f64,
        /// Edge-rate acceleration factor.
        #[arg(long, default_value_t = 1.0)]
        accel: f64,
        /// Boundary reservoir "vertex:lambda_plus,lambda_minus"; repeatable.
        #[arg(long)]
        boundary: Vec<String>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Snapshot interval.
        #[arg(long)]
        record_every: Option<f64>,
        /// Write the event list as CSV to this file.
        #[arg(long)]
        events_csv: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProcessKind {
    Rw,
    Ex,
    Ip,
    All,
}

/// Anything that should terminate with a usage error.
struct UsageError(String);

fn load_graph(path: &Path) -> Result<WeightedGraph, UsageError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| UsageError(format!("cannot read {}: {e}", path.display())))?;
    let parsed = if path.extension().is_some_and(|e| e == "json") {
        WeightedGraph::from_json(&text)
    } else {
        WeightedGraph::from_edge_list_text(&text)
    };
    parsed.map_err(|e| UsageError(format!("{}: {e}", path.display())))
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Run manifest on stderr: enough to reproduce the invocation byte-for-byte.
fn emit_manifest(subcommand: &str, flags: &str, seed: u64, inputs: &[(String, u64)], start: Instant) {
    let inputs: Vec<String> = inputs
        .iter()
        .map(|(name, digest)| format!("{{\"file\":{name:?},\"fnv1a\":\"{digest:016x}\"}}"))
        .collect();
    eprintln!(
        "{{\"manifest\":{{\"subcommand\":{subcommand:?},\"flags\":{flags:?},\"seed\":{seed},\
         \"version\":{:?},\"inputs\":[{}],\"wall_ms\":{}}}}}",
        env!("CARGO_PKG_VERSION"),
        inputs.join(","),
        start.elapsed().as_millis()
    );
}

struct Sink {
    out: Box<dyn Write>,
    format: Format,
}

impl Sink {
    fn new(output: &Option<PathBuf>, format: Format) -> Result<Self, UsageError> {
        let out: Box<dyn Write> = match output {
            Some(path) => Box::new(
                std::fs::File::create(path)
                    .map_err(|e| UsageError(format!("cannot create {}: {e}", path.display())))?,
            ),
            None => Box::new(std::io::stdout()),
        };
        let format = match format {
            Format::Auto => {
                if output.is_none() && std::io::stdout().is_terminal() {
                    Format::Table
                } else {
                    Format::Jsonl
                }
            }
            f => f,
        };
        Ok(Sink { out, format })
    }

    fn reports(&mut self, reports: &[VerificationReport]) -> std::io::Result<()> {
        match self.format {
            Format::Jsonl => {
                for r in reports {
                    writeln!(self.out, "{}", r.to_json_line())?;
                }
            }
            Format::Csv => {
                writeln!(self.out, "{}", BatchSummary::csv_header())?;
                for s in summarize(reports) {
                    writeln!(self.out, "{}", s.to_csv_line())?;
                }
            }
            Format::Table | Format::Auto => {
                writeln!(
                    self.out,
                    "{:<32} {:>9} {:>9}  {:>13}",
                    "check", "instances", "passes", "min margin"
                )?;
                for s in summarize(reports) {
                    writeln!(
                        self.out,
                        "{:<32} {:>9} {:>9}  {:>13.3e}",
                        s.name, s.instances, s.passes, s.min_margin
                    )?;
                }
            }
        }
        Ok(())
    }

    fn line(&mut self, s: &str) -> std::io::Result<()> {
        writeln!(self.out, "{s}")
    }
}

fn summarize(reports: &[VerificationReport]) -> Vec<BatchSummary> {
    let mut order: Vec<&str> = Vec::new();
    for r in reports {
        if !order.contains(&r.name.as_str()) {
            order.push(&r.name);
        }
    }
    order
        .into_iter()
        .map(|name| {
            let group: Vec<VerificationReport> =
                reports.iter().filter(|r| r.name == name).cloned().collect();
            BatchSummary::from_reports(name, &group)
        })
        .collect()
}

fn parse_boundary(specs: &[String]) -> Result<Vec<(usize, f64, f64)>, UsageError> {
    specs
        .iter()
        .map(|s| {
            let err = || UsageError(format!("boundary spec '{s}' is not 'vertex:lp,lm'"));
            let (v, rates) = s.split_once(':').ok_or_else(err)?;
            let (lp, lm) = rates.split_once(',').ok_or_else(err)?;
            Ok((
                v.trim().parse().map_err(|_| err())?,
                lp.trim().parse().map_err(|_| err())?,
                lm.trim().parse().map_err(|_| err())?,
            ))
        })
        .collect()
}

/// Fixed-graph verification for the selectors that admit one.
fn verify_fixed_graph(
    sel: Selector,
    g: &WeightedGraph,
    seed: u64,
    trials: usize,
    tol: f64,
) -> Result<Vec<VerificationReport>, exlab::ExlabError> {
    use exlab::lab::{check_ip_mpl, check_mpl, check_octopus};
    use exlab::resistance::{check_dirichlet_principle, check_energy_identity, VertexFunction};
    use exlab::states::{PermSpace, StateSpace};
    use exlab::suite::random_state_function;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = g.n();
    let mut reports = Vec::new();
    for _ in 0..trials {
        let x = rng.gen_range(0..n);
        let y = (x + rng.gen_range(1..n)) % n;
        match sel {
            Selector::Mpl => {
                let f = random_state_function(1 << n, &mut rng);
                reports.push(check_mpl(g, 0.5, x, y, &f, tol)?);
            }
            Selector::IpMpl => {
                let f = random_state_function(PermSpace::new(n)?.size(), &mut rng);
                reports.push(check_ip_mpl(g, x, y, &f, tol)?);
            }
            Selector::Octopus => {
                let f = random_state_function(PermSpace::new(n)?.size(), &mut rng);
                reports.push(check_octopus(g, x, &f, tol)?);
            }
            Selector::Identity => {
                let f = VertexFunction((0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect());
                reports.push(check_energy_identity(g, x, &f, tol));
            }
            Selector::Dirichlet => {
                let mut h =
                    VertexFunction((0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect());
                h.0[x] = 1.0;
                h.0[y] = 0.0;
                reports.push(check_dirichlet_principle(g, x, y, &h, tol)?);
            }
            _ => {
                return Err(exlab::ExlabError::InvalidInput(
                    "this selector does not take a fixed graph".into(),
                ))
            }
        }
    }
    Ok(reports)
}

fn run(cli: Cli) -> Result<i32, UsageError> {
    let start = Instant::now();
    let threads = cli
        .threads
        .or_else(|| std::env::var("MPL_LAB_THREADS").ok().and_then(|v| v.parse().ok()))
        .unwrap_or(1)
        .max(1);
    let mut sink = Sink::new(&cli.output, cli.format)?;

    match cli.command {
        Command::Resistance { graph, pair, oracle, trace } => {
            let text = std::fs::read_to_string(&graph)
                .map_err(|e| UsageError(format!("cannot read {}: {e}", graph.display())))?;
            let g = load_graph(&graph)?;
            let [x, y] = pair[..] else {
                return Err(UsageError("--pair takes exactly two vertices".into()));
            };
            let (r, reduction) = effective_resistance(&g, x, y)
                .map_err(|e| UsageError(e.to_string()))?;
            sink.line(&format!("{r:.10}")).ok();
            if trace {
                sink.line(&reduction.to_json()).ok();
            } else {
                let removed: Vec<String> =
                    reduction.steps.iter().map(|s| s.removed.to_string()).collect();
                sink.line(&format!("removed: [{}]", removed.join(", "))).ok();
            }
            let mut code = 0;
            if oracle {
                let o = effective_resistance_oracle(&g, x, y)
                    .map_err(|e| UsageError(e.to_string()))?;
                let rel = (r - o).abs() / o.abs().max(1.0);
                sink.line(&format!("oracle: {o:.10} (relative gap {rel:.3e})")).ok();
                if rel > 1e-9 {
                    code = 1;
                }
            }
            emit_manifest(
                "resistance",
                &format!("pair={x},{y} oracle={oracle} trace={trace}"),
                0,
                &[(graph.display().to_string(), fnv1a(text.as_bytes()))],
                start,
            );
            Ok(code)
        }
        Command::Reduce { graph, keep } => {
            let text = std::fs::read_to_string(&graph)
                .map_err(|e| UsageError(format!("cannot read {}: {e}", graph.display())))?;
            let g = load_graph(&graph)?;
            let net = Network::from_graph(&g);
            let reduced =
                reduce_to(&net, &keep).map_err(|e| UsageError(e.to_string()))?;
            let edges: Vec<String> = reduced
                .edges()
                .map(|(u, v, c)| format!("[{u},{v},{c}]"))
                .collect();
            sink.line(&format!(
                "{{\"kept\":{keep:?},\"edges\":[{}]}}",
                edges.join(",")
            ))
            .ok();
            emit_manifest(
                "reduce",
                &format!("keep={keep:?}"),
                0,
                &[(graph.display().to_string(), fnv1a(text.as_bytes()))],
                start,
            );
            Ok(0)
        }
        Command::Verify { selector, seed, trials, tol, max_level, no_k7, graph } => {
            let sel: Selector = selector
                .parse()
                .map_err(|e: exlab::ExlabError| UsageError(e.to_string()))?;
            let reports = if let Some(path) = graph {
                let g = load_graph(&path)?;
                verify_fixed_graph(sel, &g, seed, trials.unwrap_or(100), tol.unwrap_or(1e-9))
                    .map_err(|e| UsageError(e.to_string()))?
            } else {
                let opts =
                    SuiteOptions { seed, trials, tol, max_level, include_k7: !no_k7 };
                run_batches(sel, &opts, threads).map_err(|e| UsageError(e.to_string()))?
            };
            sink.reports(&reports).ok();
            emit_manifest(
                "verify",
                &format!(
                    "selector={selector} trials={trials:?} tol={tol:?} max_level={max_level} no_k7={no_k7}"
                ),
                seed,
                &[],
                start,
            );
            Ok(if reports.iter().all(|r| r.pass) { 0 } else { 1 })
        }
        Command::Spectral { graph, process, k } => {
            let text = std::fs::read_to_string(&graph)
                .map_err(|e| UsageError(format!("cannot read {}: {e}", graph.display())))?;
            let g = load_graph(&graph)?;
            let mut results: Vec<GapResult> = Vec::new();
            let want = |p: ProcessKind| process == p || process == ProcessKind::All;
            let push = |results: &mut Vec<GapResult>,
                        r: Result<GapResult, exlab::ExlabError>|
             -> Result<(), UsageError> {
                results.push(r.map_err(|e| UsageError(e.to_string()))?);
                Ok(())
            };
            if want(ProcessKind::Rw) {
                push(&mut results, gap_random_walk(&g))?;
            }
            if want(ProcessKind::Ex) {
                let sectors: Vec<usize> = match k {
                    Some(k) => vec![k],
                    None => (1..g.n()).collect(),
                };
                for k in sectors {
                    push(&mut results, gap_exclusion(&g, k))?;
                }
            }
            if want(ProcessKind::Ip) {
                push(&mut results, gap_interchange(&g))?;
            }
            for r in &results {
                sink.line(&serde_json::to_string(r).unwrap()).ok();
            }
            emit_manifest(
                "spectral",
                &format!("k={k:?}"),
                0,
                &[(graph.display().to_string(), fnv1a(text.as_bytes()))],
                start,
            );
            Ok(0)
        }
        Command::Sg { level, scaling, emit_graph } => {
            let sg = sg_graph(level);
            if emit_graph {
                sink.line(sg.graph().to_edge_list_text().trim_end()).ok();
            } else if scaling {
                let (table, reports) =
                    run_sg_scaling(level, 1e-9).map_err(|e| UsageError(e.to_string()))?;
                for row in &table.rows {
                    sink.line(&serde_json::to_string(row).unwrap()).ok();
                }
                sink.line(&format!(
                    "{{\"corner_resistance\":{:?},\"overall_sup\":{}}}",
                    table.corner_resistance, table.overall_sup
                ))
                .ok();
                emit_manifest("sg", &format!("level={level} scaling=true"), 0, &[], start);
                return Ok(if reports.iter().all(|r| r.pass) { 0 } else { 1 });
            } else {
                let g = sg.graph();
                let r = effective_resistance(g, sg.corner(0), sg.corner(1))
                    .map_err(|e| UsageError(e.to_string()))?
                    .0;
                sink.line(&format!(
                    "{{\"level\":{level},\"vertices\":{},\"edges\":{},\"corner_resistance\":{r}}}",
                    g.n(),
                    g.edges().len()
                ))
                .ok();
            }
            emit_manifest("sg", &format!("level={level}"), 0, &[], start);
            Ok(0)
        }
        Command::Simulate {
            graph,
            sg_level,
            alpha,
            occupied,
            t,
            accel,
            boundary,
            seed,
            record_every,
            events_csv,
        } => {
            let (g, digest) = match (graph, sg_level) {
                (Some(path), None) => {
                    let text = std::fs::read_to_string(&path).map_err(|e| {
                        UsageError(format!("cannot read {}: {e}", path.display()))
                    })?;
                    (load_graph(&path)?, vec![(path.display().to_string(), fnv1a(text.as_bytes()))])
                }
                (None, Some(level)) => (sg_graph(level).graph().clone(), vec![]),
                _ => return Err(UsageError("need exactly one of --graph / --sg-level".into())),
            };
            let initial = match (alpha, occupied) {
                (Some(a), None) => InitialLaw::Bernoulli(a),
                (None, Some(occ)) => {
                    InitialLaw::Explicit(ExclusionConfig::from_occupied(g.n(), &occ))
                }
                (None, None) => InitialLaw::Bernoulli(0.5),
                _ => return Err(UsageError("--alpha conflicts with --occupied".into())),
            };
            let cfg = SimConfig {
                graph: g.clone(),
                initial,
                t_max: t,
                accel,
                boundary: parse_boundary(&boundary)?,
                seed,
                record_every,
            };
            let traj = simulate(&cfg).map_err(|e| UsageError(e.to_string()))?;
            if let Some(path) = &events_csv {
                std::fs::write(path, traj.to_csv())
                    .map_err(|e| UsageError(format!("cannot write {}: {e}", path.display())))?;
            }
            let n = g.n() as f64;
            let mean_density = traj.integrate(|c| c.count() as f64 / n) / traj.t_max;
            sink.line(&format!(
                "{{\"events\":{},\"snapshots\":{},\"initial_count\":{},\"final_count\":{},\
                 \"time_avg_density\":{mean_density}}}",
                traj.events.len(),
                traj.snapshots.len(),
                traj.initial.count(),
                traj.final_state().count()
            ))
            .ok();
            emit_manifest(
                "simulate",
                &format!("t={t} accel={accel} boundary={boundary:?} record_every={record_every:?}"),
                seed,
                &digest,
                start,
            );
            Ok(0)
        }
    }
}

/// Split a multi-selector run across up to `threads` workers; aggregation
/// order is fixed by the selector list, independent of scheduling.
fn run_batches(
    sel: Selector,
    opts: &SuiteOptions,
    threads: usize,
) -> Result<Vec<VerificationReport>, exlab::ExlabError> {
    if sel != Selector::All || threads <= 1 {
        return run_selector(sel, opts);
    }
    let selectors = [
        Selector::Resistance,
        Selector::Identity,
        Selector::Dirichlet,
        Selector::Octopus,
        Selector::Mpl,
        Selector::IpMpl,
        Selector::Projection,
        Selector::Sweep,
        Selector::AssumptionA,
        Selector::Optimal,
        Selector::Aldous,
        Selector::SgScaling,
        Selector::Stationarity,
    ];
    let mut all = Vec::new();
    for chunk in selectors.chunks(threads) {
        let outcomes = std::thread::scope(|scope| {
            let handles: Vec<_> = chunk
                .iter()
                .map(|&s| scope.spawn(move || run_selector(s, opts)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("worker panicked"))
                .collect::<Vec<_>>()
        });
        for outcome in outcomes {
            all.extend(outcome?);
        }
    }
    Ok(all)
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(2);
        }
    }
}
