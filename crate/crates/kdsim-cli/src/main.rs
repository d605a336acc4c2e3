//! `kdsim` — command-line front end for the kdsim library.
//!
//! One binary, eight subcommands: `kd`, `simulate`, `oracle`, `facets`,
//! `bound-scan`, `volume`, `css-list`, `classify`. Machine-readable output
//! goes to standard output (or `--out`), diagnostics to standard error.
//! Every output embeds the tool version, the effective seed and
//! tolerances, and the invoking command line, so any result can be
//! reproduced exactly. Exit codes: 0 success, 1 usage error, 2 input
//! error, 3 numeric or solver failure.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use kdsim::kd::{kd_distribution, kd_mana};
use kdsim::polytope::{
    bound_state_scan_all, facet_enumeration, shared_facets, vertex_pauli_coords, RationalPolytope,
    VertexSet,
};
use kdsim::sim::{exact_simulate, histogram_to_tsv, run_shots_sampled, PhaseSampler};
use kdsim::state::{css_projector, enumerate_subgroups, DensityMatrix, Subgroup};
use kdsim::volume::{estimate_volumes_with, Classifier, CLASSIFY_KD_TOL};
use kdsim::{BitVector, Circuit, DEFAULT_TOL};

#[derive(Parser)]
#[command(
    name = "kdsim",
    version,
    about = "Kirkwood-Dirac phase-space toolkit",
    long_about = "Kirkwood-Dirac quasiprobability tables, phase-space circuit sampling with an \
exact oracle, exact stabilizer/CSS polytope geometry, bound-state threshold scans, and Monte \
Carlo volume estimates."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Numeric tolerance override (default depends on the subcommand)
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Seed for every pseudo-random draw
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads for parallel subcommands (0 = one per core)
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,

    /// Output format; defaults to the subcommand's natural format
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Write output to this file instead of standard output
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Tsv,
}

#[derive(Subcommand)]
enum Command {
    /// KD table, positivity verdict, and mana of a state file
    Kd {
        /// Density-matrix JSON file
        state: PathBuf,
    },
    /// Sample a circuit on a KD-positive input by phase-space trajectories
    Simulate {
        /// Circuit text file
        circuit: PathBuf,
        /// Density-matrix JSON file, or a `css:H=..;g=..;x=..` name
        state: String,
        /// Number of trajectories
        #[arg(long, default_value_t = 10_000)]
        shots: u64,
    },
    /// Exact Born-rule outcome probabilities of a circuit
    Oracle {
        /// Circuit text file
        circuit: PathBuf,
        /// Density-matrix JSON file, or a `css:H=..;g=..;x=..` name
        state: String,
    },
    /// Exact facet enumeration of the rebit-stabilizer and CSS polytopes
    Facets,
    /// Threshold scan of the `I/4 + lambda F` family along every shared facet
    BoundScan,
    /// Monte Carlo volume estimates of the four state categories
    Volume {
        /// Number of Hilbert-Schmidt rebit draws
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
    },
    /// Enumerate all CSS states of a register as `css:` names
    CssList {
        /// Number of qubits (enumeration caps at 4)
        n: usize,
    },
    /// Classify a two-qubit rebit state file
    Classify {
        /// Density-matrix JSON file
        state: PathBuf,
    },
}

// ---------------------------------------------------------------------------
// Error-to-exit-code plumbing
// ---------------------------------------------------------------------------

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<kdsim::Error> for CliError {
    fn from(e: kdsim::Error) -> Self {
        let code = match e {
            kdsim::Error::Numeric(_) | kdsim::Error::Solver(_) => 3,
            _ => 2,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are successes, not usage errors.
            let ok = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return if ok { ExitCode::SUCCESS } else { ExitCode::from(1) };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

// ---------------------------------------------------------------------------
// Output rendering
// ---------------------------------------------------------------------------

#[derive(Serialize, Clone)]
struct Meta {
    version: &'static str,
    command: String,
    seed: u64,
    workers: usize,
    tol: f64,
}

impl Meta {
    fn new(cli: &Cli, tol: f64) -> Meta {
        Meta {
            version: env!("CARGO_PKG_VERSION"),
            command: std::env::args().collect::<Vec<_>>().join(" "),
            seed: cli.seed,
            workers: cli.workers,
            tol,
        }
    }

    fn tsv_header(&self) -> String {
        format!(
            "# version={}\n# command={}\n# seed={}\n# workers={}\n# tol={}\n",
            self.version, self.command, self.seed, self.workers, self.tol
        )
    }
}

fn emit(cli: &Cli, text: String) -> CliResult<()> {
    match &cli.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json_output(meta: &Meta, mut payload: serde_json::Value) -> String {
    payload["meta"] = serde_json::to_value(meta).expect("meta serializes");
    let mut text = serde_json::to_string_pretty(&payload).expect("payload serializes");
    text.push('\n');
    text
}

fn format_of(cli: &Cli, natural: Format) -> Format {
    cli.format.unwrap_or(natural)
}

// ---------------------------------------------------------------------------
// Input loading
// ---------------------------------------------------------------------------

fn read_to_string(path: &PathBuf) -> CliResult<String> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))
}

fn load_state(path: &PathBuf) -> CliResult<DensityMatrix<f64>> {
    let text = read_to_string(path)?;
    let rho: DensityMatrix<f64> = serde_json::from_str(&text)
        .map_err(|e| CliError::input(format!("{} is not a density matrix: {e}", path.display())))?;
    if !rho.is_psd(1e-8)? {
        return Err(CliError::input(format!(
            "{} is not positive semidefinite (smallest eigenvalue {:e})",
            path.display(),
            rho.min_eigenvalue()?
        )));
    }
    Ok(rho)
}

fn load_circuit(path: &PathBuf) -> CliResult<Circuit> {
    let text = read_to_string(path)?;
    Ok(kdsim::parse_circuit(&text)?)
}

/// Parses `css:H=<gen,gen,...>;g=<bits>;x=<bits>` into its subgroup data.
/// An empty generator list (`H=`) denotes the trivial subgroup.
fn parse_css_name(name: &str) -> CliResult<(Subgroup, BitVector, BitVector)> {
    let body = name
        .strip_prefix("css:")
        .ok_or_else(|| CliError::input("css name must start with `css:`"))?;
    let mut h_part: Option<&str> = None;
    let mut g_part: Option<&str> = None;
    let mut x_part: Option<&str> = None;
    for piece in body.split(';') {
        let (key, value) = piece
            .split_once('=')
            .ok_or_else(|| CliError::input(format!("css name piece `{piece}` is not key=value")))?;
        let slot = match key {
            "H" => &mut h_part,
            "g" => &mut g_part,
            "x" => &mut x_part,
            other => return Err(CliError::input(format!("unknown css name key `{other}`"))),
        };
        if slot.replace(value).is_some() {
            return Err(CliError::input(format!("duplicate css name key `{key}`")));
        }
    }
    let (h_text, g_text, x_text) = match (h_part, g_part, x_part) {
        (Some(h), Some(g), Some(x)) => (h, g, x),
        _ => return Err(CliError::input("css name needs all of H=, g=, x=")),
    };
    let g: BitVector = g_text
        .parse()
        .map_err(|e: kdsim::Error| CliError::input(format!("css name g: {e}")))?;
    let x: BitVector = x_text
        .parse()
        .map_err(|e: kdsim::Error| CliError::input(format!("css name x: {e}")))?;
    let n = g.len();
    let mut generators = Vec::new();
    for gen_text in h_text.split(',').filter(|s| !s.is_empty()) {
        let gen: BitVector = gen_text
            .parse()
            .map_err(|e: kdsim::Error| CliError::input(format!("css name H: {e}")))?;
        generators.push(gen);
    }
    let h = Subgroup::from_generators(&generators, n)?;
    Ok((h, g, x))
}

/// A simulate/oracle input: either a file-backed density matrix or a
/// matrix-free CSS description.
enum StateInput {
    File(DensityMatrix<f64>),
    Css(Subgroup, BitVector, BitVector),
}

fn load_state_input(arg: &str) -> CliResult<StateInput> {
    if arg.starts_with("css:") {
        let (h, g, x) = parse_css_name(arg)?;
        Ok(StateInput::Css(h, g, x))
    } else {
        Ok(StateInput::File(load_state(&PathBuf::from(arg))?))
    }
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

fn run(cli: Cli) -> CliResult<()> {
    match &cli.command {
        Command::Kd { state } => cmd_kd(&cli, state),
        Command::Simulate {
            circuit,
            state,
            shots,
        } => cmd_simulate(&cli, circuit, state, *shots),
        Command::Oracle { circuit, state } => cmd_oracle(&cli, circuit, state),
        Command::Facets => cmd_facets(&cli),
        Command::BoundScan => cmd_bound_scan(&cli),
        Command::Volume { samples } => cmd_volume(&cli, *samples),
        Command::CssList { n } => cmd_css_list(&cli, *n),
        Command::Classify { state } => cmd_classify(&cli, state),
    }
}

fn cmd_kd(cli: &Cli, state: &PathBuf) -> CliResult<()> {
    let tol = cli.tol.unwrap_or(DEFAULT_TOL);
    let meta = Meta::new(cli, tol);
    let rho = load_state(state)?;
    let q = kd_distribution(&rho);
    let positive = q.is_positive(tol);
    let mana = kd_mana(&rho).bits();
    let (worst_point, worst_value) = q.worst_entry();

    let text = match format_of(cli, Format::Json) {
        Format::Json => json_output(
            &meta,
            json!({
                "n": q.n(),
                "positive": positive,
                "mana_bits": mana,
                "worst_entry": {
                    "g": worst_point.g.to_string(),
                    "chi": worst_point.chi.to_string(),
                    "re": worst_value.re,
                    "im": worst_value.im,
                },
                "table": serde_json::to_value(&q).expect("table serializes"),
            }),
        ),
        Format::Tsv => {
            let mut out = meta.tsv_header();
            out.push_str(&format!("# positive={positive}\n# mana_bits={mana}\n"));
            out.push_str("g\tchi\tre\tim\n");
            let n = q.n();
            let d = q.dim();
            for g in 0..d {
                for chi in 0..d {
                    let gv = BitVector::from_index(g, n);
                    let cv = BitVector::from_index(chi, n);
                    let val = q.entry(&gv, &cv);
                    out.push_str(&format!("{gv}\t{cv}\t{}\t{}\n", val.re, val.im));
                }
            }
            out
        }
    };
    emit(cli, text)
}

fn build_sampler(input: &StateInput, tol: f64) -> CliResult<PhaseSampler<f64>> {
    match input {
        StateInput::File(rho) => Ok(PhaseSampler::from_kd(&kd_distribution(rho), tol)?),
        StateInput::Css(h, g, x) => Ok(PhaseSampler::from_css(h, g, x)?),
    }
}

fn cmd_simulate(cli: &Cli, circuit: &PathBuf, state: &str, shots: u64) -> CliResult<()> {
    let tol = cli.tol.unwrap_or(DEFAULT_TOL);
    let meta = Meta::new(cli, tol);
    let circuit = load_circuit(circuit)?;
    let input = load_state_input(state)?;
    let sampler = build_sampler(&input, tol)?;
    let hist = run_shots_sampled(&circuit, &sampler, shots, cli.seed)?;

    let text = match format_of(cli, Format::Tsv) {
        Format::Tsv => {
            let mut out = meta.tsv_header();
            out.push_str(&format!("# shots={shots}\n"));
            out.push_str("outcome\tcount\n");
            out.push_str(&histogram_to_tsv(&hist));
            out
        }
        Format::Json => {
            let counts: BTreeMap<String, u64> =
                hist.iter().map(|(k, v)| (k.to_string(), *v)).collect();
            json_output(&meta, json!({ "shots": shots, "counts": counts }))
        }
    };
    emit(cli, text)
}

fn cmd_oracle(cli: &Cli, circuit: &PathBuf, state: &str) -> CliResult<()> {
    let tol = cli.tol.unwrap_or(DEFAULT_TOL);
    let meta = Meta::new(cli, tol);
    let circuit = load_circuit(circuit)?;
    let rho = match load_state_input(state)? {
        StateInput::File(rho) => rho,
        StateInput::Css(h, g, x) => css_projector(&h, &g, &x)?,
    };
    let probs = exact_simulate(&circuit, &rho)?;

    let text = match format_of(cli, Format::Tsv) {
        Format::Tsv => {
            let mut out = meta.tsv_header();
            out.push_str("outcome\tprobability\n");
            for (record, p) in &probs {
                out.push_str(&format!("{record}\t{p}\n"));
            }
            out
        }
        Format::Json => {
            let map: BTreeMap<String, f64> =
                probs.iter().map(|(k, v)| (k.to_string(), *v)).collect();
            json_output(&meta, json!({ "probabilities": map }))
        }
    };
    emit(cli, text)
}

fn polytope_json(poly: &RationalPolytope) -> serde_json::Value {
    json!({
        "vertex_count": poly.vertices().len(),
        "facet_count": poly.facets().len(),
        "affine_dim": poly.affine_dim(),
        "facets": poly.facets().iter().map(|f| f.to_line()).collect::<Vec<_>>(),
        "vertices": poly.v_rep_json(),
    })
}

fn cmd_facets(cli: &Cli) -> CliResult<()> {
    let tol = cli.tol.unwrap_or(DEFAULT_TOL);
    let meta = Meta::new(cli, tol);
    let rebit = facet_enumeration(&vertex_pauli_coords(VertexSet::RebitStabilizer)?)?;
    let css = facet_enumeration(&vertex_pauli_coords(VertexSet::Css)?)?;
    let shared = shared_facets(&rebit, &css)?;

    let text = match format_of(cli, Format::Tsv) {
        Format::Tsv => {
            let mut out = meta.tsv_header();
            out.push_str(&format!(
                "# rebit_facets={}\n# css_facets={}\n# shared_facets={}\n# affine_dim={}\n",
                rebit.facets().len(),
                css.facets().len(),
                shared.len(),
                rebit.affine_dim()
            ));
            out.push_str("set\tinequality\n");
            for f in rebit.facets() {
                out.push_str(&format!("rebit\t{}\n", f.to_line()));
            }
            for f in css.facets() {
                out.push_str(&format!("css\t{}\n", f.to_line()));
            }
            for f in &shared {
                out.push_str(&format!("shared\t{}\n", f.to_line()));
            }
            out
        }
        Format::Json => json_output(
            &meta,
            json!({
                "rebit": polytope_json(&rebit),
                "css": polytope_json(&css),
                "shared": {
                    "facet_count": shared.len(),
                    "facets": shared.iter().map(|f| f.to_line()).collect::<Vec<_>>(),
                },
            }),
        ),
    };
    emit(cli, text)
}

fn cmd_bound_scan(cli: &Cli) -> CliResult<()> {
    let tol = cli.tol.unwrap_or(DEFAULT_TOL);
    let meta = Meta::new(cli, tol);
    let rebit = facet_enumeration(&vertex_pauli_coords(VertexSet::RebitStabilizer)?)?;
    let css = facet_enumeration(&vertex_pauli_coords(VertexSet::Css)?)?;
    let shared = shared_facets(&rebit, &css)?;
    let pool = build_pool(cli.workers)?;
    let scans = pool.install(|| bound_state_scan_all(&shared))?;

    let text = match format_of(cli, Format::Tsv) {
        Format::Tsv => {
            let mut out = meta.tsv_header();
            out.push_str(&format!("# shared_facets={}\n", scans.len()));
            out.push_str("facet\tlambda_magic\tlambda_sd\tlambda_kdpos\n");
            for s in &scans {
                out.push_str(&format!(
                    "{}\t{}\t{}\t{}\n",
                    s.facet.to_line(),
                    s.lambda_magic,
                    s.lambda_sd,
                    s.lambda_kdpos
                ));
            }
            out
        }
        Format::Json => json_output(
            &meta,
            json!({
                "scans": scans.iter().map(|s| json!({
                    "facet": s.facet.to_line(),
                    "lambda_magic": s.lambda_magic,
                    "lambda_sd": s.lambda_sd,
                    "lambda_kdpos": s.lambda_kdpos,
                })).collect::<Vec<_>>(),
            }),
        ),
    };
    emit(cli, text)
}

fn cmd_volume(cli: &Cli, samples: u64) -> CliResult<()> {
    let tol = cli.tol.unwrap_or(CLASSIFY_KD_TOL);
    let meta = Meta::new(cli, tol);
    let report = estimate_volumes_with(samples, cli.seed, cli.workers, tol)?;

    let text = match format_of(cli, Format::Tsv) {
        Format::Tsv => {
            let mut out = meta.tsv_header();
            out.push_str(&format!("# samples={}\n", report.samples));
            out.push_str(&report.to_tsv());
            out
        }
        Format::Json => json_output(
            &meta,
            serde_json::to_value(&report).expect("report serializes"),
        ),
    };
    emit(cli, text)
}

/// All CSS states of `n` qubits as canonical names: for each subgroup `H`,
/// the minimal representative of each coset (`g`) and of each character
/// class modulo the dual (`x`).
fn css_name_table(n: usize) -> CliResult<Vec<(String, usize)>> {
    let subgroups = enumerate_subgroups(n)?;
    let mut rows = Vec::new();
    for h in &subgroups {
        let gens: Vec<String> = h.generators().iter().map(|g| g.to_string()).collect();
        let h_text = gens.join(",");
        let dual = h.dual();
        let coset_reps = coset_representatives(h, n);
        let char_reps = coset_representatives(&dual, n);
        for g in &coset_reps {
            for x in &char_reps {
                rows.push((format!("css:H={h_text};g={g};x={x}"), h.order()));
            }
        }
    }
    Ok(rows)
}

/// Minimal representative of each coset of `sub` in the full group, in
/// increasing index order.
fn coset_representatives(sub: &Subgroup, n: usize) -> Vec<BitVector> {
    let d = 1usize << n;
    let mut seen = vec![false; d];
    let mut reps = Vec::new();
    for idx in 0..d {
        if seen[idx] {
            continue;
        }
        let v = BitVector::from_index(idx, n);
        reps.push(v);
        for member in sub.members() {
            seen[(v + *member).index()] = true;
        }
    }
    reps
}

fn cmd_css_list(cli: &Cli, n: usize) -> CliResult<()> {
    let tol = cli.tol.unwrap_or(DEFAULT_TOL);
    let meta = Meta::new(cli, tol);
    let rows = css_name_table(n)?;

    let text = match format_of(cli, Format::Tsv) {
        Format::Tsv => {
            let mut out = meta.tsv_header();
            out.push_str(&format!("# count={}\n", rows.len()));
            out.push_str("name\tsubgroup_order\n");
            for (name, order) in &rows {
                out.push_str(&format!("{name}\t{order}\n"));
            }
            out
        }
        Format::Json => json_output(
            &meta,
            json!({
                "count": rows.len(),
                "states": rows.iter().map(|(name, order)| json!({
                    "name": name,
                    "subgroup_order": order,
                })).collect::<Vec<_>>(),
            }),
        ),
    };
    emit(cli, text)
}

fn cmd_classify(cli: &Cli, state: &PathBuf) -> CliResult<()> {
    let tol = cli.tol.unwrap_or(CLASSIFY_KD_TOL);
    let meta = Meta::new(cli, tol);
    let rho = load_state(state)?;
    let category = Classifier::new(tol)?.classify(&rho)?;

    let text = match format_of(cli, Format::Json) {
        Format::Json => json_output(&meta, json!({ "category": category.name() })),
        Format::Tsv => {
            let mut out = meta.tsv_header();
            out.push_str("category\n");
            out.push_str(category.name());
            out.push('\n');
            out
        }
    };
    emit(cli, text)
}

fn build_pool(workers: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError {
            code: 3,
            message: format!("thread pool: {e}"),
        })
}
