//! `pa`: command-line front end for probabilistic automata, approximate
//! simulations, modal logics and behavioural distances.

mod config;

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use pa_core::algebra::{nondet_choice, parallel, parallel_pruned, ChoiceSpec};
use pa_core::bench::{heatmap, heatmap_csv, GridMetric, GridSpec};
use pa_core::format::{read_automaton, write_automaton, NamedDistribution};
use pa_core::lifting::{build_network, extract_weight_function, lift_check, max_flow};
use pa_core::logic::{logical_sim_sound_check, parse_formula, Checker, DecayFunction, FormulaSampler};
use pa_core::metrics::{distance_approx, distance_discounted, distance_exact};
use pa_core::simulation::{relation_of_kind, Kind, Witness};
use pa_core::{disjoint_union, ProbAutomaton, Rational, Relation, StateId};

use config::Config;

#[derive(Parser, Debug)]
#[command(name = "pa", version, about = "Approximate simulations and distances for probabilistic automata")]
struct Cli {
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,

    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "PA_METRICS_THREADS")]
    threads: Option<usize>,

    /// TOML file with defaults for global and numeric options.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    /// More logging; repeat for more.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the well-formedness of an automaton file.
    Validate { file: PathBuf },
    /// Disjoint union of several automata.
    Union {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Decide whether nu is an epsilon-lifting of mu through a relation.
    CheckLift(CheckLiftArgs),
    /// Compute an approximate simulation or bisimulation.
    Simrel(SimrelArgs),
    /// Model check a formula at a state.
    Mc(McArgs),
    /// Distance matrix between all states.
    Distance(DistanceArgs),
    /// Parallel composition or non-deterministic choice.
    Compose(ComposeArgs),
    /// Distance heatmap of a torus grid with deleted transitions.
    Gridbench(GridArgs),
}

#[derive(Args, Debug)]
struct CheckLiftArgs {
    /// Distribution as inline JSON or a file, e.g. `{"s": "1/2"}`.
    #[arg(long)]
    mu: String,
    #[arg(long)]
    nu: String,
    /// Pairs `[["s", "t"], ...]` as inline JSON or a file.
    #[arg(long)]
    relation: String,
    #[arg(long)]
    epsilon: Option<Rational>,
    /// Print a weight function certifying the answer.
    #[arg(long)]
    witness: bool,
}

#[derive(Args, Debug)]
struct SimrelArgs {
    #[arg(long)]
    pa: PathBuf,
    /// Second automaton; relations are computed on the disjoint union and
    /// the right state of `--pair` is looked up here.
    #[arg(long)]
    pa2: Option<PathBuf>,
    #[arg(long)]
    epsilon: Option<Rational>,
    #[arg(long, default_value = "sim")]
    kind: Kind,
    /// `s,t`: answer for one pair instead of printing the relation.
    #[arg(long)]
    pair: Option<String>,
}

#[derive(Args, Debug)]
struct McArgs {
    #[arg(long)]
    pa: PathBuf,
    #[arg(long)]
    state: String,
    /// Formula text, or a file containing it.
    #[arg(long)]
    formula: String,
    #[arg(long)]
    epsilon: Option<Rational>,
    /// `id`, `linear:d`, `exp:c`, `const:c` or `table:x=y,...`.
    #[arg(long)]
    decay: Option<String>,
    /// Also sample this many formulas and check the logical characterisation
    /// of epsilon-simulation on the whole automaton.
    #[arg(long)]
    sound_check: Option<usize>,
}

#[derive(Args, Debug)]
struct DistanceArgs {
    #[arg(long)]
    pa: PathBuf,
    #[arg(long, default_value = "exact")]
    algorithm: Algorithm,
    /// Grid resolution of the approximation.
    #[arg(long)]
    n: Option<usize>,
    /// Rounds of the discounted metric.
    #[arg(long = "N")]
    big_n: Option<usize>,
    /// Target file; `.csv` selects CSV, anything else JSON.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Output format when writing to stdout.
    #[arg(long, default_value = "json")]
    format: OutFormat,
    /// Fractional digits in CSV output.
    #[arg(long)]
    digits: Option<usize>,
}

#[derive(Args, Debug)]
#[command(group(clap::ArgGroup::new("mode").required(true).args(["parallel", "choice"])))]
struct ComposeArgs {
    /// Two automata with input/output alphabets.
    #[arg(long, num_args = 2, value_names = ["A", "B"])]
    parallel: Option<Vec<PathBuf>>,
    /// Choice specification followed by the operand automata.
    #[arg(long, num_args = 1.., value_names = ["SPEC", "PA"])]
    choice: Option<Vec<PathBuf>>,
    /// Keep only states reachable from the initial pair.
    #[arg(long)]
    prune: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GridArgs {
    #[arg(long)]
    size: usize,
    /// `i,j`; may be repeated.
    #[arg(long = "delete")]
    deletions: Vec<String>,
    #[arg(long, default_value = "exact")]
    metric: String,
    #[arg(long = "N")]
    big_n: Option<usize>,
    #[arg(long, default_value = "csv")]
    output: OutFormat,
    #[arg(long)]
    digits: Option<usize>,
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
enum Algorithm {
    Exact,
    Approx,
    Discounted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
enum OutFormat {
    Json,
    Csv,
}

/// A mistake in how the tool was invoked rather than in the model.
#[derive(Debug)]
struct Usage(String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(Usage(msg.into()))
}

/// Writes to stdout; a closed pipe ends the program quietly.
fn out(text: &str) {
    use std::io::Write;
    let mut stdout = std::io::stdout().lock();
    if let Err(e) = stdout.write_all(text.as_bytes()).and_then(|()| stdout.flush()) {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("error: writing output: {e}");
        std::process::exit(1);
    }
}

macro_rules! outln {
    ($($arg:tt)*) => {
        out(&format!("{}\n", format_args!($($arg)*)))
    };
}

struct Ctx {
    json: bool,
    seed: u64,
    config: Config,
}

impl Ctx {
    fn epsilon(&self, flag: Option<Rational>) -> anyhow::Result<Rational> {
        if let Some(e) = flag {
            return Ok(e);
        }
        match &self.config.epsilon {
            Some(text) => text.parse().map_err(|e| usage(format!("config epsilon: {e}"))),
            None => Ok(Rational::zero()),
        }
    }

    fn digits(&self, flag: Option<usize>) -> usize {
        flag.or(self.config.digits).unwrap_or(10)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Usage>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let config = match &cli.config {
        Some(path) => Config::load(path).map_err(|e| usage(format!("{e:#}")))?,
        None => Config::default(),
    };
    if let Some(k) = cli.threads.or(config.threads) {
        if k == 0 {
            return Err(usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(k).build_global().context("starting worker pool")?;
        log::info!("using {k} worker threads");
    }
    let ctx = Ctx { json: cli.json || config.json.unwrap_or(false), seed: cli.seed.or(config.seed).unwrap_or(0), config };
    match cli.command {
        Command::Validate { file } => validate(&ctx, &file),
        Command::Union { files, output } => union(&files, output.as_deref()),
        Command::CheckLift(args) => check_lift(&ctx, args),
        Command::Simrel(args) => simrel(&ctx, args),
        Command::Mc(args) => mc(&ctx, args),
        Command::Distance(args) => distance(&ctx, args),
        Command::Compose(args) => compose(args),
        Command::Gridbench(args) => gridbench(&ctx, args),
    }
}

fn read_text(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn load_raw(path: &Path) -> anyhow::Result<ProbAutomaton> {
    read_automaton(&read_text(path)?).with_context(|| format!("loading {}", path.display()))
}

fn load(path: &Path) -> anyhow::Result<ProbAutomaton> {
    let pa = load_raw(path)?;
    pa.ensure_valid().with_context(|| format!("loading {}", path.display()))?;
    log::info!("{}: {} states, {} transitions", path.display(), pa.num_states(), pa.transitions().len());
    Ok(pa)
}

fn emit(output: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            out(text);
            Ok(())
        }
    }
}

fn print_json(v: &Value) {
    outln!("{}", serde_json::to_string_pretty(v).expect("values serialise"));
}

fn validate(ctx: &Ctx, file: &Path) -> anyhow::Result<()> {
    let pa = load_raw(file)?;
    let violations = pa.validate();
    if ctx.json {
        let list: Vec<String> = violations.iter().map(ToString::to_string).collect();
        print_json(&json!({"valid": violations.is_empty(), "states": pa.num_states(), "violations": list}));
    } else if violations.is_empty() {
        outln!("valid: {} states, {} actions, {} transitions", pa.num_states(), pa.actions().len(), pa.transitions().len());
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(pa_core::Error::InvalidModel(violations)).with_context(|| format!("validating {}", file.display()))
    }
}

fn union(files: &[PathBuf], output: Option<&Path>) -> anyhow::Result<()> {
    let pas = files.iter().map(|f| load(f)).collect::<anyhow::Result<Vec<_>>>()?;
    let refs: Vec<&ProbAutomaton> = pas.iter().collect();
    let u = disjoint_union(&refs)?;
    emit(output, &(write_automaton(&u.automaton) + "\n"))
}

/// Inline JSON, or the contents of the named file.
fn json_arg<T: serde::de::DeserializeOwned>(arg: &str, what: &str) -> anyhow::Result<T> {
    let text = if arg.trim_start().starts_with(['{', '[']) { arg.to_string() } else { read_text(Path::new(arg))? };
    serde_json::from_str(&text).map_err(|e| usage(format!("--{what}: {e}")))
}

fn check_lift(ctx: &Ctx, args: CheckLiftArgs) -> anyhow::Result<()> {
    let mu: NamedDistribution = json_arg(&args.mu, "mu")?;
    let nu: NamedDistribution = json_arg(&args.nu, "nu")?;
    let pairs: Vec<(String, String)> = json_arg(&args.relation, "relation")?;
    let eps = ctx.epsilon(args.epsilon)?;

    // Domain and image are separate state spaces.
    let mut left: Vec<&str> = mu.0.iter().map(|(s, _)| s.as_str()).collect();
    let mut right: Vec<&str> = nu.0.iter().map(|(s, _)| s.as_str()).collect();
    for (s, t) in &pairs {
        if !left.contains(&s.as_str()) {
            left.push(s);
        }
        if !right.contains(&t.as_str()) {
            right.push(t);
        }
    }
    left.dedup();
    right.dedup();
    let li: HashMap<&str, StateId> = left.iter().enumerate().map(|(i, s)| (*s, StateId(i))).collect();
    let ri: HashMap<&str, StateId> = right.iter().enumerate().map(|(i, s)| (*s, StateId(i))).collect();
    let (m, n) = (mu.resolve(&li)?, nu.resolve(&ri)?);
    let r = Relation::from_pairs(left.len(), right.len(), pairs.iter().map(|(s, t)| (li[s.as_str()], ri[t.as_str()])));
    let holds = lift_check(&m, &n, &r, &eps)?;

    let witness = args.witness.then(|| {
        let net = build_network(&m, &n, &r);
        let flow = max_flow(&net);
        let w = extract_weight_function(&net, &flow);
        let entries: Vec<Value> = w
            .entries
            .iter()
            .map(|((s, t), v)| json!({"from": left[s.0], "to": right[t.0], "weight": v}))
            .collect();
        json!({"weights": entries, "total": w.total(), "certified_epsilon": w.certified_epsilon(&m)})
    });
    if ctx.json {
        print_json(&json!({"lifting": holds, "epsilon": eps, "witness": witness}));
    } else {
        outln!("{holds}");
        if let Some(w) = witness {
            print_json(&w);
        }
    }
    Ok(())
}

fn parse_pair(text: &str) -> anyhow::Result<(&str, &str)> {
    text.split_once(',').map(|(a, b)| (a.trim(), b.trim())).ok_or_else(|| usage(format!("--pair expects `s,t`, got `{text}`")))
}

fn find_state(pa: &ProbAutomaton, name: &str) -> anyhow::Result<StateId> {
    pa.state_by_name(name).ok_or_else(|| usage(format!("unknown state `{name}`")))
}

fn witness_json(pa: &ProbAutomaton, w: &Witness) -> Value {
    let challenge: serde_json::Map<String, Value> =
        w.challenge.iter().map(|(s, p)| (pa.state_name(s).to_string(), json!(p))).collect();
    json!({
        "challenger": pa.state_name(w.challenger),
        "action": w.action,
        "challenge": challenge,
        "event": w.event.as_ref().map(|e| e.iter().map(|s| pa.state_name(*s)).collect::<Vec<_>>()),
        "round": w.round,
    })
}

fn simrel(ctx: &Ctx, args: SimrelArgs) -> anyhow::Result<()> {
    let first = load(&args.pa)?;
    let second = args.pa2.as_deref().map(load).transpose()?;
    let eps = ctx.epsilon(args.epsilon)?;
    // Offsets of the two operands inside the automaton the relation lives on.
    let (pa, offsets) = match &second {
        None => (first.clone(), [0, 0]),
        Some(second) => {
            let u = disjoint_union(&[&first, second])?;
            let offsets = [u.embed(0, StateId(0)).0, u.embed(1, StateId(0)).0];
            (u.automaton, offsets)
        }
    };
    let result = relation_of_kind(&pa, args.kind, &eps)?;
    log::info!("{} refinement rounds", result.iterations);

    match &args.pair {
        Some(text) => {
            let (s, t) = parse_pair(text)?;
            let s = StateId(offsets[0] + find_state(&first, s)?.0);
            let t = StateId(offsets[1] + find_state(second.as_ref().unwrap_or(&first), t)?.0);
            let related = result.contains(s, t);
            let witness = result.witnesses.get(&(s, t)).map(|w| witness_json(&pa, w));
            if ctx.json {
                print_json(&json!({"related": related, "kind": args.kind, "epsilon": eps, "witness": witness}));
            } else {
                outln!("{related}");
                if let Some(w) = witness {
                    outln!("witness: {}", serde_json::to_string(&w)?);
                }
            }
        }
        None => {
            let pairs: Vec<[&str; 2]> =
                result.relation.pairs().map(|(s, t)| [pa.state_name(s), pa.state_name(t)]).collect();
            print_json(&json!({
                "kind": args.kind,
                "epsilon": eps,
                "iterations": result.iterations,
                "states": pa.state_names(),
                "pairs": pairs,
            }));
        }
    }
    Ok(())
}

fn mc(ctx: &Ctx, args: McArgs) -> anyhow::Result<()> {
    let pa = load(&args.pa)?;
    let s = find_state(&pa, &args.state)?;
    let text = if Path::new(&args.formula).is_file() { read_text(Path::new(&args.formula))? } else { args.formula.clone() };
    let phi = parse_formula(text.trim())?;
    let eps = ctx.epsilon(args.epsilon)?;
    let decay = match args.decay.as_ref().or(ctx.config.decay.as_ref()) {
        Some(d) => {
            let d: DecayFunction = d.parse().map_err(|e| usage(format!("--decay: {e}")))?;
            d.validate()?;
            Some(d)
        }
        None => None,
    };
    let holds = match &decay {
        Some(d) => Checker::decayed(&pa, d).sat_set(&phi, &eps)[s.0],
        None => Checker::new(&pa).sat_set(&phi, &eps)[s.0],
    };

    let mut violations = 0;
    let report = match args.sound_check {
        Some(count) => {
            let mut sampler = FormulaSampler::for_automaton(ctx.seed, &pa);
            let r = logical_sim_sound_check(&pa, &eps, &mut sampler, count)?;
            violations = r.violations.len();
            let list: Vec<Value> = r
                .violations
                .iter()
                .map(|(s, t, f)| json!({"s": pa.state_name(*s), "t": pa.state_name(*t), "formula": f.to_string()}))
                .collect();
            Some(json!({"seed": ctx.seed, "formulas": r.formulas, "pairs": r.pairs, "violations": list}))
        }
        None => None,
    };
    if ctx.json {
        print_json(&json!({
            "state": args.state,
            "formula": phi.to_string(),
            "epsilon": eps,
            "decay": decay.map(|d| d.to_string()),
            "satisfied": holds,
            "sound_check": report,
        }));
    } else {
        outln!("{holds}");
        if let Some(r) = report {
            outln!("sound check: {}", serde_json::to_string(&r)?);
        }
    }
    if violations > 0 {
        bail!("soundness: {violations} sampled formulas separate simulated pairs");
    }
    Ok(())
}

fn distance(ctx: &Ctx, args: DistanceArgs) -> anyhow::Result<()> {
    let pa = load(&args.pa)?;
    let d = match args.algorithm {
        Algorithm::Exact => distance_exact(&pa)?,
        Algorithm::Approx => distance_approx(&pa, args.n.or(ctx.config.n).unwrap_or(16))?,
        Algorithm::Discounted => distance_discounted(&pa, args.big_n.or(ctx.config.big_n).unwrap_or(20))?,
    };
    log::info!("{} iterations", d.iterations);
    let csv = match &args.output {
        Some(path) => path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")),
        None => args.format == OutFormat::Csv && !ctx.json,
    };
    let text = if csv {
        d.to_csv(ctx.digits(args.digits))
    } else {
        serde_json::to_string_pretty(&d.to_json())? + "\n"
    };
    emit(args.output.as_deref(), &text)
}

fn compose(args: ComposeArgs) -> anyhow::Result<()> {
    let pa = if let Some(files) = &args.parallel {
        let (a, b) = (load(&files[0])?, load(&files[1])?);
        if args.prune {
            parallel_pruned(&a, &b)?
        } else {
            parallel(&a, &b)?
        }
    } else {
        let files = args.choice.as_ref().expect("clap enforces one mode");
        let spec: ChoiceSpec = serde_json::from_str(&read_text(&files[0])?)
            .map_err(|e| usage(format!("choice spec {}: {e}", files[0].display())))?;
        let operands = files[1..].iter().map(|f| load(f)).collect::<anyhow::Result<Vec<_>>>()?;
        let refs: Vec<&ProbAutomaton> = operands.iter().collect();
        let pa = nondet_choice(&spec, &refs)?;
        if args.prune {
            pa.reachable_part()
        } else {
            pa
        }
    };
    emit(args.output.as_deref(), &(write_automaton(&pa) + "\n"))
}

fn parse_cell(text: &str) -> anyhow::Result<(usize, usize)> {
    let bad = || usage(format!("--delete expects `i,j`, got `{text}`"));
    let (i, j) = text.split_once(',').ok_or_else(bad)?;
    Ok((i.trim().parse().map_err(|_| bad())?, j.trim().parse().map_err(|_| bad())?))
}

fn gridbench(ctx: &Ctx, args: GridArgs) -> anyhow::Result<()> {
    let metric = match args.metric.as_str() {
        "discounted" => GridMetric::Discounted(args.big_n.or(ctx.config.big_n).unwrap_or(20)),
        other => other.parse::<GridMetric>().map_err(usage)?,
    };
    let mut spec = GridSpec::new(args.size).metric(metric);
    for d in &args.deletions {
        let (i, j) = parse_cell(d)?;
        spec = spec.delete(i, j);
    }
    let map = heatmap(&spec)?;
    if args.output == OutFormat::Json || ctx.json {
        let rows: Vec<Vec<String>> = map.iter().map(|r| r.iter().map(ToString::to_string).collect()).collect();
        let deletions: Vec<[usize; 2]> = spec.deletions.iter().map(|&(i, j)| [i, j]).collect();
        print_json(&json!({"size": spec.n, "metric": metric.to_string(), "deletions": deletions, "heatmap": rows}));
    } else {
        out(&heatmap_csv(&map, ctx.digits(args.digits)));
    }
    Ok(())
}
