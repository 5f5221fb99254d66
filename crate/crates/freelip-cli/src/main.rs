//! `freelip`: exact inspection of molecules in Lipschitz-free spaces over
//! finite metric spaces.
//!
//! Every quantity is computed in arbitrary-precision rational arithmetic and
//! printed in lowest terms, so outputs are reproducible bit for bit given
//! the same flags.
//!
//! Exit codes are a stable contract: 0 success, 1 metric-axiom violation in
//! the input, 2 usage or file-format error, 3 violated internal invariant
//! (a cross-check that can only fail on a solver or theory bug).

use clap::{Parser, Subcommand, ValueEnum};
use freelip::extremal::{
    classify, difference_quotient, exposing_functional, norming_scan, oracle_extreme,
    strongly_exposed_constant, MoleculeClassification,
};
use freelip::freespace::{
    delta, element_from_json, molecule_element, norm_dual, norm_primal, subspace_intersection,
    FreeElement, LipFunction, Molecule,
};
use freelip::metric::{
    from_graph, gen_random, gen_tree_with_edges, gen_ultrametric, space_or_graph_from_json,
    space_to_json, FiniteMetricSpace, MetricError, PointId, SpaceFileError,
};
use freelip::rational::{format_rational, rat, rat_int, Rational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

const REPORT_SCHEMA: &str = "freelip/1";
const ORACLE_LIMIT_VAR: &str = "FREELIP_MAX_ORACLE_POINTS";
const DEFAULT_ORACLE_LIMIT: usize = 8;
const COUNTEREXAMPLE_PATH: &str = "freelip-counterexample.json";

#[derive(Parser)]
#[command(
    name = "freelip",
    version,
    about = "Exact classification of molecules in Lipschitz-free spaces over finite metric spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a space or graph file against the metric axioms.
    Validate { file: PathBuf },
    /// Classify one molecule or all of them: segment, extremality,
    /// exposure constant, exposing functional, optional hull oracle.
    Classify {
        file: PathBuf,
        /// One molecule as two comma-separated point labels, e.g. --pair p0,p3.
        /// Output keeps this order; swapping it negates the molecule and
        /// changes no verdict.
        #[arg(long, value_name = "P,Q", conflicts_with = "all")]
        pair: Option<String>,
        /// Every ordered pair, sorted by point index.
        #[arg(long)]
        all: bool,
        /// Also run the convex-hull oracle and cross-check it.
        #[arg(long)]
        oracle: bool,
        #[arg(long)]
        json: bool,
        /// Run the oracle even on spaces above the point limit.
        #[arg(long)]
        force: bool,
    },
    /// Run the invariant suite on a file or on freshly generated spaces,
    /// dumping the first failing space to freelip-counterexample.json.
    /// Reports the largest exposure constant seen; the tree and ultrametric
    /// kinds also enforce their promised ceilings (1/2 and 1).
    Verify {
        file: Option<PathBuf>,
        /// Generate spaces instead of reading a file.
        #[arg(long, value_enum, conflicts_with = "file", requires = "n")]
        gen: Option<GenKind>,
        #[arg(long)]
        n: Option<usize>,
        /// How many generated spaces to check (seed, seed+1, ...).
        #[arg(long, default_value_t = 1)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Exact free-space norm of an element, with both certificates.
    Norm {
        file: PathBuf,
        #[arg(long)]
        element: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Rigid pairs and molecule face of the functions norming one pair.
    Face {
        file: PathBuf,
        p: String,
        q: String,
        #[arg(long)]
        json: bool,
    },
    /// Write a seeded space to a canonical JSON file.
    Gen {
        kind: GenKind,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Upper bound for the raw distance draws of the random kind.
        #[arg(long, default_value_t = 10)]
        scale: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum, Debug)]
enum GenKind {
    /// Shortest-path closure of uniform draws in [1, scale].
    Random,
    /// Agglomerative merge tree; always an ultrametric.
    Ultrametric,
    /// Random tree with integer edge weights in [1, 5].
    Tree,
    /// Random connected graph (a tree plus extra edges), emitted as its
    /// shortest-path closure.
    Graph,
}

#[derive(Debug)]
enum Failure {
    Axiom(String),
    Usage(String),
    Invariant(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Axiom(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Invariant(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Axiom(m) | Failure::Usage(m) | Failure::Invariant(m) => m,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Validate { file } => cmd_validate(&file),
        Command::Classify {
            file,
            pair,
            all,
            oracle,
            json,
            force,
        } => cmd_classify(&file, pair.as_deref(), all, oracle, json, force),
        Command::Verify {
            file,
            gen,
            n,
            trials,
            seed,
        } => cmd_verify(file.as_deref(), gen, n, trials, seed),
        Command::Norm {
            file,
            element,
            json,
        } => cmd_norm(&file, &element, json),
        Command::Face { file, p, q, json } => cmd_face(&file, &p, &q, json),
        Command::Gen {
            kind,
            n,
            seed,
            scale,
            out,
        } => cmd_gen(kind, n, seed, scale, &out),
    }
}

// ---------------------------------------------------------------------------
// Report types: the versioned JSON surface. Field sets only ever grow; a
// schema bump accompanies any breaking change.

#[derive(Serialize, Deserialize, PartialEq, Debug)]
struct Report {
    schema: String,
    command: String,
    space: SpaceSummary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pairs: Option<Vec<PairReport>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    norm: Option<NormReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    face: Option<FaceReport>,
    timing_ms: u128,
}

#[derive(Serialize, Deserialize, PartialEq, Debug)]
struct SpaceSummary {
    points: Vec<String>,
    base: String,
    diameter: String,
    ultrametric: bool,
}

#[derive(Serialize, Deserialize, PartialEq, Debug)]
struct PairReport {
    p: String,
    q: String,
    segment: Vec<String>,
    extreme: bool,
    preserved_extreme: bool,
    denting: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    constant: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    exposing: Option<BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    oracle_extreme: Option<bool>,
}

#[derive(Serialize, Deserialize, PartialEq, Debug)]
struct NormReport {
    element: BTreeMap<String, String>,
    value: String,
    by_function: String,
    by_transport: String,
    witness: BTreeMap<String, String>,
    plan: Vec<PlanArc>,
}

#[derive(Serialize, Deserialize, PartialEq, Debug)]
struct PlanArc {
    from: String,
    to: String,
    amount: String,
}

#[derive(Serialize, Deserialize, PartialEq, Debug)]
struct FaceReport {
    p: String,
    q: String,
    segment: Vec<String>,
    rigid: Vec<(String, String)>,
    face: Vec<(String, String)>,
    rigid_on_segment: bool,
    face_within_segment: bool,
}

fn space_summary(space: &FiniteMetricSpace) -> SpaceSummary {
    SpaceSummary {
        points: space.labels().to_vec(),
        base: space.label(space.base()).to_string(),
        diameter: format_rational(&space.diameter()),
        ultrametric: space.is_ultrametric(),
    }
}

// ---------------------------------------------------------------------------
// Shared plumbing.

fn load_space(path: &Path) -> Result<FiniteMetricSpace, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    match space_or_graph_from_json(&text) {
        Ok(space) => Ok(space),
        Err(SpaceFileError::Metric(e)) => {
            Err(Failure::Axiom(format!("{}: {e}", path.display())))
        }
        Err(e) => Err(Failure::Usage(format!("{}: {e}", path.display()))),
    }
}

fn point_by_label(space: &FiniteMetricSpace, label: &str) -> Result<PointId, Failure> {
    space
        .point_by_label(label)
        .ok_or_else(|| Failure::Usage(format!("no point labeled {label:?} in the space")))
}

fn oracle_limit() -> Result<usize, Failure> {
    match std::env::var(ORACLE_LIMIT_VAR) {
        Ok(text) => parse_oracle_limit(&text),
        Err(std::env::VarError::NotPresent) => Ok(DEFAULT_ORACLE_LIMIT),
        Err(e) => Err(Failure::Usage(format!("{ORACLE_LIMIT_VAR}: {e}"))),
    }
}

fn parse_oracle_limit(text: &str) -> Result<usize, Failure> {
    text.trim().parse::<usize>().map_err(|_| {
        Failure::Usage(format!(
            "{ORACLE_LIMIT_VAR} must be a nonnegative integer, got {text:?}"
        ))
    })
}

fn distinct_points(
    space: &FiniteMetricSpace,
    p: &str,
    q: &str,
) -> Result<(PointId, PointId), Failure> {
    let p = point_by_label(space, p)?;
    let q = point_by_label(space, q)?;
    if p == q {
        return Err(Failure::Usage(format!(
            "the two points must differ, got {} twice",
            space.label(p)
        )));
    }
    Ok((p, q))
}

fn labels_of(space: &FiniteMetricSpace, points: &[PointId]) -> Vec<String> {
    points.iter().map(|&x| space.label(x).to_string()).collect()
}

fn function_values(space: &FiniteMetricSpace, f: &LipFunction<'_>) -> BTreeMap<String, String> {
    // The base value is identically zero and omitted.
    space
        .points()
        .filter(|&x| x != space.base())
        .map(|x| (space.label(x).to_string(), format_rational(f.value(x))))
        .collect()
}

fn element_values(mu: &FreeElement<'_>) -> BTreeMap<String, String> {
    let space = mu.space();
    mu.iter()
        .map(|(x, c)| (space.label(x).to_string(), format_rational(c)))
        .collect()
}

fn molecule_labels(space: &FiniteMetricSpace, pairs: &[Molecule]) -> Vec<(String, String)> {
    pairs
        .iter()
        .map(|m| {
            (
                space.label(m.p()).to_string(),
                space.label(m.q()).to_string(),
            )
        })
        .collect()
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn print_space_line(space: &FiniteMetricSpace) {
    println!(
        "space: {} points, base {}, diameter {}, ultrametric {}",
        space.point_count(),
        space.label(space.base()),
        format_rational(&space.diameter()),
        yes_no(space.is_ultrametric()),
    );
}

// ---------------------------------------------------------------------------
// validate

fn cmd_validate(file: &Path) -> Result<(), Failure> {
    let space = load_space(file)?;
    println!("valid");
    print_space_line(&space);
    Ok(())
}

// ---------------------------------------------------------------------------
// classify

fn cmd_classify(
    file: &Path,
    pair: Option<&str>,
    all: bool,
    oracle: bool,
    json: bool,
    force: bool,
) -> Result<(), Failure> {
    let started = Instant::now();
    let space = load_space(file)?;
    let pairs: Vec<(PointId, PointId)> = match (pair, all) {
        (Some(text), false) => {
            let (p, q) = text.split_once(',').ok_or_else(|| {
                Failure::Usage("--pair wants two comma-separated labels, e.g. p0,p3".to_string())
            })?;
            vec![distinct_points(&space, p.trim(), q.trim())?]
        }
        (None, true) => space.ordered_pairs().collect(),
        _ => {
            return Err(Failure::Usage(
                "pass either --pair P,Q or --all".to_string(),
            ))
        }
    };
    if oracle && !force {
        let limit = oracle_limit()?;
        if space.point_count() > limit {
            let n = space.point_count();
            return Err(Failure::Usage(format!(
                "the hull oracle on {n} points solves a program over {} molecules per pair; \
                 raise {ORACLE_LIMIT_VAR} (currently {limit}) or pass --force",
                (n * (n - 1)).saturating_sub(1),
            )));
        }
    }

    let mut rows = Vec::with_capacity(pairs.len());
    for (p, q) in pairs {
        let c = classify(&space, p, q, oracle)
            .map_err(|e| Failure::Usage(format!("pair ({}, {}): {e}", space.label(p), space.label(q))))?;
        if let Some(by_oracle) = c.oracle_extreme {
            if by_oracle != c.is_extreme {
                return Err(Failure::Invariant(format!(
                    "pair ({}, {}): segment test says extreme = {}, hull oracle says {}",
                    space.label(p),
                    space.label(q),
                    c.is_extreme,
                    by_oracle,
                )));
            }
        }
        rows.push(pair_report(&space, &c));
    }

    if json {
        let report = Report {
            schema: REPORT_SCHEMA.to_string(),
            command: "classify".to_string(),
            space: space_summary(&space),
            pairs: Some(rows),
            norm: None,
            face: None,
            timing_ms: started.elapsed().as_millis(),
        };
        println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    } else {
        print_space_line(&space);
        for row in &rows {
            println!("{}", human_pair_line(row));
        }
    }
    Ok(())
}

fn pair_report(space: &FiniteMetricSpace, c: &MoleculeClassification<'_>) -> PairReport {
    PairReport {
        p: space.label(c.pair.p()).to_string(),
        q: space.label(c.pair.q()).to_string(),
        segment: labels_of(space, &c.segment),
        extreme: c.is_extreme,
        preserved_extreme: c.is_preserved_extreme,
        denting: c.is_denting,
        constant: c.strongly_exposed_constant.as_ref().map(format_rational),
        exposing: c
            .exposing_functional
            .as_ref()
            .map(|f| function_values(space, f)),
        oracle_extreme: c.oracle_extreme,
    }
}

fn human_pair_line(row: &PairReport) -> String {
    let mut line = format!(
        "({}, {}): extreme {}, segment {{{}}}",
        row.p,
        row.q,
        yes_no(row.extreme),
        row.segment.join(", "),
    );
    match &row.constant {
        Some(c) => line.push_str(&format!(", constant {c}")),
        None => line.push_str(", constant -"),
    }
    match &row.exposing {
        Some(values) => {
            let body: Vec<String> = values.iter().map(|(k, v)| format!("{k}: {v}")).collect();
            line.push_str(&format!(", exposing {{{}}}", body.join(", ")));
        }
        None => line.push_str(", exposing -"),
    }
    if let Some(by_oracle) = row.oracle_extreme {
        line.push_str(&format!(", oracle {}", yes_no(by_oracle)));
    }
    line
}

// ---------------------------------------------------------------------------
// norm

fn cmd_norm(file: &Path, element_file: &Path, json: bool) -> Result<(), Failure> {
    let started = Instant::now();
    let space = load_space(file)?;
    let text = std::fs::read_to_string(element_file)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", element_file.display())))?;
    let mu = element_from_json(&space, &text)
        .map_err(|e| Failure::Usage(format!("{}: {e}", element_file.display())))?;

    let (by_function, witness) = norm_dual(&mu);
    let (by_transport, plan) = norm_primal(&mu);
    if by_function != by_transport {
        return Err(Failure::Invariant(format!(
            "norm mismatch: function route gives {}, transport route gives {}",
            format_rational(&by_function),
            format_rational(&by_transport),
        )));
    }

    let report = NormReport {
        element: element_values(&mu),
        value: format_rational(&by_function),
        by_function: format_rational(&by_function),
        by_transport: format_rational(&by_transport),
        witness: function_values(&space, &witness),
        plan: plan
            .iter()
            .map(|((x, y), t)| PlanArc {
                from: space.label(*x).to_string(),
                to: space.label(*y).to_string(),
                amount: format_rational(t),
            })
            .collect(),
    };

    if json {
        let report = Report {
            schema: REPORT_SCHEMA.to_string(),
            command: "norm".to_string(),
            space: space_summary(&space),
            pairs: None,
            norm: Some(report),
            face: None,
            timing_ms: started.elapsed().as_millis(),
        };
        println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    } else {
        print_space_line(&space);
        println!("norm by functions: {}", report.by_function);
        println!("norm by transport: {}", report.by_transport);
        println!("both routes agree: norm {}", report.value);
        let witness_body: Vec<String> = report
            .witness
            .iter()
            .map(|(k, v)| format!("{k}: {v}"))
            .collect();
        println!("witness function {{{}}}", witness_body.join(", "));
        let plan_body: Vec<String> = report
            .plan
            .iter()
            .map(|arc| format!("{} -> {}: {}", arc.from, arc.to, arc.amount))
            .collect();
        println!("transport plan: {}", if plan_body.is_empty() {
            "empty".to_string()
        } else {
            plan_body.join(", ")
        });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// face

fn cmd_face(file: &Path, p: &str, q: &str, json: bool) -> Result<(), Failure> {
    let started = Instant::now();
    let space = load_space(file)?;
    let (p, q) = distinct_points(&space, p, q)?;
    let scan = norming_scan(&space, p, q)
        .map_err(|e| Failure::Usage(format!("pair ({}, {}): {e}", space.label(p), space.label(q))))?;
    let segment = space.segment(p, q).expect("points are distinct");

    // Both containments re-derived here so a single command surfaces them.
    let zero = rat_int(0);
    let on_segment = scan.rigid.iter().all(|m| {
        space.gap(m.p(), p, q).expect("points are distinct") == zero
            && space.gap(m.q(), p, q).expect("points are distinct") == zero
    });
    let within_segment = scan
        .face
        .iter()
        .all(|m| segment.contains(&m.p()) && segment.contains(&m.q()));
    if !on_segment || !within_segment {
        return Err(Failure::Invariant(format!(
            "pair ({}, {}): norming scan escaped the segment",
            space.label(p),
            space.label(q),
        )));
    }

    let report = FaceReport {
        p: space.label(p).to_string(),
        q: space.label(q).to_string(),
        segment: labels_of(&space, &segment),
        rigid: molecule_labels(&space, &scan.rigid),
        face: molecule_labels(&space, &scan.face),
        rigid_on_segment: on_segment,
        face_within_segment: within_segment,
    };

    if json {
        let report = Report {
            schema: REPORT_SCHEMA.to_string(),
            command: "face".to_string(),
            space: space_summary(&space),
            pairs: None,
            norm: None,
            face: Some(report),
            timing_ms: started.elapsed().as_millis(),
        };
        println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    } else {
        print_space_line(&space);
        println!("pair ({}, {}): segment {{{}}}", report.p, report.q, report.segment.join(", "));
        println!("rigid pairs: {}", format_label_pairs(&report.rigid));
        println!("face: {}", format_label_pairs(&report.face));
        println!("rigid pairs on segment: {}", yes_no(report.rigid_on_segment));
        println!("face within segment: {}", yes_no(report.face_within_segment));
    }
    Ok(())
}

fn format_label_pairs(pairs: &[(String, String)]) -> String {
    if pairs.is_empty() {
        return "none".to_string();
    }
    pairs
        .iter()
        .map(|(a, b)| format!("({a}, {b})"))
        .collect::<Vec<_>>()
        .join(" ")
}

// ---------------------------------------------------------------------------
// gen

fn cmd_gen(kind: GenKind, n: usize, seed: u64, scale: u64, out: &Path) -> Result<(), Failure> {
    let space = generate(kind, n, seed, scale)
        .map_err(|e| Failure::Usage(format!("cannot generate: {e}")))?;
    std::fs::write(out, space_to_json(&space))
        .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", out.display())))?;
    println!(
        "wrote {}-point {} space (seed {seed}) to {}",
        space.point_count(),
        kind_name(kind),
        out.display(),
    );
    Ok(())
}

fn kind_name(kind: GenKind) -> &'static str {
    match kind {
        GenKind::Random => "random",
        GenKind::Ultrametric => "ultrametric",
        GenKind::Tree => "tree",
        GenKind::Graph => "graph-closure",
    }
}

fn generate(kind: GenKind, n: usize, seed: u64, scale: u64) -> Result<FiniteMetricSpace, MetricError> {
    match kind {
        GenKind::Random => gen_random(n, seed, scale),
        GenKind::Ultrametric => gen_ultrametric(n, seed),
        GenKind::Tree => gen_tree_with_edges(n, seed).map(|(space, _)| space),
        GenKind::Graph => gen_graph_space(n, seed),
    }
}

/// A random tree plus up to n-2 extra edges, closed by shortest paths. The
/// extra edges come from an independent stream (seed XOR 0x677261_7068):
/// each draw takes two endpoints in [0, n) and a weight in [1, 5], in that
/// order, and is discarded when the endpoints coincide.
fn gen_graph_space(n: usize, seed: u64) -> Result<FiniteMetricSpace, MetricError> {
    let (_, mut edges) = gen_tree_with_edges(n, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6772_6170_68);
    for _ in 0..n.saturating_sub(2) {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        let w = rat_int(rng.random_range(1..=5));
        if a != b {
            edges.push((format!("p{a}"), format!("p{b}"), w));
        }
    }
    from_graph(&edges, "p0")
}

// ---------------------------------------------------------------------------
// verify

fn cmd_verify(
    file: Option<&Path>,
    gen: Option<GenKind>,
    n: Option<usize>,
    trials: u64,
    seed: u64,
) -> Result<(), Failure> {
    let limit = oracle_limit()?;
    // Generated kinds come with a promised ceiling on the exposure constant:
    // 1/2 for tree metrics, 1 for ultrametrics. A file tells us neither shape,
    // so only the ultrametric ceiling applies there (checked per space once
    // the defining inequality has been confirmed).
    let promised_cap: Option<Rational> = match gen {
        Some(GenKind::Tree) => Some(rat(1, 2)),
        Some(GenKind::Ultrametric) => Some(rat_int(1)),
        _ => None,
    };
    let mut spaces_checked = 0usize;
    let mut pairs_checked = 0usize;
    let mut oracle_skipped = false;
    let mut max_constant: Option<Rational> = None;

    let mut run_one = |space: &FiniteMetricSpace, origin: &str, element_seed: u64|
        -> Result<(), Failure> {
        let guarded = space.point_count() > limit;
        match verify_space(space, guarded, element_seed, promised_cap.as_ref()) {
            Ok(check) => {
                spaces_checked += 1;
                pairs_checked += check.pairs;
                oracle_skipped |= guarded;
                if let Some(c) = check.max_constant {
                    if max_constant.as_ref().map_or(true, |best| c > *best) {
                        max_constant = Some(c);
                    }
                }
                println!(
                    "{origin}: {} points, {} pairs: ok{}",
                    space.point_count(),
                    check.pairs,
                    if guarded { " (oracle skipped)" } else { "" },
                );
                Ok(())
            }
            Err(what) => {
                let dump = std::fs::write(COUNTEREXAMPLE_PATH, space_to_json(space))
                    .map(|_| format!("space dumped to {COUNTEREXAMPLE_PATH}"))
                    .unwrap_or_else(|e| format!("dump failed: {e}"));
                Err(Failure::Invariant(format!("{origin}: {what} ({dump})")))
            }
        }
    };

    match (file, gen) {
        (Some(path), None) => {
            let space = load_space(path)?;
            run_one(&space, &path.display().to_string(), seed)?;
        }
        (None, Some(kind)) => {
            let n = n.ok_or_else(|| Failure::Usage("--gen needs --n".to_string()))?;
            for t in 0..trials {
                let trial_seed = seed.wrapping_add(t);
                let space = generate(kind, n, trial_seed, 10)
                    .map_err(|e| Failure::Usage(format!("cannot generate: {e}")))?;
                run_one(&space, &format!("trial {}/{trials}", t + 1), trial_seed)?;
            }
        }
        _ => {
            return Err(Failure::Usage(
                "pass either a space file or --gen KIND --n N".to_string(),
            ))
        }
    }

    println!(
        "verified {spaces_checked} space(s), {pairs_checked} pair(s): all checks passed{}",
        if oracle_skipped {
            " (hull oracle skipped above the point limit)"
        } else {
            ""
        },
    );
    if let Some(c) = &max_constant {
        match &promised_cap {
            Some(cap) => println!(
                "max exposure constant observed: {} (bound {} holds)",
                format_rational(c),
                format_rational(cap),
            ),
            None => println!("max exposure constant observed: {}", format_rational(c)),
        }
    }
    Ok(())
}

struct SpaceCheck {
    pairs: usize,
    /// Largest exposure constant seen across the extreme pairs, None when the
    /// space has no extreme pair (a single point).
    max_constant: Option<Rational>,
}

/// The per-space invariant suite. `skip_hull` drops the two checks whose
/// cost grows with the molecule count (the hull oracle and the exposing
/// functional); everything else always runs. `promised_cap` is an optional
/// ceiling the exposure constants must respect, used when the caller knows
/// the shape of the space (tree or ultrametric generators). Returns the
/// check tallies, or a description of the first violated invariant.
fn verify_space(
    space: &FiniteMetricSpace,
    skip_hull: bool,
    element_seed: u64,
    promised_cap: Option<&Rational>,
) -> Result<SpaceCheck, String> {
    let mut pairs = 0usize;
    let mut max_constant: Option<Rational> = None;
    let one = rat_int(1);
    for (p, q) in space.ordered_pairs() {
        pairs += 1;
        let name = format!("({}, {})", space.label(p), space.label(q));
        let extreme = space.segment_is_trivial(p, q).expect("pairs are distinct");

        if !skip_hull {
            let by_oracle = oracle_extreme(space, p, q).expect("pairs are distinct");
            if by_oracle != extreme {
                return Err(format!(
                    "{name}: segment test says extreme = {extreme}, hull oracle says {by_oracle}"
                ));
            }
            let witness = exposing_functional(space, p, q).expect("pairs are distinct");
            if witness.is_some() != extreme {
                return Err(format!(
                    "{name}: exposing functional present = {}, extreme = {extreme}",
                    witness.is_some(),
                ));
            }
            if let Some(f) = witness {
                if f.lip_norm() > one || difference_quotient(&f, p, q).expect("distinct") != one {
                    return Err(format!("{name}: exposing functional is not norming"));
                }
            }
        }

        let scan = norming_scan(space, p, q).expect("pairs are distinct");
        let segment = space.segment(p, q).expect("pairs are distinct");
        let zero = rat_int(0);
        for m in &scan.rigid {
            let zero_gap = space.gap(m.p(), p, q).expect("distinct") == zero
                && space.gap(m.q(), p, q).expect("distinct") == zero;
            if !zero_gap {
                return Err(format!("{name}: a rigid pair lies off the segment"));
            }
        }
        for m in &scan.face {
            if !segment.contains(&m.p()) || !segment.contains(&m.q()) {
                return Err(format!("{name}: the face leaves the segment"));
            }
        }
        if extreme && scan.face != vec![Molecule::new(p, q).expect("distinct")] {
            return Err(format!("{name}: extreme pair has a non-singleton face"));
        }

        if let Some(constant) = strongly_exposed_constant(space, p, q).expect("distinct") {
            for x in space.points() {
                if x == p || x == q {
                    continue;
                }
                let gap = space.gap(x, p, q).expect("distinct");
                let closer = std::cmp::min(space.d(x, p), space.d(x, q));
                if closer > &(&constant * &gap) {
                    return Err(format!(
                        "{name}: exposure bound fails at {}",
                        space.label(x)
                    ));
                }
            }
            if space.is_ultrametric() && constant > one {
                return Err(format!("{name}: ultrametric constant above 1"));
            }
            if let Some(cap) = promised_cap {
                if &constant > cap {
                    return Err(format!(
                        "{name}: exposure constant {} exceeds the promised bound {}",
                        format_rational(&constant),
                        format_rational(cap),
                    ));
                }
            }
            if max_constant.as_ref().map_or(true, |best| constant > *best) {
                max_constant = Some(constant);
            }
        } else if extreme {
            return Err(format!("{name}: extreme pair lacks an exposure constant"));
        }

        let mu = molecule_element(space, p, q).expect("pairs are distinct");
        if norm_dual(&mu).0 != one {
            return Err(format!("{name}: molecule norm differs from 1"));
        }
    }

    for x in space.points() {
        let (value, _) = norm_dual(&delta(space, x));
        if &value != space.d(x, space.base()) {
            return Err(format!(
                "point mass at {}: norm differs from the base distance",
                space.label(x)
            ));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(element_seed ^ 0x5EED);
    for i in 0..3 {
        let coeffs: Vec<(PointId, Rational)> = space
            .points()
            .filter(|&x| x != space.base())
            .map(|x| (x, rat(rng.random_range(-6..=6), rng.random_range(1..=4))))
            .collect();
        let mu = FreeElement::new(space, coeffs);
        let (by_function, witness) = norm_dual(&mu);
        let (by_transport, _) = norm_primal(&mu);
        if by_function != by_transport {
            return Err(format!("random element {i}: the two norm routes disagree"));
        }
        if mu.pairing(&witness).expect("same space") != by_function {
            return Err(format!("random element {i}: witness does not attain the norm"));
        }
    }

    // Subspaces spanned by point masses over random subsets: membership in
    // both subsets must coincide with membership in their intersection, and
    // every membership answer must match plain support containment. The
    // element is supported inside the first subset so both outcomes of the
    // second test actually occur. Draws per round: one inclusion bit per
    // non-base point for each subset, then a coefficient pair (numerator,
    // then denominator) per non-base point of the first subset.
    for i in 0..2 {
        let k1 = random_subset(space, &mut rng);
        let k2 = random_subset(space, &mut rng);
        let coeffs: Vec<(PointId, Rational)> = k1
            .iter()
            .filter(|&&x| x != space.base())
            .map(|&x| (x, rat(rng.random_range(-6..=6), rng.random_range(1..=4))))
            .collect();
        let mu = FreeElement::new(space, coeffs);
        let meet = subspace_intersection(space, &[k1.clone(), k2.clone()])
            .expect("both subsets keep the base");
        let in_both = mu.in_subspace(&k1).expect("base kept")
            && mu.in_subspace(&k2).expect("base kept");
        if in_both != mu.in_subspace(&meet).expect("base kept") {
            return Err(format!(
                "subset round {i}: intersection membership diverges from the pairwise answers"
            ));
        }
        for (k, tag) in [(&k1, "first"), (&k2, "second"), (&meet, "intersection")] {
            let by_support = mu.support().iter().all(|x| k.contains(x));
            if by_support != mu.in_subspace(k).expect("base kept") {
                return Err(format!(
                    "subset round {i}: membership in the {tag} subset differs from \
                     support containment"
                ));
            }
        }
    }

    Ok(SpaceCheck {
        pairs,
        max_constant,
    })
}

/// A uniformly random subset that always keeps the base point, one inclusion
/// bit per non-base point in ascending id order.
fn random_subset(space: &FiniteMetricSpace, rng: &mut ChaCha8Rng) -> BTreeSet<PointId> {
    let mut out = BTreeSet::new();
    out.insert(space.base());
    for x in space.points() {
        if x != space.base() && rng.random_range(0..2) == 1 {
            out.insert(x);
        }
    }
    out
}
