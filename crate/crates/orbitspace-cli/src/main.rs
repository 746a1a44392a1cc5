use std::collections::BTreeSet;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use orbitspace::corpus;
use orbitspace::dot;
use orbitspace::grid::{self, BoxGrid, MapParams};
use orbitspace::iso::{self, LabeledPoset};
use orbitspace::morse;
use orbitspace::quotient::{self, Level, QuotientSpace};
use orbitspace::random;
use orbitspace::relations::{self, RelLevel, RelationName};
use orbitspace::surface;
use orbitspace::suspension::{self, PeriodAnnotation};
use orbitspace::{Error, FlowModel, PeriodType};

#[derive(Parser)]
#[command(name = "orbitspace", version, about = "Combinatorial orbit-space invariants of flows")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Out::Text)]
    out: Out,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Out {
    Text,
    Json,
    Dot,
}

#[derive(Args)]
struct ModelArg {
    /// Model file, or `corpus:<id>` for a bundled model.
    model: String,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check a flow model (or with --map, a map model) against the rules.
    Validate {
        #[command(flatten)]
        m: ModelArg,
        #[arg(long)]
        map: bool,
    },
    /// Split nodes by kind, optionally with the boundary of one node.
    Partition {
        #[command(flatten)]
        m: ModelArg,
        /// Also print the boundary decomposition of this node.
        #[arg(long)]
        boundary: Option<String>,
    },
    /// Compute one of the six relations; --check reports order properties.
    Relations {
        #[command(flatten)]
        m: ModelArg,
        #[arg(long, default_value = "partial")]
        name: String,
        /// node, awo, ao or class.
        #[arg(long, default_value = "awo")]
        level: String,
        /// Exit 1 unless the relation is a partial order.
        #[arg(long)]
        check: bool,
        /// Check that partial and v split into their unions instead.
        #[arg(long, conflicts_with = "check")]
        decomposition: bool,
    },
    /// Quotient space at a level, with its specialization order.
    Quotient {
        #[command(flatten)]
        m: ModelArg,
        /// orbit, weak-class, class, awo, ao, extended or morse.
        #[arg(long, default_value = "awo")]
        level: String,
        /// Use the k-th partition of the awo or ao level.
        #[arg(long)]
        k: Option<usize>,
        /// Check the refinement chain instead; exit 1 if it breaks.
        #[arg(long, conflicts_with_all = ["level", "k"])]
        chain: bool,
    },
    /// Morse graph of a compact model; exit 1 if the quotient check fails.
    Morse {
        #[command(flatten)]
        m: ModelArg,
        /// Print the unstable-manifold decomposition instead.
        #[arg(long)]
        unstable: bool,
    },
    /// Morse graph of a planar vector field on a box grid.
    MorseGrid(GridArgs),
    /// Surface invariants; exit 1 if the index sum or a height bound fails.
    Surface {
        #[command(flatten)]
        m: ModelArg,
        /// Print the abstract Reeb graph of a Hamiltonian model instead.
        #[arg(long)]
        reeb: bool,
    },
    /// Suspension flow of a map model, as a flow-model document.
    Suspend {
        /// Map file, or `corpus:<id>` for a bundled map.
        map: String,
    },
    /// Compare a flow with its time-one map.
    TimeOne {
        #[command(flatten)]
        m: ModelArg,
        /// Period type of a periodic node, as `id=RATIONAL`; repeatable.
        #[arg(long = "period", value_name = "ID=TYPE")]
        periods: Vec<String>,
        /// Period type for every periodic node not set by --period.
        #[arg(long, value_name = "TYPE")]
        all: Option<String>,
        /// Run the Hamiltonian reconstruction check; exit 1 on a negative verdict.
        #[arg(long)]
        ham: bool,
    },
    /// Decide whether two models have isomorphic labeled quotients.
    Compare {
        a: String,
        b: String,
        /// awo, ao or extended.
        #[arg(long, default_value = "awo")]
        level: String,
        /// Order the quotients by this relation instead of the topology.
        #[arg(long)]
        relation: Option<String>,
        /// Print the bijection when isomorphic.
        #[arg(long)]
        witness: bool,
        #[arg(long, default_value_t = iso::DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Write a DOT graph of a quotient, relation, Morse graph or Reeb graph.
    ExportDot {
        #[command(flatten)]
        m: ModelArg,
        #[arg(long, value_enum, default_value_t = DotWhat::Quotient)]
        what: DotWhat,
        #[arg(long, default_value = "awo")]
        level: String,
        /// Relation name, for --what relation.
        #[arg(long, default_value = "partial")]
        name: String,
    },
    /// List, print or generate models.
    Corpus {
        /// Bundled id to print; omit to list.
        id: Option<String>,
        /// Generate random valid models instead.
        #[arg(long)]
        random: bool,
        #[arg(long, default_value_t = random::DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 8)]
        max_nodes: usize,
    },
}

#[derive(Args)]
struct GridArgs {
    /// Built-in name or an expression pair `dx, dy` in x and y.
    #[arg(long, allow_hyphen_values = true)]
    field: String,
    /// x0,x1,y0,y1; defaults to the built-in domain or [-1,1]^2.
    #[arg(long, allow_hyphen_values = true)]
    domain: Option<String>,
    /// nx,ny.
    #[arg(long, default_value = "32,32")]
    res: String,
    #[arg(long, default_value_t = 1.0)]
    time: f64,
    /// Inflation radius; defaults to one box diagonal.
    #[arg(long)]
    eps: Option<f64>,
    /// Integrator step; defaults to time / 64.
    #[arg(long)]
    step: Option<f64>,
    /// Compare with the double-well reference graph; exit 1 on mismatch.
    #[arg(long)]
    cross_check: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DotWhat {
    Quotient,
    Relation,
    Morse,
    Reeb,
}

/// What a command produced, in every format it supports.
struct Report {
    text: String,
    json: Value,
    dot: Option<String>,
    code: u8,
}

impl Report {
    fn new(text: String, json: Value) -> Self {
        Report { text, json, dot: None, code: 0 }
    }

    fn dot(mut self, d: String) -> Self {
        self.dot = Some(d);
        self
    }

    fn failing(mut self, fail: bool) -> Self {
        if fail {
            self.code = 1;
        }
        self
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn braces<I: IntoIterator<Item = S>, S: AsRef<str>>(items: I) -> String {
    let v: Vec<String> = items.into_iter().map(|s| s.as_ref().to_string()).collect();
    format!("{{{}}}", v.join(", "))
}

fn load(spec: &str) -> Result<FlowModel, Error> {
    let m = corpus::resolve(spec)?;
    m.ensure_valid()?;
    Ok(m)
}

fn level_arg(s: &str, k: Option<usize>) -> Result<Level, Error> {
    let level: Level = s.parse()?;
    match (level, k) {
        (l, None) => Ok(l),
        (Level::Awo, Some(k)) => Ok(Level::AwoK(k)),
        (Level::Ao, Some(k)) => Ok(Level::AoK(k)),
        (l, Some(_)) => Err(Error::Argument(format!("--k needs level awo or ao, not {l}"))),
    }
}

fn period_arg(s: &str) -> Result<PeriodType, Error> {
    serde_json::from_value(Value::String(s.to_uppercase().replace('-', "_")))
        .map_err(|_| Error::Argument(format!("unknown period type `{s}`")))
}

fn list<T: std::str::FromStr>(s: &str, flag: &str) -> Result<Vec<T>, Error> {
    s.split(',')
        .map(|x| x.trim().parse().map_err(|_| Error::Argument(format!("bad value `{x}` in {flag}"))))
        .collect()
}

fn quotient_text(q: &QuotientSpace) -> String {
    let mut out = format!("{} blocks at level {}\n", q.len(), q.level);
    for b in &q.blocks {
        out += &format!("  {}: {}\n", b.label, braces(&b.members));
    }
    let cover = q.order.covering_pairs();
    if !cover.is_empty() {
        out += "order (covering pairs):\n";
        for (a, b) in cover {
            out += &format!("  {} < {}\n", q.order.label(a), q.order.label(b));
        }
    }
    out
}

fn validate(spec: &str, map: bool) -> Result<Report, Error> {
    let (n, violations) = if map {
        let m = corpus::resolve_map(spec)?;
        (m.nodes.len(), m.validate())
    } else {
        let m = corpus::resolve(spec)?;
        (m.len(), m.validate())
    };
    let text = if violations.is_empty() {
        format!("valid: {n} nodes\n")
    } else {
        violations.iter().map(|v| format!("{v}\n")).collect()
    };
    let mut r = Report::new(text, json!({ "valid": violations.is_empty(), "violations": violations }));
    if !violations.is_empty() {
        r.code = 3;
    }
    Ok(r)
}

fn partition(spec: &str, boundary: Option<&str>) -> Result<Report, Error> {
    let m = load(spec)?;
    let kp = m.kind_partition();
    let mut text = format!(
        "Sing = {}\nPer = {}\nP = {}\nR = {}\n",
        braces(&kp.sing),
        braces(&kp.per),
        braces(&kp.p),
        braces(&kp.r)
    );
    let mut j = json!({ "kinds": kp });
    if let Some(id) = boundary {
        let d = m.boundary_decomposition(id)?;
        text += &format!("boundary of {id}: perp = {}, pitchfork = {}\n", braces(&d.perp), braces(&d.pitchfork));
        j["boundary"] = to_json(&d);
    }
    Ok(Report::new(text, j))
}

fn relation(spec: &str, name: &str, level: &str, check: bool, decomposition: bool) -> Result<Report, Error> {
    let m = load(spec)?;
    if decomposition {
        let d = relations::relation_decomposition_check(&m)?;
        let mut text = format!("decomposition: {}\n", if d.passed { "holds" } else { "fails" });
        for v in &d.violations {
            text += &format!("  {} at {}: ({}, {})\n", v.relation, v.level, v.pair.0, v.pair.1);
        }
        return Ok(Report::new(text, to_json(&d)).failing(!d.passed));
    }
    let r = relations::compute_relation(&m, name.parse()?, level.parse::<RelLevel>()?)?;
    let mut text = format!("{} at level {} on {}\n", r.name, r.level, braces(&r.elements));
    for (a, b) in r.pairs() {
        text += &format!("  {a} <= {b}\n");
    }
    let mut j = to_json(&r);
    let mut fail = false;
    if check {
        let p = relations::check_properties(&r);
        let yes = |b: bool| if b { "yes" } else { "no" };
        text += &format!("reflexive: {}\ntransitive: {}", yes(p.reflexive), yes(p.transitive));
        if let Some((a, b, c)) = &p.transitivity_witness {
            text += &format!(" (witness {a}, {b}, {c})");
        }
        text += &format!("\nantisymmetric: {}", yes(p.antisymmetric));
        if let Some((a, b)) = &p.antisymmetry_witness {
            text += &format!(" (witness {a}, {b})");
        }
        text.push('\n');
        fail = !p.is_partial_order();
        j["properties"] = to_json(&p);
    }
    Ok(Report::new(text, j).dot(dot::relation_dot(&r)).failing(fail))
}

fn quotient_cmd(spec: &str, level: &str, k: Option<usize>, chain: bool) -> Result<Report, Error> {
    let m = load(spec)?;
    if chain {
        let checks = quotient::refinement_chain(&m)?;
        let text = checks
            .iter()
            .map(|c| format!("{} -> {}: {}\n", c.finer, c.coarser, if c.holds { "refines" } else { "FAILS" }))
            .collect();
        let fail = checks.iter().any(|c| !c.holds);
        return Ok(Report::new(text, to_json(&checks)).failing(fail));
    }
    let level = level_arg(level, k)?;
    let q = quotient::compute_quotient(&m, level)?;
    let mut j = to_json(&q);
    let mut text = quotient_text(&q);
    if level == Level::Extended {
        let (_, qs) = quotient::extended_partition(&m);
        for s in &qs.quasi_saddles {
            text += &format!("quasi-saddle: {}\n", braces(s));
        }
        j["quasi_saddles"] = to_json(&qs);
    }
    Ok(Report::new(text, j).dot(dot::quotient_dot(&q)))
}

fn morse_cmd(spec: &str, unstable: bool) -> Result<Report, Error> {
    let m = load(spec)?;
    if unstable {
        let cells = morse::unstable_decomposition(&m)?;
        let text = cells.iter().map(|c| format!("W({}) = {}\n", c.center, braces(&c.members))).collect();
        return Ok(Report::new(text, to_json(&cells)));
    }
    let d = morse::morse_graph(&m)?;
    let check = morse::verify_morse_quotient(&m, &d)?;
    let g = &d.graph;
    let mut text = format!("{} Morse sets, {} edges\n", g.morse_sets.len(), g.edges.len());
    for (i, s) in g.morse_sets.iter().enumerate() {
        text += &format!("  M{i} = {}\n", braces(s));
    }
    for e in &g.edges {
        text += &format!("  M{} -> M{} via {}\n", e.from, e.to, braces(&e.connecting));
    }
    text += &format!("quotient check: {}\n", if check.passed() { "passes" } else { "fails" });
    let j = json!({ "graph": g, "check": check });
    Ok(Report::new(text, j).dot(dot::morse_dot(g)).failing(!check.passed()))
}

fn morse_grid(a: &GridArgs) -> Result<Report, Error> {
    let field = grid::field_from_spec(&a.field)?;
    let domain = match &a.domain {
        Some(d) => <[f64; 4]>::try_from(list::<f64>(d, "--domain")?)
            .map_err(|_| Error::Argument("--domain needs four numbers".into()))?,
        None => grid::builtin_domain(&a.field).unwrap_or([-1.0, 1.0, -1.0, 1.0]),
    };
    let res = list::<usize>(&a.res, "--res")?;
    let [nx, ny] = res[..] else {
        return Err(Error::Argument("--res needs two integers".into()));
    };
    let g = BoxGrid::new(domain, nx, ny)?;
    let params = MapParams { time: a.time, eps: a.eps.unwrap_or(g.diagonal()), step: a.step.unwrap_or(a.time / 64.0) };
    let map = grid::build_box_map(&*field, g, params)?;
    let mg = grid::grid_morse_graph(&map);
    let rects = grid::morse_set_rects(&g, &mg);
    let mut text = format!("{} Morse sets, {} edges on a {}x{} grid\n", mg.morse_sets.len(), mg.edges.len(), g.nx, g.ny);
    for (i, s) in mg.morse_sets.iter().enumerate() {
        let r = &rects[&i];
        text += &format!("  M{i}: {} boxes in [{:.3}, {:.3}] x [{:.3}, {:.3}]\n", s.len(), r.x0, r.x1, r.y0, r.y1);
    }
    for e in &mg.edges {
        text += &format!("  M{} -> M{}\n", e.from, e.to);
    }
    let mut j = json!({ "grid": g, "params": params, "graph": mg, "bounds": rects });
    let mut fail = false;
    if a.cross_check {
        let c = grid::cross_check(&mg, &grid::double_well_reference(), grid::double_well_correspondence(&g))?;
        text += &format!("cross check: {}\n", if c.passed { "passes" } else { "fails" });
        fail = !c.passed;
        j["cross_check"] = to_json(&c);
    }
    Ok(Report::new(text, j).dot(dot::morse_dot(&mg)).failing(fail))
}

fn surface_cmd(spec: &str, reeb: bool) -> Result<Report, Error> {
    let m = load(spec)?;
    if reeb {
        let r = surface::reeb_abstract_graph(&m)?;
        let mut text = format!("vertices: {}\n", braces(&r.graph.vertices));
        for e in &r.graph.edges {
            text += &format!("  {}: {}\n", e.label, braces(&e.ends));
        }
        return Ok(Report::new(text, to_json(&r)).dot(dot::multigraph_dot(&r.graph)));
    }
    let r = surface::classify_awos(&m)?;
    let mut text = String::new();
    for (label, t) in &r.awo_types {
        text += &format!("  {label}: {}\n", to_json(t).as_str().unwrap_or_default());
    }
    for (label, why) in &r.unclassified {
        text += &format!("  {label}: unclassified ({why})\n");
    }
    text += &format!("finite type: {}\n", r.is_finite_type);
    text += &format!("diagram: {}\n", braces(&r.msc_diagram.nodes));
    if let Some(s) = &r.stratification {
        text += &format!("height: {} (bound {})\n", s.height, s.height_bound);
    }
    let e = &r.euler;
    let sum = match e.index_sum {
        Some(s) => s.to_string(),
        None => format!("{}/2", e.doubled_index_sum),
    };
    text += &format!("index sum: {sum}, euler characteristic: {}\n", e.euler_characteristic);
    let fail = !e.passes || !r.height_bound_ok;
    Ok(Report::new(text, to_json(&r)).failing(fail))
}

fn suspend_cmd(spec: &str) -> Result<Report, Error> {
    let map = corpus::resolve_map(spec)?;
    let flow = suspension::suspend(&map)?;
    let doc = flow.to_json();
    let j: Value = serde_json::from_str(&doc).map_err(|e| Error::Parse(e.to_string()))?;
    Ok(Report::new(doc + "\n", j))
}

fn time_one(spec: &str, periods: &[String], all: Option<&str>, ham: bool) -> Result<Report, Error> {
    let m = load(spec)?;
    let mut ann = match all {
        Some(t) => PeriodAnnotation::all(&m, period_arg(t)?),
        None => PeriodAnnotation::from_model(&m),
    };
    for p in periods {
        let (id, t) = p.split_once('=').ok_or_else(|| Error::Argument(format!("expected ID=TYPE, got `{p}`")))?;
        m.lookup(id)?;
        ann = ann.with(id, period_arg(t)?);
    }
    if ham {
        let r = suspension::ham_reconstruction_check(&m, &ann)?;
        let mut text = format!("reconstructs orbits: {}\n", r.verdict);
        for f in &r.families {
            text += &format!("  {}: {}\n", f.family, to_json(&f.period).as_str().unwrap_or_default());
        }
        return Ok(Report::new(text, to_json(&r)).failing(!r.verdict));
    }
    let r = suspension::time_one_awo_space(&m, &ann)?;
    let mut text = format!("level 1: {} blocks, equal to flow: {}\n", r.level1.len(), r.level1_equal);
    if !r.level1_split.is_empty() {
        text += &format!("  split: {}\n", braces(&r.level1_split));
    }
    text += &format!("level 2: {} blocks, equal to flow: {}\n", r.level2.len(), r.level2_equal);
    Ok(Report::new(text, to_json(&r)))
}

fn compare(a: &str, b: &str, level: &str, relation: Option<&str>, witness: bool, budget: u64) -> Result<Report, Error> {
    let level: Level = level.parse()?;
    if !matches!(level, Level::Awo | Level::Ao | Level::Extended) {
        return Err(Error::Argument(format!("compare supports awo, ao and extended, not {level}")));
    }
    let relation: Option<RelationName> = relation.map(str::parse).transpose()?;
    if let Some(r) = relation {
        if !matches!(r, RelationName::Partial | RelationName::V) {
            return Err(Error::Argument(format!("compare supports relations partial and v, not {r}")));
        }
    }
    let pa = LabeledPoset::of_model(&load(a)?, level, relation)?;
    let pb = LabeledPoset::of_model(&load(b)?, level, relation)?;
    let r = iso::are_isomorphic(&pa, &pb, budget);
    if r.verdict == iso::IsoVerdict::Undecided {
        return Err(Error::Argument(format!("search budget of {budget} steps exhausted")));
    }
    let mut text = format!("{}\n", if r.is_isomorphic() { "isomorphic" } else { "not isomorphic" });
    if let Some(why) = &r.reason {
        text += &format!("  {why}\n");
    }
    if witness {
        for (x, y) in r.witness.iter().flatten() {
            text += &format!("  {x} -> {y}\n");
        }
    }
    let mut j = to_json(&r);
    if !witness {
        j["witness"] = Value::Null;
    }
    Ok(Report::new(text, j).failing(!r.is_isomorphic()))
}

fn export_dot(spec: &str, what: DotWhat, level: &str, name: &str) -> Result<Report, Error> {
    let m = load(spec)?;
    let d = match what {
        DotWhat::Quotient => dot::quotient_dot(&quotient::compute_quotient(&m, level.parse()?)?),
        DotWhat::Relation => dot::relation_dot(&relations::compute_relation(&m, name.parse()?, level.parse()?)?),
        DotWhat::Morse => dot::morse_dot(&morse::morse_graph(&m)?.graph),
        DotWhat::Reeb => dot::multigraph_dot(&surface::reeb_abstract_graph(&m)?.graph),
    };
    Ok(Report::new(d.clone(), Value::String(d.clone())).dot(d))
}

fn corpus_cmd(id: Option<&str>, rand: bool, seed: u64, count: usize, max_nodes: usize) -> Result<Report, Error> {
    let parse = |s: &str| serde_json::from_str::<Value>(s).map_err(|e| Error::Parse(e.to_string()));
    if rand {
        let models = random::random_models(seed, count, max_nodes)?;
        let docs: Vec<Value> = models.iter().map(|m| parse(&m.to_json())).collect::<Result<_, _>>()?;
        let text = docs.iter().map(|d| format!("{d}\n")).collect();
        return Ok(Report::new(text, Value::Array(docs)));
    }
    match id {
        Some(id) => {
            let id = id.strip_prefix("corpus:").unwrap_or(id);
            let src = corpus::flow_source(id)
                .or_else(|| corpus::map_source(id))
                .ok_or_else(|| Error::Argument(format!("no corpus model `{id}`")))?;
            Ok(Report::new(src.to_string(), parse(src)?))
        }
        None => {
            let flows: BTreeSet<&str> = corpus::flow_ids().into_iter().collect();
            let maps: BTreeSet<&str> = corpus::map_ids().into_iter().collect();
            let mut text = String::new();
            for f in &flows {
                text += &format!("{f}\n");
            }
            for m in &maps {
                text += &format!("{m} (map)\n");
            }
            Ok(Report::new(text, json!({ "flows": flows, "maps": maps })))
        }
    }
}

fn run(cli: &Cli) -> Result<Report, Error> {
    match &cli.cmd {
        Cmd::Validate { m, map } => validate(&m.model, *map),
        Cmd::Partition { m, boundary } => partition(&m.model, boundary.as_deref()),
        Cmd::Relations { m, name, level, check, decomposition } => relation(&m.model, name, level, *check, *decomposition),
        Cmd::Quotient { m, level, k, chain } => quotient_cmd(&m.model, level, *k, *chain),
        Cmd::Morse { m, unstable } => morse_cmd(&m.model, *unstable),
        Cmd::MorseGrid(a) => morse_grid(a),
        Cmd::Surface { m, reeb } => surface_cmd(&m.model, *reeb),
        Cmd::Suspend { map } => suspend_cmd(map),
        Cmd::TimeOne { m, periods, all, ham } => time_one(&m.model, periods, all.as_deref(), *ham),
        Cmd::Compare { a, b, level, relation, witness, budget } => {
            compare(a, b, level, relation.as_deref(), *witness, *budget)
        }
        Cmd::ExportDot { m, what, level, name } => export_dot(&m.model, *what, level, name),
        Cmd::Corpus { id, random, seed, count, max_nodes } => {
            corpus_cmd(id.as_deref(), *random, *seed, *count, *max_nodes)
        }
    }
}

/// 2 for bad input or arguments, 3 when the model is not usable.
fn error_code(e: &Error) -> u8 {
    match e {
        Error::Invalid(_) | Error::Inconsistent(_) | Error::Precondition(_) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let report = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::Invalid(vs) = &e {
                for v in vs {
                    eprintln!("  {v}");
                }
            }
            return ExitCode::from(error_code(&e));
        }
    };
    match cli.out {
        Out::Text => print!("{}", report.text),
        Out::Json => println!("{}", serde_json::to_string_pretty(&report.json).expect("json output")),
        Out::Dot => match &report.dot {
            Some(d) => print!("{d}"),
            None => {
                eprintln!("error: this command has no DOT output");
                return ExitCode::from(2);
            }
        },
    }
    ExitCode::from(report.code)
}
