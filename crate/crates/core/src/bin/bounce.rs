//! Command line front end for bounce-spectrum computations.
//!
//! Exit codes: 0 on success, 1 when the computation itself fails (bad table,
//! unrealizable word, inconsistent language), 2 on malformed invocations.

use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use bounce_core::flow::{Terminal, Tracer};
use bounce_core::geometry::{fmt_f64, LabeledPolygon, Point2};
use bounce_core::language::{enumerate_language, LanguageTable};
use bounce_core::perturbation::demonstrate_with_scale;
use bounce_core::reconstruction::{
    adjacency_pairs, estimate_angle, AngleKind, PolygonOracle, SearchBudget, SpectrumOracle,
};
use bounce_core::sturmian::{insertion_strings, square_bounce_word};
use bounce_core::svg::Figure;
use bounce_core::unfolding::{develop, CorridorSolver};

#[derive(Parser, Debug)]
#[command(name = "bounce", version, about = "Bounce spectra of polygonal billiard tables")]
struct Cli {
    /// Singularity radius for tracing, relative to the table diameter.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tolerance: f64,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Suppress warnings and summaries on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    /// Print JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Follow a trajectory and print its bounce word.
    Trace {
        #[arg(long)]
        table: PathBuf,
        /// Start point as X,Y.
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        /// Direction in radians.
        #[arg(long, allow_hyphen_values = true)]
        angle: f64,
        #[arg(long)]
        bounces: usize,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Unfold a table along a word and solve for a realizing line.
    Develop {
        #[arg(long)]
        table: PathBuf,
        /// Comma-separated labels.
        #[arg(long)]
        word: String,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Enumerate every realizable word up to a length.
    Language {
        #[arg(long)]
        table: PathBuf,
        #[arg(long)]
        max_len: usize,
        /// Write the words file here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Square-table bounce code of a rational slope.
    Sturmian {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        q: u64,
        /// Also print the alternating insertion strings.
        #[arg(long)]
        insertions: bool,
    },
    /// Recover the angle at the corner of two edges from language queries.
    Angle {
        #[command(flatten)]
        source: Source,
        /// The two labels as A,B.
        #[arg(long)]
        pair: String,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        /// Chain states explored per start sequence.
        #[arg(long, default_value_t = SearchBudget::default().max_states)]
        max_states: usize,
    },
    /// Recover which edges meet at a vertex from language queries.
    Adjacency {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 6)]
        depth: usize,
    },
    /// Certify a persistence radius for a word set and sample it.
    Perturb {
        #[arg(long)]
        table: PathBuf,
        /// One comma-separated word per line.
        #[arg(long)]
        words: PathBuf,
        #[arg(long, default_value_t = 200)]
        count: usize,
        /// Multiplies the certified radius before sampling.
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct Source {
    /// Table JSON file; only its language is consulted.
    #[arg(long)]
    table: Option<PathBuf>,
    /// Stored language, one comma-separated word per line.
    #[arg(long)]
    oracle_from: Option<PathBuf>,
}

struct Ctx {
    quiet: bool,
    json: bool,
}

impl Ctx {
    fn warn(&self, msg: &str) {
        if !self.quiet {
            eprintln!("warning: {msg}");
        }
    }

    fn emit(&self, text: &str, value: Value) -> Result<()> {
        let out = if self.json {
            serde_json::to_string_pretty(&value)? + "\n"
        } else {
            text.to_string()
        };
        let mut stdout = std::io::stdout().lock();
        match stdout.write_all(out.as_bytes()).and_then(|()| stdout.flush()) {
            // a closed pipe (`| head`) is not a failure
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
            _ => Ok(()),
        }
    }
}

fn load_table(ctx: &Ctx, path: &Path) -> Result<LabeledPolygon> {
    let (poly, warnings) =
        LabeledPolygon::load(path).with_context(|| format!("reading {}", path.display()))?;
    for w in warnings {
        ctx.warn(&w);
    }
    Ok(poly)
}

fn write_svg(path: &Path, fig: &Figure) -> Result<()> {
    fs::write(path, fig.render()).with_context(|| format!("writing {}", path.display()))
}

fn parse_point(s: &str) -> Result<Point2> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        bail!("point must be X,Y, got `{s}`");
    }
    Ok(Point2::new(parts[0].parse()?, parts[1].parse()?))
}

fn pt(p: Point2) -> Value {
    json!([p.x, p.y])
}

/// `π·p/q` written the usual way.
fn pi_fraction(p: u64, q: u64) -> String {
    let num = if p == 1 { "π".to_string() } else { format!("{p}π") };
    if q == 1 {
        num
    } else {
        format!("{num}/{q}")
    }
}

fn run(cli: Cli) -> Result<()> {
    let ctx = Ctx {
        quiet: cli.quiet,
        json: cli.json,
    };
    if !(cli.tolerance > 0.0) || !cli.tolerance.is_finite() {
        bail!("--tolerance must be positive");
    }
    match cli.command {
        Command::Trace {
            table,
            point,
            angle,
            bounces,
            svg,
        } => {
            let poly = load_table(&ctx, &table)?;
            let start = parse_point(&point)?;
            let res = Tracer::with_eps(&poly, cli.tolerance).trace(start, angle, bounces)?;
            let word = poly.format_word(&res.word);
            let terminal = match res.terminal {
                Terminal::Completed { bounces } => format!("completed after {bounces} bounces"),
                Terminal::Singular { vertex, bounces } => {
                    format!("singular at vertex {vertex} after {bounces} bounces")
                }
            };
            let mut text = format!("word: {word}\nterminal: {terminal}\n");
            for p in &res.impact_points {
                text += &format!("impact {} {}\n", fmt_f64(p.x), fmt_f64(p.y));
            }
            if let Some(path) = svg {
                let mut fig = Figure::new();
                fig.table(&poly, "black", "#f4f4f4");
                let mut path_pts = vec![start];
                path_pts.extend_from_slice(&res.impact_points);
                fig.polyline(&path_pts, "#c0392b", 1.5).dot(start, 5.0, "#2c3e50");
                write_svg(&path, &fig)?;
            }
            ctx.emit(
                &text,
                json!({
                    "word": res.word.iter().map(|&e| poly.label(e).as_str()).collect::<Vec<_>>(),
                    "terminal": res.terminal,
                    "impact_points": res.impact_points.iter().map(|&p| pt(p)).collect::<Vec<_>>(),
                }),
            )
        }
        Command::Develop { table, word, svg } => {
            let poly = load_table(&ctx, &table)?;
            let w = poly.parse_word_str(&word)?;
            if w.is_empty() {
                bail!(bounce_core::Error::EmptyWord);
            }
            let dev = develop(&poly, &w)?;
            let cor = CorridorSolver::new(&poly).corridor(&dev)?;
            let mut text = format!(
                "word: {}\ncopies: {}\nfeasible: {}\n",
                poly.format_word(&w),
                dev.copies.len(),
                cor.feasible
            );
            if let Some(l) = cor.witness {
                text += &format!(
                    "witness: point {} {} angle {:.12}\nmargin: {}\nwidth: {}\n",
                    fmt_f64(l.point.x),
                    fmt_f64(l.point.y),
                    l.angle,
                    fmt_f64(cor.margin),
                    fmt_f64(cor.width)
                );
            }
            if let Some((lo, hi)) = cor.angle_interval {
                text += &format!("angles: [{lo:.12}, {hi:.12}]\n");
            }
            if cor.boundary_tight {
                text += "boundary: tight\n";
            }
            if let Some(path) = svg {
                let mut fig = Figure::new();
                for j in 0..dev.copies.len() {
                    let fill = if j == 0 { "#dfe9f3" } else { "#f4f4f4" };
                    fig.polygon(&dev.copy_vertices(&poly, j), "#7f8c8d", fill, 1.0);
                }
                for p in &dev.portals {
                    fig.polyline(&[p.left, p.right], "#2980b9", 3.0);
                    fig.text(p.midpoint(), poly.label(p.edge).as_str(), 16.0);
                }
                if let Some(l) = cor.witness {
                    let first = dev.portals[0].midpoint();
                    let last = dev.portals[dev.portals.len() - 1].midpoint();
                    let reach = first.dist(last) + poly.diameter();
                    let d = l.direction();
                    fig.polyline(&[l.point - d * (0.5 * poly.diameter()), l.point + d * reach], "#c0392b", 1.5);
                }
                write_svg(&path, &fig)?;
            }
            ctx.emit(
                &text,
                json!({
                    "word": poly.format_word(&w),
                    "copies": dev.copies.len(),
                    "feasible": cor.feasible,
                    "boundary_tight": cor.boundary_tight,
                    "witness": cor.witness.map(|l| json!({"point": pt(l.point), "angle": l.angle})),
                    "margin": cor.margin,
                    "width": cor.width,
                    "angle_interval": cor.angle_interval,
                }),
            )?;
            if !cor.feasible {
                bail!(bounce_core::Error::Infeasible(poly.format_word(&w)));
            }
            Ok(())
        }
        Command::Language { table, max_len, out } => {
            let poly = load_table(&ctx, &table)?;
            let lang = enumerate_language(&poly, max_len)?;
            // present words in the table's own labels
            let lines: Vec<String> = {
                let mut v: Vec<String> = lang.words.iter().map(|w| poly.format_word(w)).collect();
                v.sort();
                v
            };
            let marginal: Vec<String> = {
                let mut v: Vec<String> = lang.marginal.iter().map(|w| poly.format_word(w)).collect();
                v.sort();
                v
            };
            if !ctx.quiet {
                eprintln!("{} words up to length {max_len}, {} marginal", lines.len(), marginal.len());
            }
            let body: String = lines.iter().map(|l| format!("{l}\n")).collect();
            if let Some(path) = out {
                fs::write(&path, &body).with_context(|| format!("writing {}", path.display()))?;
                return ctx.emit(
                    &format!("wrote {} words to {}\n", lines.len(), path.display()),
                    json!({"max_len": max_len, "count": lines.len(), "out": path.display().to_string()}),
                );
            }
            ctx.emit(
                &body,
                json!({"max_len": max_len, "count": lines.len(), "words": lines, "marginal": marginal}),
            )
        }
        Command::Sturmian { p, q, insertions } => {
            let code = square_bounce_word(p, q)?;
            let mut text = format!("{}\n", code.word);
            let mut value = json!({"p": p, "q": q, "word": code.word});
            if insertions {
                let ins = insertion_strings(p, q)?;
                let shown: Vec<&str> = ins
                    .strings
                    .iter()
                    .map(|s| if s.is_empty() { "-" } else { s.as_str() })
                    .collect();
                let lens: Vec<String> = ins.lengths().iter().map(ToString::to_string).collect();
                text += &format!("insertions: {}\nlengths: {}\ntotal: {}\n", shown.join(" "), lens.join(" "), ins.total());
                value["insertions"] = json!(ins.strings);
                value["lengths"] = json!(ins.lengths());
                value["total"] = json!(ins.total());
            }
            ctx.emit(&text, value)
        }
        Command::Angle {
            source,
            pair,
            depth,
            max_states,
        } => {
            let budget = SearchBudget {
                max_states,
                ..SearchBudget::default()
            };
            with_oracle(&ctx, &source, |o| angle(&ctx, o, &pair, depth, budget))
        }
        Command::Adjacency { source, depth } => with_oracle(&ctx, &source, |o| adjacency(&ctx, o, depth)),
        Command::Perturb {
            table,
            words,
            count,
            scale,
            svg,
        } => {
            let poly = load_table(&ctx, &table)?;
            let text = fs::read_to_string(&words).with_context(|| format!("reading {}", words.display()))?;
            let mut ws: Vec<Vec<usize>> = text
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(|l| poly.parse_word_str(l))
                .collect::<bounce_core::Result<_>>()?;
            ws.sort();
            ws.dedup();
            if !(scale > 0.0) {
                bail!("--scale must be positive");
            }
            let rep = demonstrate_with_scale(&poly, &ws, count, cli.seed, scale)?;
            let c = &rep.certificate;
            let mut out = format!(
                "words: {}\nepsilon: {}\ndelta: {}\nsensitivity: {}\nbinding word: {}\ncapped: {}\n",
                c.words.len(),
                fmt_f64(c.epsilon),
                fmt_f64(c.delta),
                fmt_f64(c.sensitivity),
                c.per_word
                    .iter()
                    .min_by(|a, b| a.epsilon.total_cmp(&b.epsilon))
                    .map_or("", |r| r.word.as_str()),
                c.capped
            );
            if scale != 1.0 {
                out += &format!("scale: {} (sampling radius {})\n", fmt_f64(scale), fmt_f64(rep.epsilon_used));
            }
            out += &format!("persistent: {}/{}\n", rep.persistent, rep.samples);
            for f in &rep.failures {
                out += &format!("failure: sample {} word {}\n", f.sample, f.word);
            }
            if let Some(d) = &rep.distinct_pair {
                out += &format!(
                    "distinct pair: samples {} and {} at vertex distance {} (normalized {})\n",
                    d.first,
                    d.second,
                    fmt_f64(d.distance),
                    fmt_f64(d.normalized_distance)
                );
            }
            out += if rep.passed { "result: PASSED\n" } else { "result: FAILED\n" };
            if let Some(path) = svg {
                let mut fig = Figure::new();
                fig.table(&poly, "black", "none");
                if let Some(d) = &rep.distinct_pair {
                    fig.polygon(rep.tables[d.first].vertices(), "#c0392b", "none", 1.0);
                    fig.polygon(rep.tables[d.second].vertices(), "#2980b9", "none", 1.0);
                }
                for &v in poly.vertices() {
                    fig.dot(v, 3.0, "#2c3e50");
                }
                write_svg(&path, &fig)?;
            }
            ctx.emit(&out, serde_json::to_value(&rep)?)?;
            if !rep.passed && scale == 1.0 {
                bail!("persistence check failed");
            }
            Ok(())
        }
    }
}

fn with_oracle(ctx: &Ctx, source: &Source, f: impl FnOnce(&dyn SpectrumOracle) -> Result<()>) -> Result<()> {
    match (&source.table, &source.oracle_from) {
        (Some(path), _) => {
            let poly = load_table(ctx, path)?;
            let oracle = PolygonOracle::new(&poly);
            f(&oracle)
        }
        (None, Some(path)) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let table = LanguageTable::from_lines(&text)?;
            let bad = table.factor_violations();
            if let Some(w) = bad.first() {
                ctx.warn(&format!("{} stored words lack a factor, e.g. {}", bad.len(), table.format(w)));
            }
            f(&table)
        }
        (None, None) => unreachable!("clap requires one source"),
    }
}

fn angle(ctx: &Ctx, o: &dyn SpectrumOracle, pair: &str, depth: usize, budget: SearchBudget) -> Result<()> {
    let labels: Vec<&str> = pair.split(',').map(str::trim).collect();
    if labels.len() != 2 {
        bail!("--pair must be two labels A,B, got `{pair}`");
    }
    let (a, b) = (o.letter(labels[0])?, o.letter(labels[1])?);
    let Some(est) = estimate_angle(o, a, b, depth, budget)? else {
        bail!("no closed matching family at {} up to depth {depth}", pair);
    };
    let mut text = match est.kind {
        AngleKind::ExactRational { p, q } => format!(
            "exact_rational {p}/{q} → {} (certified to depth {})\nvalue: {:.12}\n",
            pi_fraction(p, q),
            est.certified_depth,
            est.value
        ),
        AngleKind::Estimate {
            num_sequences,
            total_insertion,
            depth,
        } => format!(
            "estimate {:.12}π (family of {num_sequences} sequences, insertion total {total_insertion}, depth {depth})\nvalue: {:.12}\n",
            est.value / PI,
            est.value
        ),
    };
    for note in &est.notes {
        text += &format!("note: {note}\n");
    }
    ctx.emit(
        &text,
        json!({
            "pair": [labels[0], labels[1]],
            "value": est.value,
            "kind": est.kind,
            "certified_depth": est.certified_depth,
            "history": est.history,
            "notes": est.notes,
        }),
    )
}

fn adjacency(ctx: &Ctx, o: &dyn SpectrumOracle, depth: usize) -> Result<()> {
    let adj = adjacency_pairs(o, depth)?;
    let name = |i: usize| o.alphabet()[i].as_str().to_string();
    let mut pairs: Vec<(String, String)> = adj.pairs.iter().map(|&(a, b)| (name(a), name(b))).collect();
    pairs.sort();
    let mut text: String = pairs.iter().map(|(a, b)| format!("{a} {b}\n")).collect();
    let cycle = adj.cyclic_order.as_ref().map(|c| canonical_cycle(c.iter().map(|&i| name(i)).collect()));
    match &cycle {
        Some(c) => text += &format!("cycle: {} (certified to depth {depth})\n", c.join(" ")),
        None => text += &format!("cycle: none (certified to depth {depth})\n"),
    }
    ctx.emit(
        &text,
        json!({"depth": depth, "pairs": pairs, "cycle": cycle}),
    )
}

/// Rotation and direction of a cyclic order that is lexicographically least.
fn canonical_cycle(c: Vec<String>) -> Vec<String> {
    let n = c.len();
    let mut best = c.clone();
    for rev in [false, true] {
        let base: Vec<String> = if rev { c.iter().rev().cloned().collect() } else { c.clone() };
        for k in 0..n {
            let rot: Vec<String> = base[k..].iter().chain(&base[..k]).cloned().collect();
            if rot < best {
                best = rot;
            }
        }
    }
    best
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
