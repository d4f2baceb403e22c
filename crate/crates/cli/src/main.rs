//! subkit: substitutions on compact alphabets from the command line.
//!
//! Every command loads a rule file (or a bundled example via `builtin:NAME`),
//! truncates the alphabet at `--cutoff`, and emits a JSON envelope
//! `{schema, command, spec, seed, config, report}`. Table-shaped reports
//! (spectrum, converge, discrepancy, language) also have a `--format csv`
//! view; CSV then goes to `--out` (or stdout) with the JSON envelope kept
//! on stdout (or stderr).
//!
//! Exit codes: 0 success (inconclusive verdicts are still payloads),
//! 1 bad input (unreadable or malformed rules, unknown letters),
//! 2 computation gave up (budget, unsupported combination).

mod emit;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use subkit_core::converge::{self, ConvergeOptions};
use subkit_core::criteria::{
    check_irreducibility, check_primitivity, equicontinuity_check, length_function_diagnostics,
    quasi_compact_check, EquicontinuityOptions, LengthDiagOptions, PrimitivityOptions,
    QuasiCompactOptions,
};
use subkit_core::discrepancy::{self, DecayFitOptions};
use subkit_core::dsl::pretty;
use subkit_core::language::{self, LanguageTable};
use subkit_core::spectral::{power_iteration, SpectralReport};
use subkit_core::{
    build_operator, engine, examples, spectral_report, LangError, ParseError, PowerOptions,
    SubstitutionSpec, TruncationScheme, Word,
};

use emit::{csv_field, envelope, fmt_f64, fmt_opt, write_csv_with_summary, write_json};
use input::{load_spec, parse_letter, parse_letter_set, LoadedSpec, UsageError};

#[derive(Parser)]
#[command(
    name = "subkit",
    version,
    about = "Substitution systems on compact alphabets"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Rule file path, or builtin:NAME for a bundled example.
    #[arg(long, global = true, value_name = "PATH")]
    spec: Option<String>,

    /// Truncation cutoff (finite alphabets ignore it).
    #[arg(long, global = true, default_value_t = 64)]
    cutoff: u64,

    /// Second cutoff for side-by-side comparison (spectrum only).
    #[arg(long, global = true)]
    cutoff2: Option<u64>,

    /// Numerical tolerance override for the iterative solvers.
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Seed for sampled checks.
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Write the main output to a file instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Print rho^level(letter), or its size statistics with --stats.
    Expand(ExpandArgs),
    /// Table of legal words of a given length.
    Language(LanguageArgs),
    /// Inflation factor, length function, frequencies, second eigenvalue.
    Spectrum,
    /// Gap series for T^n f against the rank-one limit.
    Converge(ConvergeArgs),
    /// Structural criteria checks.
    #[command(subcommand)]
    Check(CheckCommand),
    /// Expected-vs-actual letter counts in supertiles and their decay rate.
    Discrepancy(DiscrepancyArgs),
    /// List bundled example specs.
    Examples(ExamplesArgs),
}

#[derive(Args)]
struct ExpandArgs {
    /// Starting letter, spelled as in the rule file.
    #[arg(long)]
    letter: String,
    #[arg(long, default_value_t = 1)]
    level: u32,
    /// Report per-level length statistics instead of the word itself.
    #[arg(long)]
    stats: bool,
    /// Refuse to materialize words longer than this.
    #[arg(long, default_value_t = 10_000_000)]
    budget: u64,
}

#[derive(Args)]
struct LanguageArgs {
    /// Word length.
    #[arg(long, default_value_t = 3)]
    n: usize,
    /// Use the single-level form instead of the union over levels.
    #[arg(long)]
    primitive: bool,
    /// Supertile depth for the two-letter seed table.
    #[arg(long)]
    depth: Option<u32>,
}

#[derive(Args)]
struct ConvergeArgs {
    #[arg(long, default_value_t = 24)]
    nmax: u32,
    /// Orbit-segment length for the rotation spike weight.
    #[arg(long, default_value_t = 20)]
    spike_n: u32,
}

#[derive(Subcommand)]
enum CheckCommand {
    /// Certify or refute primitivity at a coarseness eps.
    Primitivity(PrimitivityArgs),
    /// Strong connectivity of the truncated substitution digraph.
    Irreducible,
    /// Letter-avoidance counting certificate for a spectral gap.
    Quasicompact(QuasicompactArgs),
    /// Column structure and equicontinuity of the fiber maps.
    Equicontinuity(EquicontinuityArgs),
    /// Evidence for or against a continuous length function.
    Length,
}

#[derive(Args)]
struct PrimitivityArgs {
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    /// Largest power tried before refuting.
    #[arg(long, default_value_t = 20)]
    pmax: u32,
    /// Sample size per net ball on non-enumerable alphabets.
    #[arg(long, default_value_t = 32)]
    sample: usize,
}

#[derive(Args)]
struct QuasicompactArgs {
    /// Avoided letters, comma separated.
    #[arg(long = "P", value_name = "LETTERS")]
    p: String,
    #[arg(long, default_value_t = 4)]
    kmax: u32,
}

#[derive(Args)]
struct EquicontinuityArgs {
    /// Composition depth to explore.
    #[arg(long)]
    depth: Option<u32>,
}

#[derive(Args)]
struct DiscrepancyArgs {
    #[arg(long, default_value_t = 12)]
    nmax: u32,
    /// Slack factor on the decay-rate budget.
    #[arg(long, default_value_t = 0.1)]
    eps_tol: f64,
    /// Points in the trailing slope-fit window.
    #[arg(long)]
    fit_window: Option<u32>,
    /// Budget for direct expansion cross-checks.
    #[arg(long, default_value_t = 2_000_000)]
    budget: u64,
}

#[derive(Args)]
struct ExamplesArgs {
    /// Print the raw rule text of one example.
    #[arg(long, value_name = "NAME")]
    show: Option<String>,
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<UsageError>().is_some()
            || cause.downcast_ref::<ParseError>().is_some()
        {
            return 1;
        }
    }
    2
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    let g = &cli.global;
    match &cli.command {
        Command::Expand(args) => cmd_expand(g, args),
        Command::Language(args) => cmd_language(g, args),
        Command::Spectrum => cmd_spectrum(g),
        Command::Converge(args) => cmd_converge(g, args),
        Command::Check(check) => cmd_check(g, check),
        Command::Discrepancy(args) => cmd_discrepancy(g, args),
        Command::Examples(args) => cmd_examples(g, args),
    }
}

fn power_opts(g: &Global) -> PowerOptions {
    let mut opts = PowerOptions::default();
    if let Some(tol) = g.tol {
        opts.tol = tol;
    }
    opts
}

fn scheme_for(spec: &SubstitutionSpec, cutoff: u64) -> anyhow::Result<TruncationScheme> {
    Ok(TruncationScheme::new(&spec.alphabet, cutoff)?)
}

fn format_word(spec: &SubstitutionSpec, w: &Word) -> String {
    w.letters()
        .iter()
        .map(|&l| spec.alphabet.format_letter(l))
        .collect::<Vec<_>>()
        .join(" ")
}

fn cmd_expand(g: &Global, args: &ExpandArgs) -> anyhow::Result<()> {
    let loaded = load_spec(g.spec.as_deref())?;
    let letter = parse_letter(&loaded.spec, &args.letter)?;
    if args.stats {
        let stats = engine::supertile_length_stats(&loaded.spec, args.level.max(1))?;
        let growth = engine::growth_probe(&loaded.spec, letter, args.level.max(8))?;
        let config = json!({
            "letter": args.letter, "level": args.level, "stats": true,
        });
        let report = json!({ "levels": stats, "growth": growth });
        let value = envelope("expand", Some(&loaded), g.seed, config, &report);
        return write_json(&value, g.out.as_deref());
    }
    let word = engine::expand(&loaded.spec, letter, args.level, u128::from(args.budget))?;
    let text = format_word(&loaded.spec, &word);
    match g.out.as_deref() {
        Some(path) => std::fs::write(path, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(())
}

fn language_json(spec: &SubstitutionSpec, table: &LanguageTable) -> serde_json::Value {
    let words: Vec<String> = table.words.iter().map(|w| format_word(spec, w)).collect();
    json!({
        "n": table.n,
        "p": table.power,
        "exact": table.exact,
        "cutoff": table.cutoff_label,
        "count": words.len(),
        "words": words,
    })
}

fn cmd_language(g: &Global, args: &LanguageArgs) -> anyhow::Result<()> {
    let loaded = load_spec(g.spec.as_deref())?;
    let scheme = scheme_for(&loaded.spec, g.cutoff)?;
    let depth = args.depth.unwrap_or(language::DEFAULT_DEPTH);
    let config = json!({
        "n": args.n, "cutoff": g.cutoff, "depth": depth, "primitive": args.primitive,
    });
    let table =
        match language::legal_words_with(&loaded.spec, &scheme, args.n, depth, args.primitive) {
            Ok(table) => table,
            Err(err @ LangError::NoValidP { .. }) => {
                let report = json!({ "status": "no-valid-power", "detail": err.to_string() });
                let value = envelope("language", Some(&loaded), g.seed, config, &report);
                return write_json(&value, g.out.as_deref());
            }
            Err(err) => return Err(err.into()),
        };
    let report = language_json(&loaded.spec, &table);
    let value = envelope("language", Some(&loaded), g.seed, config, &report);
    match g.format {
        Format::Json => write_json(&value, g.out.as_deref()),
        Format::Csv => {
            let mut csv = String::from("word\n");
            for w in &table.words {
                csv.push_str(&csv_field(&format_word(&loaded.spec, w)));
                csv.push('\n');
            }
            write_csv_with_summary(&csv, &value, g.out.as_deref())
        }
    }
}

fn spectrum_csv(loaded: &LoadedSpec, scheme: &TruncationScheme, report: &SpectralReport) -> String {
    let mut csv = String::from("class,letter,length,frequency,measure\n");
    for (i, &rep) in scheme.representatives().iter().enumerate() {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            i,
            csv_field(&loaded.spec.alphabet.format_letter(rep)),
            fmt_f64(report.base.length_fn[i]),
            fmt_f64(report.base.frequencies[i]),
            fmt_f64(report.base.eigenmeasure[i]),
        ));
    }
    csv
}

fn cmd_spectrum(g: &Global) -> anyhow::Result<()> {
    let loaded = load_spec(g.spec.as_deref())?;
    let scheme = scheme_for(&loaded.spec, g.cutoff)?;
    let opts = power_opts(g);
    let report = spectral_report(&loaded.spec, &scheme, &opts)?;
    let config = json!({
        "cutoff": g.cutoff, "cutoff2": g.cutoff2, "tol": opts.tol,
    });
    let classes: Vec<String> = scheme
        .representatives()
        .iter()
        .map(|&l| loaded.spec.alphabet.format_letter(l))
        .collect();

    let body = if let Some(c2) = g.cutoff2 {
        let scheme2 = scheme_for(&loaded.spec, c2)?;
        let report2 = spectral_report(&loaded.spec, &scheme2, &opts)?;
        let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1e-300);
        let r2_delta_rel = match (report.second, report2.second) {
            (Some(a), Some(b)) => Some(rel(a.r2, b.r2)),
            _ => None,
        };
        json!({
            "primary": { "scheme": scheme.label(), "classes": classes, "report": report },
            "secondary": { "scheme": scheme2.label(), "report": report2 },
            "deltas": {
                "r_delta_rel": rel(report.base.r_estimate, report2.base.r_estimate),
                "r2_delta_rel": r2_delta_rel,
            },
        })
    } else {
        json!({ "scheme": scheme.label(), "classes": classes, "report": report })
    };
    let value = envelope("spectrum", Some(&loaded), g.seed, config, &body);
    match g.format {
        Format::Json => write_json(&value, g.out.as_deref()),
        Format::Csv => {
            let csv = spectrum_csv(&loaded, &scheme, &report);
            write_csv_with_summary(&csv, &value, g.out.as_deref())
        }
    }
}

fn cmd_converge(g: &Global, args: &ConvergeArgs) -> anyhow::Result<()> {
    let loaded = load_spec(g.spec.as_deref())?;
    let scheme = scheme_for(&loaded.spec, g.cutoff)?;
    let op = build_operator(&loaded.spec, &scheme)?;
    let base = power_iteration(&op, &power_opts(g));
    let mut opts = ConvergeOptions {
        n_max: args.nmax,
        spike_n: args.spike_n,
        ..Default::default()
    };
    if let Some(tol) = g.tol {
        opts.tol = tol;
    }
    let diag = converge::diagnostics(&op, &base, None, &opts);
    let config = json!({
        "cutoff": g.cutoff, "nmax": args.nmax, "spike_n": args.spike_n, "tol": opts.tol,
    });
    let value = envelope("converge", Some(&loaded), g.seed, config, &diag);
    match g.format {
        Format::Json => write_json(&value, g.out.as_deref()),
        Format::Csv => {
            let mut header = vec!["n".to_string()];
            for s in &diag.strong {
                header.push(csv_field(&format!("strong_{}", s.label)));
            }
            header.push("uniform".into());
            header.push("cesaro".into());
            let mut csv = header.join(",") + "\n";
            let rows = diag.strong.iter().map(|s| s.gaps.len()).max().unwrap_or(0);
            for k in 0..rows {
                let mut row = vec![(k + 1).to_string()];
                for s in &diag.strong {
                    row.push(fmt_opt(s.gaps.get(k).copied()));
                }
                row.push(fmt_opt(
                    diag.uniform.as_ref().and_then(|s| s.gaps.get(k).copied()),
                ));
                row.push(fmt_opt(
                    diag.cesaro.as_ref().and_then(|s| s.gaps.get(k).copied()),
                ));
                csv.push_str(&row.join(","));
                csv.push('\n');
            }
            write_csv_with_summary(&csv, &value, g.out.as_deref())
        }
    }
}

fn cmd_check(g: &Global, check: &CheckCommand) -> anyhow::Result<()> {
    let loaded = load_spec(g.spec.as_deref())?;
    let (name, config, report): (&str, serde_json::Value, serde_json::Value) = match check {
        CheckCommand::Primitivity(args) => {
            let opts = PrimitivityOptions {
                eps: args.eps,
                p_max: args.pmax,
                sample_size: args.sample,
                seed: g.seed,
            };
            let cert = check_primitivity(&loaded.spec, &opts)?;
            (
                "check primitivity",
                json!({ "eps": args.eps, "pmax": args.pmax, "sample": args.sample }),
                serde_json::to_value(&cert)?,
            )
        }
        CheckCommand::Irreducible => {
            let scheme = scheme_for(&loaded.spec, g.cutoff)?;
            let report = check_irreducibility(&loaded.spec, &scheme)?;
            (
                "check irreducible",
                json!({ "cutoff": g.cutoff }),
                serde_json::to_value(&report)?,
            )
        }
        CheckCommand::Quasicompact(args) => {
            let letters = parse_letter_set(&loaded.spec, &args.p)?;
            let opts = QuasiCompactOptions { k_max: args.kmax };
            let report = quasi_compact_check(&loaded.spec, &letters, &opts)?;
            (
                "check quasicompact",
                json!({ "P": args.p, "kmax": args.kmax }),
                serde_json::to_value(&report)?,
            )
        }
        CheckCommand::Equicontinuity(args) => {
            let mut opts = EquicontinuityOptions::default();
            if let Some(depth) = args.depth {
                opts.depth = depth;
            }
            let report = equicontinuity_check(&loaded.spec, &opts)?;
            (
                "check equicontinuity",
                json!({ "depth": opts.depth }),
                serde_json::to_value(&report)?,
            )
        }
        CheckCommand::Length => {
            let opts = LengthDiagOptions {
                cutoff: g.cutoff,
                power: power_opts(g),
                ..Default::default()
            };
            let report = length_function_diagnostics(&loaded.spec, &opts)?;
            (
                "check length",
                json!({ "cutoff": g.cutoff }),
                serde_json::to_value(&report)?,
            )
        }
    };
    let value = envelope(name, Some(&loaded), g.seed, config, &report);
    write_json(&value, g.out.as_deref())
}

fn cmd_discrepancy(g: &Global, args: &DiscrepancyArgs) -> anyhow::Result<()> {
    let loaded = load_spec(g.spec.as_deref())?;
    let scheme = scheme_for(&loaded.spec, g.cutoff)?;
    let op = build_operator(&loaded.spec, &scheme)?;
    let spectral = spectral_report(&loaded.spec, &scheme, &power_opts(g))?;
    let opts = DecayFitOptions {
        n_max: args.nmax.max(2),
        eps_tol: args.eps_tol,
        fit_window: args.fit_window,
        expand_budget: u128::from(args.budget),
    };
    let report = discrepancy::decay_fit(&loaded.spec, &op, &spectral, None, &opts)?;
    let config = json!({
        "cutoff": g.cutoff, "nmax": opts.n_max, "eps_tol": args.eps_tol,
        "fit_window": report.fit_window,
    });
    let value = envelope("discrepancy", Some(&loaded), g.seed, config, &report);
    match g.format {
        Format::Json => write_json(&value, g.out.as_deref()),
        Format::Csv => {
            // Budget column: the allowed geometric envelope r2 (1 + eps_tol),
            // anchored where the slope-fit window starts.
            let n_start = report.n_max.saturating_sub(report.fit_window) + 1;
            let anchor = report.sup_gap.get(n_start as usize - 1).copied();
            let rate = report.r2.map(|r2| r2 * (1.0 + report.eps_tol));
            let mut csv = String::from("n,sup_gap,bound\n");
            for (i, &gap) in report.sup_gap.iter().enumerate() {
                let n = i as u32 + 1;
                let bound = match (anchor, rate) {
                    (Some(a), Some(rate)) => Some(a * rate.powi(n as i32 - n_start as i32)),
                    _ => None,
                };
                csv.push_str(&format!("{n},{},{}\n", fmt_f64(gap), fmt_opt(bound)));
            }
            write_csv_with_summary(&csv, &value, g.out.as_deref())
        }
    }
}

fn cmd_examples(g: &Global, args: &ExamplesArgs) -> anyhow::Result<()> {
    if let Some(name) = &args.show {
        let Some(ex) = examples::find(name) else {
            return Err(UsageError(format!("unknown builtin {name:?}")).into());
        };
        match g.out.as_deref() {
            Some(path) => std::fs::write(path, ex.text)?,
            None => print!("{}", ex.text),
        }
        return Ok(());
    }
    let mut rows = Vec::new();
    for ex in examples::EXAMPLES {
        let spec = examples::load(ex.name)
            .expect("bundled name")
            .expect("bundled specs parse");
        let alphabet = pretty(&spec)
            .lines()
            .next()
            .unwrap_or_default()
            .trim_start_matches("alphabet ")
            .to_string();
        rows.push(json!({
            "name": ex.name,
            "alphabet": alphabet,
            "lenient": ex.lenient,
            "summary": ex.summary,
        }));
    }
    let value = envelope(
        "examples",
        None,
        g.seed,
        json!({}),
        &json!({ "examples": rows }),
    );
    write_json(&value, g.out.as_deref())
}
