use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use nullslalom::cantor::{CantorIndex, ClopenIndex};
use nullslalom::forcing::{codec, Forcing, NQCondition};
use nullslalom::generic::{run, verify};
use nullslalom::names::NameRef;
use nullslalom::poset::RankedPoset;
use nullslalom::scenario::{ConditionDocument, Format, Scenario, ScaleSpec};
use nullslalom::slalom::r_phi;
use nullslalom::Error;

#[derive(Parser)]
#[command(name = "nullslalom", version, about = "Slalom forcing simulator and checker")]
struct Cli {
    /// Overrides the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the scenario depth.
    #[arg(long, global = true)]
    depth: Option<usize>,
    #[arg(long, global = true, value_enum)]
    format: Option<OutFormat>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a condition document or a scenario.
    Check { file: PathBuf },
    /// Print the first clopen sets of a stage with their measures.
    Enumerate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        count: usize,
        /// min_log or n_squared.
        #[arg(long, default_value = "min_log")]
        scale: String,
    },
    /// Run a scenario and verify the resulting slaloms.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        /// Report path; defaults to the scenario's output path, if any.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build one incompatibility witness over a scenario's poset.
    Witness {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long)]
        after: usize,
    },
}

/// Exit status and what to print.
struct Outcome {
    pass: bool,
    json: Value,
    text: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = cli.format;
    match dispatch(&cli) {
        Ok((out, fmt)) => {
            match fmt {
                Format::Json => println!("{}", serde_json::to_string_pretty(&out.json).unwrap()),
                Format::Text => print!("{}", out.text),
            }
            if out.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(failure) => {
            println!("{}", serde_json::to_string_pretty(&failure.record).unwrap());
            if matches!(format, Some(OutFormat::Text)) {
                eprintln!("error: {}", failure.record["error"]["message"].as_str().unwrap_or(""));
            }
            ExitCode::from(failure.code)
        }
    }
}

struct Failure {
    code: u8,
    record: Value,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Input(_) | Error::Validation(_) | Error::PreconditionViolated(_) => 2,
            Error::CertificateFailure(_) | Error::DepthExhausted(_) => 1,
        };
        let message = match &e {
            Error::DepthExhausted(m)
            | Error::PreconditionViolated(m)
            | Error::CertificateFailure(m)
            | Error::Validation(m)
            | Error::Input(m) => m.clone(),
        };
        Failure {
            code,
            record: json!({"error": {"kind": e.kind(), "message": message}}),
        }
    }
}

fn dispatch(cli: &Cli) -> Result<(Outcome, Format), Failure> {
    let chosen = |scenario: Option<&Scenario>| match cli.format {
        Some(OutFormat::Json) => Format::Json,
        Some(OutFormat::Text) => Format::Text,
        None => scenario.and_then(|s| s.output.as_ref()).map_or(Format::Json, |o| o.format),
    };
    match &cli.command {
        Command::Check { file } => Ok((check(file)?, chosen(None))),
        Command::Enumerate { n, count, scale } => Ok((enumerate(*n, *count, scale)?, chosen(None))),
        Command::Simulate { scenario, out } => {
            let mut sc = load_scenario(scenario)?;
            if let Some(seed) = cli.seed {
                sc.seed = seed;
            }
            if let Some(depth) = cli.depth {
                sc.depth = depth;
            }
            let fmt = chosen(Some(&sc));
            let out = out
                .clone()
                .or_else(|| sc.output.as_ref().and_then(|o| o.path.clone()).map(PathBuf::from));
            Ok((simulate(&sc, out.as_deref(), fmt)?, fmt))
        }
        Command::Witness { scenario, a, b, after } => {
            let sc = load_scenario(scenario)?;
            Ok((witness(&sc, a, b, *after)?, chosen(Some(&sc))))
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())).into())
}

fn load_scenario(path: &Path) -> Result<Scenario, Failure> {
    Ok(Scenario::from_json(&read(path)?)?)
}

fn poset_of(spec: &nullslalom::poset::PosetSpec) -> Result<RankedPoset, Failure> {
    RankedPoset::from_spec(spec).map_err(|e| Error::Input(e.to_string()).into())
}

fn check(file: &Path) -> Result<Outcome, Failure> {
    let text = read(file)?;
    let value: Value = serde_json::from_str(&text).map_err(|e| Error::Input(e.to_string()))?;
    if value.get("condition").is_none() {
        let sc: Scenario = serde_json::from_value(value).map_err(|e| Error::Input(format!("scenario: {e}")))?;
        let poset = sc.poset()?;
        sc.index()?;
        let agenda = sc.agenda(&poset)?;
        return Ok(Outcome {
            pass: true,
            json: json!({"status": "ok", "document": "scenario", "elements": poset.len(), "demands": agenda.demands.len()}),
            text: format!("ok: scenario with {} elements, {} demands\n", poset.len(), agenda.demands.len()),
        });
    }
    let doc: ConditionDocument =
        serde_json::from_value(value).map_err(|e| Error::Input(format!("condition document: {e}")))?;
    let poset = poset_of(&doc.poset)?;
    let index = CantorIndex::new(doc.scale.build().map_err(|e| Error::Input(e.to_string()))?);
    let fx = Forcing::new(&poset, &index);
    let p = codec::decode(&poset, &doc.condition)?;
    let violations = fx.validate(&p, None);
    if !violations.is_empty() {
        let first = &violations[0];
        return Err(Failure {
            code: 2,
            record: json!({"error": {
                "kind": "validation",
                "message": first.to_string(),
                "violations": violations,
            }}),
        });
    }
    let canonical = codec::encode(&poset, &p);
    if codec::decode(&poset, &canonical)? != p {
        return Err(Error::CertificateFailure("canonical form does not round-trip".into()).into());
    }
    Ok(Outcome {
        pass: true,
        text: format!("ok: {}\n", fx.display(&p)),
        json: json!({"status": "ok", "document": "condition", "canonical": canonical}),
    })
}

fn enumerate(n: usize, count: usize, scale: &str) -> Result<Outcome, Failure> {
    let scale = ScaleSpec::Preset(scale.to_string()).build()?;
    let index = CantorIndex::new(scale);
    let measure = index.stage_measure(n)?;
    let sets = index.enumerate_clopen(n, count, None)?;
    let mut rows = Vec::new();
    let mut text = String::new();
    for (i, set) in sets.iter().enumerate() {
        let addresses: Vec<String> = set.addresses_at(set.depth()).iter().map(|a| a.to_string()).collect();
        text += &format!("C^{n}_{i} = {{{}}}  measure {}\n", addresses.join(", "), set.measure());
        rows.push(json!({"i": i, "depth": set.depth(), "addresses": addresses, "measure": set.measure().to_string()}));
    }
    Ok(Outcome {
        pass: true,
        json: json!({"n": n, "stage_measure": measure.to_string(), "sets": rows}),
        text,
    })
}

fn simulate(sc: &Scenario, out: Option<&Path>, fmt: Format) -> Result<Outcome, Failure> {
    let poset = sc.poset()?;
    let index = sc.index()?;
    let agenda = sc.agenda(&poset)?;
    let fx = Forcing::new(&poset, &index);
    let run = run(&fx, &agenda, &sc.run_config())?;
    let report = verify(&fx, &run)?;
    let json_text = report.to_json();
    let text = report.to_text();
    if let Some(path) = out {
        let body = match fmt {
            Format::Json => format!("{json_text}\n"),
            Format::Text => text.clone(),
        };
        fs::write(path, body).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    }
    Ok(Outcome {
        pass: report.all_pass(),
        json: serde_json::from_str(&json_text).unwrap(),
        text,
    })
}

fn witness(sc: &Scenario, a: &str, b: &str, after: usize) -> Result<Outcome, Failure> {
    let poset = sc.poset()?;
    let index = sc.index()?;
    let fx = Forcing::new(&poset, &index);
    let (ia, ib) = (poset.id(a)?, poset.id(b)?);
    let p = NQCondition::empty();
    let w = fx.incompatibility_witness(&p, ia, ib, after)?;
    let in_a = w.q.slalom(ia).and_then(|s| s.entry(w.m)).is_some_and(|e| e.contains(&w.k));
    let r_b: Option<ClopenIndex> = match w.q.slalom(ib) {
        Some(s) if !s.is_empty() => r_phi(s, &index)?.values.get(w.m).cloned(),
        _ => None,
    };
    let decided = fx.decide(&NameRef::RSlalom(ib), &w.q, w.m)?;
    let extends = fx.leq(&w.q, &p)? && fx.is_valid(&w.q);
    let pass = w.m > after && in_a && r_b.as_ref() == Some(&w.k) && decided.as_ref() == Some(&w.k) && extends;
    let json = json!({
        "a": a,
        "b": b,
        "after": after,
        "m": w.m,
        "k": w.k.to_string(),
        "k_in_s_a_m": in_a,
        "r_b_m": r_b.as_ref().map(|v| v.to_string()),
        "extends": extends,
        "pass": pass,
        "condition": codec::encode(&poset, &w.q),
    });
    let text = format!(
        "{} {a} vs {b}: m = {} > {after}, k = {}, k in s_{a}(m): {in_a}, r_{b}(m) = {}\n",
        if pass { "PASS" } else { "FAIL" },
        w.m,
        w.k,
        r_b.map_or("undecided".into(), |v| v.to_string()),
    );
    Ok(Outcome { pass, json, text })
}
