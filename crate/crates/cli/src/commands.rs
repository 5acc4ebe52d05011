use std::io::{self, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde_json::json;
use talentbayes::canonical::{canonical_value, to_canonical_string};
use talentbayes::data::{parse_assignment, parse_instance_text, write_csv};
use talentbayes::insight::model_influence;
use talentbayes::synthgen::generate_correlated;
use talentbayes::{
    attribute_influence, cross_validate, deserialize, evaluate, extract_rules, fingerprint,
    generate, load_dataset, load_pool, parse_schema, predict, recommend_team, serialize, train,
    what_if, CleaningReport, GenerativeSpec, NaiveBayesModel, Prediction, TrainConfig,
};
use talentbayes_service::{resolve_port, serve, ServiceError, ServiceState, PORT_ENV};

use crate::{
    Cli, Command, EvaluateArgs, ExplainArgs, Format, GenerateArgs, PredictArgs, RecommendArgs,
    ServeArgs, TrainArgs, WhatIfArgs, EXIT_DATA, EXIT_INTERNAL, EXIT_USAGE,
};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: io::Error },
    #[error("{0} [{code}]", code = .0.code())]
    Library(#[from] talentbayes::Error),
    #[error(transparent)]
    Service(#[from] ServiceError),
    #[error("cannot write output: {0}")]
    Output(#[from] io::Error),
}

fn library_exit_code(e: &talentbayes::Error) -> i32 {
    if e.is_internal() || matches!(e, talentbayes::Error::ModelInvariant(_)) {
        EXIT_INTERNAL
    } else {
        EXIT_DATA
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Read { .. } | CliError::Write { .. } | CliError::Output(_) => EXIT_DATA,
            CliError::Library(e) => library_exit_code(e),
            CliError::Service(ServiceError::Model(e)) => library_exit_code(e),
            CliError::Service(ServiceError::Port(_)) => EXIT_USAGE,
            CliError::Service(_) => EXIT_DATA,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })
}

/// Write via a temporary file in the target directory, then rename over
/// the destination, so readers never see a partial file.
fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let wrap = |source| CliError::Write {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(wrap)?;
    tmp.write_all(contents.as_bytes()).map_err(wrap)?;
    tmp.as_file().sync_all().map_err(wrap)?;
    tmp.persist(path).map_err(|e| wrap(e.error))?;
    Ok(())
}

fn load_model(path: &Path) -> Result<NaiveBayesModel> {
    Ok(deserialize(&read(path)?)?)
}

fn emit_json(out: &mut dyn Write, doc: &impl serde::Serialize) -> Result<()> {
    writeln!(out, "{}", to_canonical_string(doc))?;
    Ok(())
}

fn note_cleaning(err: &mut dyn Write, report: &CleaningReport) -> Result<()> {
    for note in report.notes() {
        writeln!(err, "note: {note}")?;
    }
    Ok(())
}

fn label_width(labels: &[String]) -> usize {
    labels.iter().map(String::len).max().unwrap_or(0)
}

pub fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let format = cli.format;
    match &cli.command {
        Command::Train(a) => cmd_train(a, format, out, err),
        Command::Predict(a) => cmd_predict(a, format, out, err),
        Command::Evaluate(a) => cmd_evaluate(a, format, out, err),
        Command::Explain(a) => cmd_explain(a, format, out, err),
        Command::Whatif(a) => cmd_whatif(a, format, out),
        Command::Recommend(a) => cmd_recommend(a, format, out, err),
        Command::Generate(a) => cmd_generate(a, format, out),
        Command::Serve(a) => cmd_serve(a),
    }
}

fn cmd_train(a: &TrainArgs, format: Format, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let schema = parse_schema(&read(&a.schema)?)?;
    let data = load_dataset(&read(&a.data)?, &schema, true)?;
    note_cleaning(err, data.cleaning_report())?;
    let model = train(&data, TrainConfig::with_alpha(a.alpha))?;
    write_atomic(&a.out, &serialize(&model))?;
    let fp = fingerprint(&model);
    match format {
        Format::Json => emit_json(
            out,
            &json!({
                "cleaning": data.cleaning_report(),
                "fingerprint": fp,
                "model": a.out.display().to_string(),
                "rows": data.len(),
            }),
        ),
        Format::Text => {
            let report = data.cleaning_report();
            writeln!(
                out,
                "trained on {} rows ({} dropped), wrote {} (fingerprint {fp})",
                data.len(),
                report.rows_dropped,
                a.out.display()
            )?;
            Ok(())
        }
    }
}

fn write_prediction(out: &mut dyn Write, p: &Prediction) -> Result<()> {
    let w = label_width(&p.classes);
    writeln!(out, "prediction: {}", p.label)?;
    for (class, prob) in p.classes.iter().zip(&p.posterior) {
        writeln!(out, "{class:<w$} {prob:.4}")?;
    }
    Ok(())
}

fn cmd_predict(a: &PredictArgs, format: Format, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let model = load_model(&a.model)?;
    let schema = model.schema();
    if let Some(text) = &a.input {
        let instance = parse_instance_text(text, schema)?;
        let p = predict(&model, &instance)?;
        return match format {
            Format::Json => emit_json(out, &p),
            Format::Text => write_prediction(out, &p),
        };
    }
    let path = a.pool.as_ref().expect("clap requires --input or --pool");
    let (pool, report) = load_pool(&read(path)?, schema)?;
    note_cleaning(err, &report)?;
    let mut rows = Vec::with_capacity(pool.len());
    for c in &pool {
        rows.push((c.id.as_str(), predict(&model, &c.instance)?));
    }
    match format {
        Format::Json => {
            let doc: Vec<_> = rows
                .iter()
                .map(|(id, p)| json!({"id": id, "prediction": p}))
                .collect();
            emit_json(out, &doc)
        }
        Format::Text => {
            let labels = schema.class_labels();
            let id_w = rows.iter().map(|(id, _)| id.len()).max().unwrap_or(2).max(2);
            let lw = label_width(labels).max(5);
            write!(out, "{:<id_w$} {:<lw$}", "id", "label")?;
            for l in labels {
                write!(out, " {:>8}", format!("p({l})"))?;
            }
            writeln!(out)?;
            for (id, p) in &rows {
                write!(out, "{id:<id_w$} {:<lw$}", p.label)?;
                for prob in &p.posterior {
                    write!(out, " {prob:>8.4}")?;
                }
                writeln!(out)?;
            }
            Ok(())
        }
    }
}

fn cmd_evaluate(a: &EvaluateArgs, format: Format, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let report = match (&a.model, &a.schema, a.folds) {
        (Some(model_path), None, None) => {
            let model = load_model(model_path)?;
            let data = load_dataset(&read(&a.data)?, model.schema(), true)?;
            note_cleaning(err, data.cleaning_report())?;
            evaluate(&model, &data)?
        }
        (None, Some(schema_path), Some(k)) => {
            let schema = parse_schema(&read(schema_path)?)?;
            let data = load_dataset(&read(&a.data)?, &schema, true)?;
            note_cleaning(err, data.cleaning_report())?;
            cross_validate(&data, k, a.seed, TrainConfig::with_alpha(a.alpha))?
        }
        _ => {
            return Err(CliError::Usage(
                "evaluate needs either --model, or --schema with --folds".into(),
            ))
        }
    };
    match format {
        Format::Json => emit_json(out, &report),
        Format::Text => {
            write!(out, "{report}")?;
            Ok(())
        }
    }
}

fn cmd_explain(a: &ExplainArgs, format: Format, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let model = load_model(&a.model)?;
    let mut rules = extract_rules(&model);
    if let Some(k) = a.top_k {
        rules.truncate(k);
    }
    let influence = match &a.data {
        Some(path) => {
            let data = load_dataset(&read(path)?, model.schema(), true)?;
            note_cleaning(err, data.cleaning_report())?;
            attribute_influence(&data)?
        }
        None => model_influence(&model),
    };
    match format {
        Format::Json => emit_json(out, &json!({"influence": influence, "rules": rules})),
        Format::Text => {
            writeln!(out, "rules:")?;
            for r in &rules {
                writeln!(out, "{r}")?;
            }
            writeln!(out)?;
            writeln!(out, "influence (mutual information with the class):")?;
            write!(out, "{influence}")?;
            Ok(())
        }
    }
}

fn cmd_whatif(a: &WhatIfArgs, format: Format, out: &mut dyn Write) -> Result<()> {
    let model = load_model(&a.model)?;
    let instance = parse_instance_text(&a.input, model.schema())?;
    let (attribute, value) = parse_assignment(&a.set, model.schema())?;
    let r = what_if(&model, &instance, &attribute, value)?;
    match format {
        Format::Json => emit_json(out, &r),
        Format::Text => {
            writeln!(out, "{}: {} -> {}", r.attribute, r.old_value, r.new_value)?;
            writeln!(out, "prediction: {} -> {}", r.before.label, r.after.label)?;
            let w = label_width(&r.before.classes);
            for (c, class) in r.before.classes.iter().enumerate() {
                writeln!(
                    out,
                    "{class:<w$} {:.4} -> {:.4} ({:+.4})",
                    r.before.posterior[c], r.after.posterior[c], r.delta[c]
                )?;
            }
            Ok(())
        }
    }
}

fn cmd_recommend(a: &RecommendArgs, format: Format, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let model = load_model(&a.model)?;
    let (pool, report) = load_pool(&read(&a.pool)?, model.schema())?;
    note_cleaning(err, &report)?;
    let team = recommend_team(&model, &pool, a.team_size, a.target.as_deref(), a.threshold)?;
    match format {
        Format::Json => emit_json(out, &team),
        Format::Text => {
            writeln!(
                out,
                "team of {} ranked by P({}):",
                team.team_size, team.target_class
            )?;
            let w = team.members.iter().map(|m| m.id.len()).max().unwrap_or(0);
            for (rank, m) in team.members.iter().enumerate() {
                writeln!(out, "{:>3}. {:<w$} {:.4}", rank + 1, m.id, m.probability)?;
            }
            if team.undersized {
                write!(
                    out,
                    "warning: undersized team, {} of {} places filled",
                    team.members.len(),
                    team.team_size
                )?;
                if let Some(t) = team.threshold {
                    write!(out, " ({} below threshold {t})", team.excluded_by_threshold)?;
                }
                writeln!(out)?;
            }
            Ok(())
        }
    }
}

fn cmd_generate(a: &GenerateArgs, format: Format, out: &mut dyn Write) -> Result<()> {
    let spec = GenerativeSpec::parse(&read(&a.spec)?)?;
    let seed = a.seed.unwrap_or(spec.seed);
    let data = match a.correlated {
        Some(rho) => generate_correlated(&spec, a.n, seed, rho)?,
        None => generate(&spec, a.n, seed)?,
    };
    write_atomic(&a.out, &write_csv(&data))?;
    match format {
        Format::Json => {
            let doc = json!({"out": a.out.display().to_string(), "rows": data.len(), "seed": seed});
            writeln!(out, "{}", canonical_value(&doc))?;
        }
        Format::Text => writeln!(out, "wrote {} rows to {} (seed {seed})", data.len(), a.out.display())?,
    }
    Ok(())
}

fn cmd_serve(a: &ServeArgs) -> Result<()> {
    let env = std::env::var(PORT_ENV).ok();
    let port = resolve_port(a.port, env.as_deref())?;
    let state = Arc::new(ServiceState::from_file(&a.model)?);
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()?;
    runtime.block_on(serve(state, SocketAddr::new(a.host, port)))?;
    Ok(())
}
