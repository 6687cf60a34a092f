use std::fs;
use std::io::{BufReader, Write};
use std::path::Path;

use pcmkit::acceptance::{assess_pcm, builtin_table, AcceptanceVerdict, QuantileTable, TABLE_HEADER};
use pcmkit::sim::{
    read_database, run_mse_sf, run_msobe_sf, run_nee_sf, write_database, BigErrorModel, CorrelationSummary,
    DatabaseFormat, ErrorModel, Layout, LossKind, MseConfig, MsobeConfig, NeeConfig, Quantity,
};
use pcmkit::{
    class_correlations, estimate_asi, gm_estimate, rev, summarize_classes, ClassCorrelation, ClassSummary, Error,
    ErrorPair, IndexReport, Pcm, PriorityVector,
};
use serde::Serialize;

use crate::config::{
    manifest_path, AcceptArgs, AnalyzeArgs, Command, Counts, Framework, LayoutArg, Manifest, MseArgs, MsobeArgs,
    NeeArgs, OutputArgs, OutputFormat, ReportArgs,
};
use crate::render::{csv_num, fraction_and_percent, num, opt_num, TextTable};

/// Successful outcomes; a rejected PCM is not an error but has its own exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Done,
    Rejected,
}

pub type CmdResult = Result<Outcome, Error>;

pub fn run(command: Command) -> CmdResult {
    match command {
        Command::Analyze(args) => analyze(args),
        Command::Simulate(Framework::Mse(args)) => simulate_mse(args),
        Command::Simulate(Framework::Nee(args)) => simulate_nee(args),
        Command::Simulate(Framework::Msobe(args)) => simulate_msobe(args),
        Command::Report(args) => report(args),
        Command::Accept(args) => accept(args),
        Command::Replay { manifest } => {
            let text = fs::read_to_string(&manifest)?;
            let m: Manifest = serde_json::from_str(&text)
                .map_err(|e| Error::Parse { line: e.line(), message: format!("manifest: {e}") })?;
            run(m.config)
        }
    }
}

fn resolve_seed(seed: &mut Option<u64>) -> u64 {
    *seed.get_or_insert_with(|| {
        let s = rand::random::<u64>();
        eprintln!("seed: {s}");
        s
    })
}

/// Writes the primary output and, for files, the manifest sidecar.
fn emit(output: &OutputArgs, body: &[u8], config: &Command, seed: Option<u64>, counts: Counts) -> Result<(), Error> {
    match &output.out {
        Some(path) => {
            fs::write(path, body)?;
            let manifest = Manifest::new(config.clone(), seed, counts);
            let json = serde_json::to_string_pretty(&manifest)
                .map_err(|e| Error::InvalidArgument(format!("cannot encode manifest: {e}")))?;
            fs::write(manifest_path(path), json + "\n")?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(body)?;
            stdout.flush()?;
        }
    }
    Ok(())
}

fn read_pcm(path: &Path) -> Result<Pcm, Error> {
    let text = fs::read_to_string(path)?;
    let pcm = Pcm::parse_csv(&text)?;
    pcm.require_reciprocal(pcmkit::pcm::DEFAULT_TOL)?;
    Ok(pcm)
}

fn json_line<T: Serialize>(value: &T) -> Result<String, Error> {
    serde_json::to_string(value)
        .map(|s| s + "\n")
        .map_err(|e| Error::InvalidArgument(format!("cannot encode output: {e}")))
}

#[derive(Serialize)]
struct Analysis {
    n: usize,
    lambda_max: f64,
    #[serde(flatten)]
    indices: IndexReport,
    asi: f64,
    asi_samples: usize,
    asi_seed: u64,
    rev: Vec<f64>,
    gm: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rev_error: Option<ErrorPair>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gm_error: Option<ErrorPair>,
}

fn analyze(mut args: AnalyzeArgs) -> CmdResult {
    let pcm = read_pcm(&args.pcm)?;
    let n = pcm.order();
    let truth = match &args.true_pv {
        Some(v) => {
            let pv = PriorityVector::new(v.clone())?;
            if pv.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: pv.len() });
            }
            Some(pv)
        }
        None => None,
    };
    let seed = resolve_seed(&mut args.seed);
    let asi = estimate_asi(n, args.asi_samples, seed)?;
    let eig = rev(&pcm)?;
    let gm = gm_estimate(&pcm);
    let indices = IndexReport::from_parts(&pcm, &eig, Some(asi))?;
    let errors = |w: &[f64]| truth.as_ref().map(|t| ErrorPair::between(t.as_slice(), w)).transpose();
    let a = Analysis {
        n,
        lambda_max: eig.lambda_max,
        indices,
        asi,
        asi_samples: args.asi_samples,
        asi_seed: seed,
        rev: eig.weights.as_slice().to_vec(),
        gm: gm.as_slice().to_vec(),
        rev_error: errors(eig.weights.as_slice())?,
        gm_error: errors(gm.as_slice())?,
    };
    let body = match args.format {
        OutputFormat::Jsonl => json_line(&a)?,
        OutputFormat::Csv => analysis_csv(&a),
        OutputFormat::Table => analysis_table(&a),
    };
    emit(&args.output, body.as_bytes(), &Command::Analyze(args.clone()), Some(seed), Counts::default())?;
    Ok(Outcome::Done)
}

fn analysis_csv(a: &Analysis) -> String {
    let mut rows: Vec<(String, f64)> = vec![
        ("n".into(), a.n as f64),
        ("lambda_max".into(), a.lambda_max),
        ("si".into(), a.indices.si),
        ("cr".into(), a.indices.cr.unwrap_or(f64::NAN)),
        ("asi".into(), a.asi),
        ("gi".into(), a.indices.gi),
        ("ki".into(), a.indices.ki),
        ("ati".into(), a.indices.ati),
    ];
    for (k, w) in a.rev.iter().enumerate() {
        rows.push((format!("rev_{}", k + 1), *w));
    }
    for (k, w) in a.gm.iter().enumerate() {
        rows.push((format!("gm_{}", k + 1), *w));
    }
    if let (Some(r), Some(g)) = (a.rev_error, a.gm_error) {
        rows.extend([("ae_rev".into(), r.ae), ("re_rev".into(), r.re), ("ae_gm".into(), g.ae), ("re_gm".into(), g.re)]);
    }
    let mut out = String::from("quantity,value\n");
    for (k, v) in rows {
        out.push_str(&format!("{k},{}\n", csv_num(Some(v))));
    }
    out.push_str(&format!("asi_seed,{}\nasi_samples,{}\n", a.asi_seed, a.asi_samples));
    out
}

fn analysis_table(a: &Analysis) -> String {
    let mut t = TextTable::new(["quantity", "value"]);
    t.push(vec!["order n".into(), a.n.to_string()]);
    t.push(vec!["lambda_max".into(), num(a.lambda_max)]);
    t.push(vec!["SI".into(), num(a.indices.si)]);
    t.push(vec!["CR".into(), opt_num(a.indices.cr)]);
    t.push(vec!["ASI".into(), format!("{} ({} samples, seed {})", num(a.asi), a.asi_samples, a.asi_seed)]);
    t.push(vec!["GI".into(), num(a.indices.gi)]);
    t.push(vec!["KI".into(), num(a.indices.ki)]);
    t.push(vec!["ATI".into(), num(a.indices.ati)]);
    let mut out = t.render();
    out.push('\n');
    let mut w = TextTable::new(["i", "REV", "GM"]);
    for (k, (r, g)) in a.rev.iter().zip(&a.gm).enumerate() {
        w.push(vec![(k + 1).to_string(), num(*r), num(*g)]);
    }
    out.push_str(&w.render());
    if let (Some(r), Some(g)) = (a.rev_error, a.gm_error) {
        out.push('\n');
        let mut e = TextTable::new(["method", "AE", "RE"]);
        e.push(vec!["REV".into(), num(r.ae), fraction_and_percent(r.re)]);
        e.push(vec!["GM".into(), num(g.ae), fraction_and_percent(g.re)]);
        out.push_str(&e.render());
    }
    out
}

fn simulate_mse(mut args: MseArgs) -> CmdResult {
    let seed = resolve_seed(&mut args.seed);
    let config = MseConfig { threads: args.workers, ..MseConfig::new(args.n, args.runs, args.n_e, seed) };
    let summary = run_mse_sf(&config)?;
    let body = summary_body(&summary, args.format)?;
    let counts = Counts { records: None, runs: Some(summary.runs), skipped: summary.skipped };
    emit(&args.output, body.as_bytes(), &Command::Simulate(Framework::Mse(args.clone())), Some(seed), counts)?;
    Ok(Outcome::Done)
}

fn simulate_nee(mut args: NeeArgs) -> CmdResult {
    let seed = resolve_seed(&mut args.seed);
    let config = NeeConfig { threads: args.workers, ..NeeConfig::new(args.n, args.n_r, args.n_p, seed) };
    let summary = run_nee_sf(&config)?;
    let body = summary_body(&summary, args.format)?;
    let counts = Counts { records: None, runs: Some(summary.runs), skipped: summary.skipped };
    emit(&args.output, body.as_bytes(), &Command::Simulate(Framework::Nee(args.clone())), Some(seed), counts)?;
    Ok(Outcome::Done)
}

fn summary_body(s: &CorrelationSummary, format: OutputFormat) -> Result<String, Error> {
    Ok(match format {
        OutputFormat::Jsonl => {
            let mut out = String::new();
            for c in &s.cells {
                out.push_str(&json_line(&serde_json::json!({
                    "framework": s.framework,
                    "n": s.n,
                    "series": c.series.name(),
                    "target": c.target.name(),
                    "mean_spearman": finite(c.mean_spearman),
                    "mean_pearson": finite(c.mean_pearson),
                    "min_spearman": finite(c.min_spearman),
                    "max_spearman": finite(c.max_spearman),
                    "defined_runs": c.defined_runs,
                }))?);
            }
            out
        }
        OutputFormat::Csv => {
            let mut out = String::from(
                "framework,n,series,target,mean_spearman,mean_pearson,min_spearman,max_spearman,defined_runs\n",
            );
            for c in &s.cells {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{}\n",
                    s.framework,
                    s.n,
                    c.series.name(),
                    c.target.name(),
                    csv_num(Some(c.mean_spearman)),
                    csv_num(Some(c.mean_pearson)),
                    csv_num(Some(c.min_spearman)),
                    csv_num(Some(c.max_spearman)),
                    c.defined_runs
                ));
            }
            out
        }
        OutputFormat::Table => summary_table(s),
    })
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn summary_table(s: &CorrelationSummary) -> String {
    let targets = Quantity::targets();
    let driver = if s.framework == "nee" { "NE" } else { "eps" };
    let label = |q: Quantity| if q == Quantity::Driver { driver.to_string() } else { q.name().to_string() };
    let mut out = format!("{} n={} runs={} skipped={}\n\n", s.framework.to_uppercase(), s.n, s.runs, s.skipped);
    for (title, pick) in [
        (
            "mean Spearman",
            (|s: &CorrelationSummary, a, b| s.spearman(a, b)) as fn(&CorrelationSummary, Quantity, Quantity) -> f64,
        ),
        ("mean Pearson", |s: &CorrelationSummary, a, b| s.pearson(a, b)),
    ] {
        let mut header = vec![title.to_string()];
        header.extend(targets.iter().map(|&t| label(t)));
        let mut t = TextTable::new(header);
        for series in Quantity::series() {
            let mut row = vec![series.name().to_string()];
            row.extend(targets.iter().map(|&target| num(pick(s, series, target))));
            t.push(row);
        }
        out.push_str(&t.render());
        out.push('\n');
    }
    out
}

fn simulate_msobe(mut args: MsobeArgs) -> CmdResult {
    let seed = resolve_seed(&mut args.seed);
    let format = match args.format {
        OutputFormat::Csv => DatabaseFormat::Csv,
        OutputFormat::Jsonl => DatabaseFormat::Jsonl,
        OutputFormat::Table => {
            return Err(Error::InvalidArgument("the MSOBE database is written as csv or jsonl".into()))
        }
    };
    let models = if args.distributions.len() == 1 && args.distributions[0].eq_ignore_ascii_case("all") {
        ErrorModel::standard_set()
    } else {
        args.distributions.iter().map(|d| ErrorModel::from_tag(d.trim())).collect::<Result<Vec<_>, _>>()?
    };
    let config = MsobeConfig {
        scale: if args.no_round { None } else { Some(pcmkit::SaatyScale::standard()) },
        models,
        big: BigErrorModel { apply_probability: args.big_prob, ..BigErrorModel::default() },
        layout: match args.layout {
            LayoutArg::Flat => Layout::Flat,
            LayoutArg::Nested => Layout::Nested { per_vector: args.per_vector },
        },
        threads: args.workers,
        ..MsobeConfig::new(args.n, args.total, seed)
    };
    let out = run_msobe_sf(&config)?;
    if !out.skipped.is_empty() {
        eprintln!("{} records skipped (eigenvector iteration did not converge)", out.skipped.len());
    }
    let mut body = Vec::new();
    write_database(&mut body, &out.records, format)?;
    let counts = Counts { records: Some(out.records.len()), runs: None, skipped: out.skipped.len() };
    emit(&args.output, &body, &Command::Simulate(Framework::Msobe(args.clone())), Some(seed), counts)?;
    Ok(Outcome::Done)
}

fn report(args: ReportArgs) -> CmdResult {
    let file = fs::File::open(&args.database)?;
    let records = read_database(BufReader::new(file))?;
    if records.len() < args.classes {
        return Err(Error::InvalidArgument(format!("{} records cannot fill {} classes", records.len(), args.classes)));
    }
    let n = records[0].n;
    if let Some(r) = records.iter().find(|r| r.n != n) {
        return Err(Error::InvalidArgument(format!("database mixes orders {n} and {}", r.n)));
    }
    let summaries = summarize_classes(&records, args.index, args.error, args.classes)?;
    let correlations = class_correlations(&summaries);
    let body = match args.format {
        OutputFormat::Csv => report_csv(n, &args, &summaries, &correlations),
        OutputFormat::Jsonl => {
            let mut out = String::new();
            for s in &summaries {
                out.push_str(&json_line(s)?);
            }
            out.push_str(&json_line(&serde_json::json!({ "correlations": correlations }))?);
            out
        }
        OutputFormat::Table => report_table(&args, &summaries, &correlations),
    };
    let counts = Counts { records: Some(records.len()), runs: None, skipped: 0 };
    emit(&args.output, body.as_bytes(), &Command::Report(args.clone()), None, counts)?;
    Ok(Outcome::Done)
}

/// Class rows in the quantile-table file format, so `accept --table` can
/// read them; correlations follow as comment lines.
fn report_csv(n: usize, args: &ReportArgs, summaries: &[ClassSummary], corr: &[ClassCorrelation]) -> String {
    let method = match args.error.method() {
        pcmkit::Method::Rev => "rev",
        pcmkit::Method::Gm => "gm",
    };
    let mut out = format!("{TABLE_HEADER}\n");
    for s in summaries {
        out.push_str(&format!(
            "{n},{method},{},{},{},{},{},{},{}\n",
            csv_num(Some(s.lower)),
            csv_num(Some(s.upper)),
            csv_num(s.mean_index_value),
            csv_num(s.q10),
            csv_num(s.median),
            csv_num(s.q90),
            csv_num(s.mean_error)
        ));
    }
    out.push_str(&format!("# index={} error={}\n", args.index.name(), args.error.name()));
    out.push_str("# characteristic,spearman,pearson\n");
    for c in corr {
        out.push_str(&format!("# {},{},{}\n", c.characteristic.name(), csv_num(c.spearman), csv_num(c.pearson)));
    }
    out
}

fn report_table(args: &ReportArgs, summaries: &[ClassSummary], corr: &[ClassCorrelation]) -> String {
    let relative = args.error.loss() == LossKind::Re;
    let err = |x: Option<f64>| match x {
        Some(v) if relative => fraction_and_percent(v),
        other => opt_num(other),
    };
    let idx = args.index.name().to_uppercase();
    let mut t = TextTable::new([
        "i".to_string(),
        format!("class of {idx}"),
        "count".into(),
        format!("mean {idx}"),
        "q10".into(),
        "median".into(),
        "q90".into(),
        format!("mean {}", args.error.name()),
    ]);
    for s in summaries {
        t.push(vec![
            s.class_index.to_string(),
            format!("{} - {}", num(s.lower), num(s.upper)),
            s.count.to_string(),
            opt_num(s.mean_index_value),
            err(s.q10),
            err(s.median),
            err(s.q90),
            err(s.mean_error),
        ]);
    }
    let mut out = t.render();
    out.push('\n');
    let mut c =
        TextTable::new([format!("{} vs class mean {idx}", args.error.name()), "Spearman".into(), "Pearson".into()]);
    for k in corr {
        c.push(vec![k.characteristic.name().to_string(), opt_num(k.spearman), opt_num(k.pearson)]);
    }
    out.push_str(&c.render());
    out
}

fn accept(args: AcceptArgs) -> CmdResult {
    let pcm = read_pcm(&args.pcm)?;
    let custom;
    let table: &QuantileTable = match &args.table {
        Some(path) => {
            custom = QuantileTable::from_csv(&fs::read_to_string(path)?)?;
            &custom
        }
        None => builtin_table(pcm.order(), args.method)?,
    };
    let verdict = assess_pcm(&pcm, args.method, args.threshold, args.quantile, table)?;
    let body = match args.format {
        OutputFormat::Jsonl => json_line(&verdict)?,
        OutputFormat::Csv => verdict_csv(&verdict),
        OutputFormat::Table => verdict_table(&verdict, table),
    };
    emit(&args.output, body.as_bytes(), &Command::Accept(args.clone()), None, Counts::default())?;
    Ok(if verdict.accepted { Outcome::Done } else { Outcome::Rejected })
}

fn verdict_csv(v: &AcceptanceVerdict) -> String {
    format!(
        "ati,class_index,class_lo,class_hi,q10,median,q90,mean_err,threshold,quantile,accepted\n\
         {},{},{},{},{},{},{},{},{},{},{}\n",
        csv_num(Some(v.ati)),
        v.class_index,
        csv_num(Some(v.class_lo)),
        csv_num(Some(v.class_hi)),
        csv_num(Some(v.estimated_q10)),
        csv_num(Some(v.estimated_median)),
        csv_num(Some(v.estimated_q90)),
        csv_num(v.estimated_mean),
        csv_num(Some(v.threshold)),
        v.quantile_choice.name(),
        v.accepted
    )
}

fn verdict_table(v: &AcceptanceVerdict, table: &QuantileTable) -> String {
    let loss = match table.loss {
        Some(LossKind::Re) => "RE",
        Some(LossKind::Ae) => "AE",
        None => "error",
    };
    let mut out = format!(
        "{}: ATI = {} lies in class {} [{}, {}) of the n={} {} table\n\n",
        if v.accepted { "ACCEPT" } else { "REJECT" },
        num(v.ati),
        v.class_index,
        num(v.class_lo),
        num(v.class_hi),
        table.n,
        table.method
    );
    let mut t = TextTable::new([format!("{loss}({})", table.method), "value".into()]);
    t.push(vec!["q10".into(), num(v.estimated_q10)]);
    t.push(vec!["median".into(), num(v.estimated_median)]);
    t.push(vec!["q90".into(), num(v.estimated_q90)]);
    t.push(vec!["mean".into(), v.estimated_mean.map_or_else(|| "(suspect in source table)".into(), num)]);
    out.push_str(&t.render());
    out.push_str(&format!(
        "\n{} = {} {} threshold {}\n",
        v.quantile_choice.name(),
        num(v.quantile_choice.pick(table.row(v.class_index).expect("verdict class exists"))),
        if v.accepted { "<=" } else { ">" },
        num(v.threshold)
    ));
    out
}
