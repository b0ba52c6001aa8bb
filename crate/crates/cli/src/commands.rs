//! Command implementations.

use std::path::PathBuf;

use clap::Args;
use serde_json::json;

use biaslab::analytic::{self, BiasReport, FunctionSpec, NonlinearOutcomeModel};
use biaslab::catalog;
use biaslab::dataset::Dataset;
use biaslab::diagnostics::{covariate_screen, iv_sensitivity_test, SensitivityConfig};
use biaslab::dsep::{bias_taxonomy, d_separated, SeparationQuery};
use biaslab::graph::NodeKind;
use biaslab::mc::{
    bias_experiment, binned_slope, ols, sample_linear, sample_nonlinear, select_band, BandRequest,
    BinFilter, ExperimentReport, SimConfig,
};
use biaslab::model_file::load_model;
use biaslab::scm::{EvaluationPoint, LinearSCM};

use crate::output::{fmt, fmt_bool, CommandOutput, Table};
use crate::CliError;

fn comma_names(s: &str) -> Vec<String> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(str::to_owned)
        .collect()
}

fn load(path: &std::path::Path) -> Result<LinearSCM, CliError> {
    load_model(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn ensure_finite(v: f64, what: &str) -> Result<f64, CliError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Internal(format!("{what} is not finite ({v})")))
    }
}

// ── analyze ──────────────────────────────────────────────────────────────

#[derive(Args)]
pub struct AnalyzeArgs {
    /// Linear model file.
    #[arg(long, conflicts_with_all = ["f", "g", "c1", "c3"])]
    pub model: Option<PathBuf>,
    /// Treatment node.
    #[arg(long, default_value = "X")]
    pub x: String,
    /// Outcome node.
    #[arg(long, default_value = "Y")]
    pub y: String,
    /// Conditioning set, comma-separated.
    #[arg(long)]
    pub condition: Option<String>,

    /// Nonlinear mode: outcome baseline f (e.g. `poly:0,1`).
    #[arg(long, requires_all = ["g", "c1", "c3", "at"])]
    pub f: Option<String>,
    /// Nonlinear mode: confounder loading g (e.g. `reciprocal:1`).
    #[arg(long)]
    pub g: Option<String>,
    /// Nonlinear mode: confounder-to-treatment coefficient.
    #[arg(long)]
    pub c1: Option<f64>,
    /// Nonlinear mode: instrument-to-treatment coefficient.
    #[arg(long)]
    pub c3: Option<f64>,
    /// Nonlinear mode: evaluation point, e.g. `X=1,Z=0.5`.
    #[arg(long)]
    pub at: Option<String>,
    /// Nonlinear mode: outcome disturbance variance.
    #[arg(long, default_value_t = 0.1)]
    pub y_noise: f64,
}

fn bias_report_output(report: &BiasReport) -> CommandOutput {
    let mut table = Table::new(
        "bias report",
        &[
            "a1",
            "a2",
            "a3",
            "b0",
            "bz",
            "amplification",
            "classification",
        ],
    );
    table.push(vec![
        fmt(report.a1),
        fmt(report.a2),
        fmt(report.a3),
        fmt(report.b0),
        fmt(report.bz),
        fmt(report.amplification),
        format!("{:?}", report.classification),
    ]);
    CommandOutput::new(
        serde_json::to_value(report).expect("serializable"),
        vec![table],
    )
}

pub fn analyze(args: &AnalyzeArgs) -> Result<CommandOutput, CliError> {
    if let Some(path) = &args.model {
        let model = load(path)?;
        let conditioning = args
            .condition
            .as_deref()
            .map(comma_names)
            .unwrap_or_default();
        let cond_refs: Vec<&str> = conditioning.iter().map(|s| s.as_str()).collect();
        let a1 = model.total_effect(&args.x, &args.y)?;
        let a2 = model.partial_regression_slope(&args.y, &args.x, &[])?;
        let a3 = model.partial_regression_slope(&args.y, &args.x, &cond_refs)?;
        let report = BiasReport::from_slopes(a1, a2, a3);
        Ok(bias_report_output(&report))
    } else if args.f.is_some() {
        let f = FunctionSpec::parse(args.f.as_deref().unwrap())
            .map_err(|e| CliError::Usage(e.to_string()))?;
        let g = FunctionSpec::parse(args.g.as_deref().unwrap())
            .map_err(|e| CliError::Usage(e.to_string()))?;
        let point = EvaluationPoint::parse(args.at.as_deref().unwrap())
            .map_err(|e| CliError::Usage(e.to_string()))?;
        let x = point.get("X").ok_or_else(|| {
            CliError::Usage("evaluation point must assign X (e.g. --at X=1,Z=0)".into())
        })?;
        let z = point.get("Z").unwrap_or(0.0);
        let model =
            NonlinearOutcomeModel::new(args.c3.unwrap(), args.c1.unwrap(), f, g, args.y_noise)?;
        let report = analytic::nonlinear_bias_pair(&model, x, z)?;
        Ok(bias_report_output(&report))
    } else {
        Err(CliError::Usage(
            "analyze needs either --model FILE or the nonlinear flags \
             (--f --g --c1 --c3 --at)"
                .into(),
        ))
    }
}

// ── simulate ─────────────────────────────────────────────────────────────

#[derive(Args)]
pub struct SimulateArgs {
    /// Linear model file.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value = "X")]
    pub x: String,
    #[arg(long, default_value = "Y")]
    pub y: String,
    /// Conditioning set compared against the crude regression.
    #[arg(long)]
    pub condition: Option<String>,
    /// Band-condition on this node before regressing.
    #[arg(long)]
    pub select: Option<String>,
    /// Band center.
    #[arg(long, default_value_t = 0.0)]
    pub center: f64,
    /// Band half-width.
    #[arg(long, default_value_t = 0.05)]
    pub band: f64,
    /// Rows per replication.
    #[arg(long, default_value_t = 100_000)]
    pub n: usize,
    /// Replications.
    #[arg(long, default_value_t = 1)]
    pub reps: usize,
    /// Also write the first replication's dataset (post-selection) as CSV.
    #[arg(long)]
    pub data_out: Option<PathBuf>,
}

fn experiment_table(report: &ExperimentReport) -> Table {
    let mut table = Table::new(
        "slope experiment",
        &[
            "conditioning",
            "empirical",
            "std_error",
            "analytic",
            "z_score",
            "tolerance",
            "rows",
            "pass",
        ],
    );
    for arm in &report.arms {
        let cond = if arm.conditioning.is_empty() {
            "(none)".to_owned()
        } else {
            arm.conditioning.join("+")
        };
        table.push(vec![
            cond,
            fmt(arm.empirical),
            fmt(arm.std_error),
            fmt(arm.analytic),
            fmt(arm.z_score),
            fmt(arm.tolerance),
            format!("{:.0}", arm.mean_rows),
            fmt_bool(arm.pass),
        ]);
    }
    table
}

pub fn simulate(args: &SimulateArgs, seed: u64) -> Result<CommandOutput, CliError> {
    let model = load(&args.model)?;
    let config = SimConfig::new(args.n, seed)
        .with_replications(args.reps)
        .with_selection_band(args.band);
    let mut sets: Vec<Vec<String>> = vec![vec![]];
    if let Some(cond) = &args.condition {
        sets.push(comma_names(cond));
    }
    let band = args.select.as_ref().map(|node| BandRequest {
        node: node.clone(),
        center: args.center,
    });
    let report = bias_experiment(&model, &args.x, &args.y, &sets, band, &config)?;

    if let Some(path) = &args.data_out {
        let mut data = sample_linear(&model, &config, 0)?;
        if let Some(b) = args.select.as_ref() {
            data = select_band(&data, b, args.center, args.band)?;
        }
        data.save_csv(path)
            .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))?;
    }

    Ok(CommandOutput::new(
        serde_json::to_value(&report).expect("serializable"),
        vec![experiment_table(&report)],
    ))
}

// ── dsep / taxonomy ──────────────────────────────────────────────────────

#[derive(Args)]
pub struct DsepArgs {
    /// Model file supplying the graph.
    #[arg(long)]
    pub model: PathBuf,
    /// Query, e.g. "Y _||_ Z | X,S".
    pub query: String,
}

pub fn dsep(args: &DsepArgs) -> Result<CommandOutput, CliError> {
    let model = load(&args.model)?;
    let query = SeparationQuery::parse(&args.query).map_err(|e| CliError::Usage(e.to_string()))?;
    let separated = d_separated(model.graph(), &query)?;
    let mut table = Table::new("d-separation", &["a", "b", "given", "separated"]);
    table.push(vec![
        query.a.clone(),
        query.b.clone(),
        if query.given.is_empty() {
            "(none)".into()
        } else {
            query.given.join(",")
        },
        fmt_bool(separated),
    ]);
    Ok(CommandOutput::new(
        json!({
            "a": query.a,
            "b": query.b,
            "given": query.given,
            "separated": separated,
        }),
        vec![table],
    ))
}

#[derive(Args)]
pub struct TaxonomyArgs {
    /// Model file supplying the graph.
    #[arg(long)]
    pub model: PathBuf,
    /// Query, e.g. "X -> Y | S1".
    pub query: String,
}

fn parse_taxonomy_query(text: &str) -> Result<(String, String, Vec<String>), CliError> {
    let (pair, given) = match text.split_once('|') {
        Some((p, g)) => (p, g),
        None => (text, ""),
    };
    let (x, y) = pair
        .split_once("->")
        .ok_or_else(|| CliError::Usage(format!("expected `X -> Y | S1,S2`, got {text:?}")))?;
    let x = x.trim();
    let y = y.trim();
    if x.is_empty() || y.is_empty() {
        return Err(CliError::Usage("empty node name in taxonomy query".into()));
    }
    Ok((x.to_owned(), y.to_owned(), comma_names(given)))
}

pub fn taxonomy(args: &TaxonomyArgs) -> Result<CommandOutput, CliError> {
    let model = load(&args.model)?;
    let (x, y, given) = parse_taxonomy_query(&args.query)?;
    let given_refs: Vec<&str> = given.iter().map(|s| s.as_str()).collect();
    let report = bias_taxonomy(model.graph(), &x, &y, &given_refs)?;

    let mut paths = Table::new("open bias channels", &["path", "class"]);
    for p in &report.open_paths {
        paths.push(vec![p.nodes.join(" - "), format!("{:?}", p.class)]);
    }
    let mut flags = Table::new("summary", &["has_confounding", "has_selection"]);
    flags.push(vec![
        fmt_bool(report.has_confounding_component),
        fmt_bool(report.has_selection_component),
    ]);
    Ok(CommandOutput::new(
        serde_json::to_value(report).expect("serializable"),
        vec![paths, flags],
    ))
}

// ── classify ─────────────────────────────────────────────────────────────

#[derive(Args)]
pub struct ClassifyArgs {
    /// Instrument-plus-confounder model file (fig1/fig2 shape).
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value = "X")]
    pub x: String,
    #[arg(long, default_value = "Y")]
    pub y: String,
    /// Instrument node.
    #[arg(long, default_value = "Z")]
    pub z: String,
}

pub fn classify(args: &ClassifyArgs) -> Result<CommandOutput, CliError> {
    let model = load(&args.model)?;
    let graph = model.graph();
    let x = graph.node_id(&args.x).map_err(CliError::from)?;
    let y = graph.node_id(&args.y).map_err(CliError::from)?;

    // The latent confounder is the latent node pointing at both
    // treatment and outcome.
    let confounders: Vec<usize> = (0..graph.len())
        .filter(|&v| {
            graph.kind(v) == NodeKind::Latent
                && graph.children_of(v).contains(&x)
                && graph.children_of(v).contains(&y)
        })
        .collect();
    let u = match confounders.as_slice() {
        [u] => graph.name(*u).to_owned(),
        [] => {
            return Err(CliError::Data(format!(
                "{}: no latent confounder of {} and {} found",
                args.model.display(),
                args.x,
                args.y
            )))
        }
        many => {
            return Err(CliError::Data(format!(
                "{}: multiple latent confounders found: {}",
                args.model.display(),
                many.iter()
                    .map(|&v| graph.name(v))
                    .collect::<Vec<_>>()
                    .join(", ")
            )))
        }
    };

    let c0 = model.coefficient(&args.x, &args.y)?;
    let c1 = model.coefficient(&u, &args.x)?;
    let c2 = model.coefficient(&u, &args.y)?;
    let c3 = model.coefficient(&args.z, &args.x)?;
    let c4 = model.coefficient(&args.z, &args.y)?;
    if c3 == 0.0 {
        return Err(CliError::Data(format!(
            "{} has no {} -> {} edge; nothing to classify",
            args.model.display(),
            args.z,
            args.x
        )));
    }

    let report = analytic::imperfect_instrument_report(c0, c1, c2, c3, c4)?;
    let threshold = analytic::reducer_threshold(c1, c2, c3)?;

    let mut table = Table::new(
        "instrument classification",
        &[
            "c0",
            "c1",
            "c2",
            "c3",
            "c4",
            "b0",
            "bz",
            "verdict",
            "signed_threshold_c4",
        ],
    );
    table.push(vec![
        fmt(c0),
        fmt(c1),
        fmt(c2),
        fmt(c3),
        fmt(c4),
        fmt(report.b0),
        fmt(report.bz),
        format!("{:?}", report.classification),
        fmt(threshold),
    ]);
    Ok(CommandOutput::new(
        json!({
            "coefficients": {"c0": c0, "c1": c1, "c2": c2, "c3": c3, "c4": c4},
            "confounder": u,
            "report": serde_json::to_value(report).expect("serializable"),
            "signed_threshold_c4": threshold,
            "verdict": format!("{:?}", report.classification),
        }),
        vec![table],
    ))
}

// ── diagnose ─────────────────────────────────────────────────────────────

#[derive(Args)]
pub struct DiagnoseArgs {
    /// CSV dataset (header row, plain decimal values).
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub x: String,
    #[arg(long)]
    pub y: String,
    /// Declared instrument column.
    #[arg(long)]
    pub z: String,
    /// Extra conditioning columns, comma-separated.
    #[arg(long)]
    pub condition: Option<String>,
    /// Verdict threshold in bootstrap standard errors.
    #[arg(long, default_value_t = 4.0)]
    pub k: f64,
    /// Bootstrap resamples.
    #[arg(long, default_value_t = 1000)]
    pub resamples: usize,
    /// Also screen these candidate covariates, comma-separated.
    #[arg(long)]
    pub screen: Option<String>,
}

pub fn diagnose(args: &DiagnoseArgs, seed: u64) -> Result<CommandOutput, CliError> {
    let data = Dataset::load_csv(&args.data)
        .map_err(|e| CliError::Data(format!("{}: {e}", args.data.display())))?;
    let extra = args
        .condition
        .as_deref()
        .map(comma_names)
        .unwrap_or_default();
    let extra_refs: Vec<&str> = extra.iter().map(|s| s.as_str()).collect();
    let config = SensitivityConfig::default()
        .with_k(args.k)
        .with_resamples(args.resamples)
        .with_seed(seed);

    let verdict = iv_sensitivity_test(&data, &args.x, &args.y, &args.z, &extra_refs, &config)?;

    let mut tables = vec![];
    let mut table = Table::new(
        "instrument sensitivity",
        &[
            "slope_without_iv",
            "slope_with_iv",
            "delta",
            "delta_se",
            "k",
            "verdict",
        ],
    );
    table.push(vec![
        fmt(verdict.slope_without_iv),
        fmt(verdict.slope_with_iv),
        fmt(verdict.delta),
        fmt(verdict.delta_se),
        fmt(args.k),
        format!("{:?}", verdict.verdict),
    ]);
    tables.push(table);

    let mut caveats = Table::new("caveats", &["caveat"]);
    for c in &verdict.caveats {
        caveats.push(vec![c.clone()]);
    }
    tables.push(caveats);

    let mut json = serde_json::to_value(&verdict).expect("serializable");
    if let Some(names) = &args.screen {
        let candidates = comma_names(names);
        let refs: Vec<&str> = candidates.iter().map(|s| s.as_str()).collect();
        let advice = covariate_screen(&data, &args.x, &args.y, &refs, &config)?;
        let mut screen = Table::new(
            "covariate screen",
            &[
                "covariate",
                "treatment_assoc",
                "outcome_assoc",
                "treatment_t",
                "outcome_t",
                "advice",
            ],
        );
        for a in &advice {
            screen.push(vec![
                a.covariate.clone(),
                fmt(a.treatment_association),
                fmt(a.outcome_association),
                fmt(a.treatment_t),
                fmt(a.outcome_t),
                format!("{:?}", a.advice),
            ]);
        }
        tables.push(screen);
        json = json!({
            "sensitivity": json,
            "screen": serde_json::to_value(&advice).expect("serializable"),
        });
    }

    Ok(CommandOutput::new(json, tables))
}

// ── reproduce ────────────────────────────────────────────────────────────

#[derive(Args)]
pub struct ReproduceArgs {
    /// Base sample size per run (the nonlinear grid uses 4x this).
    #[arg(long, default_value_t = 1_000_000)]
    pub n: usize,
}

pub fn reproduce(args: &ReproduceArgs, seed: u64) -> Result<CommandOutput, CliError> {
    let n = args.n.max(10_000);
    let tables = vec![
        amplification_table(n, seed)?,
        reducer_table(n, seed)?,
        nonlinear_table(4 * n, seed)?,
        selection_table(n, seed)?,
        invariance_table(n, seed)?,
    ];
    let json = json!({
        "seed": seed,
        "n": n,
        "tables": tables
            .iter()
            .map(|t| {
                json!({
                    "title": t.title,
                    "columns": t.columns,
                    "rows": t.rows,
                })
            })
            .collect::<Vec<_>>(),
    });
    Ok(CommandOutput::new(json, tables))
}

/// Amplification factor across instrument strengths.
fn amplification_table(n: usize, seed: u64) -> Result<Table, CliError> {
    let (c0, c1, c2) = (0.3, 0.5, 0.4);
    let mut table = Table::new(
        "amplification vs c3",
        &[
            "c3",
            "amplification",
            "b0_analytic",
            "bz_analytic",
            "b0_mc",
            "b0_se",
            "bz_mc",
            "bz_se",
            "pass",
        ],
    );
    for (i, &c3) in [0.0, 0.3, 0.6, 0.8].iter().enumerate() {
        let report = analytic::linear_bias_pair(c0, c1, c2, c3)?;
        let model = catalog::iv_model(c0, c1, c2, c3)?;
        let cfg = SimConfig::new(n, seed.wrapping_add(i as u64)).with_replications(3);
        let exp = bias_experiment(&model, "X", "Y", &[vec![], vec!["Z".into()]], None, &cfg)?;
        let b0_mc = exp.arms[0].empirical - report.a1;
        let bz_mc = exp.arms[1].empirical - report.a1;
        let pass = exp.arms.iter().all(|a| a.pass);
        table.push(vec![
            fmt(c3),
            fmt(ensure_finite(report.amplification, "amplification")?),
            fmt(report.b0),
            fmt(report.bz),
            fmt(b0_mc),
            fmt(exp.arms[0].std_error),
            fmt(bz_mc),
            fmt(exp.arms[1].std_error),
            fmt_bool(pass),
        ]);
    }
    Ok(table)
}

/// Classification flip across the direct-effect sweep.
fn reducer_table(n: usize, seed: u64) -> Result<Table, CliError> {
    let (c0, c1, c2, c3) = (0.3, 0.5, 0.4, 0.6);
    let threshold = analytic::reducer_threshold(c1, c2, c3)?;
    let mut table = Table::new(
        "reducer threshold sweep over c4",
        &[
            "c4",
            "b0_analytic",
            "bz_analytic",
            "classification",
            "b0_mc",
            "b0_se",
            "pass",
        ],
    );
    for (i, &c4) in [0.0, 0.05, 0.1, 0.15, 0.1875, 0.25, 0.3, 0.35]
        .iter()
        .enumerate()
    {
        let report = analytic::imperfect_instrument_report(c0, c1, c2, c3, c4)?;
        let model = catalog::imperfect_iv_model(c0, c1, c2, c3, c4)?;
        let cfg = SimConfig::new(n, seed.wrapping_add(100 + i as u64));
        let d = sample_linear(&model, &cfg, 0)?;
        let crude = ols(&d, "Y", &["X"])?;
        let b0_mc = crude.coefficient("X")? - c0;
        let se = crude.standard_error("X")?;
        let pass = (b0_mc - report.b0).abs() <= (4.0 * se).max(0.02);
        table.push(vec![
            fmt(c4),
            fmt(report.b0),
            fmt(report.bz),
            format!("{:?}", report.classification),
            fmt(b0_mc),
            fmt(se),
            fmt_bool(pass),
        ]);
    }
    debug_assert!((threshold - 0.1875).abs() < 1e-12);
    Ok(table)
}

/// Nonlinear bias pair over an (x, z) grid for the reciprocal loading.
fn nonlinear_table(n: usize, seed: u64) -> Result<Table, CliError> {
    let model = NonlinearOutcomeModel::new(
        0.6,
        0.5,
        FunctionSpec::identity(),
        FunctionSpec::Reciprocal(1.0),
        0.1,
    )?;
    let cfg = SimConfig::new(n, seed.wrapping_add(200));
    let data = sample_nonlinear(&model, &cfg, 0)?;
    let mut table = Table::new(
        "nonlinear bias grid (reciprocal loading)",
        &[
            "x",
            "z",
            "b0_analytic",
            "bz_analytic",
            "b0_mc",
            "b0_se",
            "bz_mc",
            "bz_se",
            "pass",
        ],
    );
    let spacing = 0.15;
    let width = 0.1;
    for &x in &[0.9, 1.1, 1.3] {
        let fp = model.f().eval_derivative(x).map_err(CliError::from)?;
        let marginal = binned_slope(
            &data,
            "X",
            "Y",
            x,
            spacing,
            width,
            BinFilter {
                z_band: None,
                min_abs_x: 0.5,
            },
        )?;
        for &z in &[0.0, 0.5, 1.0] {
            let report = analytic::nonlinear_bias_pair(&model, x, z)?;
            let conditional = binned_slope(
                &data,
                "X",
                "Y",
                x,
                spacing,
                width,
                BinFilter {
                    z_band: Some(("Z", z, 0.1)),
                    min_abs_x: 0.5,
                },
            )?;
            let b0_mc = marginal.estimate - fp;
            let bz_mc = conditional.estimate - fp;
            let pass = (b0_mc - report.b0).abs() <= (4.0 * marginal.std_error).max(0.03)
                && (bz_mc - report.bz).abs() <= (4.0 * conditional.std_error).max(0.03);
            table.push(vec![
                fmt(x),
                fmt(z),
                fmt(report.b0),
                fmt(report.bz),
                fmt(b0_mc),
                fmt(marginal.std_error),
                fmt(bz_mc),
                fmt(conditional.std_error),
                fmt_bool(pass),
            ]);
        }
    }
    Ok(table)
}

/// Selection-bias surface over (beta1, beta2).
fn selection_table(n: usize, seed: u64) -> Result<Table, CliError> {
    let c0 = 0.5;
    let grid = [-0.4, -0.2, 0.0, 0.2, 0.4];
    let mut table = Table::new(
        "selection bias surface",
        &[
            "beta1",
            "beta2",
            "b0_analytic",
            "oracle_gap",
            "b0_mc",
            "b0_se",
            "pass",
        ],
    );
    let mut run = 0u64;
    for &b1 in &grid {
        for &b2 in &grid {
            let formula = analytic::selection_bias(c0, b1, b2)?;
            let model = catalog::selection_model(c0, b1, b2)?;
            let oracle = model.partial_regression_slope("Y", "X", &["S"])? - c0;
            let gap = (oracle - formula).abs();

            let cfg = SimConfig::new(n, seed.wrapping_add(300 + run));
            run += 1;
            let d = sample_linear(&model, &cfg, 0)?;
            let sel = select_band(&d, "S", 0.0, 0.05)?;
            let fit = ols(&sel, "Y", &["X"])?;
            let b0_mc = fit.coefficient("X")? - c0;
            let se = fit.standard_error("X")?;
            let pass = gap < 1e-10 && (b0_mc - formula).abs() <= (4.0 * se).max(0.02);
            table.push(vec![
                fmt(b1),
                fmt(b2),
                fmt(formula),
                format!("{gap:.2e}"),
                fmt(b0_mc),
                fmt(se),
                fmt_bool(pass),
            ]);
        }
    }
    Ok(table)
}

/// Instrument invariance on band-selected selection-model data.
fn invariance_table(n: usize, seed: u64) -> Result<Table, CliError> {
    let model = catalog::selection_model_with_iv(0.5, 0.3, 0.4, 0.6)?;
    let mut table = Table::new(
        "instrument invariance under selection",
        &[
            "run",
            "slope_without_iv",
            "slope_with_iv",
            "delta",
            "delta_se",
            "pass",
        ],
    );
    for run in 0..3u64 {
        let cfg = SimConfig::new(n, seed.wrapping_add(400 + run));
        let d = sample_linear(&model, &cfg, 0)?;
        let sel = select_band(&d, "S", 0.0, 0.05)?;
        let verdict = iv_sensitivity_test(
            &sel,
            "X",
            "Y",
            "Z",
            &[],
            &SensitivityConfig::default()
                .with_resamples(500)
                .with_seed(seed.wrapping_add(run)),
        )?;
        let pass = verdict.delta.abs() <= 4.0 * verdict.delta_se;
        table.push(vec![
            run.to_string(),
            fmt(verdict.slope_without_iv),
            fmt(verdict.slope_with_iv),
            fmt(verdict.delta),
            fmt(verdict.delta_se),
            fmt_bool(pass),
        ]);
    }
    Ok(table)
}
