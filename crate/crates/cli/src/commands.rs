use clap::ValueEnum;
use relbelief::bias::{design_scan, simulate_bias, write_design_csv, BiasReport, BiasSpec};
use relbelief::checks::{check_prior as run_conflict_checks, ConflictReport, Verdict};
use relbelief::elicitation::{
    elicit_location, elicit_variance, variance_residuals, ElicitationSpec, Hyperparameters,
    VarianceElicitation,
};
use relbelief::relative_belief::{
    analyze as run_analysis, density_curve, interval_hypothesis_rb, Classification,
    ClassificationThresholds, DeltaGrid, DifferenceLaws, IntervalHypothesis, LawMode, RbAnalysis,
};
use relbelief::trial_data::{
    check_model as run_model_check, residual_qq_series, sufficient_stats, ModelCheck, QqSeries,
    SufficientStats,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::output::{csv_bytes, emit, json_bytes, read_data, read_prior, SCHEMA_VERSION};
use crate::{
    AnalyzeArgs, BiasArgs, CheckModelArgs, CheckPriorArgs, DesignArgs, DesignCommon, ElicitArgs,
    FailOn, Format, OutputArgs,
};

const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Residual SW p-value below which `--fail-on model-misfit` trips.
const MODEL_MISFIT_LEVEL: f64 = 0.05;
/// Tail probability left outside the default density curve range.
const CURVE_TAIL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElicitReport {
    pub schema_version: u32,
    pub version: String,
    #[serde(flatten)]
    pub hyperparameters: Hyperparameters,
    pub spec: ElicitationSpec,
    /// Relative errors of the two gamma quantile conditions at the solution.
    pub residual_upper: f64,
    pub residual_lower: f64,
    pub solver: VarianceElicitation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelCheckReport {
    pub schema_version: u32,
    pub version: String,
    pub stats: SufficientStats,
    pub model_check: ModelCheck,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConflictOutput {
    pub schema_version: u32,
    pub version: String,
    #[serde(flatten)]
    pub report: ConflictReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasOutput {
    pub schema_version: u32,
    pub version: String,
    pub prior: Hyperparameters,
    pub designs: Vec<BiasReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub schema_version: u32,
    pub version: String,
    pub seed: u64,
    pub reps: usize,
    pub mode: LawMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    #[serde(flatten)]
    pub provenance: Provenance,
    pub prior: Hyperparameters,
    pub stats: SufficientStats,
    pub delta: f64,
    pub gamma: f64,
    pub model_check: ModelCheck,
    pub conflict: ConflictReport,
    pub analysis: RbAnalysis,
    pub noninferiority: Option<IntervalHypothesis>,
    pub bias: Option<BiasReport>,
    /// `--fail-on` conditions that held.
    pub gates_failed: Vec<String>,
}

fn format_or(out: &OutputArgs, default: Format) -> Format {
    out.format.unwrap_or(default)
}

pub fn elicit(a: &ElicitArgs) -> CliResult<()> {
    let spec =
        ElicitationSpec::new(a.m1, a.m2, a.s1_sq, a.s2_sq).with_virtual_certainty(a.gamma_vc);
    let (mu0, tau0_sq) = elicit_location(&spec)?;
    let solver = elicit_variance(&spec)?;
    let hyperparameters = Hyperparameters::new(mu0, tau0_sq, solver.alpha0, solver.beta0)?;
    let (residual_upper, residual_lower) = variance_residuals(&spec, solver.alpha0, solver.beta0)?;
    let report = ElicitReport {
        schema_version: SCHEMA_VERSION,
        version: VERSION.into(),
        hyperparameters,
        spec,
        residual_upper,
        residual_lower,
        solver,
    };
    eprintln!("elicitation residuals: upper {residual_upper:e}, lower {residual_lower:e}");
    let bytes = match format_or(&a.out, Format::Json) {
        Format::Json => json_bytes(&report)?,
        Format::Csv => {
            let h = &report.hyperparameters;
            csv_bytes(
                &[
                    "mu0",
                    "tau0_sq",
                    "alpha0",
                    "beta0",
                    "residual_upper",
                    "residual_lower",
                ],
                [[
                    h.mu0,
                    h.tau0_sq,
                    h.alpha0,
                    h.beta0,
                    residual_upper,
                    residual_lower,
                ]
                .iter()
                .map(f64::to_string)
                .collect()],
            )?
        }
    };
    emit(a.out.output.as_ref(), &bytes)
}

fn qq_csv(series: &[QqSeries], all: bool) -> CliResult<Vec<u8>> {
    let rows = series
        .iter()
        .filter(|s| all || s.label == "pooled_residuals")
        .flat_map(|s| {
            s.points.iter().map(move |p| {
                vec![
                    s.label.clone(),
                    p.theoretical_quantile.to_string(),
                    p.order_statistic.to_string(),
                ]
            })
        });
    csv_bytes(&["series", "theoretical_quantile", "order_statistic"], rows)
}

pub fn check_model(a: &CheckModelArgs) -> CliResult<()> {
    let data = read_data(&a.data)?;
    let series = residual_qq_series(&data)?;
    let report = ModelCheckReport {
        schema_version: SCHEMA_VERSION,
        version: VERSION.into(),
        stats: sufficient_stats(&data)?,
        model_check: run_model_check(&data)?,
    };
    if let Some(path) = &a.qq_output {
        emit(Some(path), &qq_csv(&series, a.qq_all_series)?)?;
    }
    let bytes = match format_or(&a.out, Format::Json) {
        Format::Json => json_bytes(&report)?,
        Format::Csv => qq_csv(&series, a.qq_all_series)?,
    };
    emit(a.out.output.as_ref(), &bytes)
}

fn opt_to_string(p: Option<f64>) -> String {
    p.map(|v| v.to_string()).unwrap_or_default()
}

pub fn check_prior(a: &CheckPriorArgs) -> CliResult<()> {
    let stats = sufficient_stats(&read_data(&a.data)?)?;
    let hyper = read_prior(&a.prior)?;
    let report = run_conflict_checks(&hyper, &stats, a.sim.reps, a.threshold, a.sim.seed)?;
    let bytes = match format_or(&a.out, Format::Json) {
        Format::Json => json_bytes(&ConflictOutput {
            schema_version: SCHEMA_VERSION,
            version: VERSION.into(),
            report,
        })?,
        Format::Csv => csv_bytes(
            &[
                "p_variance",
                "p_means",
                "threshold",
                "verdict",
                "reps",
                "seed",
            ],
            [vec![
                report.p_variance.value().to_string(),
                opt_to_string(report.p_means.map(|p| p.value())),
                report.threshold.to_string(),
                serde_json::to_value(report.verdict)?
                    .as_str()
                    .unwrap_or_default()
                    .to_string(),
                report.reps.to_string(),
                report.seed.to_string(),
            ]],
        )?,
    };
    emit(a.out.output.as_ref(), &bytes)
}

fn base_spec(c: &DesignCommon, hyper: Hyperparameters, n_e: usize, n_r: usize) -> BiasSpec {
    BiasSpec {
        alternative_bin: c.alternative_bin,
        reps: c.sim.reps,
        mode: c.mode,
        ..BiasSpec::new(hyper, n_e, n_r, c.delta, c.sim.seed)
    }
}

fn emit_bias(
    c: &DesignCommon,
    hyper: Hyperparameters,
    designs: Vec<BiasReport>,
    default: Format,
) -> CliResult<()> {
    let bytes = match format_or(&c.out, default) {
        Format::Json => json_bytes(&BiasOutput {
            schema_version: SCHEMA_VERSION,
            version: VERSION.into(),
            prior: hyper,
            designs,
        })?,
        Format::Csv => {
            let mut buf = Vec::new();
            write_design_csv(&designs, &mut buf)?;
            buf
        }
    };
    emit(c.out.output.as_ref(), &bytes)
}

pub fn bias(a: &BiasArgs) -> CliResult<()> {
    let hyper = read_prior(&a.common.prior)?;
    let report = simulate_bias(&base_spec(&a.common, hyper, a.n_e, a.n_r))?;
    emit_bias(&a.common, hyper, vec![report], Format::Json)
}

/// Parses `n` (balanced) or `nExnR`.
pub fn parse_size(s: &str) -> CliResult<(usize, usize)> {
    let bad = || {
        CliError::Usage(format!(
            "invalid sample size `{s}`, expected `n` or `nExnR`"
        ))
    };
    let s = s.trim();
    match s.split_once(['x', 'X']) {
        Some((e, r)) => Ok((
            e.trim().parse().map_err(|_| bad())?,
            r.trim().parse().map_err(|_| bad())?,
        )),
        None => {
            let n = s.parse().map_err(|_| bad())?;
            Ok((n, n))
        }
    }
}

pub fn design(a: &DesignArgs) -> CliResult<()> {
    let sizes = a
        .sizes
        .iter()
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_size(s))
        .collect::<CliResult<Vec<_>>>()?;
    if sizes.is_empty() {
        return Err(CliError::Usage(
            "--sizes needs at least one sample size".into(),
        ));
    }
    let hyper = read_prior(&a.common.prior)?;
    let (n_e, n_r) = sizes[0];
    let reports = design_scan(&base_spec(&a.common, hyper, n_e, n_r), &sizes)?;
    emit_bias(&a.common, hyper, reports, Format::Csv)
}

fn gate_name(gate: FailOn) -> String {
    gate.to_possible_value()
        .map(|v| v.get_name().to_string())
        .unwrap_or_default()
}

fn gates(
    a: &AnalyzeArgs,
    model: &ModelCheck,
    conflict: &ConflictReport,
    class: Classification,
) -> Vec<String> {
    let mut failed = Vec::new();
    for gate in &a.fail_on {
        let hit = match gate {
            FailOn::ModelMisfit => model.residuals.p_value < MODEL_MISFIT_LEVEL,
            FailOn::Conflict => conflict.verdict != Verdict::NoConflict,
            FailOn::EvidenceAgainst => matches!(
                class,
                Classification::EvidenceAgainstWeak | Classification::EvidenceAgainstStrong
            ),
            FailOn::Inconclusive => class == Classification::Inconclusive,
        };
        if hit {
            failed.push(gate_name(*gate));
        }
    }
    failed.sort();
    failed.dedup();
    failed
}

fn curve_csv(laws: &DifferenceLaws, points: usize) -> CliResult<Vec<u8>> {
    let lo = laws
        .prior
        .quantile(CURVE_TAIL)?
        .min(laws.posterior.quantile(CURVE_TAIL)?);
    let hi = laws
        .prior
        .quantile(1.0 - CURVE_TAIL)?
        .max(laws.posterior.quantile(1.0 - CURVE_TAIL)?);
    let curve = density_curve(laws, lo, hi, points)?;
    csv_bytes(
        &["x", "prior_density", "posterior_density", "rb"],
        curve.iter().map(|p| {
            [p.x, p.prior_density, p.posterior_density, p.rb]
                .iter()
                .map(f64::to_string)
                .collect()
        }),
    )
}

pub fn build_analysis(a: &AnalyzeArgs) -> CliResult<AnalysisReport> {
    let data = read_data(&a.data)?;
    let hyper = read_prior(&a.prior)?;
    let stats = sufficient_stats(&data)?;
    let model_check = run_model_check(&data)?;
    let conflict =
        run_conflict_checks(&hyper, &stats, a.sim.reps, a.conflict_threshold, a.sim.seed)?;
    let laws = DifferenceLaws::new(&hyper, &stats, a.mode)?;
    let grid = DeltaGrid::for_laws(a.delta, &laws)?;
    let thresholds = ClassificationThresholds {
        small: a.small,
        large: a.large,
    };
    let analysis = run_analysis(&laws, &grid, a.gamma, thresholds)?;
    let noninferiority = a
        .noninferiority
        .map(|m| interval_hypothesis_rb(&laws, -m, f64::INFINITY))
        .transpose()?;
    let bias = if a.skip_bias {
        None
    } else {
        let spec = BiasSpec {
            alternative_bin: a.alternative_bin,
            reps: a.sim.reps,
            mode: a.mode,
            ..BiasSpec::new(hyper, stats.n_e, stats.n_r, a.delta, a.sim.seed)
        };
        Some(simulate_bias(&spec)?)
    };
    let gates_failed = gates(a, &model_check, &conflict, analysis.classification);
    Ok(AnalysisReport {
        provenance: Provenance {
            schema_version: SCHEMA_VERSION,
            version: VERSION.into(),
            seed: a.sim.seed,
            reps: a.sim.reps,
            mode: a.mode,
        },
        prior: hyper,
        stats,
        delta: a.delta,
        gamma: a.gamma,
        model_check,
        conflict,
        analysis,
        noninferiority,
        bias,
        gates_failed,
    })
}

pub fn analyze(a: &AnalyzeArgs) -> CliResult<()> {
    let report = build_analysis(a)?;
    let mut table = Vec::new();
    report.analysis.table.write_csv(&mut table)?;
    if let Some(path) = &a.table_csv {
        emit(Some(path), &table)?;
    }
    if let Some(path) = &a.curve_csv {
        emit(
            Some(path),
            &curve_csv(&report.analysis.laws, a.curve_points)?,
        )?;
    }
    let bytes = match format_or(&a.out, Format::Json) {
        Format::Json => json_bytes(&report)?,
        Format::Csv => table,
    };
    emit(a.out.output.as_ref(), &bytes)?;
    if report.gates_failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Gate(report.gates_failed.join(", ")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    fn example(name: &str) -> PathBuf {
        PathBuf::from(env!("CARGO_MANIFEST_DIR"))
            .join("../../example")
            .join(name)
    }

    fn args() -> AnalyzeArgs {
        AnalyzeArgs {
            data: example("trial.csv"),
            prior: example("prior_elicited.json"),
            delta: 0.5,
            gamma: 0.95,
            mode: LawMode::PaperLiteral,
            noninferiority: Some(0.5),
            small: 0.05,
            large: 0.95,
            conflict_threshold: 0.05,
            alternative_bin: 1,
            skip_bias: false,
            table_csv: None,
            curve_csv: None,
            curve_points: 11,
            fail_on: vec![FailOn::EvidenceAgainst, FailOn::Conflict],
            sim: crate::SimArgs {
                seed: 7,
                reps: 2000,
            },
            out: OutputArgs {
                format: None,
                output: None,
            },
        }
    }

    #[test]
    fn report_round_trips_through_json() {
        let report = build_analysis(&args()).unwrap();
        let text = serde_json::to_string(&report).unwrap();
        let back: AnalysisReport = serde_json::from_str(&text).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), text);
        assert_eq!(
            back.analysis.table.rows.len(),
            report.analysis.table.rows.len()
        );
        assert_eq!(back.provenance, report.provenance);
        assert_eq!(back.bias, report.bias);
        assert_eq!(back.conflict, report.conflict);
    }

    #[test]
    fn infinite_bounds_survive_json() {
        let report = build_analysis(&args()).unwrap();
        let text = serde_json::to_string(&report).unwrap();
        assert!(text.contains("\"-inf\""));
        let back: AnalysisReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back.analysis.table.rows[0].lower, f64::NEG_INFINITY);
        assert_eq!(back.noninferiority.unwrap().upper, f64::INFINITY);
    }

    #[test]
    fn gates_follow_the_classification() {
        let report = build_analysis(&args()).unwrap();
        assert_eq!(
            report.analysis.classification,
            Classification::EvidenceAgainstWeak
        );
        assert_eq!(report.gates_failed, vec!["evidence-against".to_string()]);
    }

    #[test]
    fn sizes_parse() {
        assert_eq!(parse_size("12").unwrap(), (12, 12));
        assert_eq!(parse_size("10x20").unwrap(), (10, 20));
        assert!(parse_size("ten").is_err());
        assert!(parse_size("3x").is_err());
    }

    #[test]
    fn elicited_output_is_a_valid_prior() {
        let spec = ElicitationSpec::new(-20.0, 20.0, 10.0, 600.0);
        let v = elicit_variance(&spec).unwrap();
        let report = ElicitReport {
            schema_version: SCHEMA_VERSION,
            version: VERSION.into(),
            hyperparameters: Hyperparameters::new(0.0, 0.667, v.alpha0, v.beta0).unwrap(),
            spec,
            residual_upper: 0.0,
            residual_lower: 0.0,
            solver: v,
        };
        let text = serde_json::to_string(&report).unwrap();
        let h: Hyperparameters = serde_json::from_str(&text).unwrap();
        assert_eq!(h, report.hyperparameters);
    }
}
