//! End-to-end orchestration behind the command-line subcommands.
//!
//! Every run loads the inputs named by the configuration, executes one
//! stage of the pipeline, writes its artifacts into the output directory
//! and records a manifest of input digests so identical inputs provably
//! produce identical outputs. Failures name their stage, and artifacts of a
//! failed run are removed rather than left half-written.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::ahp::{self, PairwiseMatrix};
use crate::case::{self, NetworkCase, TowerLineUnit};
use crate::config::{DatasetSection, Mode, RunConfig};
use crate::failure::{self, CorrectionModel, FailureProfile};
use crate::features::{FeatureRanges, WeightVector, FEATURES};
use crate::geo::GeoPoint;
use crate::importance::{self, Dataset, ForestConfig, SchemeKind, WeightScheme};
use crate::resilience::{self, ResilienceReport, ScenarioProbabilities, StateSpace};
use crate::scenario::{self, ScenarioSet};
use crate::strategy::{self, StrategyResult};
use crate::terrain::{CellAttributes, TerrainGrid};
use crate::typhoon::TyphoonParameters;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("[{stage}] {message}")]
    Validation {
        stage: &'static str,
        message: String,
    },
    #[error("[{stage}] {message}")]
    Numeric {
        stage: &'static str,
        message: String,
    },
    #[error("[report] {0}")]
    Io(#[from] std::io::Error),
}

impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Validation { .. } => 2,
            PipelineError::Numeric { .. } => 3,
            PipelineError::Io(_) => 3,
        }
    }
}

fn invalid<E: std::fmt::Display>(stage: &'static str) -> impl FnOnce(E) -> PipelineError {
    move |e| PipelineError::Validation {
        stage,
        message: e.to_string(),
    }
}

fn numeric<E: std::fmt::Display>(stage: &'static str) -> impl FnOnce(E) -> PipelineError {
    move |e| PipelineError::Numeric {
        stage,
        message: e.to_string(),
    }
}

/// Deterministic scientific formatting used by every report.
fn sci(x: f64) -> String {
    format!("{x:.6e}")
}

fn configure_threads(threads: Option<usize>) {
    static POOL: OnceLock<()> = OnceLock::new();
    if let Some(n) = threads {
        POOL.get_or_init(|| {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        });
    }
}

/// Inputs shared by every subcommand.
pub struct LoadedInputs {
    pub case: NetworkCase,
    pub units: Vec<Vec<TowerLineUnit>>,
    pub terrain: TerrainGrid,
    pub reference_storm: TyphoonParameters,
    pub scenarios: ScenarioSet,
}

pub fn load_inputs(config: &RunConfig) -> Result<LoadedInputs, PipelineError> {
    configure_threads(config.threads);
    let case = case::load_case(&config.buses, &config.generators, &config.corridors)
        .map_err(invalid("load-case"))?;
    let units = case
        .corridors
        .iter()
        .map(|c| case::discretize_corridor(c, config.spacing_m))
        .collect::<Result<Vec<_>, _>>()
        .map_err(invalid("discretize"))?;

    let terrain = match (&config.terrain, &config.terrain_grid) {
        (Some(path), Some(grid)) => TerrainGrid::load(
            path,
            GeoPoint::new(grid.origin_lat, grid.origin_lon),
            grid.cell_km,
            CellAttributes {
                altitude_m: grid.default_altitude_m,
                slope_deg: grid.default_slope_deg,
                rain24h_mm: grid.default_rain24h_mm,
            },
        )
        .map_err(invalid("load-terrain"))?,
        _ => TerrainGrid::uniform(
            GeoPoint::new(0.0, 0.0),
            1.0,
            CellAttributes {
                altitude_m: 0.0,
                slope_deg: 0.0,
                rain24h_mm: 0.0,
            },
        ),
    };

    let typhoon_text = std::fs::read_to_string(&config.typhoon).map_err(invalid("load-typhoon"))?;
    let mut reference_storm =
        TyphoonParameters::from_toml_str(&typhoon_text).map_err(invalid("load-typhoon"))?;
    if let Some(dt) = config.dt_min_override {
        reference_storm.dt_min = dt;
    }

    let marginals_text =
        std::fs::read_to_string(&config.marginals).map_err(invalid("load-marginals"))?;
    let marginals = scenario::MarginalsConfig::from_toml_str(&marginals_text)
        .map_err(invalid("load-marginals"))?;
    let scenarios = scenario::enumerate_scenarios(&reference_storm, &marginals)
        .map_err(invalid("scenarios"))?;

    Ok(LoadedInputs {
        case,
        units,
        terrain,
        reference_storm,
        scenarios,
    })
}

/// Outcome of the weight-scheme stage in hybrid mode.
pub struct WeightSelection {
    pub schemes: Vec<WeightScheme>,
    pub scores: Vec<f64>,
    pub selected: usize,
    pub tied: bool,
    pub consistency_ratio: f64,
    pub priority: WeightVector,
    pub dataset_note: String,
}

pub fn select_weights(config: &RunConfig) -> Result<WeightSelection, PipelineError> {
    let ranges = FeatureRanges::standard(config.op_time_positive);
    let schemes: Vec<WeightScheme>;
    let mut dataset_note;
    if let Some(path) = &config.weights {
        schemes = load_weight_schemes(path)?;
        dataset_note = format!("weights from file {}", path.display());
    } else {
        let dataset = match config.dataset.as_ref().expect("validated") {
            DatasetSection::Synthetic { size } => {
                dataset_note = format!("synthetic dataset (seed {}, {} rows)", config.seed, size);
                importance::synthesize_dataset(
                    config.seed,
                    *size,
                    &WeightVector::uniform(),
                    &ranges,
                )
                .map_err(numeric("dataset"))?
            }
            DatasetSection::File { path } => {
                dataset_note = format!("dataset from file {}", path.display());
                Dataset::from_csv(path).map_err(invalid("dataset"))?
            }
        };
        let forest_config = ForestConfig {
            trees: config.trees,
            max_depth: config.max_depth,
            min_leaf: config.min_leaf,
            seed: config.seed,
            oob_mode: config.oob_mode,
        };
        schemes = importance::all_schemes(&dataset, &forest_config, &ranges)
            .map_err(numeric("importance"))?;
        let _ = write!(dataset_note, ", {} trees", config.trees);
    }

    let pairwise = PairwiseMatrix::from_csv(config.pairwise.as_ref().expect("validated"))
        .map_err(invalid("pairwise"))?;
    let priority = ahp::ahp_priority(&pairwise, config.ahp_variant);
    let scores = ahp::waa_scores(&schemes, &priority.weights).map_err(invalid("ahp"))?;
    let selection = ahp::select_scheme(&scores);
    Ok(WeightSelection {
        schemes,
        scores,
        selected: selection.index,
        tied: selection.tied,
        consistency_ratio: priority.consistency_ratio,
        priority: priority.weights,
        dataset_note,
    })
}

fn load_weight_schemes(path: &Path) -> Result<Vec<WeightScheme>, PipelineError> {
    let stage = "weights-file";
    let text = std::fs::read_to_string(path).map_err(invalid(stage))?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers().map_err(invalid(stage))?.clone();
    let names: Vec<&str> = headers.iter().skip(1).collect();
    let perm = ahp::feature_permutation(&names)
        .map_err(|m| PipelineError::Validation { stage, message: m })?;
    let mut schemes = Vec::new();
    for record in reader.records() {
        let record = record.map_err(invalid(stage))?;
        let kind = match record.get(0).unwrap_or_default() {
            "gini" => SchemeKind::Gini,
            "oob" => SchemeKind::Oob,
            "entropy" => SchemeKind::Entropy,
            other => {
                return Err(PipelineError::Validation {
                    stage,
                    message: format!("unknown scheme {other:?}"),
                })
            }
        };
        let mut raw = [0.0; crate::features::FEATURE_COUNT];
        for (k, field) in record.iter().skip(1).enumerate() {
            raw[perm[k]] = field.parse().map_err(|_| PipelineError::Validation {
                stage,
                message: format!("bad weight {field:?}"),
            })?;
        }
        schemes.push(WeightScheme {
            kind,
            weights: WeightVector::new(&raw).map_err(|e| PipelineError::Validation {
                stage,
                message: e.to_string(),
            })?,
        });
    }
    if schemes.is_empty() {
        return Err(PipelineError::Validation {
            stage,
            message: "no scheme rows".into(),
        });
    }
    Ok(schemes)
}

/// Correction model for the configured mode, plus the weight-selection
/// report when one was computed.
pub fn correction_model(
    config: &RunConfig,
) -> Result<(CorrectionModel, Option<WeightSelection>), PipelineError> {
    match config.mode {
        Mode::ModelDriven => Ok((CorrectionModel::Unit, None)),
        Mode::Hybrid => {
            let selection = select_weights(config)?;
            let model = if config.force_unit_corrections {
                CorrectionModel::Unit
            } else {
                CorrectionModel::Weighted {
                    weights: selection.schemes[selection.selected].weights.clone(),
                    ranges: FeatureRanges::standard(config.op_time_positive),
                }
            };
            Ok((model, Some(selection)))
        }
    }
}

/// Per-scenario failure profiles, evaluated in parallel, merged in
/// scenario order.
pub fn scenario_profiles(
    inputs: &LoadedInputs,
    correction: &CorrectionModel,
) -> Vec<FailureProfile> {
    inputs
        .scenarios
        .scenarios
        .par_iter()
        .map(|s| {
            failure::scenario_failure_profile(
                &inputs.case,
                &inputs.units,
                &s.params,
                &inputs.terrain,
                correction,
            )
        })
        .collect()
}

pub fn to_scenario_probabilities(
    scenarios: &ScenarioSet,
    profiles: &[FailureProfile],
) -> Vec<ScenarioProbabilities> {
    scenarios
        .scenarios
        .iter()
        .zip(profiles)
        .map(|(s, p)| ScenarioProbabilities {
            probability: s.probability,
            corridor_p: p.comprehensive(),
        })
        .collect()
}

/// Tracks artifacts so a failed run removes everything it wrote.
pub struct ArtifactWriter {
    out_dir: PathBuf,
    written: Vec<PathBuf>,
}

impl ArtifactWriter {
    pub fn new(out_dir: &Path) -> Result<Self, PipelineError> {
        std::fs::create_dir_all(out_dir)?;
        Ok(Self {
            out_dir: out_dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<PathBuf, PipelineError> {
        let path = self.out_dir.join(name);
        std::fs::write(&path, contents)?;
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn discard_all(&mut self) {
        for path in self.written.drain(..) {
            let _ = std::fs::remove_file(path);
        }
    }

    pub fn paths(&self) -> &[PathBuf] {
        &self.written
    }
}

fn file_digest(path: &Path) -> String {
    match std::fs::read(path) {
        Ok(bytes) => {
            let mut h = Sha256::new();
            h.update(&bytes);
            case::hex_string(&h.finalize())
        }
        Err(_) => "unreadable".to_string(),
    }
}

/// Reproducibility manifest: tool version, seed, knobs and the digest of
/// every input file.
pub fn manifest(config: &RunConfig, case: &NetworkCase) -> String {
    let mut inputs: BTreeMap<String, PathBuf> = BTreeMap::new();
    inputs.insert("config".into(), config.config_path.clone());
    inputs.insert("buses".into(), config.buses.clone());
    inputs.insert("generators".into(), config.generators.clone());
    inputs.insert("corridors".into(), config.corridors.clone());
    inputs.insert("typhoon".into(), config.typhoon.clone());
    inputs.insert("marginals".into(), config.marginals.clone());
    for (name, path) in [
        ("terrain", &config.terrain),
        ("pairwise", &config.pairwise),
        ("strategies", &config.strategies),
        ("weights", &config.weights),
    ] {
        if let Some(p) = path {
            inputs.insert(name.into(), p.clone());
        }
    }
    if let Some(DatasetSection::File { path }) = &config.dataset {
        inputs.insert("dataset".into(), path.clone());
    }

    let mut out = String::new();
    let _ = writeln!(out, "tool stormgrid {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(out, "mode {}", config.mode.name());
    let _ = writeln!(out, "seed {}", config.seed);
    let _ = writeln!(out, "spacing_m {}", config.spacing_m);
    let _ = writeln!(out, "j_max {}", config.j_max);
    let _ = writeln!(out, "r_set_mw {}", sci(config.r_set_mw));
    let _ = writeln!(out, "case_digest {}", case.digest());
    for (name, path) in inputs {
        let _ = writeln!(out, "input {name} sha256:{}", file_digest(&path));
    }
    out
}

/// `simulate-wind`: wind speed series at each corridor midpoint for the
/// reference storm.
pub fn run_simulate_wind(
    config: &RunConfig,
    writer: &mut ArtifactWriter,
) -> Result<String, PipelineError> {
    let inputs = load_inputs(config)?;
    let bbox = failure::network_bbox(&inputs.case);
    let midpoints: Vec<(u32, GeoPoint)> = inputs
        .case
        .corridors
        .iter()
        .map(|c| (c.id, c.polyline.midpoint()))
        .collect();

    let mut table = String::from("time_h,corridor_id,wind_ms\n");
    for state in crate::typhoon::TrackStepper::new(&inputs.reference_storm, bbox) {
        for (id, point) in &midpoints {
            let wind = crate::typhoon::wind_at(&state, *point);
            let _ = writeln!(table, "{:.4},{id},{:.6}", state.t_hours, wind.speed_ms);
        }
    }
    writer.write("wind_series.csv", &table)?;
    writer.write("manifest.txt", &manifest(config, &inputs.case))?;
    Ok(format!(
        "wind series written for {} corridors ({} scenarios enumerated)",
        midpoints.len(),
        inputs.scenarios.scenarios.len()
    ))
}

/// `failure-rates`: cumulative failure-probability curves for the
/// reference storm, model-driven and comprehensive columns side by side.
pub fn run_failure_rates(
    config: &RunConfig,
    writer: &mut ArtifactWriter,
) -> Result<String, PipelineError> {
    let inputs = load_inputs(config)?;
    let (correction, _) = correction_model(config)?;
    let (profile, series) = failure::corridor_failure_series(
        &inputs.case,
        &inputs.units,
        &inputs.reference_storm,
        &inputs.terrain,
        &correction,
    );
    let mut table = String::from("time_h,corridor_id,p_model,p_comprehensive\n");
    for row in &series {
        let _ = writeln!(
            table,
            "{:.4},{},{},{}",
            row.t_hours,
            row.corridor,
            sci(row.p_model),
            sci(row.p_comprehensive)
        );
    }
    writer.write("failure_rates.csv", &table)?;
    writer.write("features_audit.csv", &features_audit(&profile))?;
    writer.write("manifest.txt", &manifest(config, &inputs.case))?;
    let max_p = profile
        .corridors
        .iter()
        .map(|c| c.p_comprehensive)
        .fold(0.0f64, f64::max);
    Ok(format!(
        "failure-rate curves written ({} corridors, peak comprehensive probability {})",
        profile.corridors.len(),
        sci(max_p)
    ))
}

/// Per-unit feature table for audit: corridor, unit, the seven features,
/// composite score terms and the applied correction.
fn features_audit(profile: &FailureProfile) -> String {
    let mut out = String::from("corridor_id,unit_idx");
    for f in FEATURES {
        let _ = write!(out, ",{}", f.name());
    }
    out.push_str(",W,k,p_model,p_corrected\n");
    for corridor in &profile.corridors {
        for unit in &corridor.units {
            let _ = write!(out, "{},{}", corridor.id, unit.index);
            for v in unit.features.values {
                let _ = write!(out, ",{v:.6}");
            }
            let score = unit.score.map(|w| format!("{w:.6}")).unwrap_or_default();
            let _ = writeln!(
                out,
                ",{score},{:.6},{},{}",
                unit.correction,
                sci(unit.p_model),
                sci(unit.p_corrected)
            );
        }
    }
    out
}

fn weights_report(selection: &WeightSelection, config: &RunConfig) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "weight schemes ({})", selection.dataset_note);
    let _ = writeln!(
        out,
        "ahp consistency_ratio {:.6}",
        selection.consistency_ratio
    );
    if selection.consistency_ratio > 0.10 {
        let _ = writeln!(out, "warning: consistency ratio exceeds 0.10");
    }
    let _ = writeln!(out, "ahp variant {:?}", config.ahp_variant);
    for (i, (scheme, score)) in selection.schemes.iter().zip(&selection.scores).enumerate() {
        let marker = if i == selection.selected {
            " selected"
        } else {
            ""
        };
        let _ = writeln!(
            out,
            "scheme {} score {:.6}{}",
            scheme.kind.name(),
            score,
            marker
        );
    }
    if selection.tied {
        let _ = writeln!(out, "note: top score tied; lowest index kept");
    }
    out
}

fn weight_scheme_table(selection: &WeightSelection) -> String {
    let mut out = String::from("scheme,feature,weight\n");
    for scheme in &selection.schemes {
        for (f, w) in FEATURES.iter().zip(&scheme.weights.weights) {
            let _ = writeln!(out, "{},{},{:.6}", scheme.kind.name(), f.name(), w);
        }
    }
    for (f, w) in FEATURES.iter().zip(&selection.priority.weights) {
        let _ = writeln!(out, "ahp_priority,{},{:.6}", f.name(), w);
    }
    out
}

/// `weights`: train/load the three schemes, fuse via AHP-WAA, report the
/// selection.
pub fn run_weights(
    config: &RunConfig,
    writer: &mut ArtifactWriter,
) -> Result<String, PipelineError> {
    if config.mode != Mode::Hybrid {
        return Err(PipelineError::Validation {
            stage: "weights",
            message: "the weights stage needs mode = \"hybrid\" (a dataset and a pairwise matrix)"
                .into(),
        });
    }
    let inputs = load_inputs(config)?;
    let selection = select_weights(config)?;
    writer.write("weights_report.txt", &weights_report(&selection, config))?;
    writer.write("weight_schemes.csv", &weight_scheme_table(&selection))?;
    writer.write("manifest.txt", &manifest(config, &inputs.case))?;
    Ok(format!(
        "selected scheme {} (score {:.4}, CR {:.4})",
        selection.schemes[selection.selected].kind.name(),
        selection.scores[selection.selected],
        selection.consistency_ratio
    ))
}

pub struct AssessOutcome {
    pub report: ResilienceReport,
    pub model_driven: Option<ResilienceReport>,
    pub meets_target: bool,
    pub space: StateSpace,
    pub scenario_probabilities: Vec<ScenarioProbabilities>,
}

/// Core of `assess`: profiles, state space, indices; in hybrid mode the
/// model-driven column is evaluated alongside for the comparison table.
pub fn assess(config: &RunConfig, inputs: &LoadedInputs) -> Result<AssessOutcome, PipelineError> {
    let (correction, _) = correction_model(config)?;
    let profiles = scenario_profiles(inputs, &correction);
    let probabilities = to_scenario_probabilities(&inputs.scenarios, &profiles);

    let space = resilience::build_state_space(&inputs.case, config.j_max)
        .map_err(numeric("state-enumeration"))?;
    let report = resilience::assess(&space, &probabilities);

    let model_driven = if config.mode == Mode::Hybrid {
        let md_profiles = scenario_profiles(inputs, &CorrectionModel::Unit);
        let md_probabilities = to_scenario_probabilities(&inputs.scenarios, &md_profiles);
        Some(resilience::assess(&space, &md_probabilities))
    } else {
        None
    };

    let meets_target = report.r_sys_mw <= config.r_set_mw;
    Ok(AssessOutcome {
        report,
        model_driven,
        meets_target,
        space,
        scenario_probabilities: probabilities,
    })
}

fn assess_report_text(config: &RunConfig, outcome: &AssessOutcome) -> String {
    let r = &outcome.report;
    let mut out = String::new();
    let _ = writeln!(out, "resilience assessment ({} mode)", config.mode.name());
    let _ = writeln!(out, "scenarios {}", r.scenario_count);
    let _ = writeln!(out, "enumeration order J {}", r.j_max);
    let _ = writeln!(out, "R_sys_mw {}", sci(r.r_sys_mw));
    for (j, v) in r.order_contributions_mw.iter().enumerate() {
        let _ = writeln!(out, "order_{}_contribution_mw {}", j + 1, sci(*v));
    }
    if r.degenerate_states > 0 {
        let _ = writeln!(out, "degenerate_states {}", r.degenerate_states);
    }
    let _ = writeln!(out, "R_set_mw {}", sci(config.r_set_mw));
    if outcome.meets_target {
        let _ = writeln!(out, "target: meets target; no strengthening required");
    } else {
        let _ = writeln!(out, "target: exceeded; corridor-level analysis follows");
    }
    match &outcome.model_driven {
        Some(md) => {
            let _ = writeln!(out, "\ncorridor indices (hybrid vs model-driven, MW)");
            let _ = writeln!(out, "corridor,R_m_hybrid,R_m_model_driven");
            let md_map: BTreeMap<u32, f64> = md.corridor_indices.iter().copied().collect();
            for (id, r_m) in &r.corridor_indices {
                let _ = writeln!(out, "{id},{},{}", sci(*r_m), sci(md_map[id]));
            }
            let _ = writeln!(out, "\nR_sys_model_driven_mw {}", sci(md.r_sys_mw));
        }
        None => {
            let _ = writeln!(out, "\ncorridor indices (MW)");
            let _ = writeln!(out, "corridor,R_m");
            for (id, r_m) in &r.corridor_indices {
                let _ = writeln!(out, "{id},{}", sci(*r_m));
            }
        }
    }
    let _ = writeln!(out, "\nper-scenario contribution (MW)");
    for (i, v) in r.per_scenario_mw.iter().enumerate() {
        let _ = writeln!(out, "scenario {i} {}", sci(*v));
    }
    out
}

/// `assess`: the full resilience index pipeline.
pub fn run_assess(
    config: &RunConfig,
    writer: &mut ArtifactWriter,
    strict: bool,
) -> Result<(String, i32), PipelineError> {
    let inputs = load_inputs(config)?;
    let outcome = assess(config, &inputs)?;
    writer.write("assess_report.txt", &assess_report_text(config, &outcome))?;

    let mut corridor_csv = String::from("corridor_id,r_m_mw\n");
    for (id, r_m) in &outcome.report.corridor_indices {
        let _ = writeln!(corridor_csv, "{id},{}", sci(*r_m));
    }
    writer.write("corridor_index.csv", &corridor_csv)?;
    writer.write("manifest.txt", &manifest(config, &inputs.case))?;

    let status = if outcome.meets_target {
        "meets target; no strengthening required".to_string()
    } else {
        "target exceeded".to_string()
    };
    let summary = format!(
        "R_sys = {} MW over {} scenarios at J = {}; {}",
        sci(outcome.report.r_sys_mw),
        outcome.report.scenario_count,
        outcome.report.j_max,
        status
    );
    let code = if strict && !outcome.meets_target {
        4
    } else {
        0
    };
    Ok((summary, code))
}

/// `strategies`: assess, then evaluate and rank the hardening menu.
pub fn run_strategies(
    config: &RunConfig,
    writer: &mut ArtifactWriter,
) -> Result<String, PipelineError> {
    let strategies_path = config
        .strategies
        .as_ref()
        .ok_or(PipelineError::Validation {
            stage: "strategies",
            message: "no strategies path configured".into(),
        })?;
    let strategies = strategy::load_strategies(strategies_path).map_err(invalid("strategies"))?;
    let inputs = load_inputs(config)?;
    let outcome = assess(config, &inputs)?;

    let results: Vec<StrategyResult> = strategies
        .iter()
        .map(|s| {
            strategy::evaluate_strategy(
                s,
                &inputs.case,
                &outcome.space,
                &outcome.scenario_probabilities,
                outcome.report.r_sys_mw,
                config.cost_rate_per_km,
                config.r_set_mw,
                config.hardening,
            )
        })
        .collect::<Result<_, _>>()
        .map_err(invalid("strategies"))?;
    let ranked = strategy::rank_strategies(results);

    let mut table = String::from(
        "priority,name,corridors,cost_usd,re_mw,delta_re_pct,cost_per_pct_usd,post_index_mw,meets_target\n",
    );
    for (rank, r) in ranked.iter().enumerate() {
        let ids = r
            .corridors
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        let _ = writeln!(
            table,
            "{},{},{},{:.2},{},{:.4},{:.2},{},{}",
            rank + 1,
            r.name,
            ids,
            r.cost,
            sci(r.re_mw),
            r.delta_re_pct,
            r.cost_per_pct,
            sci(r.post_index_mw),
            r.meets_target
        );
    }
    writer.write("strategies_report.csv", &table)?;

    let mut norm = String::from("name,cost_norm,re_norm,delta_re_norm,cost_per_pct_norm\n");
    for (r, row) in ranked.iter().zip(strategy::normalized_metrics(&ranked)) {
        let _ = writeln!(
            norm,
            "{},{:.6},{:.6},{:.6},{:.6}",
            r.name, row[0], row[1], row[2], row[3]
        );
    }
    writer.write("strategies_normalized.csv", &norm)?;
    writer.write("manifest.txt", &manifest(config, &inputs.case))?;

    let best = ranked.first().map(|r| r.name.as_str()).unwrap_or("none");
    Ok(format!(
        "{} strategies ranked; best cost-effectiveness: {} (R_sys {} MW)",
        ranked.len(),
        best,
        sci(outcome.report.r_sys_mw)
    ))
}
