//! End-to-end runs driven by an [`ExperimentConfig`]: generate data, train,
//! analyse and plot. Every step writes `resolved.cfg` next to its outputs.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::analysis::{
    activity_map, check_hierarchical, circle_arcs, permute_for_clarity, threshold_connectivity_relative,
    ConnectivityGraph, StructureReport,
};
use crate::chain::ChainNetwork;
use crate::config::{ExperimentConfig, StructureCheck};
use crate::data::{cooccurrence, Dataset, PhaseSample};
use crate::error::{Result, SvqError};
use crate::io::{self, AnalysisArtifact, Artifact, ModelArtifact};
use crate::plot::{self, Grid};
use crate::train::{train_multi_seed, TrainingSchedule, TrainingTrace};

pub const DATASET_FILE: &str = "dataset.svq";
pub const MODEL_FILE: &str = "model.svq";
pub const TRACE_FILE: &str = "trace.svq";
pub const ANALYSIS_FILE: &str = "analysis.svq";
pub const RESOLVED_FILE: &str = "resolved.cfg";
pub const TRAIN_REPORT_FILE: &str = "train_report.txt";
pub const ANALYSIS_REPORT_FILE: &str = "analysis.txt";
pub const CLASSIFICATION_CSV: &str = "classifications.csv";
pub const PLOT_DIR: &str = "plots";

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| SvqError::io(parent, e))?;
    }
    fs::write(path, text).map_err(|e| SvqError::io(path, e))
}

pub fn write_resolved(cfg: &ExperimentConfig) -> Result<PathBuf> {
    let path = cfg.out_dir.join(RESOLVED_FILE);
    write_text(&path, &cfg.to_toml()?)?;
    Ok(path)
}

fn require(paths: &[PathBuf]) -> Result<()> {
    let missing: Vec<PathBuf> = paths.iter().filter(|p| !p.is_file()).cloned().collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(SvqError::MissingInputs(missing))
    }
}

pub fn generate_dataset(cfg: &ExperimentConfig) -> Result<Dataset> {
    Dataset::generate(&cfg.dataset.generator, cfg.dataset.seed, cfg.dataset.count)
}

pub fn cmd_gen_data(cfg: &ExperimentConfig) -> Result<PathBuf> {
    let ds = generate_dataset(cfg)?;
    let path = cfg.out_dir.join(DATASET_FILE);
    io::save(&Artifact::Dataset(ds), &path)?;
    write_resolved(cfg)?;
    Ok(path)
}

/// Uses `dataset.svq` from the output directory when present, taking its
/// provenance into the config; otherwise generates and saves it.
pub fn dataset_for_training(cfg: &ExperimentConfig) -> Result<(ExperimentConfig, Dataset)> {
    let path = cfg.out_dir.join(DATASET_FILE);
    let mut cfg = cfg.clone();
    let ds = if path.is_file() {
        let ds = io::load_dataset(&path)?;
        cfg.dataset.generator = ds.spec.clone();
        cfg.dataset.seed = ds.seed;
        cfg.dataset.count = ds.len();
        cfg.validate()?;
        ds
    } else {
        let ds = generate_dataset(&cfg)?;
        io::save(&Artifact::Dataset(ds.clone()), &path)?;
        ds
    };
    Ok((cfg, ds))
}

/// The structure check selected by the config, as a pass/fail reason.
pub fn structure_check(
    cfg: &ExperimentConfig,
    chain: &ChainNetwork,
    phases: Option<&[PhaseSample]>,
) -> std::result::Result<(), String> {
    match cfg.train.structure_check {
        StructureCheck::None => Ok(()),
        StructureCheck::Hierarchical => {
            let samples = phases.ok_or("dataset has no phase coordinates")?;
            let report = check_hierarchical(chain, samples, &cfg.analysis).map_err(|e| e.to_string())?;
            report.failure().map_or(Ok(()), Err)
        }
        StructureCheck::CircleArcs => {
            let rep = circle_arcs(&chain.stages()[0], 360).map_err(|e| e.to_string())?;
            if rep.passed() {
                Ok(())
            } else {
                Err(format!(
                    "code arcs: {} uncovered points, runs per code {:?}",
                    rep.uncovered,
                    rep.codes.iter().map(|c| c.runs.len()).collect::<Vec<_>>()
                ))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub accepted_seed: Option<u64>,
    pub report: String,
    pub model: Option<ModelArtifact>,
    pub trace: Option<TrainingTrace>,
}

/// Runs the multi-seed protocol and writes model, trace and report. When no
/// seed passes, the last attempt is saved as `model.rejected.svq` and a
/// structure-check error is returned after the report is written.
pub fn cmd_train(cfg: &ExperimentConfig) -> Result<TrainOutcome> {
    let (cfg, ds) = &dataset_for_training(cfg)?;
    write_resolved(cfg)?;
    let data = ds.data();
    let phases = ds.phase_samples();
    let mut last: Option<ChainNetwork> = None;
    let outcome = train_multi_seed(&cfg.chain, &data, &cfg.schedule, &cfg.seeds(), |chain| {
        last = Some(chain.clone());
        structure_check(cfg, chain, phases.as_deref())
    })?;

    let mut report = String::new();
    for a in &outcome.attempts {
        writeln!(report, "seed {} {} {}", a.seed, if a.passed { "pass" } else { "fail" }, a.message).unwrap();
    }
    let result = match outcome.accepted {
        Some((seed, chain, trace)) => {
            writeln!(report, "accepted seed {seed}").unwrap();
            let model = ModelArtifact {
                chain,
                schedule: Some(TrainingSchedule {
                    seed,
                    ..cfg.schedule.clone()
                }),
            };
            io::save(&Artifact::Model(model.clone()), cfg.out_dir.join(MODEL_FILE))?;
            io::save(&Artifact::Trace(trace.clone()), cfg.out_dir.join(TRACE_FILE))?;
            write_text(&cfg.out_dir.join(TRAIN_REPORT_FILE), &report)?;
            TrainOutcome {
                accepted_seed: Some(seed),
                report,
                model: Some(model),
                trace: Some(trace),
            }
        }
        None => {
            report.push_str("no seed accepted\n");
            if let (Some(chain), Some(attempt)) = (last, outcome.attempts.last()) {
                let model = ModelArtifact {
                    chain,
                    schedule: Some(TrainingSchedule {
                        seed: attempt.seed,
                        ..cfg.schedule.clone()
                    }),
                };
                io::save(&Artifact::Model(model), cfg.out_dir.join("model.rejected.svq"))?;
            }
            write_text(&cfg.out_dir.join(TRAIN_REPORT_FILE), &report)?;
            return Err(SvqError::StructureCheck(format!(
                "none of {} seeds passed; see {}",
                outcome.attempts.len(),
                cfg.out_dir.join(TRAIN_REPORT_FILE).display()
            )));
        }
    };
    Ok(result)
}

fn load_inputs(cfg: &ExperimentConfig) -> Result<(Dataset, ModelArtifact)> {
    let ds_path = cfg.out_dir.join(DATASET_FILE);
    let model_path = cfg.out_dir.join(MODEL_FILE);
    require(&[ds_path.clone(), model_path.clone()])?;
    Ok((io::load_dataset(ds_path)?, io::load_model(model_path)?))
}

fn connectivity(cfg: &ExperimentConfig, chain: &ChainNetwork) -> Result<ConnectivityGraph> {
    Ok(permute_for_clarity(&threshold_connectivity_relative(chain, cfg.analysis.threshold)?))
}

fn artifact_from_report(graph: &ConnectivityGraph, report: Option<&StructureReport>) -> AnalysisArtifact {
    let mut a = AnalysisArtifact {
        taus: graph.stages.iter().map(|s| s.tau).collect(),
        kept_edges: graph.kept_edge_counts(),
        layer_orders: graph.layer_orders.clone(),
        ..AnalysisArtifact::default()
    };
    if let Some(r) = report {
        for g in &r.groups {
            a.sensitivity.push((g.layer, g.sensitivity.clone()));
            for (phases, nodes) in &g.groups {
                a.groups.push((g.layer, phases.iter().copied().collect(), nodes.clone()));
            }
        }
        a.maps = r.maps.clone();
        a.logic = r.logic.expressions.clone();
        a.checks = vec![
            ("stage1_factorial".into(), r.stage1_factorial),
            ("stage2_invariant_pairs".into(), r.stage2_invariant_pairs),
            ("stage3_invariant".into(), r.stage3_invariant),
            ("complement_logic".into(), r.complement_logic),
        ];
    }
    a
}

pub fn analyze_model(cfg: &ExperimentConfig, ds: &Dataset, chain: &ChainNetwork) -> Result<AnalysisArtifact> {
    let graph = connectivity(cfg, chain)?;
    let phases = ds.phase_samples();
    let hier = phases.is_some() && chain.num_stages() == 3 && chain.input_dim() == 8;
    let report = match (&phases, hier) {
        (Some(p), true) => Some(check_hierarchical(chain, p, &cfg.analysis)?),
        _ => None,
    };
    let mut art = artifact_from_report(&graph, report.as_ref());
    if chain.num_stages() == 1 && chain.input_dim() == 2 {
        let rep = circle_arcs(&chain.stages()[0], 360)?;
        art.checks.push(("single_arcs".into(), rep.single_arcs()));
        art.checks.push(("arcs_cover_circle".into(), rep.covers_circle()));
    }
    Ok(art)
}

fn describe(art: &AnalysisArtifact) -> String {
    let mut s = String::new();
    writeln!(s, "kept edges per stage: {:?}", art.kept_edges).unwrap();
    for (l, order) in art.layer_orders.iter().enumerate().skip(1) {
        writeln!(s, "layer {l} display order: {order:?}").unwrap();
    }
    for (layer, phases, nodes) in &art.groups {
        writeln!(s, "layer {layer} phases {phases:?}: nodes {nodes:?}").unwrap();
    }
    for m in &art.maps {
        let labels: Vec<String> = m.labels.iter().map(ToString::to_string).collect();
        writeln!(s, "layer {} map {:?}: {}", m.layer, m.axes, labels.join(" ")).unwrap();
    }
    for c in &art.logic {
        writeln!(s, "{c}").unwrap();
    }
    for (name, ok) in &art.checks {
        writeln!(s, "check {name}: {}", if *ok { "pass" } else { "fail" }).unwrap();
    }
    s
}

/// `sensitivity_layer<L>.csv`: one row per node, one column per phase.
fn sensitivity_csv(matrix: &[Vec<f64>]) -> String {
    let phases = matrix.first().map_or(0, Vec::len);
    let mut s = String::from("node");
    for p in 1..=phases {
        write!(s, ",phi{p}").unwrap();
    }
    s.push('\n');
    for (node, row) in matrix.iter().enumerate() {
        write!(s, "{node}").unwrap();
        for v in row {
            write!(s, ",{v:.6e}").unwrap();
        }
        s.push('\n');
    }
    s
}

fn classification_csv(art: &AnalysisArtifact) -> String {
    let mut s = String::from("layer,phase_a,phase_b,node,label,invariant_ratio\n");
    for m in &art.maps {
        for (node, label) in m.labels.iter().enumerate() {
            let ratio = m.invariant_ratios.get(node).copied().unwrap_or(f64::NAN);
            writeln!(s, "{},{},{},{node},{label},{ratio:.6}", m.layer, m.axes.0, m.axes.1).unwrap();
        }
    }
    s
}

pub fn cmd_analyze(cfg: &ExperimentConfig) -> Result<AnalysisArtifact> {
    write_resolved(cfg)?;
    let (ds, model) = load_inputs(cfg)?;
    let art = analyze_model(cfg, &ds, &model.chain)?;
    io::save(&Artifact::Analysis(art.clone()), cfg.out_dir.join(ANALYSIS_FILE))?;
    write_text(&cfg.out_dir.join(ANALYSIS_REPORT_FILE), &describe(&art))?;
    for (layer, matrix) in &art.sensitivity {
        write_text(&cfg.out_dir.join(format!("sensitivity_layer{layer}.csv")), &sensitivity_csv(matrix))?;
    }
    if !art.maps.is_empty() {
        write_text(&cfg.out_dir.join(CLASSIFICATION_CSV), &classification_csv(&art))?;
    }
    Ok(art)
}

fn graph_svg(chain: &ChainNetwork, graph: &ConnectivityGraph, masked: bool, ordered: bool, title: &str) -> String {
    let sizes = chain.layer_sizes();
    let order = |l: usize| -> Vec<usize> {
        if ordered {
            graph.layer_orders[l].clone()
        } else {
            (0..sizes[l]).collect()
        }
    };
    let layers: Vec<Vec<String>> = (0..sizes.len())
        .map(|l| order(l).iter().map(|n| (n + 1).to_string()).collect())
        .collect();
    let mut edges = Vec::new();
    for (l, sc) in graph.stages.iter().enumerate() {
        let lower: Vec<usize> = order(l);
        let upper: Vec<usize> = order(l + 1);
        let mut es = Vec::new();
        for (hi_pos, &y) in upper.iter().enumerate() {
            for (lo_pos, &k) in lower.iter().enumerate() {
                if !masked || sc.kept(y, k) {
                    es.push((lo_pos, hi_pos, sc.value(y, k)));
                }
            }
        }
        edges.push(es);
    }
    plot::layered_graph_svg(&layers, &edges, title)
}

/// Renders every plot for the run into `plots/`, returning the file names.
pub fn cmd_plot(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let needed = [
        cfg.out_dir.join(DATASET_FILE),
        cfg.out_dir.join(MODEL_FILE),
        cfg.out_dir.join(ANALYSIS_FILE),
    ];
    require(&needed)?;
    write_resolved(cfg)?;
    let ds = io::load_dataset(&needed[0])?;
    let chain = io::load_model(&needed[1])?.chain;
    let art = io::load_analysis(&needed[2])?;
    let dir = cfg.out_dir.join(PLOT_DIR);
    let mut written = Vec::new();
    let mut emit = |name: String, svg: String| -> Result<()> {
        let path = dir.join(name);
        write_text(&path, &svg)?;
        written.push(path);
        Ok(())
    };

    let trace_path = cfg.out_dir.join(TRACE_FILE);
    if trace_path.is_file() {
        let trace = io::load_trace(&trace_path)?;
        let totals: Vec<f64> = trace.records.iter().map(|r| r.weighted_total).collect();
        emit(
            "trace.svg".into(),
            plot::line_svg(&[("weighted total".into(), totals)], 400.0, 200.0, "objective per epoch"),
        )?;
    }

    let raw = threshold_connectivity_relative(&chain, f64::MIN_POSITIVE)?;
    let mut graph = threshold_connectivity_relative(&chain, cfg.analysis.threshold)?;
    if graph.layer_orders.len() == art.layer_orders.len() {
        graph.layer_orders = art.layer_orders.clone();
    }
    emit("connectivity_raw.svg".into(), graph_svg(&chain, &raw, false, false, "reconstruction vectors"))?;
    emit("connectivity_thresholded.svg".into(), graph_svg(&chain, &graph, true, false, "thresholded"))?;
    emit("connectivity_permuted.svg".into(), graph_svg(&chain, &graph, true, true, "thresholded, permuted"))?;

    let grid = cfg.analysis.grid;
    let cell = 4.0;
    if let Some(samples) = ds.phase_samples() {
        let phases = samples.first().map_or(0, |s| s.phases.len());
        for i in 1..=phases {
            for j in i + 1..=phases {
                let h = cooccurrence(&samples, i, j, grid)?;
                let g = Grid {
                    rows: grid,
                    cols: grid,
                    values: h.counts.iter().map(|&c| c as f64).collect(),
                    title: format!("phi{i} vs phi{j}"),
                };
                emit(
                    format!("cooccurrence_{i}_{j}.svg"),
                    plot::heatmap_svg(&g, cell, &format!("phi{j}"), &format!("phi{i}")),
                )?;
            }
        }
        if 2 * phases == chain.input_dim() && phases >= 2 {
            let pairs: Vec<(usize, usize)> = (1..phases).step_by(2).map(|a| (a, a + 1)).collect();
            for layer in 1..=chain.num_stages() {
                for &axes in &pairs {
                    let map = activity_map(&chain, layer, axes, &vec![0.0; phases], grid)?;
                    let order = &art.layer_orders.get(layer).cloned().unwrap_or_else(|| (0..map.m).collect());
                    let grids: Vec<Grid> = order
                        .iter()
                        .map(|&node| Grid {
                            rows: grid,
                            cols: grid,
                            values: map.node_grid(node),
                            title: format!("node {}", node + 1),
                        })
                        .collect();
                    let title = format!("layer {layer}, phi{} x phi{}", axes.0, axes.1);
                    emit(
                        format!("activity_L{layer}_{}{}.svg", axes.0, axes.1),
                        plot::small_multiples_svg(&grids, 8, cell, false, &title),
                    )?;
                }
            }
        }
    } else if chain.input_dim() == 2 {
        let points: Vec<(f64, f64)> = ds.samples.iter().map(|s| (s.data[0], s.data[1])).collect();
        let classes = ds
            .samples
            .iter()
            .map(|s| chain.feedforward(&s.data).map(|ps| ps[0].argmax()))
            .collect::<Result<Vec<_>>>()?;
        emit("codes.svg".into(), plot::scatter_svg(&points, &classes, 300.0, "most probable code"))?;
    }
    Ok(written)
}
