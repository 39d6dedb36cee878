//! Versioned line-based text artifacts: datasets, models, traces and
//! analysis summaries.
//!
//! Every file starts with `svq-artifact <kind> <version>` and ends with a
//! line `end`. Floats are written with 17 significant digits so that
//! save -> load -> save is byte-identical.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::analysis::activity::EncoderLabel;
use crate::analysis::logic::{Conjunction, Literal};
use crate::analysis::structure::MapSummary;
use crate::chain::{ChainNetwork, GradientFlow};
use crate::data::{Dataset, GeneratorSpec, ManifoldSample};
use crate::error::{Result, SvqError};
use crate::svq::{StageObjective, SvqStage};
use crate::train::{EpochRecord, StageSteps, TrainingSchedule, TrainingTrace};

pub const MAGIC: &str = "svq-artifact";
pub const DATASET_VERSION: u32 = 1;
pub const MODEL_VERSION: u32 = 1;
pub const TRACE_VERSION: u32 = 1;
pub const ANALYSIS_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArtifactKind {
    Dataset,
    Model,
    Trace,
    Analysis,
}

impl ArtifactKind {
    pub fn name(self) -> &'static str {
        match self {
            ArtifactKind::Dataset => "dataset",
            ArtifactKind::Model => "model",
            ArtifactKind::Trace => "trace",
            ArtifactKind::Analysis => "analysis",
        }
    }

    pub fn version(self) -> u32 {
        match self {
            ArtifactKind::Dataset => DATASET_VERSION,
            ArtifactKind::Model => MODEL_VERSION,
            ArtifactKind::Trace => TRACE_VERSION,
            ArtifactKind::Analysis => ANALYSIS_VERSION,
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "dataset" => ArtifactKind::Dataset,
            "model" => ArtifactKind::Model,
            "trace" => ArtifactKind::Trace,
            "analysis" => ArtifactKind::Analysis,
            _ => return None,
        })
    }
}

/// A trained chain plus what produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelArtifact {
    pub chain: ChainNetwork,
    pub schedule: Option<TrainingSchedule>,
}

/// Structural summary of a trained chain.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AnalysisArtifact {
    /// Connectivity threshold of every stage.
    pub taus: Vec<f64>,
    pub kept_edges: Vec<usize>,
    /// Display order of every layer, input layer included.
    pub layer_orders: Vec<Vec<usize>>,
    /// `(layer, nodes x phases)` sensitivity matrices.
    pub sensitivity: Vec<(usize, Vec<Vec<f64>>)>,
    /// `(layer, phase set, nodes)`, 1-based phases and 0-based nodes.
    pub groups: Vec<(usize, Vec<usize>, Vec<usize>)>,
    pub maps: Vec<MapSummary>,
    pub logic: Vec<Conjunction>,
    pub checks: Vec<(String, bool)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Artifact {
    Dataset(Dataset),
    Model(ModelArtifact),
    Trace(TrainingTrace),
    Analysis(AnalysisArtifact),
}

// ---------------------------------------------------------------- writing

fn num(out: &mut String, v: f64, what: &str) -> Result<()> {
    if !v.is_finite() {
        return Err(SvqError::NonFinite(what.to_string()));
    }
    write!(out, " {v:.16e}").unwrap();
    Ok(())
}

fn nums(out: &mut String, vs: &[f64], what: &str) -> Result<()> {
    for &v in vs {
        num(out, v, what)?;
    }
    Ok(())
}

fn ints<T: std::fmt::Display>(out: &mut String, vs: &[T]) {
    for v in vs {
        write!(out, " {v}").unwrap();
    }
}

fn header(out: &mut String, kind: ArtifactKind) {
    writeln!(out, "{MAGIC} {} {}", kind.name(), kind.version()).unwrap();
}

fn write_generator(out: &mut String, spec: &GeneratorSpec) -> Result<()> {
    out.push_str("generator ");
    out.push_str(spec.name());
    match spec {
        GeneratorSpec::Circle => {}
        GeneratorSpec::HierPhases { depth } => write!(out, " {depth}").unwrap(),
        GeneratorSpec::Object {
            sigma,
            grid_min,
            grid_max,
            pos_min,
            pos_max,
        } => {
            num(out, *sigma, "generator sigma")?;
            write!(out, " {grid_min} {grid_max}").unwrap();
            num(out, *pos_min, "generator pos_min")?;
            num(out, *pos_max, "generator pos_max")?;
        }
        GeneratorSpec::Blobs { centers, std_dev } => {
            num(out, *std_dev, "generator std_dev")?;
            write!(out, " {}", centers.len()).unwrap();
            for c in centers {
                nums(out, c, "generator centers")?;
            }
        }
    }
    out.push('\n');
    Ok(())
}

pub fn dataset_to_string(ds: &Dataset) -> Result<String> {
    let mut out = String::new();
    header(&mut out, ArtifactKind::Dataset);
    write_generator(&mut out, &ds.spec)?;
    writeln!(out, "seed {}", ds.seed).unwrap();
    let (ld, dd) = ds
        .samples
        .first()
        .map(|s| (s.latent.len(), s.data.len()))
        .unwrap_or(ds.spec.dims());
    writeln!(out, "count {}", ds.samples.len()).unwrap();
    writeln!(out, "dims {ld} {dd}").unwrap();
    for s in &ds.samples {
        if s.latent.len() != ld || s.data.len() != dd {
            return Err(SvqError::Invariant("dataset records have mixed dimensions".into()));
        }
        out.push_str("sample");
        nums(&mut out, &s.latent, "sample latent")?;
        nums(&mut out, &s.data, "sample data")?;
        out.push('\n');
    }
    out.push_str("end\n");
    Ok(out)
}

fn write_schedule(out: &mut String, s: &TrainingSchedule) -> Result<()> {
    let batch = s.batch_size.map_or("full".to_string(), |b| b.to_string());
    let flow = match s.flow {
        GradientFlow::Full => "full",
        GradientFlow::PerStage => "per-stage",
    };
    write!(out, "schedule {} {batch} {flow} {}", s.epochs, s.seed).unwrap();
    num(out, s.decay, "schedule decay")?;
    num(out, s.init_range, "schedule init_range")?;
    out.push('\n');
    for (l, (st, start)) in s.steps.iter().zip(&s.decay_start).enumerate() {
        let train_start = s.train_start.get(l).copied().unwrap_or(0.0);
        out.push_str("steps");
        nums(out, &[st.weights, st.biases, st.recon, *start, train_start], "schedule steps")?;
        out.push('\n');
    }
    Ok(())
}

pub fn model_to_string(model: &ModelArtifact) -> Result<String> {
    let chain = &model.chain;
    let mut out = String::new();
    header(&mut out, ArtifactKind::Model);
    writeln!(out, "stages {}", chain.num_stages()).unwrap();
    out.push_str("lambdas");
    nums(&mut out, chain.lambdas(), "lambdas")?;
    out.push('\n');
    match &model.schedule {
        Some(s) => {
            if s.steps.len() != chain.num_stages() || s.decay_start.len() != chain.num_stages() {
                return Err(SvqError::dims("schedule stages", chain.num_stages(), s.steps.len()));
            }
            write_schedule(&mut out, s)?
        }
        None => out.push_str("schedule none\n"),
    }
    for (l, st) in chain.stages().iter().enumerate() {
        writeln!(out, "stage {} {} {} {}", l + 1, st.m(), st.n(), st.input_dim()).unwrap();
        for y in 0..st.m() {
            out.push_str("w");
            nums(&mut out, st.weight_row(y), "weights")?;
            out.push('\n');
        }
        out.push_str("b");
        nums(&mut out, st.biases(), "biases")?;
        out.push('\n');
        for y in 0..st.m() {
            out.push_str("r");
            nums(&mut out, st.recon_row(y), "reconstruction vectors")?;
            out.push('\n');
        }
    }
    out.push_str("end\n");
    Ok(out)
}

fn write_record(out: &mut String, key: &str, r: &EpochRecord) -> Result<()> {
    write!(out, "{key} {}", r.epoch).unwrap();
    num(out, r.weighted_total, "weighted total")?;
    for s in &r.stages {
        nums(out, &[s.d1, s.d2, s.total], "stage objective")?;
    }
    out.push('\n');
    Ok(())
}

pub fn trace_to_string(trace: &TrainingTrace) -> Result<String> {
    let stages = trace
        .records
        .first()
        .or(trace.final_objective.as_ref())
        .map_or(0, |r| r.stages.len());
    let mut out = String::new();
    header(&mut out, ArtifactKind::Trace);
    writeln!(out, "stages {stages}").unwrap();
    writeln!(out, "records {}", trace.records.len()).unwrap();
    for r in trace.records.iter().chain(&trace.final_objective) {
        if r.stages.len() != stages {
            return Err(SvqError::Invariant("trace records have mixed stage counts".into()));
        }
    }
    for r in &trace.records {
        write_record(&mut out, "epoch", r)?;
    }
    match &trace.final_objective {
        Some(r) => write_record(&mut out, "final", r)?,
        None => out.push_str("final none\n"),
    }
    out.push_str("end\n");
    Ok(out)
}

fn literal_token(l: &Literal) -> String {
    format!("{}{}", if l.negated { '-' } else { '+' }, l.input)
}

pub fn analysis_to_string(a: &AnalysisArtifact) -> Result<String> {
    let mut out = String::new();
    header(&mut out, ArtifactKind::Analysis);
    writeln!(out, "stages {}", a.taus.len()).unwrap();
    out.push_str("taus");
    nums(&mut out, &a.taus, "taus")?;
    out.push_str("\nkept");
    ints(&mut out, &a.kept_edges);
    out.push('\n');
    writeln!(out, "layers {}", a.layer_orders.len()).unwrap();
    for order in &a.layer_orders {
        write!(out, "order {}", order.len()).unwrap();
        ints(&mut out, order);
        out.push('\n');
    }
    writeln!(out, "sensitivities {}", a.sensitivity.len()).unwrap();
    for (layer, rows) in &a.sensitivity {
        let cols = rows.first().map_or(0, Vec::len);
        writeln!(out, "sensitivity {layer} {} {cols}", rows.len()).unwrap();
        for row in rows {
            if row.len() != cols {
                return Err(SvqError::dims("sensitivity row", cols, row.len()));
            }
            out.push_str("s");
            nums(&mut out, row, "sensitivity")?;
            out.push('\n');
        }
    }
    writeln!(out, "groups {}", a.groups.len()).unwrap();
    for (layer, phases, nodes) in &a.groups {
        write!(out, "group {layer} {}", phases.len()).unwrap();
        ints(&mut out, phases);
        write!(out, " {}", nodes.len()).unwrap();
        ints(&mut out, nodes);
        out.push('\n');
    }
    writeln!(out, "maps {}", a.maps.len()).unwrap();
    for m in &a.maps {
        if m.labels.len() != m.invariant_ratios.len() {
            return Err(SvqError::dims("map labels", m.invariant_ratios.len(), m.labels.len()));
        }
        write!(out, "map {} {} {} {}", m.layer, m.axes.0, m.axes.1, m.labels.len()).unwrap();
        ints(&mut out, &m.labels);
        out.push('\n');
        out.push_str("ratios");
        for &v in &m.invariant_ratios {
            // an infinite ratio is meaningful here (no along-band variance)
            if v == f64::INFINITY {
                out.push_str(" inf");
            } else {
                num(&mut out, v, "invariant ratio")?;
            }
        }
        out.push('\n');
    }
    writeln!(out, "expressions {}", a.logic.len()).unwrap();
    for c in &a.logic {
        write!(out, "logic {} {}", c.output, c.literals.len()).unwrap();
        for l in &c.literals {
            write!(out, " {}", literal_token(l)).unwrap();
        }
        out.push('\n');
    }
    writeln!(out, "checks {}", a.checks.len()).unwrap();
    for (name, ok) in &a.checks {
        if name.is_empty() || name.contains(char::is_whitespace) {
            return Err(SvqError::invalid("check name", "must be a single non-empty word"));
        }
        writeln!(out, "check {name} {ok}").unwrap();
    }
    out.push_str("end\n");
    Ok(out)
}

pub fn artifact_to_string(a: &Artifact) -> Result<String> {
    match a {
        Artifact::Dataset(d) => dataset_to_string(d),
        Artifact::Model(m) => model_to_string(m),
        Artifact::Trace(t) => trace_to_string(t),
        Artifact::Analysis(a) => analysis_to_string(a),
    }
}

/// Serialises fully before touching the file, so a failed save leaves no
/// partial output.
pub fn save(artifact: &Artifact, path: impl AsRef<Path>) -> Result<()> {
    let text = artifact_to_string(artifact)?;
    let path = path.as_ref();
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| SvqError::io(parent, e))?;
    }
    fs::write(path, text).map_err(|e| SvqError::io(path, e))
}

// ---------------------------------------------------------------- reading

struct Line<'a> {
    no: usize,
    tokens: Vec<&'a str>,
    next: usize,
}

struct Reader<'a> {
    path: String,
    text: &'a str,
    offset: usize,
    line: usize,
}

impl<'a> Reader<'a> {
    fn new(path: &str, text: &'a str) -> Self {
        Reader {
            path: path.to_string(),
            text,
            offset: 0,
            line: 0,
        }
    }

    fn truncated(&self, expected: &str) -> SvqError {
        SvqError::Truncated {
            path: self.path.clone(),
            offset: self.text.len(),
            expected: expected.to_string(),
        }
    }

    fn err(&self, line: usize, field: &str, reason: impl Into<String>) -> SvqError {
        SvqError::Parse {
            path: self.path.clone(),
            line,
            field: field.to_string(),
            reason: reason.into(),
        }
    }

    /// Next line, which must start with `key`.
    fn line(&mut self, key: &str) -> Result<Line<'a>> {
        let rest = &self.text[self.offset..];
        let Some(end) = rest.find('\n') else {
            return Err(self.truncated(&format!("line `{key}`")));
        };
        let raw = &rest[..end];
        self.offset += end + 1;
        self.line += 1;
        let tokens: Vec<&str> = raw.split(' ').collect();
        if tokens[0] != key {
            return Err(self.err(self.line, key, format!("expected `{key}`, found `{}`", tokens[0])));
        }
        Ok(Line {
            no: self.line,
            tokens,
            next: 1,
        })
    }

    fn value<T: FromStr>(&self, line: &mut Line<'a>, field: &str) -> Result<T> {
        let tok = line
            .tokens
            .get(line.next)
            .ok_or_else(|| self.err(line.no, field, "missing value"))?;
        line.next += 1;
        tok.parse()
            .map_err(|_| self.err(line.no, field, format!("cannot parse `{tok}`")))
    }

    fn float(&self, line: &mut Line<'a>, field: &str) -> Result<f64> {
        let v: f64 = self.value(line, field)?;
        if !v.is_finite() {
            return Err(self.err(line.no, field, "value is not finite"));
        }
        Ok(v)
    }

    fn floats(&self, line: &mut Line<'a>, field: &str, count: usize) -> Result<Vec<f64>> {
        (0..count).map(|_| self.float(line, field)).collect()
    }

    fn values<T: FromStr>(&self, line: &mut Line<'a>, field: &str, count: usize) -> Result<Vec<T>> {
        (0..count).map(|_| self.value(line, field)).collect()
    }

    fn finish(&self, line: &Line<'a>) -> Result<()> {
        if line.next != line.tokens.len() {
            return Err(self.err(
                line.no,
                line.tokens[0],
                format!("expected {} values, found {}", line.next - 1, line.tokens.len() - 1),
            ));
        }
        Ok(())
    }

    /// Reads a line with `key` followed by exactly one value.
    fn single<T: FromStr>(&mut self, key: &str) -> Result<T> {
        let mut l = self.line(key)?;
        let v = self.value(&mut l, key)?;
        self.finish(&l)?;
        Ok(v)
    }

    fn end(&mut self) -> Result<()> {
        let l = self.line("end")?;
        self.finish(&l)?;
        if self.offset != self.text.len() {
            return Err(self.err(self.line + 1, "end", "trailing content after `end`"));
        }
        Ok(())
    }
}

fn read_header(r: &mut Reader) -> Result<ArtifactKind> {
    let mut l = r.line(MAGIC)?;
    let kind_name: String = r.value(&mut l, "kind")?;
    let kind = ArtifactKind::parse(&kind_name).ok_or_else(|| SvqError::UnknownKind {
        path: r.path.clone(),
        found: kind_name.clone(),
    })?;
    let version: u32 = r.value(&mut l, "version")?;
    r.finish(&l)?;
    if version != kind.version() {
        return Err(SvqError::UnsupportedVersion {
            path: r.path.clone(),
            kind: kind_name,
            found: version,
            supported: kind.version(),
        });
    }
    Ok(kind)
}

fn invariant(r: &Reader, e: SvqError) -> SvqError {
    SvqError::Invariant(format!("{}: {e}", r.path))
}

fn read_generator(r: &mut Reader) -> Result<GeneratorSpec> {
    let mut l = r.line("generator")?;
    let name: String = r.value(&mut l, "generator")?;
    let spec = match name.as_str() {
        "circle" => GeneratorSpec::Circle,
        "hier-phases" => GeneratorSpec::HierPhases {
            depth: r.value(&mut l, "depth")?,
        },
        "object" => GeneratorSpec::Object {
            sigma: r.float(&mut l, "sigma")?,
            grid_min: r.value(&mut l, "grid_min")?,
            grid_max: r.value(&mut l, "grid_max")?,
            pos_min: r.float(&mut l, "pos_min")?,
            pos_max: r.float(&mut l, "pos_max")?,
        },
        "blobs" => {
            let std_dev = r.float(&mut l, "std_dev")?;
            let count: usize = r.value(&mut l, "centers")?;
            let mut centers = Vec::with_capacity(count.min(1 << 16));
            for _ in 0..count {
                centers.push([r.float(&mut l, "centers")?, r.float(&mut l, "centers")?]);
            }
            GeneratorSpec::Blobs { centers, std_dev }
        }
        other => return Err(r.err(l.no, "generator", format!("unknown generator `{other}`"))),
    };
    r.finish(&l)?;
    Ok(spec)
}

fn read_dataset(r: &mut Reader) -> Result<Dataset> {
    let spec = read_generator(r)?;
    let seed: u64 = r.single("seed")?;
    let count: usize = r.single("count")?;
    let mut l = r.line("dims")?;
    let ld: usize = r.value(&mut l, "latent_dim")?;
    let dd: usize = r.value(&mut l, "data_dim")?;
    r.finish(&l)?;
    if count > 0 && (ld, dd) != spec.dims() {
        let (el, ed) = spec.dims();
        return Err(r.err(l.no, "dims", format!("generator emits ({el}, {ed}), file says ({ld}, {dd})")));
    }
    let mut samples = Vec::with_capacity(count.min(1 << 20));
    for _ in 0..count {
        let mut l = r.line("sample")?;
        let latent = r.floats(&mut l, "latent", ld)?;
        let data = r.floats(&mut l, "data", dd)?;
        r.finish(&l)?;
        samples.push(ManifoldSample { latent, data });
    }
    r.end()?;
    Ok(Dataset {
        spec,
        seed,
        samples,
    })
}

fn read_schedule(r: &mut Reader, stages: usize) -> Result<Option<TrainingSchedule>> {
    let mut l = r.line("schedule")?;
    if l.tokens.get(1) == Some(&"none") {
        l.next = 2;
        r.finish(&l)?;
        return Ok(None);
    }
    let epochs: usize = r.value(&mut l, "epochs")?;
    let batch: String = r.value(&mut l, "batch")?;
    let batch_size = match batch.as_str() {
        "full" => None,
        b => Some(b.parse().map_err(|_| r.err(l.no, "batch", format!("cannot parse `{b}`")))?),
    };
    let flow = match r.value::<String>(&mut l, "flow")?.as_str() {
        "full" => GradientFlow::Full,
        "per-stage" => GradientFlow::PerStage,
        other => return Err(r.err(l.no, "flow", format!("unknown gradient flow `{other}`"))),
    };
    let seed: u64 = r.value(&mut l, "seed")?;
    let decay = r.float(&mut l, "decay")?;
    let init_range = r.float(&mut l, "init_range")?;
    r.finish(&l)?;
    let mut steps = Vec::with_capacity(stages);
    let mut decay_start = Vec::with_capacity(stages);
    let mut train_start = Vec::with_capacity(stages);
    for _ in 0..stages {
        let mut l = r.line("steps")?;
        let v = r.floats(&mut l, "steps", 5)?;
        r.finish(&l)?;
        steps.push(StageSteps {
            weights: v[0],
            biases: v[1],
            recon: v[2],
        });
        decay_start.push(v[3]);
        train_start.push(v[4]);
    }
    let sched = TrainingSchedule {
        epochs,
        batch_size,
        steps,
        decay,
        decay_start,
        // all-zero starts are written for schedules that leave them empty
        train_start: if train_start.iter().all(|&t| t == 0.0) {
            Vec::new()
        } else {
            train_start
        },
        init_range,
        seed,
        flow,
    };
    sched.validate(stages).map_err(|e| invariant(r, e))?;
    Ok(Some(sched))
}

fn read_model(r: &mut Reader) -> Result<ModelArtifact> {
    let stages: usize = r.single("stages")?;
    let mut l = r.line("lambdas")?;
    let lambdas = r.floats(&mut l, "lambdas", stages)?;
    r.finish(&l)?;
    let schedule = read_schedule(r, stages)?;
    let mut chain_stages = Vec::with_capacity(stages);
    for idx in 1..=stages {
        let mut l = r.line("stage")?;
        let got: usize = r.value(&mut l, "stage")?;
        if got != idx {
            return Err(r.err(l.no, "stage", format!("expected stage {idx}, found {got}")));
        }
        let m: usize = r.value(&mut l, "m")?;
        let n: usize = r.value(&mut l, "n")?;
        let d: usize = r.value(&mut l, "input_dim")?;
        r.finish(&l)?;
        let mut weights = Vec::with_capacity(m * d);
        for _ in 0..m {
            let mut l = r.line("w")?;
            weights.extend(r.floats(&mut l, "weights", d)?);
            r.finish(&l)?;
        }
        let mut l = r.line("b")?;
        let biases = r.floats(&mut l, "biases", m)?;
        r.finish(&l)?;
        let mut recon = Vec::with_capacity(m * d);
        for _ in 0..m {
            let mut l = r.line("r")?;
            recon.extend(r.floats(&mut l, "recon", d)?);
            r.finish(&l)?;
        }
        chain_stages.push(SvqStage::new(m, n, d, weights, biases, recon).map_err(|e| invariant(r, e))?);
    }
    r.end()?;
    let chain = ChainNetwork::new(chain_stages, lambdas).map_err(|e| invariant(r, e))?;
    Ok(ModelArtifact { chain, schedule })
}

fn read_record(r: &mut Reader, key: &str, stages: usize) -> Result<Option<EpochRecord>> {
    let mut l = r.line(key)?;
    if key == "final" && l.tokens.get(1) == Some(&"none") {
        l.next = 2;
        r.finish(&l)?;
        return Ok(None);
    }
    let epoch: usize = r.value(&mut l, "epoch")?;
    let weighted_total = r.float(&mut l, "weighted_total")?;
    let mut objs = Vec::with_capacity(stages);
    for _ in 0..stages {
        let v = r.floats(&mut l, "stage objective", 3)?;
        objs.push(StageObjective {
            d1: v[0],
            d2: v[1],
            total: v[2],
        });
    }
    r.finish(&l)?;
    Ok(Some(EpochRecord {
        epoch,
        stages: objs,
        weighted_total,
    }))
}

fn read_trace(r: &mut Reader) -> Result<TrainingTrace> {
    let stages: usize = r.single("stages")?;
    let count: usize = r.single("records")?;
    let mut records = Vec::with_capacity(count.min(1 << 20));
    for _ in 0..count {
        records.extend(read_record(r, "epoch", stages)?);
    }
    let final_objective = read_record(r, "final", stages)?;
    r.end()?;
    Ok(TrainingTrace {
        records,
        final_objective,
    })
}

fn read_analysis(r: &mut Reader) -> Result<AnalysisArtifact> {
    let stages: usize = r.single("stages")?;
    let mut l = r.line("taus")?;
    let taus = r.floats(&mut l, "taus", stages)?;
    r.finish(&l)?;
    let mut l = r.line("kept")?;
    let kept_edges = r.values(&mut l, "kept", stages)?;
    r.finish(&l)?;
    let layers: usize = r.single("layers")?;
    let mut layer_orders = Vec::with_capacity(layers);
    for _ in 0..layers {
        let mut l = r.line("order")?;
        let len: usize = r.value(&mut l, "order")?;
        let order: Vec<usize> = r.values(&mut l, "order", len)?;
        r.finish(&l)?;
        let mut seen = vec![false; len];
        for &i in &order {
            if i >= len || std::mem::replace(&mut seen[i], true) {
                return Err(r.err(l.no, "order", "not a permutation"));
            }
        }
        layer_orders.push(order);
    }
    let count: usize = r.single("sensitivities")?;
    let mut sensitivity = Vec::new();
    for _ in 0..count {
        let mut l = r.line("sensitivity")?;
        let layer: usize = r.value(&mut l, "layer")?;
        let rows: usize = r.value(&mut l, "rows")?;
        let cols: usize = r.value(&mut l, "cols")?;
        r.finish(&l)?;
        let mut matrix = Vec::with_capacity(rows.min(1 << 16));
        for _ in 0..rows {
            let mut l = r.line("s")?;
            matrix.push(r.floats(&mut l, "sensitivity", cols)?);
            r.finish(&l)?;
        }
        sensitivity.push((layer, matrix));
    }
    let count: usize = r.single("groups")?;
    let mut groups = Vec::new();
    for _ in 0..count {
        let mut l = r.line("group")?;
        let layer: usize = r.value(&mut l, "layer")?;
        let np: usize = r.value(&mut l, "phases")?;
        let phases = r.values(&mut l, "phases", np)?;
        let nn: usize = r.value(&mut l, "nodes")?;
        let nodes = r.values(&mut l, "nodes", nn)?;
        r.finish(&l)?;
        groups.push((layer, phases, nodes));
    }
    let count: usize = r.single("maps")?;
    let mut maps = Vec::new();
    for _ in 0..count {
        let mut l = r.line("map")?;
        let layer: usize = r.value(&mut l, "layer")?;
        let a: usize = r.value(&mut l, "axis_a")?;
        let b: usize = r.value(&mut l, "axis_b")?;
        let len: usize = r.value(&mut l, "labels")?;
        let labels: Vec<EncoderLabel> = r.values(&mut l, "labels", len)?;
        r.finish(&l)?;
        let mut l = r.line("ratios")?;
        let mut invariant_ratios = Vec::with_capacity(len);
        for _ in 0..len {
            let v: f64 = r.value(&mut l, "ratios")?;
            if v.is_nan() || v == f64::NEG_INFINITY {
                return Err(r.err(l.no, "ratios", "value is not a ratio"));
            }
            invariant_ratios.push(v);
        }
        r.finish(&l)?;
        maps.push(MapSummary {
            layer,
            axes: (a, b),
            labels,
            invariant_ratios,
        });
    }
    let count: usize = r.single("expressions")?;
    let mut logic = Vec::new();
    for _ in 0..count {
        let mut l = r.line("logic")?;
        let output: usize = r.value(&mut l, "output")?;
        let len: usize = r.value(&mut l, "literals")?;
        let mut literals = Vec::with_capacity(len);
        for _ in 0..len {
            let tok: String = r.value(&mut l, "literal")?;
            let (negated, idx) = match tok.split_at(tok.len().min(1)) {
                ("+", i) => (false, i),
                ("-", i) => (true, i),
                _ => return Err(r.err(l.no, "literal", format!("bad literal `{tok}`"))),
            };
            let input = idx
                .parse()
                .map_err(|_| r.err(l.no, "literal", format!("bad literal `{tok}`")))?;
            literals.push(Literal { input, negated });
        }
        r.finish(&l)?;
        logic.push(Conjunction { output, literals });
    }
    let count: usize = r.single("checks")?;
    let mut checks = Vec::new();
    for _ in 0..count {
        let mut l = r.line("check")?;
        let name: String = r.value(&mut l, "name")?;
        let ok: bool = r.value(&mut l, "passed")?;
        r.finish(&l)?;
        checks.push((name, ok));
    }
    r.end()?;
    Ok(AnalysisArtifact {
        taus,
        kept_edges,
        layer_orders,
        sensitivity,
        groups,
        maps,
        logic,
        checks,
    })
}

/// Parses an artifact from text; `path` is only used in error messages.
pub fn parse_artifact(text: &str, path: &str) -> Result<Artifact> {
    let mut r = Reader::new(path, text);
    Ok(match read_header(&mut r)? {
        ArtifactKind::Dataset => Artifact::Dataset(read_dataset(&mut r)?),
        ArtifactKind::Model => Artifact::Model(read_model(&mut r)?),
        ArtifactKind::Trace => Artifact::Trace(read_trace(&mut r)?),
        ArtifactKind::Analysis => Artifact::Analysis(read_analysis(&mut r)?),
    })
}

pub fn load(path: impl AsRef<Path>) -> Result<Artifact> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| SvqError::io(path, e))?;
    parse_artifact(&text, &path.display().to_string())
}

fn wrong_kind(path: &Path, want: ArtifactKind) -> SvqError {
    SvqError::Invariant(format!("{}: expected a {} artifact", path.display(), want.name()))
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    match load(path.as_ref())? {
        Artifact::Dataset(d) => Ok(d),
        _ => Err(wrong_kind(path.as_ref(), ArtifactKind::Dataset)),
    }
}

pub fn load_model(path: impl AsRef<Path>) -> Result<ModelArtifact> {
    match load(path.as_ref())? {
        Artifact::Model(m) => Ok(m),
        _ => Err(wrong_kind(path.as_ref(), ArtifactKind::Model)),
    }
}

pub fn load_trace(path: impl AsRef<Path>) -> Result<TrainingTrace> {
    match load(path.as_ref())? {
        Artifact::Trace(t) => Ok(t),
        _ => Err(wrong_kind(path.as_ref(), ArtifactKind::Trace)),
    }
}

pub fn load_analysis(path: impl AsRef<Path>) -> Result<AnalysisArtifact> {
    match load(path.as_ref())? {
        Artifact::Analysis(a) => Ok(a),
        _ => Err(wrong_kind(path.as_ref(), ArtifactKind::Analysis)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 1e300, f64::MIN_POSITIVE, 0.0, -0.0] {
            let s = format!("{v:.16e}");
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits());
        }
    }

    #[test]
    fn header_errors() {
        let e = parse_artifact("svq-artifact model 2\nend\n", "f").unwrap_err();
        assert!(matches!(e, SvqError::UnsupportedVersion { found: 2, supported: 1, .. }));
        let e = parse_artifact("svq-artifact banana 1\nend\n", "f").unwrap_err();
        assert!(matches!(e, SvqError::UnknownKind { .. }));
        let e = parse_artifact("hello\n", "f").unwrap_err();
        assert!(matches!(e, SvqError::Parse { line: 1, .. }));
    }

    #[test]
    fn missing_trailer_is_truncation() {
        let e = parse_artifact("svq-artifact trace 1\nstages 1\nrecords 0\nfinal none\n", "f").unwrap_err();
        assert!(matches!(e, SvqError::Truncated { offset: 51, .. }), "{e}");
    }
}
