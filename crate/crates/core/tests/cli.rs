use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use svq::io;

const BIN: &str = env!("CARGO_BIN_EXE_svq");

const SMALL: &str = r#"
name = "small"
out_dir = "small"

[dataset]
generator = "circle"
seed = 3
count = 200

[chain]
layers = [2, 4]
samples = [5]
lambdas = [1.0]

[schedule]
epochs = 20
steps = [{ weights = 1.0, biases = 1.0, recon = 1.0 }]
decay = 0.99
decay_start = [0.1]
init_range = 0.1
seed = 2

[train]
seeds = [2]

[analysis]
grid = 16
"#;

fn svq(args: &[&str], root: &Path) -> Output {
    Command::new(BIN)
        .args(args)
        .env("SVQ_OUT_DIR", root)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("small.cfg");
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

fn files_under(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().display().to_string();
                out.push((rel, fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn gen_data_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["gen-data", "--preset", "circle", "--count", "1000", "--seed", "7"];
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for out in [&a, &b] {
        let mut full = args.to_vec();
        let o = out.display().to_string();
        full.extend(["--out", &o]);
        let r = svq(&full, tmp.path());
        assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    }
    let da = fs::read(a.join("dataset.svq")).unwrap();
    assert_eq!(da, fs::read(b.join("dataset.svq")).unwrap());
    let ds = io::load_dataset(a.join("dataset.svq")).unwrap();
    assert_eq!((ds.len(), ds.seed), (1000, 7));
}

#[test]
fn hier_preset_generates_eight_dimensional_data() {
    let tmp = tempfile::tempdir().unwrap();
    let r = svq(&["gen-data", "--preset", "hier-phases", "--count", "500", "--seed", "1"], tmp.path());
    assert!(r.status.success());
    let ds = io::load_dataset(tmp.path().join("hier/dataset.svq")).unwrap();
    assert_eq!(ds.samples[0].data.len(), 8);
    assert_eq!(ds.len(), 500);
}

#[test]
fn zero_epochs_returns_initialisation() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let r = svq(&["train", "--config", &cfg, "--epochs", "0"], tmp.path());
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let model = io::load_model(tmp.path().join("small/model.svq")).unwrap();
    let trace = io::load_trace(tmp.path().join("small/trace.svq")).unwrap();
    assert!(trace.is_empty());
    let parsed = svq::config::ExperimentConfig::from_toml(SMALL, "t").unwrap();
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(2);
    let init = svq::ChainNetwork::random(&parsed.chain, 0.1, &mut rng).unwrap();
    assert_eq!(model.chain, init);
}

#[test]
fn rerun_from_resolved_config_is_bit_exact() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let first = tmp.path().join("first");
    let f = first.display().to_string();
    let r = svq(&["run", "--config", &cfg, "--out", &f], tmp.path());
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let resolved = first.join("resolved.cfg").display().to_string();
    let second = tmp.path().join("second");
    let s = second.display().to_string();
    let r = svq(&["run", "--config", &resolved, "--out", &s], tmp.path());
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));

    let a: Vec<_> = files_under(&first).into_iter().filter(|(n, _)| n != "resolved.cfg").collect();
    let b: Vec<_> = files_under(&second).into_iter().filter(|(n, _)| n != "resolved.cfg").collect();
    assert!(a.iter().any(|(n, _)| n == "model.svq"));
    assert!(a.iter().any(|(n, _)| n.starts_with("plots")));
    assert_eq!(a, b);
    let strip = |p: &Path| {
        fs::read_to_string(p.join("resolved.cfg"))
            .unwrap()
            .lines()
            .filter(|l| !l.starts_with("out_dir"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(&first), strip(&second));
}

#[test]
fn exit_codes_are_distinct() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();

    let usage = svq(&["train", "--bogus"], root);
    assert_eq!(usage.status.code(), Some(2));

    let bad = write_config(root, &SMALL.replace("count = 200", "count = 0"));
    assert_eq!(svq(&["gen-data", "--config", &bad], root).status.code(), Some(3));
    assert_eq!(svq(&["train", "--preset", "nope"], root).status.code(), Some(3));

    let cfg = write_config(root, SMALL);
    let missing = svq(&["analyze", "--config", &cfg], root);
    assert_eq!(missing.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("model.svq"));

    let wild = write_config(
        root,
        &SMALL.replace("weights = 1.0, biases = 1.0, recon = 1.0", "weights = 1e300, biases = 1e300, recon = 1e300"),
    );
    assert_eq!(svq(&["train", "--config", &wild], root).status.code(), Some(5));

    let check = write_config(
        root,
        &SMALL
            .replace("seeds = [2]", "seeds = [2]\nstructure_check = \"circle-arcs\"")
            .replace("init_range = 0.1", "init_range = 0.0"),
    );
    let r = svq(&["train", "--config", &check, "--epochs", "0"], root);
    assert_eq!(r.status.code(), Some(6), "{}", String::from_utf8_lossy(&r.stderr));
    assert!(root.join("small/train_report.txt").is_file());
}
