//! End-to-end checks of the `ntn-kb` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ntn_kb::checkpoint::Checkpoint;
use ntn_kb::Triplet;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ntn-kb"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Value of the first `key<TAB>value` line.
fn value(text: &str, key: &str) -> String {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}\t")))
        .unwrap_or_else(|| panic!("no `{key}` in:\n{text}"))
        .to_owned()
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures/synthetic")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// A five-entity cycle under one relation, used for train, dev and test.
struct Memorized {
    _dir: tempfile::TempDir,
    split: PathBuf,
    checkpoint: PathBuf,
    thresholds: PathBuf,
    root: PathBuf,
}

fn memorized() -> Memorized {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().to_path_buf();
    let split = root.join("cycle.tsv");
    fs::write(&split, "a\tnext\tb\nb\tnext\tc\nc\tnext\td\nd\tnext\te\ne\tnext\ta\n").unwrap();
    let checkpoint = root.join("m.ntkb");
    let thresholds = root.join("th.tsv");
    let out = run(&[
        "train",
        "--train",
        p(&split),
        "--dev",
        p(&split),
        "--test",
        p(&split),
        "--dim",
        "5",
        "--slices",
        "2",
        "--corruptions",
        "4",
        "--epochs",
        "20",
        "--batch",
        "5",
        "--seed",
        "3",
        "--out",
        p(&checkpoint),
        "--thresholds-out",
        p(&thresholds),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(value(&stdout(&out), "dev_accuracy"), "1");
    Memorized {
        _dir: dir,
        split,
        checkpoint,
        thresholds,
        root,
    }
}

#[test]
fn word_average_requires_vectors() {
    let out = run(&[
        "train",
        "--train",
        "x",
        "--dev",
        "x",
        "--test",
        "x",
        "--out",
        "y",
        "--init",
        "word-average",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--vectors"));
}

#[test]
fn missing_required_flag_is_usage_error() {
    let out = run(&["train", "--train", "x", "--dev", "x", "--out", "y"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn malformed_split_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.tsv");
    fs::write(&bad, "a\tr\tb\na\tr\n").unwrap();
    let out = run(&[
        "train",
        "--train",
        p(&bad),
        "--dev",
        p(&bad),
        "--test",
        p(&bad),
        "--out",
        p(&dir.path().join("o")),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains(":2"), "{}", stderr(&out));
}

#[test]
fn memorized_kb_ranks_perfectly() {
    let m = memorized();
    let out = run(&[
        "eval-rank",
        "--checkpoint",
        p(&m.checkpoint),
        "--test",
        p(&m.split),
        "--k",
        "1,2,5",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let recalls: Vec<f64> = ["recall@1", "recall@2", "recall@5"]
        .iter()
        .map(|k| value(&text, k).parse().unwrap())
        .collect();
    assert_eq!(recalls, vec![1.0, 1.0, 1.0]);
    assert_eq!(value(&text, "mean_rank"), "1");
}

#[test]
fn score_matches_library_and_gives_verdicts() {
    let m = memorized();
    let ck = Checkpoint::load(&m.checkpoint).unwrap();
    let score = |l: &str, r: &str| {
        let out = run(&[
            "score",
            "--checkpoint",
            p(&m.checkpoint),
            "--left",
            l,
            "--relation",
            "next",
            "--right",
            r,
            "--thresholds",
            p(&m.thresholds),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        stdout(&out)
    };
    let known = score("a", "b");
    assert_eq!(value(&known, "verdict"), "true");
    let id = |n: &str| ck.entities.get(n).unwrap();
    let lib = ck.params.plausibility(&Triplet::new(id("a"), 0, id("b")));
    assert_eq!(value(&known, "plausibility").parse::<f64>().unwrap(), lib);
    assert_eq!(value(&score("a", "d"), "verdict"), "false");

    let table = fs::read_to_string(&m.thresholds).unwrap();
    assert_eq!(table.lines().count(), 1);
    assert!(table.starts_with("next\t"));
}

#[test]
fn score_out_of_kb_entity() {
    let m = memorized();
    let vectors = m.root.join("vec.txt");
    fs::write(&vectors, "new 0.1 0.2 0.3 0.4 0.5\nthing -0.1 0 0 0 1\n").unwrap();
    let base = [
        "score",
        "--checkpoint",
        p(&m.checkpoint),
        "--left",
        "new_thing",
        "--relation",
        "next",
        "--right",
        "a",
    ];
    let out = run(&base);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("new_thing"));

    let mut with_vectors = base.to_vec();
    with_vectors.extend(["--vectors", p(&vectors)]);
    let out = run(&with_vectors);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(value(&stdout(&out), "plausibility").parse::<f64>().unwrap().is_finite());

    let out = run(&[
        "score",
        "--checkpoint",
        p(&m.checkpoint),
        "--left",
        "a",
        "--relation",
        "prev",
        "--right",
        "b",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("prev"));
}

#[test]
fn eval_rank_rejects_unknown_entity() {
    let m = memorized();
    let test = m.root.join("unknown.tsv");
    fs::write(&test, "a\tnext\tzebra\n").unwrap();
    let out = run(&["eval-rank", "--checkpoint", p(&m.checkpoint), "--test", p(&test)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("zebra"));
}

#[test]
fn corrupt_checkpoint_is_rejected() {
    let m = memorized();
    let mut bytes = fs::read(&m.checkpoint).unwrap();
    let n = bytes.len();
    bytes[n - 20] ^= 0x40;
    fs::write(&m.checkpoint, bytes).unwrap();
    let out = run(&["eval-rank", "--checkpoint", p(&m.checkpoint), "--test", p(&m.split)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("checksum"), "{}", stderr(&out));
}

#[test]
fn gradcheck_passes_fails_and_repeats() {
    let args = [
        "gradcheck",
        "--model",
        "ntn",
        "--dim",
        "4",
        "--slices",
        "3",
        "--trials",
        "100",
    ];
    let a = run(&args);
    assert_eq!(a.status.code(), Some(0), "{}", stdout(&a));
    let b = run(&args);
    assert_eq!(stdout(&a), stdout(&b));

    let mut broken = args.to_vec();
    broken.push("--corrupt-gradient");
    let c = run(&broken);
    assert_eq!(c.status.code(), Some(1));
    assert!(stdout(&c).contains("failed_coordinate"));
}

fn train_fixture(dir: &Path, model: &str, seed: &str) -> PathBuf {
    let out_path = dir.join(format!("{model}-{seed}.ntkb"));
    let out = run(&[
        "train",
        "--train",
        &fixture("train.tsv"),
        "--dev",
        &fixture("dev.tsv"),
        "--test",
        &fixture("test.tsv"),
        "--model",
        model,
        "--dim",
        "8",
        "--slices",
        "2",
        "--corruptions",
        "5",
        "--epochs",
        "30",
        "--batch",
        "1000",
        "--seed",
        seed,
        "--out",
        p(&out_path),
        "--metrics-out",
        p(&dir.join("metrics.tsv")),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    out_path
}

#[test]
fn fixture_classification_and_metrics_log() {
    let dir = tempfile::tempdir().unwrap();
    let ck = train_fixture(dir.path(), "ntn", "0");
    let metrics = fs::read_to_string(dir.path().join("metrics.tsv")).unwrap();
    assert_eq!(metrics.lines().count(), 30);
    for (i, line) in metrics.lines().enumerate() {
        let cols: Vec<&str> = line.split('\t').collect();
        assert_eq!(cols.len(), 3);
        assert_eq!(cols[0], (i + 1).to_string());
    }

    let mut accs = Vec::new();
    for neg_seed in 0..5 {
        let out = run(&[
            "eval-class",
            "--checkpoint",
            p(&ck),
            "--dev",
            &fixture("dev.tsv"),
            "--test",
            &fixture("test.tsv"),
            "--train",
            &fixture("train.tsv"),
            "--neg-seed",
            &neg_seed.to_string(),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        let text = stdout(&out);
        assert!(text.contains("relation\t_type_of"));
        accs.push(value(&text, "accuracy").parse::<f64>().unwrap());
    }
    let mean = accs.iter().sum::<f64>() / 5.0;
    let sd = (accs.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / 5.0).sqrt();
    assert!(mean >= 0.9, "{accs:?}");
    assert!(sd < 0.02, "{accs:?}");
}

#[test]
fn word_average_training_runs() {
    let dir = tempfile::tempdir().unwrap();
    let vectors = dir.path().join("vec.txt");
    let mut text = String::from("6 4\n");
    for (i, w) in ["animal", "tool", "food", "plant", "vehicle", "kind"]
        .iter()
        .enumerate()
    {
        text.push_str(&format!("{w} {} 0.1 -0.2 0.05\n", i as f64 / 10.0));
    }
    fs::write(&vectors, text).unwrap();
    let out = run(&[
        "train",
        "--train",
        &fixture("train.tsv"),
        "--dev",
        &fixture("dev.tsv"),
        "--test",
        &fixture("test.tsv"),
        "--dim",
        "4",
        "--slices",
        "1",
        "--epochs",
        "2",
        "--init",
        "word-average",
        "--vectors",
        p(&vectors),
        "--out",
        p(&dir.path().join("w.ntkb")),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
}
