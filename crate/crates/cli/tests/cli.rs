use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_svgtok"));
    c.env_remove("SVGTOK_SEED").env_remove("SVGTOK_JOBS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn icons() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data/icons")
}

/// A small corpus copied into `dir`: `n` feather icons plus `extra` files.
fn corpus(dir: &Path, n: usize, extra: &[(&str, &str)]) -> PathBuf {
    let src = icons().join("feather");
    let out = dir.join("in");
    fs::create_dir_all(&out).unwrap();
    let mut names: Vec<_> = fs::read_dir(&src)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "svg"))
        .collect();
    names.sort();
    for p in names.into_iter().take(n) {
        fs::copy(&p, out.join(p.file_name().unwrap())).unwrap();
    }
    for (name, body) in extra {
        fs::write(out.join(name), body).unwrap();
    }
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn build_vocab_counts() {
    let o = run(&["build-vocab", "--canvas", "784", "--tolerance", "10"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "2450 tokens");
    let o = run(&["build-vocab", "--canvas", "100", "--tolerance", "0"]);
    assert_eq!(stdout(&o).trim(), "368 tokens");
}

#[test]
fn encode_decode_reproduces_preprocessed_tree() {
    let tmp = tempfile::tempdir().unwrap();
    let input = corpus(tmp.path(), 30, &[]);
    let (pre, enc, dec, seg) = (tmp.path().join("pre"), tmp.path().join("enc"), tmp.path().join("dec"), tmp.path().join("seg.json"));
    assert!(run(&["preprocess", s(&input), "-o", s(&pre)]).status.success());
    assert!(run(&["train-segments", s(&input), "--merges", "50", "--min-freq", "2", "-o", s(&seg)]).status.success());
    for format in ["text", "ids"] {
        let _ = fs::remove_dir_all(&enc);
        let _ = fs::remove_dir_all(&dec);
        assert!(run(&["encode", s(&input), "-o", s(&enc), "--segments", s(&seg), "--format", format]).status.success());
        assert!(run(&["decode", s(&enc), "-o", s(&dec), "--segments", s(&seg)]).status.success());
        let mut n = 0;
        for e in fs::read_dir(&pre).unwrap() {
            let p = e.unwrap().path();
            assert_eq!(fs::read(&p).unwrap(), fs::read(dec.join(p.file_name().unwrap())).unwrap(), "{}", p.display());
            n += 1;
        }
        assert_eq!(n, 30);
    }
}

#[test]
fn single_file_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let input = corpus(tmp.path(), 1, &[]);
    let svg = fs::read_dir(&input).unwrap().next().unwrap().unwrap().path();
    let t = |n: &str| tmp.path().join(n);
    assert!(run(&["preprocess", s(&svg), "-o", s(&t("pre.svg"))]).status.success());
    assert!(run(&["encode", s(&svg), "-o", s(&t("x.tok"))]).status.success());
    let text = fs::read_to_string(t("x.tok")).unwrap();
    assert!(text.starts_with("<svg>viewBox=0 0 784 784"));
    assert!(run(&["decode", s(&t("x.tok")), "-o", s(&t("dec.svg"))]).status.success());
    assert_eq!(fs::read(t("pre.svg")).unwrap(), fs::read(t("dec.svg")).unwrap());
}

#[test]
fn train_segments_respects_merge_budget() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("seg.json");
    let o = run(&["train-segments", s(&icons()), "--merges", "500", "--min-freq", "2", "-o", s(&out)]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let merges = v["merges"].as_array().unwrap().len();
    assert!(merges <= 500 && merges > 0);
    assert!(stdout(&o).starts_with(&format!("learned {merges} merges from 500 samples")));
}

#[test]
fn failing_samples_are_skipped() {
    let tmp = tempfile::tempdir().unwrap();
    let input = corpus(tmp.path(), 3, &[("broken.svg", "<svg><path d='M 1'/>"), ("script.svg", "<svg viewBox='0 0 1 1'><script/></svg>")]);
    let out = tmp.path().join("enc");
    let o = run(&["encode", s(&input), "-o", s(&out)]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().last().unwrap().split(", ").last().unwrap(), "2 failed");
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("broken.svg") && err.contains("[clean]"), "{err}");
    assert_eq!(fs::read_dir(&out).unwrap().count(), 3);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["encode"]).status.code(), Some(2));
    assert_eq!(run(&["--canvas", "0", "build-vocab"]).status.code(), Some(2));
    assert_eq!(run(&["train-segments", "x", "--min-freq", "0", "-o", "y"]).status.code(), Some(2));
    assert_eq!(run(&["--jobs", "0", "build-vocab"]).status.code(), Some(2));
    let o = run(&["encode", "/definitely/missing.svg", "-o", "/tmp/never"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/definitely/missing.svg"));
}

#[test]
fn stats_and_partition() {
    let tmp = tempfile::tempdir().unwrap();
    let input = corpus(tmp.path(), 20, &[]);
    let report = tmp.path().join("stats.json");
    let o = run(&["stats", s(&input), "--baseline", "bytes", "-o", s(&report)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["compression"]["n_samples"], 20);
    assert_eq!(v["compression"]["baseline"], "utf8_bytes");
    assert_eq!(v["compression"]["ratio_at_to_st"], 1.0);
    assert!(stdout(&o).contains("raw -> AT"));

    let part = tmp.path().join("part.jsonl");
    let o = run(&["partition", s(&input), "-o", s(&part)]);
    assert!(o.status.success());
    assert_eq!(fs::read_to_string(&part).unwrap().lines().count(), 20);
    assert!(stdout(&o).starts_with("partitioned 20 samples: S1="));
}

#[test]
fn init_embeddings_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let base = tmp.path().join("base.emb");
    let rows: Vec<f32> = (0..50 * 8).map(|i| ((i * 37 % 101) as f32 - 50.0) / 50.0).collect();
    fs::write(&base, svgtok_core::hmn::EmbeddingTable::new(50, 8, rows).unwrap().to_bytes()).unwrap();
    let out = |n: &str| tmp.path().join(n);
    let go = |o: &Path, jobs: &str| {
        let r = bin().env("SVGTOK_SEED", "11").env("SVGTOK_JOBS", jobs).args(["init-embeddings", "--base", s(&base), "-o", s(o)]).output().unwrap();
        assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
        stdout(&r)
    };
    assert_eq!(go(&out("a.emb"), "1").trim(), "initialized 2450 tokens with 8 dimensions");
    go(&out("b.emb"), "4");
    assert_eq!(fs::read(out("a.emb")).unwrap(), fs::read(out("b.emb")).unwrap());
    let man: serde_json::Value = serde_json::from_str(&fs::read_to_string(out("a.emb.manifest.json")).unwrap()).unwrap();
    assert_eq!(man["seed"], 11);
    assert_eq!(man["tokens"][0], "<svg>");
    let table = svgtok_core::hmn::EmbeddingTable::load(&out("a.emb")).unwrap();
    assert_eq!((table.rows(), table.cols()), (2450, 8));
}

#[test]
fn no_temp_files_left_behind() {
    let tmp = tempfile::tempdir().unwrap();
    let input = corpus(tmp.path(), 5, &[]);
    let out = tmp.path().join("pre");
    assert!(run(&["preprocess", s(&input), "-o", s(&out)]).status.success());
    let names: Vec<String> = fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    assert_eq!(names.len(), 5);
    assert!(names.iter().all(|n| n.ends_with(".svg")));
}
