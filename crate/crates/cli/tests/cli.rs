use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use talentbayes::canonical::to_canonical_string;
use talentbayes::{
    deserialize, evaluate, load_dataset, parse_schema, predict, serialize, train, Instance,
    TrainConfig,
};
use talentbayes_cli::{run, EXIT_DATA, EXIT_INTERNAL, EXIT_OK, EXIT_USAGE};

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_talentbayes"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch() -> tempfile::TempDir {
    tempfile::tempdir().unwrap()
}

fn path_in(dir: &tempfile::TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn train_ds6(dir: &tempfile::TempDir) -> String {
    let model = path_in(dir, "m.json").to_string_lossy().into_owned();
    let o = bin(&[
        "train",
        "--data",
        &fixture("ds6.csv"),
        "--schema",
        &fixture("ds6.schema.json"),
        "--out",
        &model,
    ]);
    assert_eq!(o.status.code(), Some(EXIT_OK), "{o:?}");
    model
}

#[test]
fn train_writes_the_library_model() {
    let dir = scratch();
    let model_path = train_ds6(&dir);
    let written = std::fs::read_to_string(&model_path).unwrap();
    let schema = parse_schema(&std::fs::read_to_string(fixture("ds6.schema.json")).unwrap()).unwrap();
    let data = load_dataset(&std::fs::read_to_string(fixture("ds6.csv")).unwrap(), &schema, true).unwrap();
    assert_eq!(written, serialize(&train(&data, TrainConfig::default()).unwrap()));
    // Only the model itself remains; the temporary file was renamed.
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn predict_text_and_json() {
    let dir = scratch();
    let model = train_ds6(&dir);
    let o = bin(&["predict", "--model", &model, "--input", "skill=high,experience=junior"]);
    assert_eq!(o.status.code(), Some(EXIT_OK));
    let text = stdout(&o);
    assert!(text.contains("good 0.7033"), "{text}");
    assert!(text.contains("poor 0.2967"), "{text}");

    let o = bin(&["--format", "json", "predict", "--model", &model, "--input", "skill=high,experience=?"]);
    let loaded = deserialize(&std::fs::read_to_string(&model).unwrap()).unwrap();
    let expected = predict(&loaded, &Instance::new().with("skill", "high")).unwrap();
    assert_eq!(stdout(&o), to_canonical_string(&expected) + "\n");
}

#[test]
fn evaluate_prints_resubstitution_accuracy() {
    let dir = scratch();
    let model = train_ds6(&dir);
    let o = bin(&["evaluate", "--model", &model, "--data", &fixture("ds6.csv")]);
    assert_eq!(o.status.code(), Some(EXIT_OK));
    assert!(stdout(&o).starts_with("accuracy 1.000"));

    let o = bin(&["--format", "json", "evaluate", "--model", &model, "--data", &fixture("ds6.csv")]);
    let loaded = deserialize(&std::fs::read_to_string(&model).unwrap()).unwrap();
    let schema = loaded.schema().clone();
    let data = load_dataset(&std::fs::read_to_string(fixture("ds6.csv")).unwrap(), &schema, true).unwrap();
    assert_eq!(stdout(&o), to_canonical_string(&evaluate(&loaded, &data).unwrap()) + "\n");
}

#[test]
fn cross_validation_from_the_command_line() {
    let args = [
        "--format",
        "json",
        "evaluate",
        "--data",
        &fixture("demo.csv"),
        "--schema",
        &fixture("demo.schema.json"),
        "--folds",
        "5",
        "--seed",
        "9",
    ];
    let a = bin(&args);
    assert_eq!(a.status.code(), Some(EXIT_OK));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(doc["cross_validation"]["folds"].as_array().unwrap().len(), 5);
    assert_eq!(stdout(&a), stdout(&bin(&args)));
}

#[test]
fn explain_whatif_recommend() {
    let dir = scratch();
    let model = train_ds6(&dir);
    let o = bin(&["explain", "--model", &model, "--top-k", "1"]);
    let text = stdout(&o);
    assert!(text.contains("IF skill=high THEN good  (confidence=0.8421, support=3)"), "{text}");
    assert!(!text.contains("experience=senior THEN"));
    assert!(text.contains("0.4591 bits"));

    let o = bin(&["whatif", "--model", &model, "--input", "skill=low,experience=junior", "--set", "skill=high"]);
    assert!(stdout(&o).contains("good 0.2832 -> 0.7033 (+0.4201)"), "{}", stdout(&o));

    let o = bin(&["recommend", "--model", &model, "--pool", &fixture("ds6_pool.csv"), "--team-size", "2"]);
    let text = stdout(&o);
    let p1 = text.find("P1").unwrap();
    let p2 = text.find("P2").unwrap();
    assert!(p1 < p2, "{text}");

    let o = bin(&["recommend", "--model", &model, "--pool", &fixture("ds6_pool.csv"), "--team-size", "2", "--threshold", "0.8"]);
    assert!(stdout(&o).contains("undersized"));
}

#[test]
fn generate_is_deterministic() {
    let dir = scratch();
    let a = path_in(&dir, "a.csv").to_string_lossy().into_owned();
    let b = path_in(&dir, "b.csv").to_string_lossy().into_owned();
    for out in [&a, &b] {
        let o = bin(&["generate", "--spec", &fixture("demo.spec.json"), "--n", "400", "--out", out]);
        assert_eq!(o.status.code(), Some(EXIT_OK));
    }
    let a = std::fs::read(&a).unwrap();
    assert_eq!(a, std::fs::read(&b).unwrap());
    // The committed demo data is this exact output.
    assert_eq!(a, std::fs::read(fixture("demo.csv")).unwrap());
}

#[test]
fn exit_codes() {
    let dir = scratch();
    let model = train_ds6(&dir);
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut code = |args: &[&str]| {
        let mut argv = vec!["talentbayes"];
        argv.extend_from_slice(args);
        run(argv, &mut out, &mut err)
    };

    assert_eq!(code(&["predict", "--model", &model, "--bogus"]), EXIT_USAGE);
    assert_eq!(code(&["predict", "--model", &model]), EXIT_USAGE);
    assert_eq!(code(&["evaluate", "--data", "x.csv"]), EXIT_USAGE);
    assert_eq!(code(&["frobnicate"]), EXIT_USAGE);
    assert_eq!(code(&["--help"]), EXIT_OK);

    assert_eq!(code(&["predict", "--model", "/no/such/model.json", "--input", "skill=high"]), EXIT_DATA);
    assert_eq!(code(&["predict", "--model", &model, "--input", "charisma=high"]), EXIT_DATA);
    assert_eq!(code(&["predict", "--model", &model, "--input", "skill\\x=high"]), EXIT_DATA);
    assert_eq!(
        code(&["recommend", "--model", &model, "--pool", &fixture("ds6_pool.csv"), "--team-size", "1", "--target", "great"]),
        EXIT_DATA
    );

    let broken = path_in(&dir, "broken.json");
    let text = std::fs::read_to_string(&model).unwrap().replace(r#""n":6"#, r#""n":7"#);
    std::fs::write(&broken, text).unwrap();
    assert_eq!(
        code(&["predict", "--model", broken.to_str().unwrap(), "--input", "skill=high"]),
        EXIT_INTERNAL
    );
}

#[test]
fn messages_go_to_stderr() {
    let o = bin(&["predict", "--model", "/no/such/model.json", "--input", "skill=high"]);
    assert_eq!(o.status.code(), Some(EXIT_DATA));
    assert!(o.stdout.is_empty());
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error: cannot read"));
}

#[test]
fn pool_prediction_lists_every_candidate() {
    let o = bin(&["--format", "json", "predict", "--model", &fixture("demo.model.json"), "--pool", &fixture("demo_pool.csv")]);
    assert_eq!(o.status.code(), Some(EXIT_OK));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc.as_array().unwrap().len(), 8);
    assert_eq!(doc[0]["id"], "E01");
}
