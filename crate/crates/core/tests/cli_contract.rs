mod common;

use std::io::{BufRead, BufReader};
use std::path::Path;
use std::process::{Child, Command, Stdio};

use gene_atlas::schema::CostumeRecord;
use serde_json::{json, Value};

use common::{cli, fixture_dir, fixture_records, stdout_json};

fn dir_arg(dir: &Path) -> &str {
    dir.to_str().unwrap()
}

fn write_json(path: &Path, value: &Value) {
    std::fs::write(path, serde_json::to_vec_pretty(value).unwrap()).unwrap();
}

fn draft(record: &CostumeRecord, coder: &str) -> Value {
    let mut surface = serde_json::to_value(&record.surface).unwrap();
    surface.as_object_mut().unwrap().remove("color_profile");
    json!({
        "coder_id": coder,
        "costume_id": "GA-0500",
        "surface": surface,
        "middle": record.middle,
        "inner": record.inner,
    })
}

/// Metadata, text and two drafts; `b_forms` replaces coder B's forms.
fn ingest_inputs(dir: &Path, b_forms: Option<Value>) -> Vec<String> {
    let record = &fixture_records()[4];
    let meta = dir.join("meta.json");
    let text = dir.join("text.txt");
    let a = dir.join("a.json");
    let b = dir.join("b.json");
    write_json(&meta, &json!({ "id": "GA-0500", "title": "Dong Festival Tunic", "ethnic_group": "Dong" }));
    std::fs::write(&text, "A tunic worn at the drum tower gathering.").unwrap();
    write_json(&a, &draft(record, "a"));
    let mut db = draft(record, "b");
    if let Some(forms) = b_forms {
        db["surface"]["forms"] = forms;
    }
    write_json(&b, &db);
    [("--meta", meta), ("--text", text), ("--draft-a", a), ("--draft-b", b)]
        .into_iter()
        .flat_map(|(flag, p)| [flag.to_string(), p.display().to_string()])
        .collect()
}

fn run_ingest(data: &Path, inputs: &[String], extra: &[&str]) -> std::process::Output {
    let mut args = vec!["ingest", "--data-dir", dir_arg(data)];
    args.extend(inputs.iter().map(String::as_str));
    args.extend_from_slice(extra);
    cli(&args)
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["browse"],
        vec!["browse", "--data-dir", "x", "--tag", "Form:Cape"],
        vec!["browse", "--data-dir", "x", "--tag", "Form:Hat", "--page-size", "101"],
        vec!["search", "--data-dir", "x", "--q", "   "],
        vec!["generate", "--data-dir", "x", "--costume", "GA-0001", "--theme", "Harvest", "--concept", "Harmony"],
        vec!["frobnicate"],
    ] {
        let out = cli(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(out.stdout.is_empty());
        let stderr = String::from_utf8_lossy(&out.stderr);
        assert_eq!(stderr.trim().lines().count(), 1, "{args:?}: {stderr}");
    }
    assert_eq!(cli(&["--help"]).status.code(), Some(0));
    assert_eq!(cli(&["--version"]).status.code(), Some(0));
}

#[test]
fn browse_and_search_match_library() {
    let dir = fixture_dir();
    let index = gene_atlas::explore::GeneIndex::build(&fixture_records()).unwrap();
    let out = cli(&["browse", "--data-dir", dir_arg(dir.path()), "--tag", "form:hat", "--page-size", "100"]);
    assert!(out.status.success());
    let want = index.browse_by_tag("Form:Hat".parse().unwrap(), gene_atlas::explore::PageRequest::new(1, 100).unwrap());
    assert_eq!(stdout_json(&out), serde_json::to_value(want).unwrap());

    let out = cli(&["search", "--data-dir", dir_arg(dir.path()), "--q", "silk"]);
    assert!(out.status.success());
    let doc = stdout_json(&out);
    assert!(doc["total"].as_u64().unwrap() > 0);
    assert!(doc["hits"].as_array().unwrap().len() <= 20);
}

#[test]
fn colors_on_uniform_blue_png() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("blue.png");
    image::RgbImage::from_pixel(8, 8, image::Rgb([0, 0, 255])).save(&path).unwrap();
    let out = cli(&["colors", "--image", path.to_str().unwrap(), "--k", "3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = stdout_json(&out);
    assert_eq!(doc["dominant_hex"], "#0000FF");
    assert_eq!(doc["perceptual_class"], "Cool");

    let out = cli(&["colors", "--image", dir.path().join("missing.png").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout_json(&out)["code"], "decode_error");
}

#[test]
fn ingest_requires_decisions_for_conflicts() {
    let dir = fixture_dir();
    let inputs = ingest_inputs(dir.path(), Some(json!(["Top", "Hat"])));
    let out = run_ingest(dir.path(), &inputs, &[]);
    assert_eq!(out.status.code(), Some(1));
    let doc = stdout_json(&out);
    assert_eq!(doc["code"], "unresolved_conflicts");
    assert!(!doc["undecided"].as_array().unwrap().is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: "));

    let decisions = dir.path().join("decisions.json");
    let choices: serde_json::Map<String, Value> =
        doc["undecided"].as_array().unwrap().iter().map(|p| (p.as_str().unwrap().to_string(), json!("B"))).collect();
    write_json(&decisions, &Value::Object(choices));
    let out = run_ingest(dir.path(), &inputs, &["--decisions", decisions.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let doc = stdout_json(&out);
    assert_eq!(doc["record"]["surface"]["forms"], json!(["Top", "Hat"]));

    let out = run_ingest(dir.path(), &inputs, &["--decisions", decisions.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout_json(&out)["code"], "duplicate_id");
}

#[test]
fn ingest_agreeing_drafts_with_image() {
    let dir = fixture_dir();
    let image = dir.path().join("red.png");
    image::RgbImage::from_pixel(4, 4, image::Rgb([200, 20, 20])).save(&image).unwrap();
    let inputs = ingest_inputs(dir.path(), None);
    let out = run_ingest(dir.path(), &inputs, &["--image", image.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let doc = stdout_json(&out);
    assert_eq!(doc["report"]["agreement_rate"], 1.0);
    assert_eq!(doc["record"]["surface"]["color_profile"]["dominant_hex"], "#C81414");
    assert_eq!(doc["record"]["image_refs"], json!([image.display().to_string()]));
}

#[test]
fn generate_errors_and_artifact_log() {
    let dir = fixture_dir();
    let base = ["generate", "--data-dir", dir_arg(dir.path())];
    let run = |extra: &[&str]| {
        let mut args = base.to_vec();
        args.extend_from_slice(extra);
        cli(&args)
    };
    let out = run(&["--costume", "GA-9999", "--theme", "festive", "--concept", "harmony"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout_json(&out)["code"], "unknown_costume");

    let records = fixture_records();
    let (id, theme) = records
        .iter()
        .find_map(|r| {
            let have = gene_atlas::narrative::available_themes(r);
            gene_atlas::narrative::Theme::ALL.iter().find(|t| !have.contains(t)).map(|t| (r.id.clone(), t.name()))
        })
        .unwrap();
    let out = run(&["--costume", &id, "--theme", theme, "--concept", "harmony"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout_json(&out)["code"], "theme_unavailable");

    let theme = gene_atlas::narrative::available_themes(&records[0])[0].name();
    let args = ["--costume", "GA-0001", "--theme", theme, "--concept", "rule of law", "--seed", "4"];
    let first = stdout_json(&run(&args));
    let second = stdout_json(&run(&args));
    assert_eq!(first["artifact"]["story"], second["artifact"]["story"]);
    assert_eq!(first["scaffold"]["passed"], true);
    assert_eq!((first["artifact_id"].as_u64(), second["artifact_id"].as_u64()), (Some(1), Some(2)));
}

#[test]
fn seed_corpus_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        let out = cli(&["seed-corpus", "--data-dir", dir_arg(d), "--n", "40", "--seed", "3"]);
        assert!(out.status.success());
        assert_eq!(stdout_json(&out)["records"], 40);
    }
    assert_eq!(std::fs::read(a.join("corpus.jsonl")).unwrap(), std::fs::read(b.join("corpus.jsonl")).unwrap());
}

#[test]
fn taxonomy_output() {
    let out = cli(&["taxonomy"]);
    assert!(out.status.success());
    assert_eq!(stdout_json(&out), gene_atlas::schema::vocabulary_document());
    let out = cli(&["taxonomy", "--category", "form"]);
    assert_eq!(stdout_json(&out)["values"], json!(["Top", "Pants", "Skirt", "Shoes", "Hat", "Accessory"]));
    let out = cli(&["taxonomy", "--category", "fabric"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout_json(&out)["code"], "unknown_category");
}

struct Server(Child);

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.0.kill();
        let _ = self.0.wait();
    }
}

fn start_server(dir: &Path) -> (Server, String) {
    let mut child = Command::new(env!("CARGO_BIN_EXE_gene-atlas"))
        .args(["serve", "--data-dir", dir_arg(dir), "--port", "0"])
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let mut reader = BufReader::new(child.stdout.take().unwrap());
    let mut text = String::new();
    while !text.trim_end().ends_with('}') {
        assert!(reader.read_line(&mut text).unwrap() > 0, "server exited early");
    }
    let url = serde_json::from_str::<Value>(&text).unwrap()["listening"].as_str().unwrap().to_string();
    (Server(child), url)
}

#[test]
fn server_holds_the_data_directory_lock() {
    let dir = fixture_dir();
    let (_server, url) = start_server(dir.path());

    let body: Value = reqwest::blocking::get(format!("{url}/api/costumes?page_size=5")).unwrap().json().unwrap();
    assert_eq!(body["total"], 100);

    let inputs = ingest_inputs(dir.path(), None);
    let out = run_ingest(dir.path(), &inputs, &[]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout_json(&out)["code"], "lock_held");

    let out = cli(&["serve", "--data-dir", dir_arg(dir.path()), "--port", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout_json(&out)["code"], "lock_held");

    // Readers do not need the lock.
    let out = cli(&["browse", "--data-dir", dir_arg(dir.path()), "--tag", "Color:Warm"]);
    assert!(out.status.success());
}
