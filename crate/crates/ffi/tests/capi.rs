use std::ffi::{c_char, CStr, CString};
use std::ptr;

use gene_atlas::store::{Corpus, Store};
use gene_atlas::synth::synthetic_corpus;
use gene_atlas_ffi::*;
use serde_json::Value;

fn take_json(p: *mut c_char) -> Value {
    assert!(!p.is_null());
    let text = unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned();
    unsafe { ga_string_free(p) };
    serde_json::from_str(&text).unwrap()
}

fn last_error() -> String {
    let p = ga_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn synthetic(n: u32) -> *mut GaAtlas {
    let mut atlas = ptr::null_mut();
    assert_eq!(unsafe { ga_atlas_synthetic(n, 7, &mut atlas) }, GaStatus::Ok);
    atlas
}

#[test]
fn synthetic_handle_browse_and_search() {
    let atlas = synthetic(100);
    assert_eq!(unsafe { ga_atlas_len(atlas) }, 100);

    let tag = CString::new("Form:Hat").unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { ga_browse(atlas, tag.as_ptr(), 1, 100, &mut out) }, GaStatus::Ok);
    let page = take_json(out);
    let total = page["total"].as_u64().unwrap();
    assert_eq!(page["ids"].as_array().unwrap().len() as u64, total);

    let q = CString::new("silk").unwrap();
    assert_eq!(unsafe { ga_search(atlas, q.as_ptr(), 1, 20, &mut out) }, GaStatus::Ok);
    assert!(take_json(out)["total"].as_u64().unwrap() > 0);

    unsafe { ga_atlas_free(atlas) };
}

#[test]
fn error_codes_and_last_error() {
    let atlas = synthetic(10);
    let mut out = ptr::null_mut();

    let bad = CString::new("Form:Cape").unwrap();
    assert_eq!(unsafe { ga_browse(atlas, bad.as_ptr(), 1, 20, &mut out) }, GaStatus::InvalidArgument);
    assert!(last_error().contains("Cape"));
    assert!(out.is_null());

    let tag = CString::new("Form:Hat").unwrap();
    assert_eq!(unsafe { ga_browse(atlas, tag.as_ptr(), 0, 20, &mut out) }, GaStatus::InvalidArgument);

    let missing = CString::new("GA-9999").unwrap();
    assert_eq!(unsafe { ga_costume(atlas, missing.as_ptr(), &mut out) }, GaStatus::NotFound);

    assert_eq!(unsafe { ga_costume(atlas, ptr::null(), &mut out) }, GaStatus::NullArgument);
    assert_eq!(unsafe { ga_browse(ptr::null(), tag.as_ptr(), 1, 20, &mut out) }, GaStatus::NullArgument);

    let invalid = [0xffu8, 0xfe, 0];
    assert_eq!(unsafe { ga_costume(atlas, invalid.as_ptr().cast(), &mut out) }, GaStatus::InvalidUtf8);

    let blank = CString::new("  ").unwrap();
    assert_eq!(unsafe { ga_search(atlas, blank.as_ptr(), 1, 20, &mut out) }, GaStatus::InvalidArgument);

    // A successful call clears the message.
    assert_eq!(unsafe { ga_taxonomy(&mut out) }, GaStatus::Ok);
    unsafe { ga_string_free(out) };
    assert!(ga_last_error().is_null());

    unsafe { ga_atlas_free(atlas) };
}

#[test]
fn costume_related_and_generate() {
    let atlas = synthetic(30);
    let id = CString::new("GA-0001").unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { ga_costume(atlas, id.as_ptr(), &mut out) }, GaStatus::Ok);
    let record = take_json(out);
    assert_eq!(record["id"], "GA-0001");

    let category = CString::new("material").unwrap();
    assert_eq!(unsafe { ga_related(atlas, id.as_ptr(), category.as_ptr(), &mut out) }, GaStatus::Ok);
    for group in take_json(out).as_array().unwrap() {
        assert!(group["tag"].as_str().unwrap().starts_with("Material:"));
        assert!(!group["ids"].as_array().unwrap().iter().any(|v| v == "GA-0001"));
    }

    let theme = record["middle"][0]["dimension"].as_str().unwrap().to_owned();
    let theme = match theme.as_str() {
        "ReligiousBeliefs" => "religious",
        "FestiveCeremonies" => "festive",
        _ => "artistic",
    };
    let request = serde_json::json!({
        "costume_id": "GA-0001",
        "context_theme": theme,
        "inner_concept": "Harmony",
        "seed": 3,
    });
    let request = CString::new(request.to_string()).unwrap();
    assert_eq!(unsafe { ga_generate_mock(atlas, request.as_ptr(), &mut out) }, GaStatus::Ok);
    let first = take_json(out);
    assert_eq!(first["scaffold"]["passed"], true);
    assert_eq!(unsafe { ga_generate_mock(atlas, request.as_ptr(), &mut out) }, GaStatus::Ok);
    assert_eq!(take_json(out)["artifact"]["story"], first["artifact"]["story"]);

    unsafe { ga_atlas_free(atlas) };
}

#[test]
fn theme_unavailable_status() {
    let corpus = synthetic_corpus(50, 7);
    let (record, theme) = corpus
        .iter()
        .find_map(|r| {
            let dims: Vec<_> = r.middle.iter().map(|m| m.dimension.name()).collect();
            ["ReligiousBeliefs", "FestiveCeremonies", "ArtsEntertainment"]
                .iter()
                .zip(["religious", "festive", "artistic"])
                .find(|(d, _)| !dims.contains(d))
                .map(|(_, t)| (r.id.clone(), t))
        })
        .expect("some record lacks a theme");
    let atlas = synthetic(50);
    let request = serde_json::json!({
        "costume_id": record, "context_theme": theme, "inner_concept": "Harmony",
    });
    let request = CString::new(request.to_string()).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { ga_generate_mock(atlas, request.as_ptr(), &mut out) }, GaStatus::ThemeUnavailable);
    unsafe { ga_atlas_free(atlas) };
}

#[test]
fn open_reads_store_directory() {
    let dir = tempfile::tempdir().unwrap();
    {
        let mut store = Store::open(dir.path()).unwrap();
        store.reset(Corpus::from_records(synthetic_corpus(12, 1)).unwrap()).unwrap();
    }
    let path = CString::new(dir.path().to_str().unwrap()).unwrap();
    let mut atlas = ptr::null_mut();
    assert_eq!(unsafe { ga_atlas_open(path.as_ptr(), &mut atlas) }, GaStatus::Ok);
    assert_eq!(unsafe { ga_atlas_len(atlas) }, 12);
    unsafe { ga_atlas_free(atlas) };

    std::fs::write(dir.path().join("corpus.jsonl"), "not json\n").unwrap();
    assert_eq!(unsafe { ga_atlas_open(path.as_ptr(), &mut atlas) }, GaStatus::MalformedDocument);
}

#[test]
fn validate_and_colors() {
    let mut out = ptr::null_mut();
    let doc = CString::new(r#"{"id":"GA-1"}"#).unwrap();
    assert_eq!(unsafe { ga_validate_record(doc.as_ptr(), &mut out) }, GaStatus::Ok);
    let report = take_json(out);
    assert_eq!(report["ok"], false);
    assert!(!report["violations"].as_array().unwrap().is_empty());

    let blue: Vec<u8> = [0u8, 0, 255].repeat(16);
    assert_eq!(unsafe { ga_extract_colors(blue.as_ptr(), 4, 4, 1, 0, &mut out) }, GaStatus::Ok);
    let profile = take_json(out);
    assert_eq!(profile["dominant_hex"], "#0000FF");

    assert_eq!(unsafe { ga_extract_colors(blue.as_ptr(), 4, 4, 0, 0, &mut out) }, GaStatus::InvalidArgument);
}

#[test]
fn version_and_header() {
    let v = unsafe { CStr::from_ptr(ga_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/gene_atlas.h")).unwrap();
    for name in [
        "ga_atlas_open",
        "ga_atlas_synthetic",
        "ga_atlas_free",
        "ga_atlas_len",
        "ga_costume",
        "ga_browse",
        "ga_search",
        "ga_related",
        "ga_generate_mock",
        "ga_validate_record",
        "ga_extract_colors",
        "ga_taxonomy",
        "ga_string_free",
        "ga_last_error",
        "ga_version",
        "typedef struct GaAtlas GaAtlas",
        "GA_STATUS_OK = 0",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = which_cc() else { return };
    let include = concat!(env!("CARGO_MANIFEST_DIR"), "/include");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("probe.c");
    std::fs::write(
        &src,
        "#include \"gene_atlas.h\"\nint probe(void) { GaAtlas *a = 0; return ga_atlas_synthetic(1, 0, &a) == GA_STATUS_OK; }\n",
    )
    .unwrap();
    let status = std::process::Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I", include])
        .arg(&src)
        .status()
        .unwrap();
    assert!(status.success());
}

fn which_cc() -> Result<&'static str, ()> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| std::process::Command::new(c).arg("--version").output().is_ok_and(|o| o.status.success()))
        .ok_or(())
}
