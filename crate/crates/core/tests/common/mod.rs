//! Fixtures and full-scan oracles shared by the integration tests.
#![allow(dead_code)]

use std::process::{Command, Output};

use gene_atlas::explore::{indexed_text, tokenize};
use gene_atlas::schema::{CostumeRecord, GeneTag, TagCategory};
use gene_atlas::store::{Corpus, Store};
use gene_atlas::synth::synthetic_corpus;

pub const FIXTURE_N: usize = 100;
pub const FIXTURE_SEED: u64 = 7;

pub fn fixture_records() -> Vec<CostumeRecord> {
    synthetic_corpus(FIXTURE_N, FIXTURE_SEED)
}

/// Data directory holding the fixture corpus.
pub fn fixture_dir() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let mut store = Store::open(dir.path()).unwrap();
    store.reset(Corpus::from_records(fixture_records()).unwrap()).unwrap();
    dir
}

pub fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gene-atlas")).args(args).output().unwrap()
}

pub fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

/// Ids carrying `tag`, ascending.
pub fn oracle_browse(records: &[CostumeRecord], tag: GeneTag) -> Vec<String> {
    let mut ids: Vec<String> = records.iter().filter(|r| r.tags().contains(&tag)).map(|r| r.id.clone()).collect();
    ids.sort();
    ids
}

/// Every record containing all distinct query tokens, scored by summed
/// frequency, ordered by score descending then id.
pub fn oracle_search(records: &[CostumeRecord], query: &str) -> Vec<(String, u32)> {
    let mut tokens = tokenize(query);
    tokens.sort();
    tokens.dedup();
    let mut hits: Vec<(String, u32)> = records
        .iter()
        .filter_map(|r| {
            let words: Vec<String> = indexed_text(r).into_iter().flat_map(tokenize).collect();
            let mut score = 0u32;
            for t in &tokens {
                let tf = words.iter().filter(|w| *w == t).count() as u32;
                if tf == 0 {
                    return None;
                }
                score += tf;
            }
            Some((r.id.clone(), score))
        })
        .collect();
    hits.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    hits
}

/// For each of the record's tags in `category`, every other record with it.
pub fn oracle_related(records: &[CostumeRecord], id: &str, category: TagCategory) -> Vec<(GeneTag, Vec<String>)> {
    let record = records.iter().find(|r| r.id == id).unwrap();
    record
        .tags()
        .into_iter()
        .filter(|t| t.category() == category)
        .map(|t| (t, oracle_browse(records, t).into_iter().filter(|other| other != id).collect()))
        .collect()
}
