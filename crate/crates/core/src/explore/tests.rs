use proptest::prelude::*;

use super::*;
use crate::schema::{FormClass, SurfaceGenes};
use crate::synth::synthetic_corpus;

fn bare(id: &str, forms: &[FormClass], materials: &[MaterialClass]) -> CostumeRecord {
    CostumeRecord {
        id: id.into(),
        title: format!("Costume {id}"),
        ethnic_group: "Bai".into(),
        region: None,
        image_refs: vec![],
        surface: SurfaceGenes {
            forms: forms.iter().copied().collect(),
            materials: materials.iter().copied().collect(),
            ..SurfaceGenes::default()
        },
        middle: vec![],
        inner: Default::default(),
        source_text: String::new(),
    }
}

/// Naive scan: ids whose tokenized text contains every query token.
fn oracle_search(records: &[CostumeRecord], query: &str) -> Vec<(String, u32)> {
    let mut tokens = tokenize(query);
    tokens.sort();
    tokens.dedup();
    let mut hits: Vec<(String, u32)> = records
        .iter()
        .filter_map(|r| {
            let all: Vec<String> = indexed_text(r).into_iter().flat_map(tokenize).collect();
            let mut score = 0;
            for t in &tokens {
                let tf = all.iter().filter(|x| *x == t).count() as u32;
                if tf == 0 {
                    return None;
                }
                score += tf;
            }
            Some((r.id.clone(), score))
        })
        .collect();
    hits.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    hits
}

#[test]
fn tokenizer_examples() {
    assert_eq!(tokenize("Miao 苗族 silk"), ["miao", "苗族", "苗", "族", "silk"]);
    assert_eq!(tokenize("Dragon-pattern, SILK!"), ["dragon", "pattern", "silk"]);
    assert_eq!(tokenize("Arts & Entertainment"), ["arts", "entertainment"]);
    assert!(tokenize("  --  ").is_empty());
}

#[test]
fn empty_index() {
    let index = GeneIndex::build(&[]).unwrap();
    assert!(index.is_empty());
    for tag in GeneTag::all() {
        assert_eq!(index.browse_by_tag(tag, PageRequest::default()), BrowsePage { total: 0, ids: vec![] });
    }
}

#[test]
fn single_hat_record() {
    let records = [bare("A", &[FormClass::Hat], &[MaterialClass::Cloth])];
    let index = GeneIndex::build(&records).unwrap();
    assert_eq!(index.posting(GeneTag::Form(FormClass::Hat)), ["A"]);
    for &form in FormClass::ALL.iter().filter(|&&f| f != FormClass::Hat) {
        assert_eq!(index.tag_count(GeneTag::Form(form)), 0);
    }
}

#[test]
fn duplicate_ids_rejected() {
    let records = [bare("A", &[FormClass::Hat], &[]), bare("A", &[FormClass::Top], &[])];
    assert_eq!(GeneIndex::build(&records), Err(ExploreError::DuplicateId("A".into())));
}

#[test]
fn page_arithmetic() {
    let records: Vec<_> = (1..=45).map(|i| bare(&format!("C{i:02}"), &[FormClass::Top], &[])).collect();
    let index = GeneIndex::build(&records).unwrap();
    let page = index.browse_by_tag(GeneTag::Form(FormClass::Top), PageRequest::new(3, 20).unwrap());
    assert_eq!(page.total, 45);
    assert_eq!(page.ids, (41..=45).map(|i| format!("C{i:02}")).collect::<Vec<_>>());
    let past = index.browse_by_tag(GeneTag::Form(FormClass::Top), PageRequest::new(4, 20).unwrap());
    assert_eq!(past, BrowsePage { total: 45, ids: vec![] });
    assert_eq!(PageRequest::new(0, 20), Err(ExploreError::InvalidPage));
    assert_eq!(PageRequest::new(1, 101), Err(ExploreError::InvalidPageSize(101)));
    assert_eq!(PageRequest::new(1, 0), Err(ExploreError::InvalidPageSize(0)));
}

#[test]
fn search_and_semantics() {
    let mut a = bare("A", &[FormClass::Top], &[MaterialClass::Silk]);
    a.title = "Alpha robe".into();
    let mut b = bare("B", &[FormClass::Top], &[MaterialClass::Silk]);
    b.title = "Alpha beta robe".into();
    let index = GeneIndex::build(&[a, b]).unwrap();
    let page = index.search_keyword("alpha beta", PageRequest::default()).unwrap();
    assert_eq!(page.hits.iter().map(|h| h.costume_id.as_str()).collect::<Vec<_>>(), ["B"]);
    assert_eq!(index.search_keyword("zeta", PageRequest::default()).unwrap(), SearchPage { total: 0, hits: vec![] });
    assert_eq!(index.search_keyword(" ;; ", PageRequest::default()), Err(ExploreError::EmptyQuery));
    // Repeated query tokens count once.
    let page = index.search_keyword("SILK silk", PageRequest::default()).unwrap();
    assert_eq!(page.total, 2);
    assert!(page.hits.iter().all(|h| h.score == 1));
}

#[test]
fn silk_query_counts_silk_records() {
    let records = synthetic_corpus(100, 7);
    let index = GeneIndex::build(&records).unwrap();
    let expected = oracle_search(&records, "silk");
    let with_silk = records.iter().filter(|r| r.surface.materials.contains(&MaterialClass::Silk)).count();
    // No bank phrase other than the material name mentions silk.
    assert_eq!(expected.len(), with_silk);
    assert_eq!(index.search_keyword("silk", PageRequest::new(1, 100).unwrap()).unwrap().total, with_silk);
}

#[test]
fn related_examples() {
    let records =
        [bare("A", &[FormClass::Top], &[MaterialClass::Silk]), bare("B", &[FormClass::Hat], &[MaterialClass::Silk])];
    let index = GeneIndex::build(&records).unwrap();
    assert_eq!(index.related_costumes("A", TagCategory::Pattern).unwrap(), vec![]);
    assert_eq!(
        index.related_costumes("A", TagCategory::Material).unwrap(),
        vec![RelatedGroup { tag: GeneTag::Material(MaterialClass::Silk), ids: vec!["B".into()] }]
    );
    assert_eq!(
        index.related_costumes("A", TagCategory::Form).unwrap(),
        vec![RelatedGroup { tag: GeneTag::Form(FormClass::Top), ids: vec![] }]
    );
    assert_eq!(index.related_costumes("Z", TagCategory::Form), Err(ExploreError::UnknownId("Z".into())));
}

#[test]
fn hundred_record_corpus_matches_full_scan() {
    let records = synthetic_corpus(100, 7);
    let index = GeneIndex::build(&records).unwrap();
    assert_eq!(index, GeneIndex::build(&records).unwrap());
    for tag in GeneTag::all() {
        let mut expected: Vec<String> =
            records.iter().filter(|r| r.tags().contains(&tag)).map(|r| r.id.clone()).collect();
        expected.sort();
        assert_eq!(index.posting(tag), expected, "{tag}");
    }
    for r in &records {
        for &category in TagCategory::ALL {
            let expected: Vec<RelatedGroup> = r
                .tags()
                .into_iter()
                .filter(|t| t.category() == category)
                .map(|tag| RelatedGroup {
                    tag,
                    ids: records
                        .iter()
                        .filter(|o| o.id != r.id && o.tags().contains(&tag))
                        .map(|o| o.id.clone())
                        .collect(),
                })
                .collect();
            assert_eq!(index.related_costumes(&r.id, category).unwrap(), expected);
        }
    }
}

fn arb_page() -> impl Strategy<Value = PageRequest> {
    (1usize..8, 1usize..=MAX_PAGE_SIZE).prop_map(|(p, s)| PageRequest::new(p, s).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn browse_equals_oracle(n in 0usize..120, seed in any::<u64>(), tag_i in 0usize..21, page in arb_page()) {
        let records = synthetic_corpus(n, seed);
        let index = GeneIndex::build(&records).unwrap();
        let tag = GeneTag::all()[tag_i];
        let mut all: Vec<String> = records.iter().filter(|r| r.tags().contains(&tag)).map(|r| r.id.clone()).collect();
        all.sort();
        let got = index.browse_by_tag(tag, page);
        prop_assert_eq!(got.total, all.len());
        prop_assert_eq!(got.ids, page.slice(&all).to_vec());
    }

    #[test]
    fn search_equals_oracle(n in 1usize..120, seed in any::<u64>(), pick in any::<prop::sample::Index>(), extra in any::<bool>()) {
        let records = synthetic_corpus(n, seed);
        let index = GeneIndex::build(&records).unwrap();
        let source = &records[pick.index(records.len())];
        let words = tokenize(&source.title);
        let mut query = words[pick.index(words.len())].clone();
        if extra {
            query.push_str(" silk");
        }
        let expected = oracle_search(&records, &query);
        let got = index.search_keyword(&query, PageRequest::new(1, 100).unwrap()).unwrap();
        prop_assert_eq!(got.total, expected.len());
        let got: Vec<(String, u32)> = got.hits.into_iter().map(|h| (h.costume_id, h.score)).collect();
        prop_assert_eq!(got, expected.into_iter().take(100).collect::<Vec<_>>());
    }

    #[test]
    fn pages_concatenate_to_whole(n in 0usize..150, seed in any::<u64>(), size in 1usize..=MAX_PAGE_SIZE) {
        let records = synthetic_corpus(n, seed);
        let index = GeneIndex::build(&records).unwrap();
        let tag = GeneTag::Form(FormClass::Top);
        let whole = index.posting(tag);
        let mut joined = Vec::new();
        let mut page = 1;
        loop {
            let p = index.browse_by_tag(tag, PageRequest::new(page, size).unwrap());
            if p.ids.is_empty() {
                break;
            }
            joined.extend(p.ids);
            page += 1;
        }
        prop_assert_eq!(joined, whole);
    }

    #[test]
    fn adding_a_record_only_grows_postings(n in 1usize..80, seed in any::<u64>()) {
        let records = synthetic_corpus(n, seed);
        let before = GeneIndex::build(&records[..n - 1]).unwrap();
        let after = GeneIndex::build(&records).unwrap();
        for tag in GeneTag::all() {
            let old: BTreeSet<String> = before.posting(tag).into_iter().collect();
            let new: BTreeSet<String> = after.posting(tag).into_iter().collect();
            prop_assert!(old.is_subset(&new));
        }
    }
}
