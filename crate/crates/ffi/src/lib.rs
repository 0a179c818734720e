//! C ABI for gene-atlas.
//!
//! Conventions:
//! - Every fallible function returns a [`GaStatus`]; on failure a message is
//!   available from [`ga_last_error`] on the same thread.
//! - Results are UTF-8 JSON strings written to an out-pointer and owned by
//!   the caller, who releases them with [`ga_string_free`].
//! - [`GaAtlas`] is an opaque read-only handle over a corpus snapshot and its
//!   index; it is safe to share between threads.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use gene_atlas::color::{extract_profile, ColorError, ColorParams, PixelBuffer};
use gene_atlas::explore::{ExploreError, GeneIndex, PageRequest};
use gene_atlas::narrative::{
    assemble_prompt, generate, validate_scaffold, CoCreationRequest, GenerateOptions, MockProvider, NarrativeError,
    PromptTemplate,
};
use gene_atlas::schema::{validate_value, vocabulary_document, GeneTag, SchemaError, TagCategory};
use gene_atlas::store::{Corpus, Snapshot, StoreError};
use gene_atlas::synth::synthetic_corpus;
use serde_json::{json, Value};

/// Result codes shared by every function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    NotFound = 4,
    Io = 5,
    MalformedDocument = 6,
    ThemeUnavailable = 7,
    Internal = 99,
}

/// Opaque corpus snapshot with its exploration index.
pub struct GaAtlas {
    corpus: Corpus,
    index: GeneIndex,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(GaStatus, String);

impl Failure {
    fn new(status: GaStatus, message: impl Into<String>) -> Self {
        Failure(status, message.into())
    }
}

impl From<StoreError> for Failure {
    fn from(e: StoreError) -> Self {
        let status = match e {
            StoreError::Io { .. } | StoreError::LockHeld(_) => GaStatus::Io,
            StoreError::Malformed { .. } | StoreError::UnsupportedFormat { .. } | StoreError::Json(_) => {
                GaStatus::MalformedDocument
            }
            StoreError::UnknownCostume(_) => GaStatus::NotFound,
            StoreError::DuplicateId(_) | StoreError::EmptyUserId => GaStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

impl From<ExploreError> for Failure {
    fn from(e: ExploreError) -> Self {
        let status = match e {
            ExploreError::UnknownId(_) => GaStatus::NotFound,
            _ => GaStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

impl From<SchemaError> for Failure {
    fn from(e: SchemaError) -> Self {
        Failure(GaStatus::InvalidArgument, e.to_string())
    }
}

impl From<ColorError> for Failure {
    fn from(e: ColorError) -> Self {
        Failure(GaStatus::InvalidArgument, e.to_string())
    }
}

impl From<NarrativeError> for Failure {
    fn from(e: NarrativeError) -> Self {
        let status = match e {
            NarrativeError::ThemeUnavailable { .. } => GaStatus::ThemeUnavailable,
            NarrativeError::ProviderTimeout { .. }
            | NarrativeError::ProviderRefusal(_)
            | NarrativeError::ProviderProtocol(_) => GaStatus::Internal,
            _ => GaStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure(GaStatus::InvalidArgument, e.to_string())
    }
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

/// Run `f`, converting errors and panics into a status and last-error text.
fn guarded(f: impl FnOnce() -> Result<(), Failure>) -> GaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            GaStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_last_error(&message);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            GaStatus::Internal
        }
    }
}

/// # Safety
/// `p` is null or a NUL-terminated string valid for the call.
unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::new(GaStatus::NullArgument, format!("{name} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure::new(GaStatus::InvalidUtf8, format!("{name} is not UTF-8")))
}

/// # Safety
/// `out` is null or valid for a pointer write.
unsafe fn write_json(out: *mut *mut c_char, value: &Value) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::new(GaStatus::NullArgument, "output pointer is null"));
    }
    let text = serde_json::to_string(value)?;
    let c = CString::new(text).map_err(|_| Failure::new(GaStatus::Internal, "interior NUL in output"))?;
    *out = c.into_raw();
    Ok(())
}

/// # Safety
/// `atlas` is null or a live handle from this library.
unsafe fn atlas_arg<'a>(atlas: *const GaAtlas) -> Result<&'a GaAtlas, Failure> {
    atlas.as_ref().ok_or_else(|| Failure::new(GaStatus::NullArgument, "atlas is null"))
}

fn page_arg(page: u32, page_size: u32) -> Result<PageRequest, Failure> {
    Ok(PageRequest::new(page as usize, page_size as usize)?)
}

fn into_handle(corpus: Corpus, out: *mut *mut GaAtlas) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::new(GaStatus::NullArgument, "output pointer is null"));
    }
    let index = GeneIndex::build(corpus.records())?;
    let handle = Box::into_raw(Box::new(GaAtlas { corpus, index }));
    // SAFETY: checked non-null above; the caller guarantees it is writable.
    unsafe { *out = handle };
    Ok(())
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next call into the library on this thread.
#[no_mangle]
pub extern "C" fn ga_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn ga_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}

/// Release a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` is null or a pointer obtained from this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ga_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Open a read-only snapshot of a data directory. Does not take the
/// directory's writer lock.
///
/// # Safety
/// `data_dir` is a NUL-terminated path; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn ga_atlas_open(data_dir: *const c_char, out: *mut *mut GaAtlas) -> GaStatus {
    guarded(|| {
        let dir = str_arg(data_dir, "data_dir")?;
        let snapshot = Snapshot::load(Path::new(dir))?;
        into_handle(snapshot.corpus, out)
    })
}

/// Build a handle over the deterministic synthetic corpus.
///
/// # Safety
/// `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn ga_atlas_synthetic(n: u32, seed: u64, out: *mut *mut GaAtlas) -> GaStatus {
    guarded(|| into_handle(Corpus::from_records(synthetic_corpus(n as usize, seed))?, out))
}

/// # Safety
/// `atlas` is null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ga_atlas_free(atlas: *mut GaAtlas) {
    if !atlas.is_null() {
        drop(Box::from_raw(atlas));
    }
}

/// Number of records, or 0 for a null handle.
///
/// # Safety
/// `atlas` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ga_atlas_len(atlas: *const GaAtlas) -> usize {
    atlas.as_ref().map_or(0, |a| a.corpus.len())
}

/// Full record as JSON.
///
/// # Safety
/// Pointers as documented at crate level.
#[no_mangle]
pub unsafe extern "C" fn ga_costume(atlas: *const GaAtlas, id: *const c_char, out_json: *mut *mut c_char) -> GaStatus {
    guarded(|| {
        let atlas = atlas_arg(atlas)?;
        let id = str_arg(id, "id")?;
        let record =
            atlas.corpus.get(id).ok_or_else(|| Failure::new(GaStatus::NotFound, format!("unknown costume `{id}`")))?;
        write_json(out_json, &serde_json::to_value(record)?)
    })
}

/// `{"total": n, "ids": [...]}` for a tag such as `"Form:Hat"`.
///
/// # Safety
/// Pointers as documented at crate level.
#[no_mangle]
pub unsafe extern "C" fn ga_browse(
    atlas: *const GaAtlas,
    tag: *const c_char,
    page: u32,
    page_size: u32,
    out_json: *mut *mut c_char,
) -> GaStatus {
    guarded(|| {
        let atlas = atlas_arg(atlas)?;
        let tag: GeneTag = str_arg(tag, "tag")?.parse()?;
        let result = atlas.index.browse_by_tag(tag, page_arg(page, page_size)?);
        write_json(out_json, &serde_json::to_value(result)?)
    })
}

/// `{"total": n, "hits": [{"costume_id", "score"}]}`.
///
/// # Safety
/// Pointers as documented at crate level.
#[no_mangle]
pub unsafe extern "C" fn ga_search(
    atlas: *const GaAtlas,
    query: *const c_char,
    page: u32,
    page_size: u32,
    out_json: *mut *mut c_char,
) -> GaStatus {
    guarded(|| {
        let atlas = atlas_arg(atlas)?;
        let query = str_arg(query, "query")?;
        let result = atlas.index.search_keyword(query, page_arg(page, page_size)?)?;
        write_json(out_json, &serde_json::to_value(result)?)
    })
}

/// `[{"tag", "ids"}]` for the costume's tags in `category`.
///
/// # Safety
/// Pointers as documented at crate level.
#[no_mangle]
pub unsafe extern "C" fn ga_related(
    atlas: *const GaAtlas,
    id: *const c_char,
    category: *const c_char,
    out_json: *mut *mut c_char,
) -> GaStatus {
    guarded(|| {
        let atlas = atlas_arg(atlas)?;
        let id = str_arg(id, "id")?;
        let category: TagCategory = str_arg(category, "category")?.parse()?;
        let groups = atlas.index.related_costumes(id, category)?;
        write_json(out_json, &serde_json::to_value(groups)?)
    })
}

/// Generate with the mock provider and the default template; nothing is
/// persisted. `request_json` is a co-creation request document. Output:
/// `{"prompt", "artifact", "scaffold"}`.
///
/// # Safety
/// Pointers as documented at crate level.
#[no_mangle]
pub unsafe extern "C" fn ga_generate_mock(
    atlas: *const GaAtlas,
    request_json: *const c_char,
    out_json: *mut *mut c_char,
) -> GaStatus {
    guarded(|| {
        let atlas = atlas_arg(atlas)?;
        let request: CoCreationRequest = serde_json::from_str(str_arg(request_json, "request_json")?)?;
        let record = atlas
            .corpus
            .get(&request.costume_id)
            .ok_or_else(|| Failure::new(GaStatus::NotFound, format!("unknown costume `{}`", request.costume_id)))?;
        let prompt = assemble_prompt(record, &request, &PromptTemplate::default())?;
        let artifact = generate(&MockProvider, &prompt, &request, &GenerateOptions::default())?;
        let scaffold = validate_scaffold(&artifact, &prompt);
        write_json(out_json, &json!({ "prompt": prompt, "artifact": artifact, "scaffold": scaffold }))
    })
}

/// Validate a record document: `{"ok": bool, "violations": [...]}`.
/// Violations are data, so an invalid record still returns `Ok`.
///
/// # Safety
/// Pointers as documented at crate level.
#[no_mangle]
pub unsafe extern "C" fn ga_validate_record(record_json: *const c_char, out_json: *mut *mut c_char) -> GaStatus {
    guarded(|| {
        let value: Value = serde_json::from_str(str_arg(record_json, "record_json")?)?;
        write_json(out_json, &serde_json::to_value(validate_value(&value))?)
    })
}

/// Color profile of a packed RGB8 image of `width * height * 3` bytes.
///
/// # Safety
/// `rgb` points to `width * height * 3` readable bytes.
#[no_mangle]
pub unsafe extern "C" fn ga_extract_colors(
    rgb: *const u8,
    width: u32,
    height: u32,
    k: u32,
    seed: u64,
    out_json: *mut *mut c_char,
) -> GaStatus {
    guarded(|| {
        if rgb.is_null() {
            return Err(Failure::new(GaStatus::NullArgument, "rgb is null"));
        }
        let len = (width as usize)
            .checked_mul(height as usize)
            .and_then(|n| n.checked_mul(3))
            .ok_or_else(|| Failure::new(GaStatus::InvalidArgument, "image too large"))?;
        let bytes = std::slice::from_raw_parts(rgb, len).to_vec();
        let buffer = PixelBuffer::from_rgb8(width, height, bytes)?;
        let params = ColorParams { k: k as usize, seed, ..ColorParams::default() };
        let profile = extract_profile(&buffer.pixels(), &params)?;
        write_json(out_json, &serde_json::to_value(profile)?)
    })
}

/// All vocabularies as one JSON document.
///
/// # Safety
/// `out_json` is writable.
#[no_mangle]
pub unsafe extern "C" fn ga_taxonomy(out_json: *mut *mut c_char) -> GaStatus {
    guarded(|| write_json(out_json, &vocabulary_document()))
}
