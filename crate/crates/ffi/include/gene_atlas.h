#ifndef GENE_ATLAS_H
#define GENE_ATLAS_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes shared by every function.
 */
typedef enum GaStatus {
  GA_STATUS_OK = 0,
  GA_STATUS_NULL_ARGUMENT = 1,
  GA_STATUS_INVALID_UTF8 = 2,
  GA_STATUS_INVALID_ARGUMENT = 3,
  GA_STATUS_NOT_FOUND = 4,
  GA_STATUS_IO = 5,
  GA_STATUS_MALFORMED_DOCUMENT = 6,
  GA_STATUS_THEME_UNAVAILABLE = 7,
  GA_STATUS_INTERNAL = 99,
} GaStatus;

/**
 * Opaque corpus snapshot with its exploration index.
 */
typedef struct GaAtlas GaAtlas;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next call into the library on this thread.
 */
const char *ga_last_error(void);

/**
 * Library version as a static string.
 */
const char *ga_version(void);

/**
 * Release a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` is null or a pointer obtained from this library and not yet freed.
 */
void ga_string_free(char *s);

/**
 * Open a read-only snapshot of a data directory. Does not take the
 * directory's writer lock.
 *
 * # Safety
 * `data_dir` is a NUL-terminated path; `out` is writable.
 */
enum GaStatus ga_atlas_open(const char *data_dir, struct GaAtlas **out);

/**
 * Build a handle over the deterministic synthetic corpus.
 *
 * # Safety
 * `out` is writable.
 */
enum GaStatus ga_atlas_synthetic(uint32_t n, uint64_t seed, struct GaAtlas **out);

/**
 * # Safety
 * `atlas` is null or a handle not yet freed.
 */
void ga_atlas_free(struct GaAtlas *atlas);

/**
 * Number of records, or 0 for a null handle.
 *
 * # Safety
 * `atlas` is null or a live handle.
 */
size_t ga_atlas_len(const struct GaAtlas *atlas);

/**
 * Full record as JSON.
 *
 * # Safety
 * Pointers as documented at crate level.
 */
enum GaStatus ga_costume(const struct GaAtlas *atlas, const char *id, char **out_json);

/**
 * `{"total": n, "ids": [...]}` for a tag such as `"Form:Hat"`.
 *
 * # Safety
 * Pointers as documented at crate level.
 */
enum GaStatus ga_browse(const struct GaAtlas *atlas,
                        const char *tag,
                        uint32_t page,
                        uint32_t page_size,
                        char **out_json);

/**
 * `{"total": n, "hits": [{"costume_id", "score"}]}`.
 *
 * # Safety
 * Pointers as documented at crate level.
 */
enum GaStatus ga_search(const struct GaAtlas *atlas,
                        const char *query,
                        uint32_t page,
                        uint32_t page_size,
                        char **out_json);

/**
 * `[{"tag", "ids"}]` for the costume's tags in `category`.
 *
 * # Safety
 * Pointers as documented at crate level.
 */
enum GaStatus ga_related(const struct GaAtlas *atlas,
                         const char *id,
                         const char *category,
                         char **out_json);

/**
 * Generate with the mock provider and the default template; nothing is
 * persisted. `request_json` is a co-creation request document. Output:
 * `{"prompt", "artifact", "scaffold"}`.
 *
 * # Safety
 * Pointers as documented at crate level.
 */
enum GaStatus ga_generate_mock(const struct GaAtlas *atlas,
                               const char *request_json,
                               char **out_json);

/**
 * Validate a record document: `{"ok": bool, "violations": [...]}`.
 * Violations are data, so an invalid record still returns `Ok`.
 *
 * # Safety
 * Pointers as documented at crate level.
 */
enum GaStatus ga_validate_record(const char *record_json, char **out_json);

/**
 * Color profile of a packed RGB8 image of `width * height * 3` bytes.
 *
 * # Safety
 * `rgb` points to `width * height * 3` readable bytes.
 */
enum GaStatus ga_extract_colors(const uint8_t *rgb,
                                uint32_t width,
                                uint32_t height,
                                uint32_t k,
                                uint64_t seed,
                                char **out_json);

/**
 * All vocabularies as one JSON document.
 *
 * # Safety
 * `out_json` is writable.
 */
enum GaStatus ga_taxonomy(char **out_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GENE_ATLAS_H */
