#ifndef RSA_CEGD_H
#define RSA_CEGD_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

enum CegdStatus
#ifdef __cplusplus
  : int32_t
#endif // __cplusplus
 {
  CEGD_STATUS_OK = 0,
  CEGD_STATUS_NULL_POINTER = 1,
  CEGD_STATUS_INVALID_UTF8 = 2,
  CEGD_STATUS_INVALID_ARGUMENT = 3,
  CEGD_STATUS_RUN_FAILED = 4,
  CEGD_STATUS_PARSE_FAILED = 5,
  CEGD_STATUS_VERIFY_FAILED = 6,
  CEGD_STATUS_KEYGEN_FAILED = 7,
  CEGD_STATUS_PANIC = 8,
};
#ifndef __cplusplus
typedef int32_t CegdStatus;
#endif // __cplusplus

typedef struct CegdKeyPair CegdKeyPair;

/*
 Result of one scenario run, or a transcript loaded from JSON lines.
 */
typedef struct CegdReport CegdReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version string.
 */
const char *cegd_version(void);

/*
 Last error on this thread, or null. Valid until the next call into this library.
 */
const char *cegd_last_error_message(void);

/*
 Releases a string returned by this library. Null is ignored.

 # Safety
 `s` must come from this library and must not be used afterwards.
 */
void cegd_string_free(char *s);

/*
 Runs `mode` (`"honest"`, `"replay"` or `"eoo-forward"`).

 # Safety
 `mode` must be a valid C string and `out` a valid pointer.
 */
CegdStatus cegd_run(const char *mode,
                    uint64_t bits,
                    uint64_t exponent,
                    uint64_t seed,
                    struct CegdReport **out);

/*
 Parses a JSON-lines transcript into a report handle without verifying it.

 # Safety
 `text` must be a valid C string and `out` a valid pointer.
 */
CegdStatus cegd_report_from_jsonl(const char *text, struct CegdReport **out);

/*
 Serializes the report as a JSON-lines transcript.

 # Safety
 `report` must be a live handle and `out` a valid pointer.
 */
CegdStatus cegd_report_to_jsonl(const struct CegdReport *report, char **out);

/*
 Verdict label: `FAIR`, `UNFAIR_FOR_B` or `UNFAIR_FOR_A`.

 # Safety
 `report` must be a live handle and `out` a valid pointer.
 */
CegdStatus cegd_report_verdict(const struct CegdReport *report, char **out);

/*
 Number of messages in the report's transcript.

 # Safety
 `report` must be a live handle and `out` a valid pointer.
 */
CegdStatus cegd_report_message_count(const struct CegdReport *report, size_t *out);

/*
 Re-verifies every message and evidence entry and recomputes the verdict.
 Returns [`CegdStatus::VerifyFailed`] with the findings as the error message.

 # Safety
 `report` must be a live handle.
 */
CegdStatus cegd_report_verify(const struct CegdReport *report);

/*
 Parses and verifies a JSON-lines transcript in one call.

 # Safety
 `text` must be a valid C string.
 */
CegdStatus cegd_verify_transcript(const char *text);

/*
 # Safety
 `report` must come from this library and must not be used afterwards.
 */
void cegd_report_free(struct CegdReport *report);

/*
 Deterministic RSA key pair with a modulus of exactly `bits` bits.

 # Safety
 `out` must be a valid pointer.
 */
CegdStatus cegd_keygen(uint64_t bits, uint64_t exponent, uint64_t seed, struct CegdKeyPair **out);

/*
 Key pair as a JSON object of lowercase hex fields `n`, `e`, `d`, `p`, `q`.

 # Safety
 `keypair` must be a live handle and `out` a valid pointer.
 */
CegdStatus cegd_keypair_to_json(const struct CegdKeyPair *keypair, char **out);

/*
 Modulus size in bits.

 # Safety
 `keypair` must be a live handle.
 */
uint64_t cegd_keypair_modulus_bits(const struct CegdKeyPair *keypair);

/*
 # Safety
 `keypair` must come from this library and must not be used afterwards.
 */
void cegd_keypair_free(struct CegdKeyPair *keypair);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RSA_CEGD_H */
