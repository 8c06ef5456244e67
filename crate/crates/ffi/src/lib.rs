//! C ABI over the ltlground toolkit.
//!
//! Objects cross the boundary as opaque handles (`LgFormula`, `LgMap`,
//! `LgDecoder`) owned by the caller and released with the matching `*_free`.
//! Every fallible call returns an [`LgStatus`]; on failure a message is kept
//! per thread and can be read with [`lg_last_error`]. Strings handed out are
//! NUL-terminated, owned by the caller and released with [`lg_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ltlground::automaton;
use ltlground::decode::{DecodeSession, Vocabulary};
use ltlground::ltl::{parse_infix, parse_prefix, print_infix, print_prefix, Formula, Prop};
use ltlground::patterns::{classify, Classification};
use ltlground::planner::{self, SemanticMap};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Automaton = 4,
    Map = 5,
    Decode = 6,
    OutOfRange = 7,
    Panic = 99,
}

pub struct LgFormula(Formula);

pub struct LgMap(SemanticMap);

pub struct LgDecoder {
    session: DecodeSession,
    texts: Vec<CString>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl ToString) {
    let c = CString::new(msg.to_string().replace('\0', " ")).expect("no interior NUL");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

type Outcome = Result<(), (LgStatus, String)>;

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Outcome) -> LgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LgStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            LgStatus::Panic
        }
    }
}

fn fail<T>(status: LgStatus, e: impl ToString) -> Result<T, (LgStatus, String)> {
    Err((status, e.to_string()))
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, (LgStatus, String)> {
    if p.is_null() {
        return fail(LgStatus::NullPointer, "null string argument");
    }
    CStr::from_ptr(p).to_str().or_else(|e| fail(LgStatus::InvalidUtf8, e))
}

unsafe fn ref_arg<'a, T>(p: *const T) -> Result<&'a T, (LgStatus, String)> {
    p.as_ref().map_or_else(|| fail(LgStatus::NullPointer, "null handle"), Ok)
}

unsafe fn out_arg<'a, T>(p: *mut T) -> Result<&'a mut T, (LgStatus, String)> {
    p.as_mut().map_or_else(|| fail(LgStatus::NullPointer, "null output pointer"), Ok)
}

fn c_string(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next failing call on the same thread; do not free.
#[no_mangle]
pub extern "C" fn lg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version, static.
#[no_mangle]
pub extern "C" fn lg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be NULL or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

// ---- formulas

unsafe fn parse_with(text: *const c_char, out: *mut *mut LgFormula, infix: bool) -> LgStatus {
    guard(|| {
        let out = out_arg(out)?;
        *out = ptr::null_mut();
        let text = str_arg(text)?;
        let f = if infix { parse_infix(text) } else { parse_prefix(text) };
        let f = f.or_else(|e| fail(LgStatus::Parse, e))?;
        *out = Box::into_raw(Box::new(LgFormula(f)));
        Ok(())
    })
}

/// Parses prefix notation (`& F a G ! b`).
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lg_formula_parse_prefix(text: *const c_char, out: *mut *mut LgFormula) -> LgStatus {
    parse_with(text, out, false)
}

/// Parses infix notation (`F a & G !b`).
///
/// # Safety
/// As [`lg_formula_parse_prefix`].
#[no_mangle]
pub unsafe extern "C" fn lg_formula_parse_infix(text: *const c_char, out: *mut *mut LgFormula) -> LgStatus {
    parse_with(text, out, true)
}

/// # Safety
/// `f` must be NULL or a live formula handle.
#[no_mangle]
pub unsafe extern "C" fn lg_formula_free(f: *mut LgFormula) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// # Safety
/// `f` must be a live formula handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lg_formula_to_prefix(f: *const LgFormula, out: *mut *mut c_char) -> LgStatus {
    guard(|| {
        let out = out_arg(out)?;
        *out = c_string(print_prefix(&ref_arg(f)?.0));
        Ok(())
    })
}

/// # Safety
/// As [`lg_formula_to_prefix`].
#[no_mangle]
pub unsafe extern "C" fn lg_formula_to_infix(f: *const LgFormula, out: *mut *mut c_char) -> LgStatus {
    guard(|| {
        let out = out_arg(out)?;
        *out = c_string(print_infix(&ref_arg(f)?.0));
        Ok(())
    })
}

/// Language equivalence. On inequivalence, `witness_json` (if not NULL)
/// receives a distinguishing lasso `{"prefix": [...], "cycle": [...]}`;
/// otherwise it is set to NULL.
///
/// # Safety
/// `a`, `b` must be live formula handles; `equivalent` must be writable;
/// `witness_json` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn lg_formula_equivalent(
    a: *const LgFormula,
    b: *const LgFormula,
    equivalent: *mut bool,
    witness_json: *mut *mut c_char,
) -> LgStatus {
    guard(|| {
        let out = out_arg(equivalent)?;
        let (a, b) = (ref_arg(a)?, ref_arg(b)?);
        let trace = automaton::check_equivalence(&a.0, &b.0).or_else(|e| fail(LgStatus::Automaton, e))?;
        *out = trace.is_none();
        if let Some(w) = witness_json.as_mut() {
            *w = trace.map_or(ptr::null_mut(), |t| c_string(serde_json::to_string(&t).expect("traces serialize")));
        }
        Ok(())
    })
}

/// # Safety
/// `f` must be a live formula handle; `satisfiable` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lg_formula_satisfiable(f: *const LgFormula, satisfiable: *mut bool) -> LgStatus {
    guard(|| {
        let out = out_arg(satisfiable)?;
        let e = automaton::satisfiable(&ref_arg(f)?.0).or_else(|e| fail(LgStatus::Automaton, e))?;
        *out = !e.is_empty();
        Ok(())
    })
}

/// Catalog template id of the formula up to renaming (`visit_2`, `wait`,
/// ...), or NULL in `out` when it matches none.
///
/// # Safety
/// `f` must be a live formula handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lg_formula_classify(f: *const LgFormula, out: *mut *mut c_char) -> LgStatus {
    guard(|| {
        let out = out_arg(out)?;
        *out = match classify(&ref_arg(f)?.0).or_else(|e| fail(LgStatus::Automaton, e))? {
            Classification::Known(t) => c_string(t.id()),
            Classification::Unknown => ptr::null_mut(),
        };
        Ok(())
    })
}

// ---- maps and planning

/// Loads a semantic map from a JSON file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lg_map_load(path: *const c_char, out: *mut *mut LgMap) -> LgStatus {
    guard(|| {
        let out = out_arg(out)?;
        *out = ptr::null_mut();
        let map = SemanticMap::load(str_arg(path)?).or_else(|e| fail(LgStatus::Map, e))?;
        *out = Box::into_raw(Box::new(LgMap(map)));
        Ok(())
    })
}

/// Builds a semantic map from JSON text.
///
/// # Safety
/// As [`lg_map_load`].
#[no_mangle]
pub unsafe extern "C" fn lg_map_from_json(json: *const c_char, out: *mut *mut LgMap) -> LgStatus {
    guard(|| {
        let out = out_arg(out)?;
        *out = ptr::null_mut();
        let map: SemanticMap = serde_json::from_str(str_arg(json)?).or_else(|e| fail(LgStatus::Map, e))?;
        *out = Box::into_raw(Box::new(LgMap(map)));
        Ok(())
    })
}

/// # Safety
/// `m` must be NULL or a live map handle.
#[no_mangle]
pub unsafe extern "C" fn lg_map_free(m: *mut LgMap) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Plans on `map`. `satisfiable` tells whether a walk exists; `outcome_json`
/// receives either `{"plan": {"prefix": [...], "cycle": [...]}}` or
/// `{"unsatisfiable": {"reason": ...}}`.
///
/// # Safety
/// `map`, `f` must be live handles; the outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn lg_plan(
    map: *const LgMap,
    f: *const LgFormula,
    satisfiable: *mut bool,
    outcome_json: *mut *mut c_char,
) -> LgStatus {
    guard(|| {
        let (sat, json) = (out_arg(satisfiable)?, out_arg(outcome_json)?);
        let outcome = planner::plan(&ref_arg(map)?.0, &ref_arg(f)?.0).or_else(|e| fail(LgStatus::Map, e))?;
        *sat = !outcome.is_unsat();
        *json = c_string(serde_json::to_string(&outcome).expect("outcomes serialize"));
        Ok(())
    })
}

// ---- constrained decoding

/// A decoding session over the operator tokens, the given propositions and
/// an end token. Feed token indices; read the admissible-token mask before
/// each step.
///
/// # Safety
/// `props` must point to `n_props` NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lg_decoder_new(
    props: *const *const c_char,
    n_props: usize,
    max_height: usize,
    max_tokens: usize,
    out: *mut *mut LgDecoder,
) -> LgStatus {
    guard(|| {
        let out = out_arg(out)?;
        *out = ptr::null_mut();
        if props.is_null() && n_props > 0 {
            return fail(LgStatus::NullPointer, "null proposition array");
        }
        let mut ps = Vec::with_capacity(n_props);
        for i in 0..n_props {
            ps.push(Prop::new(str_arg(*props.add(i))?).or_else(|e| fail(LgStatus::Parse, e))?);
        }
        let vocab = Vocabulary::new(&ps);
        let texts = (0..vocab.len()).map(|i| CString::new(vocab.text(i)).expect("token text")).collect();
        let session = DecodeSession::with_limits(vocab, max_height, max_tokens).or_else(|e| fail(LgStatus::Decode, e))?;
        *out = Box::into_raw(Box::new(LgDecoder { session, texts }));
        Ok(())
    })
}

/// # Safety
/// `d` must be NULL or a live decoder handle.
#[no_mangle]
pub unsafe extern "C" fn lg_decoder_free(d: *mut LgDecoder) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Vocabulary size; 0 for a NULL handle.
///
/// # Safety
/// `d` must be NULL or a live decoder handle.
#[no_mangle]
pub unsafe extern "C" fn lg_decoder_vocab_size(d: *const LgDecoder) -> usize {
    d.as_ref().map_or(0, |d| d.texts.len())
}

/// Text of token `i`, owned by the decoder; NULL when out of range.
///
/// # Safety
/// `d` must be NULL or a live decoder handle.
#[no_mangle]
pub unsafe extern "C" fn lg_decoder_token(d: *const LgDecoder, i: usize) -> *const c_char {
    d.as_ref().and_then(|d| d.texts.get(i)).map_or(ptr::null(), |c| c.as_ptr())
}

/// Writes the admissibility of every token into `mask[0..len]`; `len` must
/// equal the vocabulary size.
///
/// # Safety
/// `d` must be a live decoder handle; `mask` must have room for `len` bools.
#[no_mangle]
pub unsafe extern "C" fn lg_decoder_allowed(d: *const LgDecoder, mask: *mut bool, len: usize) -> LgStatus {
    guard(|| {
        let d = ref_arg(d)?;
        if mask.is_null() {
            return fail(LgStatus::NullPointer, "null mask");
        }
        if len != d.texts.len() {
            return fail(LgStatus::OutOfRange, format!("mask length {len}, vocabulary size {}", d.texts.len()));
        }
        let allowed = d.session.allowed_next().or_else(|e| fail(LgStatus::Decode, e))?;
        std::slice::from_raw_parts_mut(mask, len).copy_from_slice(&allowed);
        Ok(())
    })
}

/// Appends token `i`; fails with `Decode` when the mask forbids it.
///
/// # Safety
/// `d` must be a live decoder handle.
#[no_mangle]
pub unsafe extern "C" fn lg_decoder_feed(d: *mut LgDecoder, token: usize) -> LgStatus {
    guard(|| {
        let d = d.as_mut().map_or_else(|| fail(LgStatus::NullPointer, "null handle"), Ok)?;
        d.session.feed(token).or_else(|e| fail(LgStatus::Decode, e))
    })
}

/// True once the end token has been fed.
///
/// # Safety
/// `d` must be NULL or a live decoder handle.
#[no_mangle]
pub unsafe extern "C" fn lg_decoder_finished(d: *const LgDecoder) -> bool {
    d.as_ref().is_some_and(|d| d.session.is_finished())
}

/// The decoded formula, as a new handle.
///
/// # Safety
/// `d` must be a live decoder handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lg_decoder_formula(d: *const LgDecoder, out: *mut *mut LgFormula) -> LgStatus {
    guard(|| {
        let out = out_arg(out)?;
        *out = ptr::null_mut();
        let f = ref_arg(d)?.session.formula().or_else(|e| fail(LgStatus::Decode, e))?;
        *out = Box::into_raw(Box::new(LgFormula(f)));
        Ok(())
    })
}
