//! C ABI over `bounce-core`.
//!
//! Tables cross the boundary as opaque `BounceTable` handles. Every call
//! returns a `BounceStatus`; results come back through out-pointers. Strings
//! returned by the library are NUL-terminated UTF-8 and must be released with
//! `bounce_string_free`. After a failed call, `bounce_last_error` describes
//! the failure on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use bounce_core::flow::Tracer;
use bounce_core::language::enumerate_language;
use bounce_core::perturbation::persistence_radius;
use bounce_core::reconstruction::{adjacency_pairs, estimate_angle, AngleKind, PolygonOracle, SearchBudget, SpectrumOracle};
use bounce_core::sturmian::square_bounce_word;
use bounce_core::unfolding::is_realizable;
use bounce_core::{EdgeLabel, Error, LabeledPolygon, Point2};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BounceStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidPolygon = 3,
    UnknownLabel = 4,
    InvalidWord = 5,
    Infeasible = 6,
    Precondition = 7,
    Inconsistent = 8,
    BudgetExhausted = 9,
    SamplingFailed = 10,
    Parse = 11,
    NotFound = 12,
    Internal = 99,
}

/// Opaque table handle.
pub struct BounceTable {
    poly: LabeledPolygon,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BounceAngle {
    /// Radians.
    pub value: f64,
    /// Nonzero when the angle was recognized as `pi * p / q`.
    pub exact: i32,
    pub p: u64,
    pub q: u64,
    pub certified_depth: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> BounceStatus {
    match e {
        Error::InvalidPolygon(_) => BounceStatus::InvalidPolygon,
        Error::UnknownLabel(_) => BounceStatus::UnknownLabel,
        Error::RepeatedLetter { .. } | Error::EmptyWord => BounceStatus::InvalidWord,
        Error::Infeasible(_) => BounceStatus::Infeasible,
        Error::Precondition(_) => BounceStatus::Precondition,
        Error::Inconsistent(_) => BounceStatus::Inconsistent,
        Error::BudgetExhausted { .. } => BounceStatus::BudgetExhausted,
        Error::SamplingFailed(_) => BounceStatus::SamplingFailed,
        Error::Parse(_) | Error::Json(_) => BounceStatus::Parse,
        _ => BounceStatus::Internal,
    }
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), (BounceStatus, String)>) -> BounceStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            BounceStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            BounceStatus::Internal
        }
    }
}

trait IntoFfi<T> {
    fn ffi(self) -> Result<T, (BounceStatus, String)>;
}

impl<T> IntoFfi<T> for bounce_core::Result<T> {
    fn ffi(self) -> Result<T, (BounceStatus, String)> {
        self.map_err(|e| (status_of(&e), e.to_string()))
    }
}

fn null(what: &str) -> (BounceStatus, String) {
    (BounceStatus::NullPointer, format!("{what} is null"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (BounceStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (BounceStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn table_ref<'a>(t: *const BounceTable) -> Result<&'a LabeledPolygon, (BounceStatus, String)> {
    t.as_ref().map(|t| &t.poly).ok_or_else(|| null("table"))
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), (BounceStatus, String)> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    let c = CString::new(s).map_err(|_| (BounceStatus::Internal, "interior NUL".to_string()))?;
    *out = c.into_raw();
    Ok(())
}

/// Message describing the outcome of the last call on this thread; empty
/// after success. The pointer stays valid until the next call on the thread.
#[no_mangle]
pub extern "C" fn bounce_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn bounce_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a table from JSON text `{"vertices": [[x,y],...], "labels": [...]}`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bounce_table_from_json(json: *const c_char, out: *mut *mut BounceTable) -> BounceStatus {
    guard(|| {
        let s = read_str(json, "json")?;
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let (poly, _) = LabeledPolygon::from_json_str(s).ffi()?;
        *out = Box::into_raw(Box::new(BounceTable { poly }));
        Ok(())
    })
}

/// Builds a table from `n` vertices given as `xy[2i], xy[2i+1]` and `n`
/// labels, edge `i` running from vertex `i` to vertex `i+1`.
///
/// # Safety
/// `xy` must hold `2n` doubles, `labels` `n` NUL-terminated strings, and
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bounce_table_new(
    xy: *const f64,
    labels: *const *const c_char,
    n: usize,
    out: *mut *mut BounceTable,
) -> BounceStatus {
    guard(|| {
        if xy.is_null() {
            return Err(null("xy"));
        }
        if labels.is_null() {
            return Err(null("labels"));
        }
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let coords = std::slice::from_raw_parts(xy, 2 * n);
        let vertices = coords.chunks(2).map(|c| Point2::new(c[0], c[1])).collect();
        let names = std::slice::from_raw_parts(labels, n)
            .iter()
            .map(|&l| read_str(l, "label").map(EdgeLabel::new))
            .collect::<Result<Vec<_>, _>>()?;
        let poly = LabeledPolygon::new(vertices, names).ffi()?;
        *out = Box::into_raw(Box::new(BounceTable { poly }));
        Ok(())
    })
}

/// Destroys a table. Null is ignored.
///
/// # Safety
/// `t` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn bounce_table_free(t: *mut BounceTable) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Number of edges, or 0 for a null handle.
///
/// # Safety
/// `t` must be null or a live table.
#[no_mangle]
pub unsafe extern "C" fn bounce_table_len(t: *const BounceTable) -> usize {
    t.as_ref().map_or(0, |t| t.poly.len())
}

/// Whether the comma-separated `word` is realized by some trajectory.
///
/// # Safety
/// `t` must be a live table, `word` NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bounce_is_realizable(t: *const BounceTable, word: *const c_char, out: *mut bool) -> BounceStatus {
    guard(|| {
        let poly = table_ref(t)?;
        let w = poly.parse_word_str(read_str(word, "word")?).ffi()?;
        if out.is_null() {
            return Err(null("output pointer"));
        }
        *out = is_realizable(poly, &w).ffi()?;
        Ok(())
    })
}

/// Traces `bounces` bounces from `(x, y)` in direction `angle` and returns
/// the comma-separated bounce word.
///
/// # Safety
/// `t` must be a live table and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bounce_trace(
    t: *const BounceTable,
    x: f64,
    y: f64,
    angle: f64,
    bounces: usize,
    out: *mut *mut c_char,
) -> BounceStatus {
    guard(|| {
        let poly = table_ref(t)?;
        let res = Tracer::new(poly).trace(Point2::new(x, y), angle, bounces).ffi()?;
        write_string(out, poly.format_word(&res.word))
    })
}

/// Every realizable word up to `max_len`, one per line, sorted.
///
/// # Safety
/// `t` must be a live table and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bounce_language(t: *const BounceTable, max_len: usize, out: *mut *mut c_char) -> BounceStatus {
    guard(|| {
        let poly = table_ref(t)?;
        let lang = enumerate_language(poly, max_len).ffi()?;
        let mut lines: Vec<String> = lang.words.iter().map(|w| poly.format_word(w)).collect();
        lines.sort();
        write_string(out, lines.iter().map(|l| format!("{l}\n")).collect())
    })
}

/// The square-table bounce code of slope `p/q`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bounce_square_word(p: u64, q: u64, out: *mut *mut c_char) -> BounceStatus {
    guard(|| write_string(out, square_bounce_word(p, q).ffi()?.word))
}

/// Estimates the corner angle between edges `a` and `b` using language
/// queries only.
///
/// # Safety
/// `t` must be a live table, `a` and `b` NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bounce_estimate_angle(
    t: *const BounceTable,
    a: *const c_char,
    b: *const c_char,
    depth: usize,
    out: *mut BounceAngle,
) -> BounceStatus {
    guard(|| {
        let poly = table_ref(t)?;
        let oracle = PolygonOracle::new(poly);
        let la = oracle.letter(read_str(a, "a")?).ffi()?;
        let lb = oracle.letter(read_str(b, "b")?).ffi()?;
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let est = estimate_angle(&oracle, la, lb, depth, SearchBudget::default())
            .ffi()?
            .ok_or_else(|| (BounceStatus::NotFound, "no closed matching family".to_string()))?;
        let (exact, p, q) = match est.kind {
            AngleKind::ExactRational { p, q } => (1, p, q),
            AngleKind::Estimate { .. } => (0, 0, 0),
        };
        *out = BounceAngle {
            value: est.value,
            exact,
            p,
            q,
            certified_depth: est.certified_depth,
        };
        Ok(())
    })
}

/// Adjacent edge pairs recovered from the language, one `A B` per line.
///
/// # Safety
/// `t` must be a live table and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bounce_adjacency(t: *const BounceTable, depth: usize, out: *mut *mut c_char) -> BounceStatus {
    guard(|| {
        let poly = table_ref(t)?;
        let oracle = PolygonOracle::new(poly);
        let adj = adjacency_pairs(&oracle, depth).ffi()?;
        let name = |i: usize| oracle.alphabet()[i].as_str().to_string();
        let mut lines: Vec<String> = adj.pairs.iter().map(|&(a, b)| format!("{} {}\n", name(a), name(b))).collect();
        lines.sort();
        write_string(out, lines.concat())
    })
}

/// Certified perturbation radius for newline-separated, comma-separated words.
///
/// # Safety
/// `t` must be a live table, `words` NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bounce_persistence_radius(t: *const BounceTable, words: *const c_char, out: *mut f64) -> BounceStatus {
    guard(|| {
        let poly = table_ref(t)?;
        let ws = read_str(words, "words")?
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(|l| poly.parse_word_str(l))
            .collect::<bounce_core::Result<Vec<_>>>()
            .ffi()?;
        if out.is_null() {
            return Err(null("output pointer"));
        }
        *out = persistence_radius(poly, &ws).ffi()?.epsilon;
        Ok(())
    })
}
