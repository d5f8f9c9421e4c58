//! C interface to pdfa-forge.
//!
//! Every fallible call returns a [`PfStatus`]. On failure the message is
//! available from [`pf_last_error`] on the same thread. Strings handed out
//! by the library must be released with [`pf_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use pdfa_forge::automaton::{lm_equivalent, quotient};
use pdfa_forge::fixtures;
use pdfa_forge::learner::{learn, LearnerLimits};
use pdfa_forge::teacher::{EqOracle, EqSpec, ExactOracle, ExhaustiveOracle, SamplingOracle};
use pdfa_forge::tolerance::enumerate_clique_partitions;
use pdfa_forge::{Equivalence, EquivalenceSpec, Error, LanguageModel, Pdfa, QuotientPdfa, SimilaritySpec, Verdict};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PfStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidInput = 3,
    BufferTooSmall = 4,
    NotConverged = 5,
    Limit = 6,
    Io = 7,
    Panic = 8,
}

/// A PDFA.
pub struct PfPdfa(Pdfa);

/// A quotient PDFA whose states carry distribution classes.
pub struct PfQuotient(QuotientPdfa);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

struct Failure(PfStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Io(_) | Error::Remote(_) => PfStatus::Io,
            Error::BudgetExceeded(_) | Error::QueryTooLong { .. } => PfStatus::Limit,
            _ => PfStatus::InvalidInput,
        };
        Failure(status, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> PfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PfStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            PfStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(PfStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(PfStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn get<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure(PfStatus::NullArgument, format!("{what} is null")))
}

fn check_out<T>(out: *mut T) -> Result<(), Failure> {
    if out.is_null() {
        Err(Failure(PfStatus::NullArgument, "output pointer is null".into()))
    } else {
        Ok(())
    }
}

fn c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Failure(PfStatus::InvalidInput, "string contains NUL".into()))
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version, statically allocated.
#[no_mangle]
pub extern "C" fn pf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn pf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a PDFA from its JSON form.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pf_pdfa_from_json(json: *const c_char, out: *mut *mut PfPdfa) -> PfStatus {
    guard(|| {
        check_out(out)?;
        let a = Pdfa::from_json(text(json, "json")?)?;
        *out = Box::into_raw(Box::new(PfPdfa(a)));
        Ok(())
    })
}

/// One of the bundled automata: `fig2a`, `fig2b` or `fig3a`.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pf_pdfa_builtin(name: *const c_char, out: *mut *mut PfPdfa) -> PfStatus {
    guard(|| {
        check_out(out)?;
        let name = text(name, "name")?;
        let a = fixtures::builtin_pdfa(name)
            .ok_or_else(|| Failure(PfStatus::InvalidInput, format!("no bundled PDFA named `{name}`")))?;
        *out = Box::into_raw(Box::new(PfPdfa(a)));
        Ok(())
    })
}

/// # Safety
/// `a` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn pf_pdfa_free(a: *mut PfPdfa) {
    if !a.is_null() {
        drop(Box::from_raw(a));
    }
}

/// # Safety
/// `a` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn pf_pdfa_num_states(a: *const PfPdfa) -> usize {
    a.as_ref().map_or(0, |a| a.0.num_states())
}

/// Number of symbols, not counting the terminal.
///
/// # Safety
/// `a` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn pf_pdfa_alphabet_len(a: *const PfPdfa) -> usize {
    a.as_ref().map_or(0, |a| a.0.alphabet().len())
}

/// Next-symbol distribution after `word`. Writes `alphabet_len + 1`
/// probabilities, the terminal last.
///
/// # Safety
/// `word` must point to `len` symbols (may be null when `len` is 0) and
/// `probs` to `cap` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn pf_pdfa_query(
    a: *const PfPdfa,
    word: *const usize,
    len: usize,
    probs: *mut f64,
    cap: usize,
) -> PfStatus {
    guard(|| {
        let a = &get(a, "pdfa")?.0;
        check_out(probs)?;
        let word = if len == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(get(word, "word")?, len)
        };
        let d = a.query(word)?;
        if cap < d.len() {
            return Err(Failure(PfStatus::BufferTooSmall, format!("need {} doubles, got {cap}", d.len())));
        }
        ptr::copy_nonoverlapping(d.probs().as_ptr(), probs, d.len());
        Ok(())
    })
}

/// # Safety
/// `a` must be a live handle, `equiv` a NUL-terminated string and `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn pf_quotient(a: *const PfPdfa, equiv: *const c_char, out: *mut *mut PfQuotient) -> PfStatus {
    guard(|| {
        check_out(out)?;
        let a = &get(a, "pdfa")?.0;
        let e: EquivalenceSpec = text(equiv, "equiv")?.parse()?;
        *out = Box::into_raw(Box::new(PfQuotient(quotient(a, &e)?)));
        Ok(())
    })
}

/// # Safety
/// `q` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn pf_quotient_free(q: *mut PfQuotient) {
    if !q.is_null() {
        drop(Box::from_raw(q));
    }
}

/// # Safety
/// `q` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn pf_quotient_num_states(q: *const PfQuotient) -> usize {
    q.as_ref().map_or(0, |q| q.0.num_states())
}

/// # Safety
/// `q` must be a live handle and `out` writable. Free the result with
/// [`pf_string_free`].
#[no_mangle]
pub unsafe extern "C" fn pf_quotient_to_json(q: *const PfQuotient, out: *mut *mut c_char) -> PfStatus {
    guard(|| {
        check_out(out)?;
        *out = c_string(get(q, "quotient")?.0.to_json())?;
        Ok(())
    })
}

/// # Safety
/// As [`pf_quotient_to_json`].
#[no_mangle]
pub unsafe extern "C" fn pf_quotient_to_dot(q: *const PfQuotient, out: *mut *mut c_char) -> PfStatus {
    guard(|| {
        check_out(out)?;
        *out = c_string(get(q, "quotient")?.0.to_dot())?;
        Ok(())
    })
}

/// Compares two PDFA under `equiv`. On a difference `*counterexample`
/// receives the least separating word, otherwise null.
///
/// # Safety
/// `a` and `b` must be live handles, `equiv` a NUL-terminated string, and
/// both outputs writable.
#[no_mangle]
pub unsafe extern "C" fn pf_compare(
    a: *const PfPdfa,
    b: *const PfPdfa,
    equiv: *const c_char,
    equivalent: *mut bool,
    counterexample: *mut *mut c_char,
) -> PfStatus {
    guard(|| {
        check_out(equivalent)?;
        check_out(counterexample)?;
        let (a, b) = (&get(a, "a")?.0, &get(b, "b")?.0);
        let e: EquivalenceSpec = text(equiv, "equiv")?.parse()?;
        match lm_equivalent(a, b, &e)? {
            Verdict::Equivalent => {
                *equivalent = true;
                *counterexample = ptr::null_mut();
            }
            Verdict::Counterexample(w) => {
                *equivalent = false;
                *counterexample = c_string(a.alphabet().format_word(&w))?;
            }
        }
        Ok(())
    })
}

/// Learns the quotient of `target` with L*. `eq` is `exact`,
/// `sample:<n>:<maxlen>:<seed>` or `exhaustive:<maxlen>`; `max_rounds` of
/// 0 means the default. Returns [`PfStatus::NotConverged`] on a limit, with
/// the last hypothesis in `*out` when there is one.
///
/// # Safety
/// `target` must be a live handle, `equiv` and `eq` NUL-terminated strings
/// and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pf_learn(
    target: *const PfPdfa,
    equiv: *const c_char,
    eq: *const c_char,
    max_rounds: usize,
    out: *mut *mut PfQuotient,
) -> PfStatus {
    guard(|| {
        check_out(out)?;
        *out = ptr::null_mut();
        let a = &get(target, "target")?.0;
        let e: EquivalenceSpec = text(equiv, "equiv")?.parse()?;
        let spec: EqSpec = text(eq, "eq")?.parse()?;
        let shared: Arc<dyn Equivalence> = Arc::new(e.clone());
        let model: Arc<dyn LanguageModel> = Arc::new(a.clone());
        let teacher: Box<dyn EqOracle> = match spec {
            EqSpec::Exact => Box::new(ExactOracle::new(a.clone(), shared)),
            EqSpec::Sample(cfg) => Box::new(SamplingOracle::new(model, shared, cfg)?),
            EqSpec::Exhaustive(n) => Box::new(ExhaustiveOracle::new(model, shared, n)),
        };
        let mut limits = LearnerLimits::default();
        if max_rounds > 0 {
            limits.max_rounds = max_rounds;
        }
        let report = learn(a, &e, teacher.as_ref(), limits)?;
        let converged = report.converged();
        if let Some(h) = report.hypothesis {
            *out = Box::into_raw(Box::new(PfQuotient(h)));
        }
        if converged {
            Ok(())
        } else {
            Err(Failure(PfStatus::NotConverged, format!("stopped after {} rounds", report.rounds)))
        }
    })
}

/// Number of clique partitions of a JSON distribution list under `sim`.
///
/// # Safety
/// `dists_json` and `sim` must be NUL-terminated strings and `count`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn pf_clique_partition_count(
    dists_json: *const c_char,
    sim: *const c_char,
    count: *mut usize,
) -> PfStatus {
    guard(|| {
        check_out(count)?;
        let ds = fixtures::parse_distribution_list(text(dists_json, "distributions")?)?;
        let s: SimilaritySpec = text(sim, "sim")?.parse()?;
        *count = enumerate_clique_partitions(&ds, &s)?.len();
        Ok(())
    })
}
