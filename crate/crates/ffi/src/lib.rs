//! C interface to the skillset compiler and model checker.
//!
//! A session owns a compiled skillset and the layer models attached to it.
//! Every function returns an [`SkcStatus`]; on failure the message is
//! available from [`skc_last_error`] on the same thread. Strings returned
//! through out-pointers are owned by the caller and released with
//! [`skc_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use skillcheck::compile::{compile, CompiledSkillset};
use skillcheck::layer::{parse_layer_model, LayerBinding};
use skillcheck::ltl::{model_check, parse_ltl, Engine};
use skillcheck::skill_lang::parse_skillset;
use skillcheck::system::{builtin_attachment, Attachment, SystemBuilder};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Syntax, scope or compilation errors in an input text.
    Diagnostics = 3,
    /// The attached models do not close the skillset.
    Closure = 4,
    /// The property could not be checked.
    Check = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkcEngine {
    Ndfs = 0,
    Scc = 1,
}

/// Opaque session handle.
pub struct SkcSession {
    compiled: CompiledSkillset,
    attachments: Vec<Attachment>,
    auto_abstract: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Fail(SkcStatus, String);

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SkcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            SkcStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal error");
            SkcStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(SkcStatus::NullPointer, "null string argument".into()));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(SkcStatus::InvalidUtf8, "argument is not valid UTF-8".into()))
}

unsafe fn session<'a>(p: *mut SkcSession) -> Result<&'a mut SkcSession, Fail> {
    p.as_mut()
        .ok_or_else(|| Fail(SkcStatus::NullPointer, "null session".into()))
}

unsafe fn give_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail(SkcStatus::NullPointer, "null output pointer".into()));
    }
    let c = CString::new(s).map_err(|_| Fail(SkcStatus::Panic, "nul byte in output".into()))?;
    *out = c.into_raw();
    Ok(())
}

fn diagnostics(diags: &[skillcheck::Diagnostic]) -> Fail {
    let lines: Vec<String> = diags.iter().map(ToString::to_string).collect();
    Fail(SkcStatus::Diagnostics, lines.join("\n"))
}

/// Parses and compiles a skillset. On success `*out` receives a session to
/// be released with [`skc_session_free`].
///
/// # Safety
/// `skillset` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn skc_session_new(
    skillset: *const c_char,
    out: *mut *mut SkcSession,
) -> SkcStatus {
    guard(|| {
        if out.is_null() {
            return Err(Fail(SkcStatus::NullPointer, "null output pointer".into()));
        }
        *out = ptr::null_mut();
        let ast = parse_skillset(text(skillset)?).map_err(|d| diagnostics(&d))?;
        let compiled = compile(&ast).map_err(|d| diagnostics(&d))?;
        *out = Box::into_raw(Box::new(SkcSession {
            compiled,
            attachments: Vec::new(),
            auto_abstract: false,
        }));
        Ok(())
    })
}

/// # Safety
/// `s` must come from [`skc_session_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn skc_session_free(s: *mut SkcSession) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Attaches a layer model given in the layer-model language.
///
/// # Safety
/// `s` must be a live session and `model` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn skc_session_attach_layer(
    s: *mut SkcSession,
    model: *const c_char,
) -> SkcStatus {
    guard(|| {
        let s = session(s)?;
        let m = parse_layer_model(text(model)?).map_err(|d| diagnostics(&d))?;
        s.attachments.push(LayerBinding::new(m).into());
        Ok(())
    })
}

/// Attaches a builtin model such as `refined-goto:Bmax=6,Dmax=2`.
///
/// # Safety
/// `s` must be a live session and `spec` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn skc_session_attach_builtin(
    s: *mut SkcSession,
    spec: *const c_char,
) -> SkcStatus {
    guard(|| {
        let s = session(s)?;
        let a = builtin_attachment(text(spec)?, &s.compiled)
            .map_err(|e| Fail(SkcStatus::Closure, e.to_string()))?;
        s.attachments.push(a);
        Ok(())
    })
}

/// Whether uncovered interfaces are closed with the most abstract models.
///
/// # Safety
/// `s` must be a live session.
#[no_mangle]
pub unsafe extern "C" fn skc_session_set_auto_abstract(s: *mut SkcSession, on: bool) -> SkcStatus {
    guard(|| {
        session(s)?.auto_abstract = on;
        Ok(())
    })
}

/// The interface manifest as JSON.
///
/// # Safety
/// `s` must be a live session and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn skc_session_manifest_json(
    s: *mut SkcSession,
    out: *mut *mut c_char,
) -> SkcStatus {
    guard(|| {
        let s = session(s)?;
        give_string(out, s.compiled.manifest.to_json())
    })
}

fn closed(s: &SkcSession) -> Result<skillcheck::system::ClosedSystem, Fail> {
    let mut b = SystemBuilder::new(&s.compiled).auto_abstract(s.auto_abstract);
    for a in &s.attachments {
        b = b.attach(a.clone());
    }
    b.build()
        .map_err(|e| Fail(SkcStatus::Closure, e.to_string()))
}

/// Checks `property` on the closed system. `*holds` receives the verdict
/// and `*verdict_json` its JSON form. With `timing` false the JSON leaves
/// out `time_ms`.
///
/// # Safety
/// `s` must be a live session, `property` a NUL-terminated string and the
/// out-pointers valid.
#[no_mangle]
pub unsafe extern "C" fn skc_session_verify(
    s: *mut SkcSession,
    property: *const c_char,
    engine: SkcEngine,
    max_states: usize,
    timing: bool,
    holds: *mut bool,
    verdict_json: *mut *mut c_char,
) -> SkcStatus {
    guard(|| {
        let s = session(s)?;
        if holds.is_null() {
            return Err(Fail(SkcStatus::NullPointer, "null output pointer".into()));
        }
        let f = parse_ltl(text(property)?).map_err(|d| diagnostics(&[d]))?;
        let system = closed(s)?;
        let engine = match engine {
            SkcEngine::Ndfs => Engine::Ndfs,
            SkcEngine::Scc => Engine::Scc,
        };
        let v = model_check(&system.network, &f, engine, max_states)
            .map_err(|e| Fail(SkcStatus::Check, e.to_string()))?;
        give_string(verdict_json, v.to_json(&system.network, timing))?;
        *holds = v.holds();
        Ok(())
    })
}

/// Reachability statistics of the closed system as JSON.
///
/// # Safety
/// `s` must be a live session and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn skc_session_explore(
    s: *mut SkcSession,
    max_states: usize,
    out: *mut *mut c_char,
) -> SkcStatus {
    guard(|| {
        let s = session(s)?;
        let stats = closed(s)?.network.reachable(max_states);
        give_string(out, serde_json::to_string(&stats).expect("stats serialize"))
    })
}

/// Message of the last failed call on this thread; empty after a success.
/// Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn skc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `p` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn skc_string_free(p: *mut c_char) {
    if !p.is_null() {
        drop(CString::from_raw(p));
    }
}

#[no_mangle]
pub extern "C" fn skc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
