//! C ABI over `igs-core`.
//!
//! Graphs and RR samples cross the boundary as opaque handles owned by the caller and
//! released with the matching `*_free` function. Every fallible call returns an
//! [`IgsStatus`]; on failure `igs_last_error_message` describes the error for the calling
//! thread. Panics are caught and reported as `IGS_STATUS_INTERNAL`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use igs_core::diffusion::{sample_rr_collection, RrSample, SamplingOptions};
use igs_core::estimator::{evaluate_hat_phi, required_sample_size, EstimatorConfig, EstimatorMode};
use igs_core::graph::{load_edge_list, InfluenceGraph, Model, NodeId};
use igs_core::hitting::max_shapley_group;
use igs_core::shapley::exact_group_shapley_subsets;
use igs_core::Error;

/// Opaque influence graph.
pub struct IgsGraph(InfluenceGraph);

/// Opaque collection of RR sets.
pub struct IgsSample(RrSample);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IgsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    InvalidParameter = 3,
    Precondition = 4,
    TooLarge = 5,
    ResourceCap = 6,
    Io = 7,
    Internal = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IgsModel {
    Ic = 0,
    Lt = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IgsMode {
    Single = 0,
    Uniform = 1,
    Selection = 2,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> IgsStatus {
    match e {
        Error::Input { .. } | Error::Graph(_) | Error::SampleFormat(_) => IgsStatus::InvalidInput,
        Error::InvalidParameter(_) => IgsStatus::InvalidParameter,
        Error::Precondition(_) => IgsStatus::Precondition,
        Error::TooLarge(_) => IgsStatus::TooLarge,
        Error::ResourceCap(_) => IgsStatus::ResourceCap,
        Error::Io(_) => IgsStatus::Io,
    }
}

enum Failure {
    Null(&'static str),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

/// Runs `f`, translating errors and panics into a status plus the thread's last message.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> IgsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            IgsStatus::Ok
        }
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("{what} is null"));
            IgsStatus::NullPointer
        }
        Ok(Err(Failure::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal error".into());
            IgsStatus::Internal
        }
    }
}

fn non_null<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    // SAFETY: callers pass either null or a pointer obtained from this library.
    unsafe { p.as_ref() }.ok_or(Failure::Null(what))
}

fn out_ptr<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    // SAFETY: non-null output pointers must be valid for writes per the API contract.
    unsafe { p.as_mut() }.ok_or(Failure::Null(what))
}

fn nodes<'a>(p: *const u32, len: usize) -> Result<&'a [NodeId], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null("nodes"));
    }
    // SAFETY: `p` points to `len` readable u32 values per the API contract.
    Ok(unsafe { slice::from_raw_parts(p, len) })
}

fn c_str<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    // SAFETY: `p` is a NUL-terminated string per the API contract.
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|_| Failure::Core(Error::Input { line: None, message: format!("{what} is not UTF-8") }))
}

fn model(m: IgsModel) -> Model {
    match m {
        IgsModel::Ic => Model::Ic,
        IgsModel::Lt => Model::Lt,
    }
}

/// Message for the last failed call on this thread, or null. Valid until the next call.
#[no_mangle]
pub extern "C" fn igs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn igs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses an edge list (`<src> <dst> <value>` lines) held in memory.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn igs_graph_parse(text: *const c_char, m: IgsModel, out: *mut *mut IgsGraph) -> IgsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let g = load_edge_list(c_str(text, "text")?, model(m))?;
        *out = Box::into_raw(Box::new(IgsGraph(g)));
        Ok(())
    })
}

/// Reads an edge list file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn igs_graph_load(path: *const c_char, m: IgsModel, out: *mut *mut IgsGraph) -> IgsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let path = c_str(path, "path")?;
        let text = std::fs::read_to_string(path).map_err(Error::from)?;
        *out = Box::into_raw(Box::new(IgsGraph(load_edge_list(&text, model(m))?)));
        Ok(())
    })
}

/// Number of nodes, or 0 for a null handle.
///
/// # Safety
/// `graph` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn igs_graph_node_count(graph: *const IgsGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.node_count())
}

/// Releases a graph; null is ignored.
///
/// # Safety
/// `graph` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn igs_graph_free(graph: *mut IgsGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Samples `t` RR sets; identical for any `workers` value.
///
/// # Safety
/// `graph` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn igs_sample_rr_sets(
    graph: *const IgsGraph,
    t: u64,
    seed: u64,
    workers: usize,
    out: *mut *mut IgsSample,
) -> IgsStatus {
    guard(|| {
        let g = non_null(graph, "graph")?;
        let out = out_ptr(out, "out")?;
        let sample = sample_rr_collection(&g.0, t, seed, &SamplingOptions::with_workers(workers))?;
        *out = Box::into_raw(Box::new(IgsSample(sample)));
        Ok(())
    })
}

/// Number of RR sets, or 0 for a null handle.
///
/// # Safety
/// `sample` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn igs_sample_len(sample: *const IgsSample) -> usize {
    sample.as_ref().map_or(0, |s| s.0.len())
}

/// Releases a sample; null is ignored.
///
/// # Safety
/// `sample` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn igs_sample_free(sample: *mut IgsSample) {
    if !sample.is_null() {
        drop(Box::from_raw(sample));
    }
}

/// Estimated centrality of `nodes[0..len]` over a sample.
///
/// # Safety
/// `sample` must be a live handle, `nodes` readable for `len` values, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn igs_hat_phi(sample: *const IgsSample, nodes_ptr: *const u32, len: usize, out: *mut f64) -> IgsStatus {
    guard(|| {
        let s = non_null(sample, "sample")?;
        let out = out_ptr(out, "out")?;
        let set = nodes(nodes_ptr, len)?;
        if let Some(v) = set.iter().find(|&&v| v as usize >= s.0.node_count()) {
            return Err(Error::InvalidParameter(format!("node {v} out of range")).into());
        }
        *out = evaluate_hat_phi(&s.0, set);
        Ok(())
    })
}

/// Exact Group Shapley value by enumeration (small graphs only).
///
/// # Safety
/// `graph` must be a live handle, `nodes` readable for `len` values, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn igs_exact_group_shapley(
    graph: *const IgsGraph,
    nodes_ptr: *const u32,
    len: usize,
    out: *mut f64,
) -> IgsStatus {
    guard(|| {
        let g = non_null(graph, "graph")?;
        let out = out_ptr(out, "out")?;
        *out = exact_group_shapley_subsets(&g.0, nodes(nodes_ptr, len)?)?;
        Ok(())
    })
}

/// Number of RR sets the given accuracy target requires.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn igs_required_sample_size(
    n: usize,
    epsilon: f64,
    c: f64,
    k: usize,
    mode: IgsMode,
    out: *mut u64,
) -> IgsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let mode = match mode {
            IgsMode::Single => EstimatorMode::Single,
            IgsMode::Uniform => EstimatorMode::Uniform,
            IgsMode::Selection => EstimatorMode::Selection,
        };
        *out = required_sample_size(n, &EstimatorConfig { epsilon, c, k, mode })?;
        Ok(())
    })
}

/// Greedy seed selection. Writes `k` ascending node ids to `seeds` (capacity at least `k`)
/// and the estimated centrality of that set to `hat_phi`.
///
/// # Safety
/// `graph` must be a live handle, `seeds` writable for `k` values, `hat_phi` writable.
#[no_mangle]
pub unsafe extern "C" fn igs_max_shapley_group(
    graph: *const IgsGraph,
    k: usize,
    epsilon: f64,
    c: f64,
    seed: u64,
    workers: usize,
    seeds: *mut u32,
    hat_phi: *mut f64,
) -> IgsStatus {
    guard(|| {
        let g = non_null(graph, "graph")?;
        if seeds.is_null() {
            return Err(Failure::Null("seeds"));
        }
        let hat_phi = out_ptr(hat_phi, "hat_phi")?;
        let sel = max_shapley_group(&g.0, k, epsilon, c, seed, &SamplingOptions::with_workers(workers))?;
        slice::from_raw_parts_mut(seeds, sel.seeds.len()).copy_from_slice(&sel.seeds);
        *hat_phi = sel.hat_phi;
        Ok(())
    })
}
