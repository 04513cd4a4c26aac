//! C interface to `netshuffle`.
//!
//! Objects cross the boundary as opaque handles that the caller releases with
//! the matching `*_free` function. Every fallible function returns an
//! [`NsStatus`]; on failure [`ns_last_error`] describes the problem for the
//! calling thread. Output pointers are written only on success.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use netshuffle::experiments::{run_experiment, ExperimentConfig, PowerTable};
use netshuffle::graph::{sample_sbm, Graph, Permutation, SbmSpec, StreamKey};
use netshuffle::matching::{sgm, SeedSet, SgmOptions};
use netshuffle::stats::{sbm_shuffle_distance_sq, Statistic};
use netshuffle::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    SizeMismatch = 3,
    Config = 4,
    Parse = 5,
    Io = 6,
    Numerical = 7,
    Panic = 8,
}

/// Statistic codes accepted by [`ns_statistic`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NsStatistic {
    Adjacency = 0,
    Phat = 1,
    Normalized = 2,
    Semipar = 3,
    Omni = 4,
}

pub struct NsGraph {
    inner: Graph,
}

pub struct NsConfig {
    inner: ExperimentConfig,
}

pub struct NsTable {
    inner: PowerTable,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let text = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
}

fn status_of(e: &Error) -> NsStatus {
    match e {
        Error::SizeMismatch { .. } | Error::NotSquare { .. } => NsStatus::SizeMismatch,
        Error::Config { .. } => NsStatus::Config,
        Error::Parse { .. } | Error::EmptyFile => NsStatus::Parse,
        Error::Io(_) => NsStatus::Io,
        Error::DegenerateDensity | Error::ZeroVariance | Error::NonFinite => NsStatus::Numerical,
        _ => NsStatus::InvalidArgument,
    }
}

struct Failure(NsStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure(NsStatus::InvalidArgument, message.into())
}

/// Runs `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> NsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            NsStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(&message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            NsStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(ptr: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(Failure(NsStatus::NullPointer, format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

unsafe fn handle<'a, T>(ptr: *const T, what: &str) -> Result<&'a T, Failure> {
    ptr.as_ref().ok_or_else(|| Failure(NsStatus::NullPointer, format!("{what} is null")))
}

unsafe fn put<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure(NsStatus::NullPointer, "output pointer is null".into()));
    }
    out.write(value);
    Ok(())
}

unsafe fn sbm_spec(lambda: *const f64, blocks: usize, sizes: *const usize, nu: f64) -> Result<SbmSpec, Failure> {
    let flat = slice(lambda, blocks * blocks, "lambda")?;
    let sizes = slice(sizes, blocks, "sizes")?;
    let rows = flat.chunks(blocks.max(1)).map(<[f64]>::to_vec).collect();
    Ok(SbmSpec::new(rows, sizes.to_vec(), nu)?)
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn ns_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

#[no_mangle]
pub extern "C" fn ns_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a graph on `n` vertices from `m` pairs stored as `edges[2i], edges[2i+1]`.
///
/// # Safety
/// `edges` must point to `2 * m` values and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ns_graph_from_edges(n: usize, edges: *const usize, m: usize, out: *mut *mut NsGraph) -> NsStatus {
    guard(|| {
        let flat = slice(edges, 2 * m, "edges")?;
        let graph = Graph::from_edges(n, flat.chunks(2).map(|p| (p[0], p[1])))?;
        put(out, Box::into_raw(Box::new(NsGraph { inner: graph })))
    })
}

/// Samples an SBM. `lambda` is `blocks x blocks`, row-major; `sizes` has
/// `blocks` entries.
///
/// # Safety
/// Pointers must reference arrays of the stated lengths; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ns_graph_sample_sbm(
    lambda: *const f64,
    blocks: usize,
    sizes: *const usize,
    nu: f64,
    seed: u64,
    out: *mut *mut NsGraph,
) -> NsStatus {
    guard(|| {
        let spec = sbm_spec(lambda, blocks, sizes, nu)?;
        let graph = sample_sbm(&spec, &StreamKey::new(seed));
        put(out, Box::into_raw(Box::new(NsGraph { inner: graph })))
    })
}

/// # Safety
/// `g` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ns_graph_vertex_count(g: *const NsGraph) -> usize {
    g.as_ref().map_or(0, |g| g.inner.n())
}

/// # Safety
/// `g` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ns_graph_edge_count(g: *const NsGraph) -> usize {
    g.as_ref().map_or(0, |g| g.inner.edge_count())
}

/// # Safety
/// `g` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ns_graph_has_edge(g: *const NsGraph, i: usize, j: usize, out: *mut bool) -> NsStatus {
    guard(|| {
        let g = &handle(g, "graph")?.inner;
        if i >= g.n() || j >= g.n() {
            return Err(invalid(format!("vertex out of range for n = {}", g.n())));
        }
        put(out, g.has_edge(i, j))
    })
}

/// Relabels `g` by the permutation sending vertex `i` to `mapping[i]`.
///
/// # Safety
/// `mapping` must hold `n` values where `n` is the vertex count of `g`.
#[no_mangle]
pub unsafe extern "C" fn ns_graph_shuffle(
    g: *const NsGraph,
    mapping: *const usize,
    n: usize,
    out: *mut *mut NsGraph,
) -> NsStatus {
    guard(|| {
        let g = &handle(g, "graph")?.inner;
        let q = Permutation::from_mapping(slice(mapping, n, "mapping")?.to_vec())?;
        let shuffled = g.shuffle(&q)?;
        put(out, Box::into_raw(Box::new(NsGraph { inner: shuffled })))
    })
}

/// # Safety
/// `g` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ns_graph_free(g: *mut NsGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Evaluates a test statistic; `d` is the embedding dimension (ignored by
/// the adjacency statistic).
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ns_statistic(
    a: *const NsGraph,
    b: *const NsGraph,
    statistic: u32,
    d: usize,
    out: *mut f64,
) -> NsStatus {
    guard(|| {
        let which = match statistic {
            0 => Statistic::Adjacency,
            1 => Statistic::Phat,
            2 => Statistic::Normalized,
            3 => Statistic::Semipar,
            4 => Statistic::Omni,
            other => return Err(invalid(format!("unknown statistic code {other}"))),
        };
        let value = which.evaluate(&handle(a, "a")?.inner, &handle(b, "b")?.inner, d)?;
        put(out, value)
    })
}

/// `||P - Q_k P Q_k^T||_F^2` for a two-block SBM, in closed form.
///
/// # Safety
/// Pointers must reference arrays of the stated lengths; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ns_sbm_shuffle_distance_sq(
    lambda: *const f64,
    blocks: usize,
    sizes: *const usize,
    k: usize,
    out: *mut f64,
) -> NsStatus {
    guard(|| {
        let spec = sbm_spec(lambda, blocks, sizes, 1.0)?;
        put(out, sbm_shuffle_distance_sq(&spec, k)?)
    })
}

/// Seeded graph matching of `b` onto `a`. Seeds pair `seeds_a[i]` with
/// `seeds_b[i]`. On success `mapping_out[v]` is the label in `a` of vertex
/// `v` of `b`, and `objective_out` receives `||A - Q B Q^T||_F^2`.
///
/// # Safety
/// Handles must be live; seed arrays hold `n_seeds` values; `mapping_out`
/// holds one value per vertex; `objective_out` may be null.
#[no_mangle]
pub unsafe extern "C" fn ns_sgm(
    a: *const NsGraph,
    b: *const NsGraph,
    seeds_a: *const usize,
    seeds_b: *const usize,
    n_seeds: usize,
    restarts: usize,
    seed: u64,
    mapping_out: *mut usize,
    objective_out: *mut f64,
) -> NsStatus {
    guard(|| {
        let (a, b) = (&handle(a, "a")?.inner, &handle(b, "b")?.inner);
        let pairs = slice(seeds_a, n_seeds, "seeds_a")?.iter().copied().zip(slice(seeds_b, n_seeds, "seeds_b")?.iter().copied());
        let seeds = SeedSet::new(pairs.collect())?;
        let opts = SgmOptions { restarts, ..Default::default() };
        let result = sgm(a, b, &seeds, &opts, &StreamKey::new(seed))?;
        if mapping_out.is_null() {
            return Err(Failure(NsStatus::NullPointer, "mapping_out is null".into()));
        }
        for v in 0..b.n() {
            mapping_out.add(v).write(result.permutation.apply(v));
        }
        if !objective_out.is_null() {
            objective_out.write(result.objective);
        }
        Ok(())
    })
}

/// Loads and validates an experiment config file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ns_config_load(path: *const c_char, out: *mut *mut NsConfig) -> NsStatus {
    guard(|| {
        let path = CStr::from_ptr(handle(path, "path")?).to_str().map_err(|_| invalid("path is not UTF-8"))?;
        let cfg = ExperimentConfig::load(path)?;
        put(out, Box::into_raw(Box::new(NsConfig { inner: cfg })))
    })
}

/// Parses a config from JSON text; relative paths resolve against `base_dir`
/// (may be null for the working directory).
///
/// # Safety
/// Strings must be NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ns_config_parse(json: *const c_char, base_dir: *const c_char, out: *mut *mut NsConfig) -> NsStatus {
    guard(|| {
        let text = CStr::from_ptr(handle(json, "json")?).to_str().map_err(|_| invalid("config is not UTF-8"))?;
        let base = if base_dir.is_null() {
            "."
        } else {
            CStr::from_ptr(base_dir).to_str().map_err(|_| invalid("base_dir is not UTF-8"))?
        };
        let cfg = ExperimentConfig::from_json(text, base)?;
        put(out, Box::into_raw(Box::new(NsConfig { inner: cfg })))
    })
}

/// The seed stored in the config.
///
/// # Safety
/// `cfg` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ns_config_seed(cfg: *const NsConfig) -> u64 {
    cfg.as_ref().map_or(0, |c| c.inner.seed)
}

/// # Safety
/// `cfg` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ns_config_free(cfg: *mut NsConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Runs the experiment with master seed `seed`.
///
/// # Safety
/// `cfg` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ns_run_experiment(cfg: *const NsConfig, seed: u64, out: *mut *mut NsTable) -> NsStatus {
    guard(|| {
        let table = run_experiment(&handle(cfg, "config")?.inner, seed)?;
        put(out, Box::into_raw(Box::new(NsTable { inner: table })))
    })
}

/// # Safety
/// `t` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ns_table_row_count(t: *const NsTable) -> usize {
    t.as_ref().map_or(0, |t| t.inner.rows.len())
}

/// Power and level of row `row`.
///
/// # Safety
/// `t` must be live; `power` and `level` writable.
#[no_mangle]
pub unsafe extern "C" fn ns_table_row_power(t: *const NsTable, row: usize, power: *mut f64, level: *mut f64) -> NsStatus {
    guard(|| {
        let rows = &handle(t, "table")?.inner.rows;
        let r = rows.get(row).ok_or_else(|| invalid(format!("row {row} of {}", rows.len())))?;
        put(power, r.power)?;
        put(level, r.level)
    })
}

/// The table as CSV text. Release the string with [`ns_string_free`].
///
/// # Safety
/// `t` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ns_table_to_csv(t: *const NsTable, out: *mut *mut c_char) -> NsStatus {
    guard(|| {
        let text = handle(t, "table")?.inner.to_csv_string()?;
        let c = CString::new(text).map_err(|_| invalid("CSV contains NUL"))?;
        put(out, c.into_raw())
    })
}

/// # Safety
/// `t` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ns_table_free(t: *mut NsTable) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ns_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
