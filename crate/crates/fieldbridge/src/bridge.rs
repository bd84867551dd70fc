//! Embedded CPython guest runtime and host/guest data transfer.
//!
//! A [`Session`] owns one guest global namespace (the scope) inside the
//! process-wide interpreter. Host code moves data in and out of the scope by
//! copy ([`Session::put_field_copy`], [`Session::put_element`], ...) or by
//! reference ([`Session::publish_field_by_ref`]), and runs guest code with
//! [`Session::load_script`] and [`Session::exec_statement`].
//!
//! At most one session is live per process. The interpreter itself is started
//! once and never finalized: a closed session only drops its scope, because
//! extension modules such as numpy cannot be re-imported after
//! `Py_FinalizeEx`.

use std::cell::{Cell, RefCell};
use std::collections::HashMap;
use std::fmt;
use std::marker::PhantomData;
use std::path::PathBuf;
use std::rc::Rc;
use std::sync::atomic::{AtomicBool, Ordering};
use std::thread::{self, ThreadId};

use fieldbridge_core::FieldBuffer;
use pyo3::buffer::PyBuffer;
use pyo3::exceptions::PySyntaxError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyFloat, PyTuple};

static LIVE: AtomicBool = AtomicBool::new(false);

/// Guest helpers installed into every fresh scope. Underscore-prefixed names
/// are not part of the user scope.
const PREAMBLE: &str = r#"
import ctypes as _fb_ctypes
import numpy as _fb_np

def _fb_view(address, shape, writable):
    n, c = shape
    dims = (n,) if c == 1 else (n, c)
    if n == 0:
        view = _fb_np.empty(dims)
    else:
        pointer = _fb_ctypes.cast(address, _fb_ctypes.POINTER(_fb_ctypes.c_double))
        view = _fb_np.ctypeslib.as_array(pointer, shape=dims)
    view.flags.writeable = writable
    return view
"#;

/// Category of a guest-side failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GuestErrorKind {
    InitFailure,
    ScriptNotFound,
    SyntaxError,
    RuntimeError,
    NameMissing,
    ShapeMismatch,
    TypeMismatch,
}

/// Failure reported by the bridge. For guest exceptions `message` holds the
/// formatted traceback.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{kind:?}: {message}")]
pub struct GuestError {
    pub kind: GuestErrorKind,
    pub message: String,
}

impl GuestError {
    pub fn new(kind: GuestErrorKind, message: impl Into<String>) -> Self {
        let mut message = message.into();
        if message.is_empty() {
            message = format!("{kind:?} (no message from guest)");
        }
        Self { kind, message }
    }

    fn runtime(message: impl Into<String>) -> Self {
        Self::new(GuestErrorKind::RuntimeError, message)
    }

    fn shape(message: impl Into<String>) -> Self {
        Self::new(GuestErrorKind::ShapeMismatch, message)
    }

    fn from_py(py: Python<'_>, err: PyErr) -> Self {
        let kind = if err.is_instance_of::<PySyntaxError>(py) {
            GuestErrorKind::SyntaxError
        } else {
            GuestErrorKind::RuntimeError
        };
        Self::new(kind, format_traceback(py, &err))
    }
}

fn format_traceback(py: Python<'_>, err: &PyErr) -> String {
    let formatted = (|| -> PyResult<String> {
        let traceback = py.import("traceback")?;
        let lines = traceback.call_method1(
            "format_exception",
            (err.get_type(py), err.value(py), err.traceback(py)),
        )?;
        let joined: String = lines.extract::<Vec<String>>()?.concat();
        Ok(joined)
    })();
    formatted.unwrap_or_else(|_| err.to_string())
}

/// Script text to evaluate in the session scope.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScriptSource {
    Path(PathBuf),
    Inline(String),
}

impl From<&str> for ScriptSource {
    fn from(text: &str) -> Self {
        ScriptSource::Inline(text.to_owned())
    }
}

/// How field data crosses the host/guest boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransferStrategy {
    /// One element per transfer, guest code invoked per element.
    PerElementCopy,
    /// The whole field copied into a guest array and back.
    WholeFieldCopy,
    /// The guest gets an array view over the host buffer.
    ByReference,
}

impl TransferStrategy {
    pub const ALL: [TransferStrategy; 3] = [
        TransferStrategy::PerElementCopy,
        TransferStrategy::WholeFieldCopy,
        TransferStrategy::ByReference,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TransferStrategy::PerElementCopy => "per-element",
            TransferStrategy::WholeFieldCopy => "whole-field",
            TransferStrategy::ByReference => "by-ref",
        }
    }
}

impl fmt::Display for TransferStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for TransferStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TransferStrategy::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| format!("unknown strategy {s:?} (per-element, whole-field, by-ref)"))
    }
}

/// Counters of data moved through the copy paths.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TransferStats {
    pub field_copies_in: u64,
    pub field_copies_out: u64,
    pub element_copies_in: u64,
    pub element_copies_out: u64,
    pub bytes_copied: u64,
    pub leases_published: u64,
}

struct Inner {
    scope: Py<PyDict>,
    open: Cell<bool>,
    owner: ThreadId,
    active_leases: Cell<usize>,
    stats: Cell<TransferStats>,
    compiled: RefCell<HashMap<String, Py<PyAny>>>,
}

impl Inner {
    fn ensure_live(&self) -> Result<(), GuestError> {
        if !self.open.get() {
            return Err(GuestError::runtime("session is closed"));
        }
        if thread::current().id() != self.owner {
            return Err(GuestError::runtime(
                "session used from a thread other than the one that opened it",
            ));
        }
        Ok(())
    }

    fn bump(&self, f: impl FnOnce(&mut TransferStats)) {
        let mut s = self.stats.get();
        f(&mut s);
        self.stats.set(s);
    }

    fn exec(&self, py: Python<'_>, statement: &str) -> Result<(), GuestError> {
        let code = {
            let cache = self.compiled.borrow();
            cache.get(statement).map(|c| c.clone_ref(py))
        };
        let code = match code {
            Some(code) => code,
            None => {
                let code = compile(py, statement, "<host>")?;
                self.compiled
                    .borrow_mut()
                    .insert(statement.to_owned(), code.clone_ref(py));
                code
            }
        };
        run_code(py, code.bind(py), self.scope.bind(py))
    }
}

impl Drop for Inner {
    fn drop(&mut self) {
        if self.open.replace(false) {
            Python::attach(|py| self.scope.bind(py).clear());
            LIVE.store(false, Ordering::SeqCst);
        }
    }
}

fn compile(py: Python<'_>, source: &str, filename: &str) -> Result<Py<PyAny>, GuestError> {
    let builtins = py
        .import("builtins")
        .map_err(|e| GuestError::from_py(py, e))?;
    builtins
        .getattr("compile")
        .and_then(|c| c.call1((source, filename, "exec")))
        .map(Bound::unbind)
        .map_err(|e| GuestError::from_py(py, e))
}

fn run_code(
    py: Python<'_>,
    code: &Bound<'_, PyAny>,
    scope: &Bound<'_, PyDict>,
) -> Result<(), GuestError> {
    let builtins = py
        .import("builtins")
        .map_err(|e| GuestError::from_py(py, e))?;
    builtins
        .getattr("exec")
        .and_then(|exec| exec.call1((code, scope)))
        .map(drop)
        .map_err(|e| GuestError::from_py(py, e))
}

fn check_identifier(name: &str) -> Result<(), GuestError> {
    let mut chars = name.chars();
    let ok = matches!(chars.next(), Some(c) if c == '_' || c.is_alphabetic())
        && chars.all(|c| c == '_' || c.is_alphanumeric());
    if ok {
        Ok(())
    } else {
        Err(GuestError::runtime(format!(
            "{name:?} is not a valid guest identifier"
        )))
    }
}

/// Handle to the embedded interpreter and its global scope.
///
/// Not `Send`: every call must come from the thread that opened it.
pub struct Session {
    inner: Rc<Inner>,
}

/// Opens the process's single guest session.
pub fn open_session() -> Result<Session, GuestError> {
    Session::open()
}

/// Closes `s`; see [`Session::close`].
pub fn close_session(s: &Session) -> Result<(), GuestError> {
    s.close()
}

impl Session {
    pub fn open() -> Result<Self, GuestError> {
        if LIVE
            .compare_exchange(false, true, Ordering::SeqCst, Ordering::SeqCst)
            .is_err()
        {
            return Err(GuestError::runtime(
                "a guest session is already open in this process",
            ));
        }
        Python::initialize();
        let scope = Python::attach(|py| -> Result<Py<PyDict>, GuestError> {
            let scope = PyDict::new(py);
            let init =
                |e: PyErr| GuestError::new(GuestErrorKind::InitFailure, format_traceback(py, &e));
            scope.set_item("__name__", "__guest__").map_err(init)?;
            let builtins = py.import("builtins").map_err(init)?;
            scope.set_item("__builtins__", builtins).map_err(init)?;
            let code = compile(py, PREAMBLE, "<preamble>")
                .map_err(|e| GuestError::new(GuestErrorKind::InitFailure, e.message))?;
            run_code(py, code.bind(py), &scope)
                .map_err(|e| GuestError::new(GuestErrorKind::InitFailure, e.message))?;
            Ok(scope.unbind())
        });
        let scope = match scope {
            Ok(scope) => scope,
            Err(e) => {
                LIVE.store(false, Ordering::SeqCst);
                return Err(e);
            }
        };
        Ok(Session {
            inner: Rc::new(Inner {
                scope,
                open: Cell::new(true),
                owner: thread::current().id(),
                active_leases: Cell::new(0),
                stats: Cell::new(TransferStats::default()),
                compiled: RefCell::new(HashMap::new()),
            }),
        })
    }

    pub fn is_open(&self) -> bool {
        self.inner.open.get()
    }

    pub fn owner_thread(&self) -> ThreadId {
        self.inner.owner
    }

    pub fn stats(&self) -> TransferStats {
        self.inner.stats.get()
    }

    pub fn reset_stats(&self) {
        self.inner.stats.set(TransferStats::default());
    }

    pub fn active_leases(&self) -> usize {
        self.inner.active_leases.get()
    }

    /// Drops the scope. Fails while a [`RefLease`] is active.
    pub fn close(&self) -> Result<(), GuestError> {
        self.inner.ensure_live()?;
        if self.inner.active_leases.get() > 0 {
            return Err(GuestError::runtime(format!(
                "cannot close session with {} active reference lease(s)",
                self.inner.active_leases.get()
            )));
        }
        Python::attach(|py| self.inner.scope.bind(py).clear());
        self.inner.compiled.borrow_mut().clear();
        self.inner.open.set(false);
        LIVE.store(false, Ordering::SeqCst);
        Ok(())
    }

    /// Names in the scope that were put there by host or script code.
    pub fn user_names(&self) -> Result<Vec<String>, GuestError> {
        self.inner.ensure_live()?;
        Python::attach(|py| {
            let mut names: Vec<String> = self
                .inner
                .scope
                .bind(py)
                .keys()
                .iter()
                .filter_map(|k| k.extract::<String>().ok())
                .filter(|k| !k.starts_with('_'))
                .collect();
            names.sort();
            Ok(names)
        })
    }

    pub fn contains(&self, name: &str) -> Result<bool, GuestError> {
        self.inner.ensure_live()?;
        Python::attach(|py| {
            self.inner
                .scope
                .bind(py)
                .contains(name)
                .map_err(|e| GuestError::from_py(py, e))
        })
    }

    /// Evaluates a whole script in the scope; its top-level definitions stay.
    pub fn load_script(&self, source: &ScriptSource) -> Result<(), GuestError> {
        self.inner.ensure_live()?;
        let (text, filename) = match source {
            ScriptSource::Inline(text) => (text.clone(), "<inline>".to_owned()),
            ScriptSource::Path(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    GuestError::new(
                        GuestErrorKind::ScriptNotFound,
                        format!("{}: {e}", path.display()),
                    )
                })?;
                (text, path.display().to_string())
            }
        };
        Python::attach(|py| {
            let code = compile(py, &text, &filename)?;
            run_code(py, code.bind(py), self.inner.scope.bind(py))
        })
    }

    /// Runs one or more statements in the scope. Compiled code is cached per
    /// statement text.
    pub fn exec_statement(&self, statement: &str) -> Result<(), GuestError> {
        self.inner.ensure_live()?;
        Python::attach(|py| self.inner.exec(py, statement))
    }

    pub fn set_scalar(&self, name: &str, value: f64) -> Result<(), GuestError> {
        self.inner.ensure_live()?;
        check_identifier(name)?;
        Python::attach(|py| {
            self.inner
                .scope
                .bind(py)
                .set_item(name, value)
                .map_err(|e| GuestError::from_py(py, e))
        })
    }

    pub fn get_scalar(&self, name: &str) -> Result<f64, GuestError> {
        self.inner.ensure_live()?;
        Python::attach(|py| {
            let value = self.lookup(py, name)?;
            value.extract::<f64>().map_err(|e| {
                GuestError::new(
                    GuestErrorKind::TypeMismatch,
                    format!("guest {name:?} is not numeric: {e}"),
                )
            })
        })
    }

    /// Copies the field into a new guest float64 array: shape `(n,)` for
    /// scalar fields, `(n, c)` otherwise.
    pub fn put_field_copy(&self, name: &str, field: &FieldBuffer) -> Result<(), GuestError> {
        self.inner.ensure_live()?;
        check_identifier(name)?;
        Python::attach(|py| {
            let (n, c) = field.shape();
            let array = self.new_array(py, n, c, field.as_slice())?;
            self.inner
                .scope
                .bind(py)
                .set_item(name, array)
                .map_err(|e| GuestError::from_py(py, e))
        })?;
        self.inner.bump(|s| {
            s.field_copies_in += 1;
            s.bytes_copied += 8 * field.as_slice().len() as u64;
        });
        Ok(())
    }

    /// Copies guest array `name` out into a host-owned buffer of shape
    /// `(n, c)`. A scalar field also accepts a guest array of shape `(n,)`.
    pub fn get_field_copy(
        &self,
        name: &str,
        expected: (usize, usize),
    ) -> Result<FieldBuffer, GuestError> {
        self.inner.ensure_live()?;
        let (n, c) = expected;
        let data = Python::attach(|py| {
            let value = self.lookup(py, name)?;
            let buffer = self.float_buffer(py, name, &value)?;
            let dims = buffer.shape().to_vec();
            let matches = match dims.as_slice() {
                [len] => c == 1 && *len == n,
                [rows, cols] => *rows == n && *cols == c,
                _ => false,
            };
            if !matches {
                return Err(GuestError::shape(format!(
                    "guest {name:?} has shape {dims:?}, expected ({n}, {c})"
                )));
            }
            buffer.to_vec(py).map_err(|e| GuestError::from_py(py, e))
        })?;
        self.inner.bump(|s| {
            s.field_copies_out += 1;
            s.bytes_copied += 8 * data.len() as u64;
        });
        FieldBuffer::new(c, data).map_err(|e| GuestError::shape(e.to_string()))
    }

    /// Copies element `index` of `field` to guest `name`: a float for scalar
    /// fields, a length-`c` array otherwise.
    pub fn put_element(
        &self,
        name: &str,
        field: &FieldBuffer,
        index: usize,
    ) -> Result<(), GuestError> {
        self.inner.ensure_live()?;
        let (n, c) = field.shape();
        if index >= n {
            return Err(GuestError::shape(format!(
                "element index {index} out of range for field of {n} elements"
            )));
        }
        let row = field.row(index);
        Python::attach(|py| {
            let scope = self.inner.scope.bind(py);
            let result = if c == 1 {
                scope.set_item(name, PyFloat::new(py, row[0]))
            } else {
                let array = self.new_array(py, c, 1, row)?;
                scope.set_item(name, array)
            };
            result.map_err(|e| GuestError::from_py(py, e))
        })?;
        self.inner.bump(|s| {
            s.element_copies_in += 1;
            s.bytes_copied += 8 * c as u64;
        });
        Ok(())
    }

    /// Copies the guest element `name` (a number, or an array holding exactly
    /// `n_components` values) back to the host.
    pub fn get_element(&self, name: &str, n_components: usize) -> Result<Vec<f64>, GuestError> {
        let mut row = vec![0.0; n_components];
        self.get_element_into(name, &mut row)?;
        Ok(row)
    }

    pub fn get_element_into(&self, name: &str, row: &mut [f64]) -> Result<(), GuestError> {
        self.inner.ensure_live()?;
        Python::attach(|py| {
            let value = self.lookup(py, name)?;
            if row.len() == 1 {
                if let Ok(v) = value.extract::<f64>() {
                    row[0] = v;
                    return Ok(());
                }
            }
            let buffer = self.float_buffer(py, name, &value)?;
            if buffer.item_count() != row.len() {
                return Err(GuestError::shape(format!(
                    "guest {name:?} holds {} values, expected {}",
                    buffer.item_count(),
                    row.len()
                )));
            }
            buffer
                .copy_to_slice(py, row)
                .map_err(|e| GuestError::from_py(py, e))
        })?;
        self.inner.bump(|s| {
            s.element_copies_out += 1;
            s.bytes_copied += 8 * row.len() as u64;
        });
        Ok(())
    }

    /// Publishes `field` to the guest as a writable array view named `name`.
    ///
    /// The guest scope receives `<name>_address` and `<name>_shape`, and the
    /// view is built from them by the session preamble. Guest writes land in
    /// `field` directly. The mutable borrow pins the buffer until the lease
    /// is dropped; guest code must not keep the view beyond
    /// [`RefLease::release`].
    pub fn publish_field_by_ref<'f>(
        &self,
        name: &str,
        field: &'f mut FieldBuffer,
    ) -> Result<RefLease<'f>, GuestError> {
        let shape = field.shape();
        let address = field.as_mut_slice().as_mut_ptr();
        self.publish(name, address, shape, true)
    }

    /// Read-only counterpart of [`Session::publish_field_by_ref`]; the guest
    /// view has `writeable = False`.
    pub fn publish_field_by_ref_readonly<'f>(
        &self,
        name: &str,
        field: &'f FieldBuffer,
    ) -> Result<RefLease<'f>, GuestError> {
        let shape = field.shape();
        let address = field.as_slice().as_ptr() as *mut f64;
        self.publish(name, address, shape, false)
    }

    fn publish<'f>(
        &self,
        name: &str,
        address: *mut f64,
        shape: (usize, usize),
        writable: bool,
    ) -> Result<RefLease<'f>, GuestError> {
        self.inner.ensure_live()?;
        check_identifier(name)?;
        assert_eq!(address as usize % 8, 0, "field buffers are 8-byte aligned");
        let statement = format!(
            "{name} = _fb_view({name}_address, {name}_shape, {})",
            if writable { "True" } else { "False" }
        );
        Python::attach(|py| {
            let scope = self.inner.scope.bind(py);
            let dims =
                PyTuple::new(py, [shape.0, shape.1]).map_err(|e| GuestError::from_py(py, e))?;
            scope
                .set_item(format!("{name}_address"), address as usize)
                .and_then(|_| scope.set_item(format!("{name}_shape"), dims))
                .map_err(|e| GuestError::from_py(py, e))?;
            self.inner.exec(py, &statement)
        })?;
        self.inner
            .active_leases
            .set(self.inner.active_leases.get() + 1);
        self.inner.bump(|s| s.leases_published += 1);
        Ok(RefLease {
            session: Rc::clone(&self.inner),
            guest_name: name.to_owned(),
            address,
            shape,
            writable,
            active: true,
            _buffer: PhantomData,
        })
    }

    fn lookup<'py>(&self, py: Python<'py>, name: &str) -> Result<Bound<'py, PyAny>, GuestError> {
        self.inner
            .scope
            .bind(py)
            .get_item(name)
            .map_err(|e| GuestError::from_py(py, e))?
            .ok_or_else(|| {
                GuestError::new(
                    GuestErrorKind::NameMissing,
                    format!("guest has no {name:?}"),
                )
            })
    }

    fn new_array<'py>(
        &self,
        py: Python<'py>,
        n: usize,
        c: usize,
        data: &[f64],
    ) -> Result<Bound<'py, PyAny>, GuestError> {
        let np = self.lookup(py, "_fb_np")?;
        let dims = if c == 1 {
            PyTuple::new(py, [n])
        } else {
            PyTuple::new(py, [n, c])
        }
        .map_err(|e| GuestError::from_py(py, e))?;
        let array = np
            .call_method1("empty", (dims,))
            .map_err(|e| GuestError::from_py(py, e))?;
        let buffer = PyBuffer::<f64>::get(&array).map_err(|e| GuestError::from_py(py, e))?;
        buffer
            .copy_from_slice(py, data)
            .map_err(|e| GuestError::from_py(py, e))?;
        Ok(array)
    }

    /// Float64 buffer over a guest value, converting non-float arrays and
    /// sequences with `numpy.asarray` first.
    fn float_buffer(
        &self,
        py: Python<'_>,
        name: &str,
        value: &Bound<'_, PyAny>,
    ) -> Result<PyBuffer<f64>, GuestError> {
        if let Ok(buffer) = PyBuffer::<f64>::get(value) {
            return Ok(buffer);
        }
        let type_error = |detail: String| {
            GuestError::new(
                GuestErrorKind::TypeMismatch,
                format!("guest {name:?} is not a float array: {detail}"),
            )
        };
        let np = self.lookup(py, "_fb_np")?;
        let converted = np
            .call_method1("asarray", (value, "float64"))
            .map_err(|e| type_error(e.to_string()))?;
        PyBuffer::<f64>::get(&converted).map_err(|e| type_error(e.to_string()))
    }
}

impl fmt::Debug for Session {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Session")
            .field("open", &self.inner.open.get())
            .field("owner", &self.inner.owner)
            .field("active_leases", &self.inner.active_leases.get())
            .finish()
    }
}

/// A host buffer published into the guest scope by address.
///
/// Holds the borrow of the published buffer, so the buffer cannot move,
/// grow or be freed while the lease exists. Dropping an active lease
/// releases it.
pub struct RefLease<'f> {
    session: Rc<Inner>,
    guest_name: String,
    address: *mut f64,
    shape: (usize, usize),
    writable: bool,
    active: bool,
    _buffer: PhantomData<&'f mut [f64]>,
}

impl RefLease<'_> {
    pub fn guest_name(&self) -> &str {
        &self.guest_name
    }

    /// Byte address of element 0.
    pub fn address(&self) -> usize {
        self.address as usize
    }

    pub fn shape(&self) -> (usize, usize) {
        self.shape
    }

    pub fn element_width(&self) -> usize {
        std::mem::size_of::<f64>()
    }

    pub fn is_writable(&self) -> bool {
        self.writable
    }

    pub fn is_active(&self) -> bool {
        self.active
    }

    /// Reads element `(i, j)` of the published buffer as the guest left it.
    pub fn value(&self, i: usize, j: usize) -> Option<f64> {
        let (n, c) = self.shape;
        if i >= n || j >= c {
            return None;
        }
        // SAFETY: the lease holds the borrow of an n*c buffer of f64 starting
        // at `address`, and no guest code runs while this read happens.
        Some(unsafe { self.address.add(i * c + j).read() })
    }

    /// Deletes the view and its address/shape names from the guest scope.
    pub fn release(&mut self) -> Result<(), GuestError> {
        if !self.active {
            return Err(GuestError::runtime(format!(
                "lease {:?} was already released",
                self.guest_name
            )));
        }
        self.active = false;
        let inner = &self.session;
        inner.active_leases.set(inner.active_leases.get() - 1);
        if !inner.open.get() {
            return Ok(());
        }
        Python::attach(|py| {
            let scope = inner.scope.bind(py);
            for key in [
                self.guest_name.clone(),
                format!("{}_address", self.guest_name),
                format!("{}_shape", self.guest_name),
            ] {
                if scope.contains(&key).unwrap_or(false) {
                    scope
                        .del_item(&key)
                        .map_err(|e| GuestError::from_py(py, e))?;
                }
            }
            Ok(())
        })
    }
}

/// Releases `lease`; errors if it is no longer active.
pub fn release_lease(lease: &mut RefLease<'_>) -> Result<(), GuestError> {
    lease.release()
}

impl Drop for RefLease<'_> {
    fn drop(&mut self) {
        if self.active {
            let _ = self.release();
        }
    }
}

impl fmt::Debug for RefLease<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RefLease")
            .field("guest_name", &self.guest_name)
            .field("address", &format_args!("{:#x}", self.address as usize))
            .field("shape", &self.shape)
            .field("writable", &self.writable)
            .field("active", &self.active)
            .finish()
    }
}

/// Serializes tests (and anything else) that need the single session.
#[cfg(test)]
pub(crate) fn test_session() -> (std::sync::MutexGuard<'static, ()>, Session) {
    static LOCK: std::sync::Mutex<()> = std::sync::Mutex::new(());
    let guard = LOCK.lock().unwrap_or_else(|p| p.into_inner());
    let session = Session::open().expect("open session");
    (guard, session)
}
