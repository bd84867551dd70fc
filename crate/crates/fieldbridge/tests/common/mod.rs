#![allow(dead_code)]

use std::sync::{Mutex, MutexGuard};

use fieldbridge::Session;

static LOCK: Mutex<()> = Mutex::new(());

/// Only one session may be live per process; tests take turns.
pub fn serial() -> MutexGuard<'static, ()> {
    LOCK.lock().unwrap_or_else(|p| p.into_inner())
}

pub fn session() -> (MutexGuard<'static, ()>, Session) {
    let guard = serial();
    let s = Session::open().expect("open session");
    (guard, s)
}
