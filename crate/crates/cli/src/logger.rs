//! Minimal stderr logger driven by the `COMPLAB_LOG` environment variable.
//!
//! Levels: `off`, `error`, `warn` (default), `info`, `debug`, `trace`.

use std::fmt;
use std::sync::atomic::{AtomicU8, Ordering};

pub const ERROR: u8 = 1;
pub const WARN: u8 = 2;
pub const INFO: u8 = 3;
pub const DEBUG: u8 = 4;

static LEVEL: AtomicU8 = AtomicU8::new(WARN);

/// Reads `COMPLAB_LOG` once at startup.
pub fn init() {
    if let Ok(v) = std::env::var("COMPLAB_LOG") {
        let lvl = match v.to_ascii_lowercase().as_str() {
            "off" => 0,
            "error" => ERROR,
            "warn" | "warning" => WARN,
            "info" => INFO,
            "debug" => DEBUG,
            "trace" => 5,
            other => {
                eprintln!("[warn] unknown COMPLAB_LOG level {other:?}; using \"warn\"");
                WARN
            }
        };
        LEVEL.store(lvl, Ordering::Relaxed);
    }
}

pub fn enabled(level: u8) -> bool {
    level <= LEVEL.load(Ordering::Relaxed)
}

pub fn log(level: u8, args: fmt::Arguments<'_>) {
    if enabled(level) {
        let name = match level {
            ERROR => "error",
            WARN => "warn",
            INFO => "info",
            DEBUG => "debug",
            _ => "trace",
        };
        eprintln!("[{name}] {args}");
    }
}

macro_rules! log_error {
    ($($t:tt)*) => { $crate::logger::log($crate::logger::ERROR, format_args!($($t)*)) };
}
macro_rules! log_info {
    ($($t:tt)*) => { $crate::logger::log($crate::logger::INFO, format_args!($($t)*)) };
}
macro_rules! log_debug {
    ($($t:tt)*) => { $crate::logger::log($crate::logger::DEBUG, format_args!($($t)*)) };
}

pub(crate) use {log_debug, log_error, log_info};
