//! Prefix-sum kernels that run their local scans on an emulated matrix
//! (cube) engine, plus the scan-derived operators: split, compress, radix
//! sort, top-k, nucleus sampling and weighted sampling.
//!
//! All engines are software models. Every kernel reports exact
//! [`WorkSpanCounters`] alongside its result.

pub mod bench;
pub mod counters;
pub mod dtype;
pub mod error;
pub mod exec_model;
pub mod io;
pub mod matrix_engine;
pub mod scan_kernels;
pub mod scan_ops;
pub mod vector_engine;

pub use counters::{merge_counters, Depth, WorkSpanCounters};
pub use dtype::{Accum, ElementType, Scalar, Storage};
pub use error::{Error, Result};
pub use scan_kernels::{scan, ScanConfig, ScanOutput, Strategy};
pub use scan_ops::{KeyType, Operators, SampleDraw, SortResult, SplitResult};

pub use half::f16;
