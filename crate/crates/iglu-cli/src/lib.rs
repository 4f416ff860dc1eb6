//! IO, reporting, and benchmarking companion to `iglu-core`.
//!
//! Everything that needs an operating system lives here: the wall-clock
//! microbenchmark, dataset files, CSV/JSON/markdown report emission, and the
//! verification suites the `iglu` binary exposes as subcommands.

pub mod bench;
pub mod dataset_io;
pub mod evalgrid;
pub mod parse;
pub mod verify;
