/*!
Command-line companion to the ultrametric fitting library: instance and
report file formats, synthetic generators, real clocks, threaded
separation, and the `umr` binary's command implementations.

Everything here is deliberately outside the core crate so the solver stays
`no_std`; this crate owns files, time, threads, and argument parsing.
*/

pub mod commands;
pub mod error;
pub mod format;
pub mod gen;
pub mod runtime;

pub use error::CliError;
