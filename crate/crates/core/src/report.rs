//! Shared conventions for tabular and JSON outputs.

use std::io::{self, Write};

/// Version of every CSV and JSON schema emitted by this crate.
pub const SCHEMA_VERSION: u32 = 1;

/// Write the CSV preamble: a schema comment line followed by the header.
pub fn write_csv_header<W: Write>(out: &mut W, header: &str) -> io::Result<()> {
    writeln!(out, "# schema_version={SCHEMA_VERSION}")?;
    writeln!(out, "{header}")
}
