//! Batch front end for `slicereg-core`: JSON job specs in, CSV or JSON out.
//!
//! Exit codes: 0 success, 1 i/o, 2 invalid spec, 3 non-convergence,
//! undecidable or NaN output, 4 pole or zero division.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::io::Write;
use std::path::Path;

pub mod error;
pub mod jobs;
pub mod spec;

pub use error::{CliError, CliResult};
pub use jobs::{run_job, Output, Overrides};
pub use spec::JobSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    EvalKernel,
    Transform,
    Split,
    JumpCheck,
    Holder,
    SeriesFit,
    VerifyFundamental,
    SolveGlobal,
    Report,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::EvalKernel => "eval-kernel",
            Command::Transform => "transform",
            Command::Split => "split",
            Command::JumpCheck => "jump-check",
            Command::Holder => "holder",
            Command::SeriesFit => "series-fit",
            Command::VerifyFundamental => "verify-fundamental",
            Command::SolveGlobal => "solve-global",
            Command::Report => "report",
        }
    }
}

pub fn parse_spec(text: &str) -> CliResult<JobSpec> {
    Ok(serde_json::from_str(text)?)
}

/// CSV with `.` decimals and `\n` line ends; floats use the shortest round-trip form.
pub fn write_output<W: Write>(out: &Output, w: W) -> CliResult<()> {
    match out {
        Output::Table { header, rows } => {
            let mut wr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
            wr.write_record(header)?;
            for row in rows {
                wr.write_record(row.iter().map(|x| format!("{x:?}")))?;
            }
            wr.flush()?;
        }
        Output::Json(v) => {
            let mut w = w;
            serde_json::to_writer_pretty(&mut w, v)?;
            writeln!(w)?;
        }
    }
    Ok(())
}

/// Reads the spec, runs the job and writes to `out` (or the spec's `output`,
/// or standard output).
pub fn run(cmd: Command, spec_path: &Path, out: Option<&Path>, ov: Overrides) -> CliResult<()> {
    let spec = parse_spec(&fs::read_to_string(spec_path)?)?;
    let result = run_job(cmd, &spec, ov)?;
    result.check_finite()?;
    let target = out.map(Path::to_path_buf).or_else(|| spec.output.as_ref().map(Into::into));
    match target {
        Some(p) => {
            let mut buf = Vec::new();
            write_output(&result, &mut buf)?;
            fs::write(p, buf)?;
        }
        None => write_output(&result, std::io::stdout().lock())?,
    }
    Ok(())
}
