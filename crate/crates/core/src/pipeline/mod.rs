//! Experiment drivers behind the command-line subcommands. Every driver
//! returns plain records and has a matching CSV writer; nothing here
//! touches global state.

mod angvel;
mod bench;
mod depth;
mod flow;
mod gradcheck;

pub use angvel::{run_angvel, write_angvel_csv, AngvelConfig, AngvelReport, AxisStats, LossSummary, WindowEstimate};
pub use bench::{run_bench, write_bench_csv, BenchConfig, BenchRow};
pub use depth::{run_depth, write_focal_curves_csv, DepthConfig, DepthMap};
pub use flow::{crop_patch, run_flow_surface, write_surface_csv, FlowSurface, PatchSpec};
pub use gradcheck::{run_gradcheck, write_gradcheck_csv, GradcheckConfig, GradcheckRow, GradcheckStatus};

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, LossError, Result};
use crate::loss::LossKind;

/// Parse `"all"` or a comma-separated list of loss names.
pub fn parse_loss_list(s: &str) -> Result<Vec<LossKind>, LossError> {
    if s.trim() == "all" {
        return Ok(LossKind::all());
    }
    let mut out: Vec<LossKind> = Vec::new();
    for name in s.split(',').map(str::trim).filter(|n| !n.is_empty()) {
        let k: LossKind = name.parse()?;
        if !out.contains(&k) {
            out.push(k);
        }
    }
    if out.is_empty() {
        return Err(LossError::UnknownName(s.to_string()));
    }
    Ok(out)
}

/// Format with 9 significant digits, trailing zeros trimmed.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let e = x.abs().log10().floor() as i32;
    if (-5..9).contains(&e) {
        let s = format!("{:.*}", (8 - e).max(0) as usize, x);
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        let s = format!("{x:.8e}");
        let (m, exp) = s.split_once('e').expect("exponent form");
        let m = if m.contains('.') { m.trim_end_matches('0').trim_end_matches('.') } else { m };
        format!("{m}e{exp}")
    }
}

fn opt_sig(x: Option<f64>) -> String {
    x.map(fmt_sig).unwrap_or_default()
}

pub(crate) fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|source| Error::Output { path: path.to_path_buf(), source })
}

pub(crate) fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(create(path)?))
}

pub(crate) fn finish<W: Write>(w: csv::Writer<W>, path: &Path) -> Result<()> {
    w.into_inner()
        .map_err(|e| Error::Output { path: path.to_path_buf(), source: e.into_error() })?
        .flush()
        .map_err(|source| Error::Output { path: path.to_path_buf(), source })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(1.0), "1");
        assert_eq!(fmt_sig(-40.0), "-40");
        assert_eq!(fmt_sig(1.23456789123), "1.23456789");
        assert_eq!(fmt_sig(123456789.123), "123456789");
        assert_eq!(fmt_sig(1.5e-7), "1.5e-7");
        assert_eq!(fmt_sig(2.0e12), "2e12");
        assert_eq!(fmt_sig(0.000123456789012), "0.000123456789");
    }

    #[test]
    fn loss_lists() {
        assert_eq!(parse_loss_list("variance, area-exp,variance").unwrap().len(), 2);
        assert_eq!(parse_loss_list("all").unwrap(), LossKind::all());
        assert!(parse_loss_list("nope").is_err());
        assert!(parse_loss_list("").is_err());
    }
}
