//! Convergence traces and their CSV form.

use std::io::Write;

use crate::error::{Error, Result};
use crate::regularization::FrValue;

/// One sampled iteration.
///
/// For packing, `utility` is `f_alpha` of the current allocation in original
/// units and `max_load` the largest constraint load. For covering, `utility`
/// is the cost `g_beta` of the running average `y` (original units) and
/// `max_load` the largest packing-side load `(A x)_i` of the dual iterate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub k: u64,
    pub utility: f64,
    pub max_load: f64,
    pub f_r: FrValue,
    /// Duality-gap estimate, only for packing with alpha > 1.
    pub gap: Option<f64>,
}

pub const CSV_HEADER: &str = "iter,utility,max_load,f_r,gap";

/// Writes `rows` as CSV: header `iter,utility,max_load,f_r,gap`, overflowed
/// `f_r` printed as `+overflow`, missing gaps left empty. Floats use 17
/// significant digits.
pub fn write_trace_csv<W: Write>(mut out: W, rows: &[TraceRow]) -> Result<()> {
    let io = |e: std::io::Error| Error::Io(e.to_string());
    writeln!(out, "{CSV_HEADER}").map_err(io)?;
    for r in rows {
        let f_r = match r.f_r {
            FrValue::Finite(v) => format!("{v:.16e}"),
            FrValue::PositiveOverflow => "+overflow".to_string(),
        };
        let gap = r.gap.map(|g| format!("{g:.16e}")).unwrap_or_default();
        writeln!(
            out,
            "{},{:.16e},{:.16e},{},{}",
            r.k, r.utility, r.max_load, f_r, gap
        )
        .map_err(io)?;
    }
    Ok(())
}
