//! Monte-Carlo checks of the bounds: tail estimates with exact binomial
//! intervals, bound dominance, symmetrization, the rate sweep and figure
//! data. Every result is a pure function of its inputs and seed.

mod figures;
mod rate;
mod tail;

use std::io::Write;

use serde::Serialize;

use crate::error::Result;

pub use figures::{
    default_gamma_curves, gamma_curves, sign_changes, unimodal_peak, CurvePoint, FIGURE_POINTS,
    FIGURE_RANGE,
};
pub use rate::{
    rate_sweep, GammaChoice, LnCovSource, RateSweep, RateSweepConfig, RateSweepRow,
    DEFAULT_MC_REPLICATES, GAMMA_FLOOR, NO_POSITIVE_ROOT_NOTE, REFERENCE_SLOPE,
};
pub use tail::{
    bound_dominance_report, clopper_pearson, mc_abs_deviations, mc_sup_deviations,
    mc_tail_probability, risk_dominance_report, symmetrization_check, DominanceRecord,
    DominanceRow, RiskDominanceRecord, RiskDominanceRow, SymmetrizationCheck, TailEstimate,
    CONFIDENCE,
};

/// Default number of Monte-Carlo trials per tail estimate.
pub const DEFAULT_TRIALS: u64 = 100_000;

pub fn write_csv<T: Serialize, W: Write>(rows: &[T], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for r in rows {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize + ?Sized, W: Write>(value: &T, w: W) -> Result<()> {
    serde_json::to_writer_pretty(w, value)?;
    Ok(())
}

/// Two columns with a header, for external plotting.
pub fn write_series<W: Write>(
    header: (&str, &str),
    points: impl IntoIterator<Item = (f64, f64)>,
    w: W,
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record([header.0, header.1])?;
    for (x, y) in points {
        wtr.write_record([x.to_string(), y.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}
