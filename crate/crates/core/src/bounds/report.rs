use std::io::Write;

use serde::{Deserialize, Serialize, Serializer};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMethod {
    /// `exp(-∫_0^xi tau^-1)`.
    Integral,
    /// Bounded-support closed form in `V`, `R`.
    Closed,
    /// Covering-number risk bound built on the integral form.
    RiskIntegral,
    /// Covering-number risk bound built on the closed form.
    RiskClosed,
}

impl BoundMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundMethod::Integral => "integral",
            BoundMethod::Closed => "closed",
            BoundMethod::RiskIntegral => "risk_integral",
            BoundMethod::RiskClosed => "risk_closed",
        }
    }
}

fn finite_or_inf<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else {
        s.serialize_str(if *x > 0.0 { "inf" } else { "-inf" })
    }
}

/// One evaluated bound together with the parameters that produced it.
///
/// Field order is the CSV column order `xi,value,method,N,lambda,V,R,ln_cov`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub xi: f64,
    pub value: f64,
    pub method: BoundMethod,
    #[serde(rename = "N")]
    pub n: u64,
    pub lambda: f64,
    #[serde(rename = "V")]
    pub v: f64,
    #[serde(rename = "R", serialize_with = "finite_or_inf")]
    pub r: f64,
    /// Log expected covering number; only present for risk bounds.
    pub ln_cov: Option<f64>,
}

pub fn write_reports_csv<W: Write>(reports: &[BoundReport], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for r in reports {
        wtr.serialize(r)?;
    }
    if reports.is_empty() {
        wtr.write_record(["xi", "value", "method", "N", "lambda", "V", "R", "ln_cov"])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_reports_json<W: Write>(reports: &[BoundReport], w: W) -> Result<()> {
    serde_json::to_writer_pretty(w, reports)?;
    Ok(())
}
