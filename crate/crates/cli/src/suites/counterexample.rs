//! Swapped-pair certificate: `1 - |x|²` is `(φ,ψ)`-harmonic but not harmonic.

use hyperrh::operators::counterexample_report;
use hyperrh::StructuralSet;

use super::{core_err, Settings};
use crate::report::{Bound, Report};
use crate::CliError;

pub fn run(settings: &Settings) -> Result<Report, CliError> {
    let m = settings.m.unwrap_or(4);
    let cert = counterexample_report(&StructuralSet::standard(m)).map_err(core_err)?;
    let mut report = Report::new("counterexample", settings.seed);
    report.param("m", m);
    report.check("harmonicity-residual", cert.harmonicity_residual, Bound::AtMost(0.0));
    report.check("laplacian", cert.laplacian, Bound::within(-2.0 * m as f64, 0.0));
    report.check(
        "maximum-principle-violated",
        if cert.violates_maximum_principle { 1.0 } else { 0.0 },
        Bound::AtLeast(1.0),
    );
    report.certificate = Some(serde_json::to_value(&cert).expect("certificate serializes"));
    Ok(report)
}
