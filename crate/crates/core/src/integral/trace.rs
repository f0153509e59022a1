//! One-sided boundary limits by an ε-sweep along the normal with Richardson
//! extrapolation to ε = 0.

use crate::clifford::Multivector;
use crate::error::Result;
use crate::geometry::P3;
use crate::stats::extrapolate_zero;

/// Offsets along the normal in units of the base step.
pub const EPS_MULTIPLES: [f64; 3] = [1.0, 2.0, 4.0];

/// The base step is this multiple of the local mesh spacing, so the nearest
/// probe clears the one-spacing collar around neighbouring faces too.
pub const BASE_STEP_FACTOR: f64 = 1.25;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `Ω₊`, against the outward normal.
    Interior,
    /// `Ω₋`, along the outward normal.
    Exterior,
}

/// Limit of `f` at `x ∈ Γ` from one side, sampling `x ∓ ε n` at
/// `ε ∈ {1, 2, 4} · BASE_STEP_FACTOR · spacing`.
pub fn one_sided_limit<F>(f: F, x: &P3, normal: &P3, spacing: f64, side: Side) -> Result<Multivector>
where
    F: Fn(&P3) -> Result<Multivector>,
{
    let sign = match side {
        Side::Interior => -1.0,
        Side::Exterior => 1.0,
    };
    let base = BASE_STEP_FACTOR * spacing;
    let mut samples = Vec::with_capacity(3);
    for k in EPS_MULTIPLES {
        let e = sign * k * base;
        samples.push(f(&[x[0] + e * normal[0], x[1] + e * normal[1], x[2] + e * normal[2]])?);
    }
    let mut out = samples[0].clone();
    for (i, c) in out.coeffs_mut().iter_mut().enumerate() {
        *c = extrapolate_zero(samples[0][i], samples[1][i], samples[2][i]);
    }
    Ok(out)
}

/// `f⁺(x) - f⁻(x)`: interior limit minus exterior limit.
pub fn two_sided_gap<F>(f: F, x: &P3, normal: &P3, spacing: f64) -> Result<Multivector>
where
    F: Fn(&P3) -> Result<Multivector>,
{
    Ok(one_sided_limit(&f, x, normal, spacing, Side::Interior)? - one_sided_limit(&f, x, normal, spacing, Side::Exterior)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_profiles_are_recovered() {
        let n = [0.0, 0.0, 1.0];
        let f = |p: &P3| {
            let t = p[2];
            let v = if t < 0.0 { 2.0 + 3.0 * t - t * t } else { -1.0 + 0.5 * t + 4.0 * t * t };
            Ok(Multivector::scalar(3, v))
        };
        let gap = two_sided_gap(f, &[0.0; 3], &n, 0.01).unwrap();
        assert!((gap.scalar_part() - 3.0).abs() < 1e-12);
    }
}
