//! Sampled first-order jets `{g^(0), g^(j)}` on a boundary and their
//! Whitney compatibility residuals.

use std::io::{Read, Write};

use serde::Serialize;

use super::mesh::BoundaryMesh;
use super::{dist, sub, P3};
use crate::clifford::Multivector;
use crate::error::{Error, Result};
use crate::field::SmoothField;
use crate::stats::fit_line;

#[derive(Clone, Debug, PartialEq)]
pub struct JetSample {
    pub point: P3,
    pub value: Multivector,
    /// `g^(e_l)` for `l = 1, 2, 3`.
    pub grad: [Multivector; 3],
}

impl JetSample {
    /// Degree-1 Taylor polynomial of the sample evaluated at `x`.
    pub fn taylor(&self, x: &P3) -> Multivector {
        let d = sub(x, &self.point);
        let mut v = self.value.clone();
        for l in 0..3 {
            v.axpy(d[l], &self.grad[l]);
        }
        v
    }
}

/// Boundary datum of class Lip(1+α).
#[derive(Clone, Debug, PartialEq)]
pub struct LipschitzJet {
    pub m: usize,
    pub alpha: f64,
    pub samples: Vec<JetSample>,
}

impl LipschitzJet {
    pub fn new(m: usize, alpha: f64, samples: Vec<JetSample>) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::Invalid(format!("Hölder exponent {alpha} outside (0, 1]")));
        }
        if let Some(s) = samples.iter().find(|s| s.value.dim() != m || s.grad.iter().any(|g| g.dim() != m)) {
            return Err(Error::DimensionMismatch {
                left: m,
                right: s.value.dim(),
            });
        }
        Ok(Self { m, alpha, samples })
    }

    pub fn points(&self) -> Vec<P3> {
        self.samples.iter().map(|s| s.point).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.samples
            .iter()
            .all(|s| s.value.max_abs() == 0.0 && s.grad.iter().all(|g| g.max_abs() == 0.0))
    }

    /// Writes columns `x1,x2,x3`, then `g0_<blade>` and `g1_<blade>`.. `g3_<blade>`
    /// where `<blade>` is the digit string of the blade (`0` for the scalar).
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let n = 1usize << self.m;
        let mut header: Vec<String> = vec!["x1".into(), "x2".into(), "x3".into()];
        for j in 0..=3 {
            for b in 0..n {
                header.push(format!("g{j}_{}", blade_label(b)));
            }
        }
        wtr.write_record(&header).map_err(csv_err)?;
        for s in &self.samples {
            let mut row: Vec<String> = s.point.iter().map(|v| format!("{v:?}")).collect();
            for mv in std::iter::once(&s.value).chain(s.grad.iter()) {
                row.extend(mv.coeffs().iter().map(|v| format!("{v:?}")));
            }
            wtr.write_record(&row).map_err(csv_err)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R, m: usize, alpha: f64) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let n = 1usize << m;
        let header = rdr.headers().map_err(csv_err)?.clone();
        let col = |name: &str| {
            header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Parse(format!("jet CSV lacks column {name}")))
        };
        let xs = [col("x1")?, col("x2")?, col("x3")?];
        let mut gcols = vec![vec![0usize; n]; 4];
        for (j, row) in gcols.iter_mut().enumerate() {
            for (b, c) in row.iter_mut().enumerate() {
                *c = col(&format!("g{j}_{}", blade_label(b)))?;
            }
        }
        let mut samples = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(csv_err)?;
            let num = |i: usize| -> Result<f64> {
                rec.get(i)
                    .ok_or_else(|| Error::Parse("short CSV row".into()))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(e.to_string()))
            };
            let point = [num(xs[0])?, num(xs[1])?, num(xs[2])?];
            let mut mvs = Vec::with_capacity(4);
            for row in &gcols {
                let coeffs = row.iter().map(|&c| num(c)).collect::<Result<Vec<f64>>>()?;
                mvs.push(Multivector::from_coeffs(m, &coeffs)?);
            }
            let mut it = mvs.into_iter();
            let value = it.next().unwrap();
            let grad = [it.next().unwrap(), it.next().unwrap(), it.next().unwrap()];
            samples.push(JetSample { point, value, grad });
        }
        Self::new(m, alpha, samples)
    }
}

fn blade_label(b: usize) -> String {
    if b == 0 {
        "0".into()
    } else {
        (0..8).filter(|i| b >> i & 1 == 1).map(|i| char::from(b'1' + i as u8)).collect()
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

/// Jet of a globally defined field at the mesh vertices.
pub fn jet_from_function<F: SmoothField + ?Sized>(f: &F, mesh: &BoundaryMesh, alpha: f64) -> Result<LipschitzJet> {
    let samples = mesh
        .vertices()
        .iter()
        .map(|p| {
            let d = f.derivatives(p, 1);
            JetSample {
                point: *p,
                value: d.value,
                grad: [d.grad[0].clone(), d.grad[1].clone(), d.grad[2].clone()],
            }
        })
        .collect();
    LipschitzJet::new(f.dim(), alpha, samples)
}

#[derive(Clone, Debug, Serialize)]
pub struct CompatibilityReport {
    /// `max |g0(x) - P_y(x)| / |x-y|^{1+α}`.
    pub m0: f64,
    /// `max |g^(j)(x) - g^(j)(y)| / |x-y|^α`.
    pub m1: f64,
    pub worst_pair: (usize, usize),
    pub worst_distance: f64,
    /// Slope of the largest value-ratio per distance band against log distance.
    pub band_slope: f64,
    /// Ratios grow as pairs approach: the collection is not compatible.
    pub diverging: bool,
    pub pairs: usize,
}

/// Fitted compatibility constant over sampled pairs (at most 1500 samples,
/// taken with a fixed stride).
pub fn compatibility_residual(jet: &LipschitzJet) -> Result<CompatibilityReport> {
    let n = jet.samples.len();
    if n < 2 {
        return Err(Error::Invalid("compatibility needs at least two samples".into()));
    }
    let stride = n.div_ceil(1500);
    let idx: Vec<usize> = (0..n).step_by(stride).collect();
    let a = jet.alpha;
    let mut m0: f64 = 0.0;
    let mut m1: f64 = 0.0;
    let mut worst = (0, 0, 0.0, -1.0);
    let mut pairs = 0;
    const BANDS: usize = 24;
    let mut band_max = [0.0f64; BANDS];
    let mut dmin = f64::INFINITY;
    let mut dmax: f64 = 0.0;
    for (ii, &i) in idx.iter().enumerate() {
        for &j in &idx[ii + 1..] {
            let d = dist(&jet.samples[i].point, &jet.samples[j].point);
            if d > 0.0 {
                dmin = dmin.min(d);
                dmax = dmax.max(d);
            }
        }
    }
    if !(dmin.is_finite() && dmax > dmin) {
        return Err(Error::Invalid("all samples coincide".into()));
    }
    let band = |d: f64| (((d / dmin).ln() / (dmax / dmin).ln() * BANDS as f64) as usize).min(BANDS - 1);
    for (ii, &i) in idx.iter().enumerate() {
        for &j in &idx[ii + 1..] {
            let (si, sj) = (&jet.samples[i], &jet.samples[j]);
            let d = dist(&si.point, &sj.point);
            if d == 0.0 {
                continue;
            }
            pairs += 1;
            for (x, y) in [(si, sj), (sj, si)] {
                let r0 = (&x.value - &y.taylor(&x.point)).norm() / d.powf(1.0 + a);
                band_max[band(d)] = band_max[band(d)].max(r0);
                if r0 > m0 {
                    m0 = r0;
                }
                if r0 > worst.3 {
                    worst = (i, j, d, r0);
                }
            }
            for l in 0..3 {
                let r1 = (&si.grad[l] - &sj.grad[l]).norm() / d.powf(a);
                m1 = m1.max(r1);
            }
        }
    }
    let pts: Vec<(f64, f64)> = band_max
        .iter()
        .enumerate()
        .filter(|(_, v)| **v > 0.0)
        .map(|(k, v)| {
            let d = dmin * (dmax / dmin).powf((k as f64 + 0.5) / BANDS as f64);
            (d.ln(), v.ln())
        })
        .collect();
    let band_slope = fit_line(&pts).map(|f| f.slope).unwrap_or(0.0);
    Ok(CompatibilityReport {
        m0,
        m1,
        worst_pair: (worst.0, worst.1),
        worst_distance: worst.2,
        band_slope,
        diverging: band_slope < -0.5,
        pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::AnalyticField;
    use crate::geometry::mesh::icosphere;

    #[test]
    fn linear_jet_is_exact() {
        let mesh = icosphere([0.0; 3], 1.0, 2).unwrap();
        let jet = jet_from_function(&AnalyticField::by_name("x1", 3).unwrap(), &mesh, 1.0).unwrap();
        let r = compatibility_residual(&jet).unwrap();
        assert!(r.m0 < 1e-12 && r.m1 == 0.0);
    }

    #[test]
    fn corrupted_jet_diverges() {
        let mesh = icosphere([0.0; 3], 1.0, 3).unwrap();
        let mut jet = jet_from_function(&AnalyticField::by_name("x1", 3).unwrap(), &mesh, 1.0).unwrap();
        for s in jet.samples.iter_mut() {
            s.grad = [Multivector::zero(3), Multivector::zero(3), Multivector::zero(3)];
        }
        let r = compatibility_residual(&jet).unwrap();
        assert!(r.diverging, "slope {}", r.band_slope);
    }

    #[test]
    fn csv_round_trip() {
        let mesh = icosphere([0.0; 3], 1.0, 1).unwrap();
        let jet = jet_from_function(&AnalyticField::by_name("gaussian-e12", 3).unwrap(), &mesh, 1.0).unwrap();
        let mut buf = Vec::new();
        jet.write_csv(&mut buf).unwrap();
        let back = LipschitzJet::read_csv(buf.as_slice(), 3, 1.0).unwrap();
        assert_eq!(back, jet);
    }
}
