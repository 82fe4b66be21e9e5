//! Two-point and string correlators, and correlation lengths.

use crate::error::{Error, Result};
use crate::mpstate::GTensor;
use crate::numerics::{eig_hermitian, inner, norm, CMatrix, C64};

use super::{build_operator_transfer, build_transfer, sector_indices, SpinOperator, TransferSpectrum};

/// Correlator magnitudes at or below this are excluded from the log-linear fit.
pub const FIT_FLOOR: f64 = 1e-13;
/// Minimum number of admissible points for a fit.
pub const FIT_MIN_POINTS: usize = 8;
/// Relative change between `r` and `2r` accepted as a converged plateau.
pub const STRING_PLATEAU_TOL: f64 = 1e-8;
/// Relative change beyond which the string correlator has no plateau.
pub const STRING_DISAGREE_TOL: f64 = 1e-6;

const COEFF_TOL: f64 = 1e-10;
const INFINITE_TOL: f64 = 1e-12;

/// `v <- M v / lambda`.
fn step(m: &CMatrix, v: &[C64], lambda: f64) -> Vec<C64> {
    m.matvec(v).into_iter().map(|z| z / lambda).collect()
}

/// Removes the component along the dominant eigenvector.
fn deflate(v: &mut [C64], e1: &[C64]) {
    let c = inner(e1, v);
    for (vi, ei) in v.iter_mut().zip(e1) {
        *vi -= ei * c;
    }
}

fn sandwich(
    spec: &TransferSpectrum,
    left: &CMatrix,
    middle: &CMatrix,
    right: &CMatrix,
    r: usize,
    project: bool,
) -> C64 {
    let e1 = &spec.dominant.vector;
    let lambda = spec.lambda1();
    let mut v = step(right, e1, lambda);
    if project {
        deflate(&mut v, e1);
    }
    for _ in 1..r {
        v = step(middle, &v, lambda);
        if project {
            deflate(&mut v, e1);
        }
    }
    inner(e1, &left.matvec(&v)) / lambda
}

/// Thermodynamic-limit correlator `<O1_i O2_{i+r}>`.
///
/// `r = 0` returns the single-site expectation of the product `O1 O2`.
pub fn two_point(g: &GTensor, o1: &SpinOperator, o2: &SpinOperator, r: usize) -> Result<C64> {
    let spec = TransferSpectrum::new(g)?;
    Ok(two_point_from(g, &spec, o1, o2, r, false))
}

/// Connected correlator: the dominant contribution `<O1><O2>` is projected out
/// at every step, so the result decays all the way down to rounding level.
pub fn connected_two_point(g: &GTensor, o1: &SpinOperator, o2: &SpinOperator, r: usize) -> Result<C64> {
    let spec = TransferSpectrum::new(g)?;
    Ok(two_point_from(g, &spec, o1, o2, r, true))
}

pub(crate) fn two_point_from(
    g: &GTensor,
    spec: &TransferSpectrum,
    o1: &SpinOperator,
    o2: &SpinOperator,
    r: usize,
    connected: bool,
) -> C64 {
    if r == 0 {
        let f = build_operator_transfer(g, &o1.then(o2)).entries;
        let full = spec.dominant_expectation(&f);
        if connected {
            let m1 = spec.dominant_expectation(&build_operator_transfer(g, o1).entries);
            let m2 = spec.dominant_expectation(&build_operator_transfer(g, o2).entries);
            return full - m1 * m2;
        }
        return full;
    }
    let f1 = build_operator_transfer(g, o1).entries;
    let f2 = build_operator_transfer(g, o2).entries;
    sandwich(spec, &f1, &spec.transfer, &f2, r, connected)
}

/// Exact periodic-chain correlator
/// `tr(F_O1 F^{r-1} F_O2 F^{L-r-1}) / tr(F^L)`.
pub fn tm_finite_correlator(
    g: &GTensor,
    o1: &SpinOperator,
    o2: &SpinOperator,
    r: usize,
    len: usize,
) -> Result<C64> {
    let f = build_transfer(g).entries;
    let f1 = build_operator_transfer(g, o1).entries;
    let f2 = build_operator_transfer(g, o2).entries;
    finite_correlator_from(&f, &f1, &f2, r, len)
}

pub(crate) fn finite_correlator_from(
    f: &CMatrix,
    f1: &CMatrix,
    f2: &CMatrix,
    r: usize,
    len: usize,
) -> Result<C64> {
    if r == 0 || r >= len {
        return Err(Error::SeparationOutOfRange { r, len });
    }
    let chain = f1.matmul(&f.pow(r - 1)).matmul(f2).matmul(&f.pow(len - r - 1));
    Ok(chain.trace() / f.pow(len).trace())
}

/// Result of a log-linear fit of `|C(r)|`.
#[derive(Clone, Debug)]
pub struct CorrelationFit {
    pub xi: f64,
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of `ln|C|` about the fitted line.
    pub residual_rms: f64,
    pub points: usize,
}

/// Correlation length from a least-squares fit of `ln|C(r)|` against `r`,
/// using the connected correlator of `op` with itself.
pub fn correlation_length_fit(
    g: &GTensor,
    op: &SpinOperator,
    r_min: usize,
    r_max: usize,
) -> Result<CorrelationFit> {
    if r_min == 0 || r_max <= r_min {
        return Err(Error::InvalidArgument(format!("bad fit window {r_min}..={r_max}")));
    }
    let spec = TransferSpectrum::new(g)?;
    let f = build_operator_transfer(g, op).entries;
    let e1 = &spec.dominant.vector;
    let lambda = spec.lambda1();

    let mut pts = Vec::new();
    let mut v = step(&f, e1, lambda);
    deflate(&mut v, e1);
    for r in 1..=r_max {
        if r > 1 {
            v = step(&spec.transfer, &v, lambda);
            deflate(&mut v, e1);
        }
        if r < r_min {
            continue;
        }
        let c = inner(e1, &f.matvec(&v)) / lambda;
        if c.norm() > FIT_FLOOR {
            pts.push((r as f64, c.norm().ln()));
        }
    }
    if pts.len() < FIT_MIN_POINTS {
        return Err(Error::CorrelatorVanishes { admissible: pts.len(), needed: FIT_MIN_POINTS });
    }

    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    if !(slope < 0.0) {
        return Err(Error::NonDecaying(slope));
    }
    let residual_rms =
        (pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum::<f64>() / n).sqrt();
    Ok(CorrelationFit { xi: -1.0 / slope, slope, intercept, residual_rms, points: pts.len() })
}

/// Correlation length read off the transfer spectrum.
#[derive(Clone, Debug)]
pub struct SpectralLength {
    /// `1 / ln(lambda1 / |lambda*|)`; infinite when `|lambda*|` reaches `lambda1`.
    pub xi: f64,
    pub lambda_star: f64,
    /// Set when `F_O|e1>` vanished and `lambda*` came from the symmetry
    /// sector `op` couples to instead of from the expansion.
    pub from_sector: bool,
}

/// Correlation length of `op` from the eigen-expansion of `F_O|e1>`.
///
/// `lambda*` is the largest-modulus subleading eigenvalue that `F_O|e1>` has a
/// non-negligible component on. When `F_O|e1>` vanishes identically (for
/// instance `Sx` when the state has no `|±1>` weight) the magnetization sectors
/// that `op` connects to are used instead.
pub fn correlation_length_spectral(g: &GTensor, op: &SpinOperator) -> Result<SpectralLength> {
    let spec = TransferSpectrum::new(g)?;
    correlation_length_spectral_from(g, &spec, op)
}

pub(crate) fn correlation_length_spectral_from(
    g: &GTensor,
    spec: &TransferSpectrum,
    op: &SpinOperator,
) -> Result<SpectralLength> {
    let lambda = spec.lambda1();
    let e1 = &spec.dominant.vector;
    let w = build_operator_transfer(g, op).entries.matvec(e1);
    let wn = norm(&w);

    let (lambda_star, from_sector) = if wn > COEFF_TOL * lambda {
        // eigenvalues are ascending and lambda1 is the unique largest
        let lead = spec.eigen.len() - 1;
        let star = (0..spec.eigen.len())
            .filter(|&k| k != lead)
            .filter(|&k| inner(&spec.eigen.vector(k), &w).norm() > COEFF_TOL * wn)
            .map(|k| spec.eigen.values[k].abs())
            .fold(0.0, f64::max);
        (star, false)
    } else {
        (sector_lambda(spec, op)?, true)
    };

    let xi = if lambda_star >= lambda * (1.0 - INFINITE_TOL) {
        f64::INFINITY
    } else if lambda_star == 0.0 {
        0.0
    } else {
        1.0 / (lambda / lambda_star).ln()
    };
    Ok(SpectralLength { xi, lambda_star, from_sector })
}

/// Largest subleading `|lambda|` in the sectors `op` maps the dominant sector into.
fn sector_lambda(spec: &TransferSpectrum, op: &SpinOperator) -> Result<f64> {
    let deltas = op.delta_m();
    if deltas.is_empty() {
        return Err(Error::CorrelatorVanishes { admissible: 0, needed: FIT_MIN_POINTS });
    }
    let lambda = spec.lambda1();
    let mut best: f64 = 0.0;
    for d in deltas {
        for charge in [d, -d] {
            let idx = sector_indices(charge);
            if idx.is_empty() {
                continue;
            }
            let vals = eig_hermitian(&spec.transfer.submatrix(&idx))?.values;
            let mut mags: Vec<f64> = vals.iter().map(|v| v.abs()).collect();
            mags.sort_by(|a, b| b.total_cmp(a));
            // the dominant eigenvalue itself lives in the charge-0 sector
            if charge == 0 && (mags[0] - lambda).abs() <= 1e-12 * lambda {
                mags.remove(0);
            }
            if let Some(&m) = mags.first() {
                best = best.max(m);
            }
        }
    }
    Ok(best)
}

/// String correlator `<Sz_i exp(i theta sum_{k=i+1}^{i+r-1} Sz_k) Sz_{i+r}>`.
pub fn string_order_at(g: &GTensor, theta: f64, r: usize) -> Result<C64> {
    let spec = TransferSpectrum::new(g)?;
    string_order_from(g, &spec, theta, r)
}

pub(crate) fn string_order_from(g: &GTensor, spec: &TransferSpectrum, theta: f64, r: usize) -> Result<C64> {
    if r < 2 {
        return Err(Error::InvalidArgument(format!("string length must be at least 2, got {r}")));
    }
    let fz = build_operator_transfer(g, &SpinOperator::sz()).entries;
    let fp = build_operator_transfer(g, &SpinOperator::phase(theta)).entries;
    Ok(sandwich(spec, &fz, &fp, &fz, r, false))
}

#[derive(Clone, Debug)]
pub struct StringOrder {
    pub value: C64,
    pub value_2r: C64,
    /// `|v(2r) - v(r)| / max(|v(r)|, 1)`.
    pub relative_change: f64,
    pub converged: bool,
}

/// String correlator at `r`, checked for a plateau against `2r`.
pub fn string_order(g: &GTensor, theta: f64, r: usize) -> Result<StringOrder> {
    let spec = TransferSpectrum::new(g)?;
    string_order_plateau(g, &spec, theta, r)
}

pub(crate) fn string_order_plateau(
    g: &GTensor,
    spec: &TransferSpectrum,
    theta: f64,
    r: usize,
) -> Result<StringOrder> {
    let value = string_order_from(g, spec, theta, r)?;
    let value_2r = string_order_from(g, spec, theta, 2 * r)?;
    let relative_change = (value_2r - value).norm() / value.norm().max(1.0);
    if relative_change > STRING_DISAGREE_TOL {
        return Err(Error::NoPlateau(relative_change));
    }
    Ok(StringOrder { value, value_2r, relative_change, converged: relative_change < STRING_PLATEAU_TOL })
}
