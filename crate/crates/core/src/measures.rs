//! Quantum-information measures on one-parameter slices of the family.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mpstate::{build_g, GTensor, ModelParams};
use crate::numerics::{eig_hermitian, sqrt_psd, PSD_CLIP_TOL};
use crate::transfer::{
    build_mixed_transfer, build_transfer, correlation_length_spectral_from, string_order_plateau, tdl_rdm_from,
    DensityMatrix, SpinOperator, TransferSpectrum,
};

pub const DEFAULT_DELTA: f64 = 1e-3;
pub const DEFAULT_H: f64 = 1e-4;
pub const DEFAULT_RICHARDSON: usize = 2;
pub const DEFAULT_THETA: f64 = std::f64::consts::FRAC_PI_2;
pub const DEFAULT_STRING_R: usize = 60;
/// Where the degenerate point is evaluated instead, as a one-sided limit.
pub const LIMIT_OFFSET: f64 = 1e-6;
/// Relative drift between `delta` and `delta/2` accepted for the fixed-offset RFS.
pub const RFS_DRIFT_TOL: f64 = 1e-3;
pub const MAGNETIZATION_TOL: f64 = 1e-12;
pub const EXTREMUM_TOL: f64 = 1e-6;

/// A line through parameter space at fixed `(x, gamma)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Slice {
    pub x: f64,
    pub gamma: f64,
}

impl Slice {
    /// Passes through the isotropic valence-bond point at `a = sqrt(6)`.
    pub const ACRITICAL: Slice = Slice { x: -3.0, gamma: -2.0 };
    /// Ends at the critical point `a = 0`.
    pub const CRITICAL: Slice = Slice { x: 0.0, gamma: 1.0 };

    pub fn params(&self, a: f64) -> ModelParams {
        ModelParams { a, x: self.x, gamma: self.gamma }
    }

    pub fn tensor(&self, a: f64) -> GTensor {
        build_g(self.params(a))
    }

    pub fn rdm(&self, a: f64) -> Result<DensityMatrix> {
        let g = self.tensor(a);
        tdl_rdm_from(&g, &TransferSpectrum::new(&g)?)
    }

    pub fn entropy(&self, a: f64) -> Result<f64> {
        vn_entropy(&self.rdm(a)?)
    }
}

/// Von Neumann entropy in bits.
pub fn vn_entropy(rho: &DensityMatrix) -> Result<f64> {
    Ok(rho.spectrum()?.into_iter().filter(|&p| p > 0.0).map(|p| -p * p.log2()).sum())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Derivative {
    pub estimate: f64,
    /// Difference between the two highest extrapolation levels.
    pub error: f64,
}

/// Central-difference derivative of order 1 or 2 with Richardson extrapolation
/// over `levels` step sizes `h, h/2, ...`.
pub fn numerical_derivative(
    f: impl Fn(f64) -> Result<f64>,
    a0: f64,
    order: u8,
    h: f64,
    levels: usize,
) -> Result<Derivative> {
    if !(h > 0.0) || levels == 0 {
        return Err(Error::InvalidArgument(format!("step {h} with {levels} levels")));
    }
    let eval = |a: f64| f(a).map_err(|e| Error::StencilFailure { at: a, source: Box::new(e) });
    let centre = if order == 2 { eval(a0)? } else { 0.0 };
    let stencil = |h: f64| -> Result<f64> {
        // exactly representable step
        let h = (a0 + h) - a0;
        let (p, m) = (eval(a0 + h)?, eval(a0 - h)?);
        match order {
            1 => Ok((p - m) / (2.0 * h)),
            2 => Ok((p - 2.0 * centre + m) / (h * h)),
            _ => Err(Error::InvalidArgument(format!("derivative order {order}"))),
        }
    };

    let mut table: Vec<Vec<f64>> = Vec::with_capacity(levels);
    for i in 0..levels {
        let mut row = vec![stencil(h / 2f64.powi(i as i32))?];
        for j in 1..=i {
            let k = 4f64.powi(j as i32);
            row.push((k * row[j - 1] - table[i - 1][j - 1]) / (k - 1.0));
        }
        table.push(row);
    }
    let last = &table[levels - 1];
    let estimate = last[levels - 1];
    let error = if levels > 1 { (estimate - table[levels - 2][levels - 2]).abs() } else { 0.0 };
    Ok(Derivative { estimate, error })
}

/// Step that keeps a stencil centred at `a` from reaching `a = 0`.
pub fn effective_step(a: f64, h: f64) -> f64 {
    if a == 0.0 {
        h
    } else {
        h.min(a.abs() / 4.0)
    }
}

/// `Tr sqrt(sqrt(rho) sigma sqrt(rho))`.
pub fn uhlmann_fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    let r = sqrt_psd(rho.matrix(), PSD_CLIP_TOL)?;
    let m = r.matmul(sigma.matrix()).matmul(&r);
    let mut total = 0.0;
    for v in eig_hermitian(&m)?.values {
        if v < -PSD_CLIP_TOL {
            return Err(Error::NotPsd(v));
        }
        total += v.max(0.0).sqrt();
    }
    Ok(total.min(1.0))
}

/// Fidelity between the one-site density matrices at `a` and `a + delta`.
pub fn reduced_fidelity(slice: Slice, a: f64, delta: f64) -> Result<f64> {
    uhlmann_fidelity(&slice.rdm(a)?, &slice.rdm(a + delta)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Rfs {
    /// `2 (1 - F_R(a, a + delta)) / delta^2`.
    pub fixed_delta: f64,
    /// `-d^2 F_R(a, a') / da'^2` at `a' = a`.
    pub second_derivative: f64,
    /// Relative change of `fixed_delta` when `delta` is halved.
    pub drift: f64,
    pub converged: bool,
}

/// Reduced fidelity susceptibility, both as a fixed-offset ratio and as a
/// second derivative.
pub fn rfs(slice: Slice, a: f64, delta: f64, h: f64) -> Result<Rfs> {
    let rho = slice.rdm(a)?;
    let fd = |d: f64| -> Result<f64> {
        Ok(2.0 * (1.0 - uhlmann_fidelity(&rho, &slice.rdm(a + d)?)?) / (d * d))
    };
    let fixed_delta = fd(delta)?;
    let half = fd(delta / 2.0)?;
    let drift = if fixed_delta == 0.0 { (half - fixed_delta).abs() } else { ((half - fixed_delta) / fixed_delta).abs() };
    let d2 = numerical_derivative(
        |ap| uhlmann_fidelity(&rho, &slice.rdm(ap)?),
        a,
        2,
        effective_step(a, h),
        DEFAULT_RICHARDSON,
    )?;
    Ok(Rfs { fixed_delta, second_derivative: -d2.estimate, drift, converged: drift < RFS_DRIFT_TOL })
}

/// Thermodynamic-limit overlap per site, `lambda1(mixed) / sqrt(lambda1 lambda1')`.
pub fn fidelity_per_site(p: ModelParams, q: ModelParams) -> Result<f64> {
    let (g, h) = (build_g(p), build_g(q));
    // only the leading eigenvalue enters, so a degenerate one (a = 0 on the
    // critical slice) is harmless here
    let top = |m: &crate::numerics::CMatrix| -> Result<f64> {
        Ok(eig_hermitian(m)?.values.into_iter().fold(f64::NEG_INFINITY, f64::max))
    };
    let l1 = top(&build_transfer(&g).entries)?;
    let l2 = top(&build_transfer(&h).entries)?;
    let mixed = top(&build_mixed_transfer(&g, &h).entries)?;
    if !(l1 > 0.0 && l2 > 0.0) {
        return Err(Error::NonPositiveDominant(l1.min(l2)));
    }
    Ok(mixed / (l1 * l2).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Magnetization {
    pub mx: f64,
    pub my: f64,
    pub mz: f64,
    /// `Tr(rho Sz^2) - mz^2`.
    pub fluct_zz: f64,
}

pub fn magnetization_and_fluctuation(rho: &DensityMatrix) -> Result<Magnetization> {
    let m: Vec<f64> = [SpinOperator::sx(), SpinOperator::sy(), SpinOperator::sz()]
        .iter()
        .map(|op| rho.expectation(op).re)
        .collect();
    if let Some(&bad) = m.iter().find(|v| v.abs() > MAGNETIZATION_TOL) {
        return Err(Error::Magnetized(bad));
    }
    let sz = SpinOperator::sz();
    let fluct_zz = rho.expectation(&sz.then(&sz)).re - m[2] * m[2];
    if !(-MAGNETIZATION_TOL..=4.0 + MAGNETIZATION_TOL).contains(&fluct_zz) {
        return Err(Error::InvalidArgument(format!("fluctuation {fluct_zz} outside [0, 4]")));
    }
    Ok(Magnetization { mx: m[0], my: m[1], mz: m[2], fluct_zz: fluct_zz.clamp(0.0, 4.0) })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Extremum {
    Max,
    Min,
}

/// Golden-section search for an interior extremum of `f` on `[lo, hi]`.
pub fn locate_extremum(f: impl Fn(f64) -> Result<f64>, lo: f64, hi: f64, kind: Extremum) -> Result<f64> {
    if !(lo < hi) {
        return Err(Error::InvalidArgument(format!("empty bracket [{lo}, {hi}]")));
    }
    let sign = if kind == Extremum::Max { -1.0 } else { 1.0 };
    let g = |a: f64| f(a).map(|v| sign * v);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;

    let (f_lo, f_hi) = (g(lo)?, g(hi)?);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (g(c)?, g(d)?);
    while b - a > EXTREMUM_TOL {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = g(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = g(d)?;
        }
    }
    let best = 0.5 * (a + b);
    let fb = g(best)?;
    // an extremum sitting on the bracket edge is not an interior one
    let slack = 1e-12 * fb.abs().max(1.0);
    if fb > f_lo - slack || fb > f_hi - slack {
        return Err(Error::NotUnimodal { lo, hi });
    }
    Ok(best)
}

/// Which observables to compute at a point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MeasureSet {
    pub entropy: bool,
    pub dde: bool,
    pub rf: bool,
    pub rfs: bool,
    pub fps: bool,
    pub xi: bool,
    pub string: bool,
    pub fluct: bool,
}

impl MeasureSet {
    pub const ALL: MeasureSet =
        MeasureSet { entropy: true, dde: true, rf: true, rfs: true, fps: true, xi: true, string: true, fluct: true };
    pub const NONE: MeasureSet =
        MeasureSet { entropy: false, dde: false, rf: false, rfs: false, fps: false, xi: false, string: false, fluct: false };

    /// Parses a comma-separated list such as `entropy,rf,xi` (or `all`).
    pub fn parse(list: &str) -> Result<Self> {
        let mut set = Self::NONE;
        for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match name {
                "all" => set = Self::ALL,
                "entropy" => set.entropy = true,
                "dde" => set.dde = true,
                "rf" => set.rf = true,
                "rfs" => set.rfs = true,
                "fps" => set.fps = true,
                "xi" => set.xi = true,
                "string" => set.string = true,
                "fluct" => set.fluct = true,
                other => return Err(Error::InvalidArgument(format!("unknown measure '{other}'"))),
            }
        }
        Ok(set)
    }

    pub fn names(&self) -> Vec<&'static str> {
        let flags = [
            (self.entropy, "entropy"),
            (self.dde, "dde"),
            (self.rf, "rf"),
            (self.rfs, "rfs"),
            (self.fps, "fps"),
            (self.xi, "xi"),
            (self.string, "string"),
            (self.fluct, "fluct"),
        ];
        flags.iter().filter(|f| f.0).map(|f| f.1).collect()
    }
}

impl Default for MeasureSet {
    fn default() -> Self {
        Self::ALL
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasureOptions {
    pub delta: f64,
    pub h: f64,
    pub theta: f64,
    pub string_r: usize,
    pub measures: MeasureSet,
}

impl Default for MeasureOptions {
    fn default() -> Self {
        Self { delta: DEFAULT_DELTA, h: DEFAULT_H, theta: DEFAULT_THETA, string_r: DEFAULT_STRING_R, measures: MeasureSet::ALL }
    }
}

/// All measures at one point of a slice. Absent measures are `None`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasurePoint {
    pub a: f64,
    #[serde(rename = "S")]
    pub s: Option<f64>,
    #[serde(rename = "dS_da")]
    pub ds_da: Option<f64>,
    #[serde(rename = "d2S_da2")]
    pub d2s_da2: Option<f64>,
    #[serde(rename = "F_R")]
    pub f_r: Option<f64>,
    #[serde(rename = "RFS_fd")]
    pub rfs_fixed_delta: Option<f64>,
    #[serde(rename = "RFS_d2")]
    pub rfs_second_derivative: Option<f64>,
    #[serde(rename = "fps")]
    pub fidelity_per_site: Option<f64>,
    pub xi_long: Option<f64>,
    pub xi_trans: Option<f64>,
    pub string_order: Option<f64>,
    pub fluct_zz: Option<f64>,
    pub lambda1: f64,
    /// The point was degenerate and was evaluated at `a = LIMIT_OFFSET` instead.
    pub limit_flag: bool,
}

/// Evaluates the requested measures at `a`. At a degenerate point the whole
/// record is taken as the one-sided limit at `LIMIT_OFFSET`.
pub fn evaluate_point(slice: Slice, a: f64, opts: &MeasureOptions) -> Result<MeasurePoint> {
    let g0 = slice.tensor(a);
    let (a_eval, g, spec, limit_flag) = match TransferSpectrum::new(&g0) {
        Ok(spec) => (a, g0, spec, false),
        Err(Error::DegenerateDominant { .. }) => {
            let shifted = if a < 0.0 { -LIMIT_OFFSET } else { LIMIT_OFFSET };
            let g = slice.tensor(shifted);
            let spec = TransferSpectrum::new(&g)?;
            (shifted, g, spec, true)
        }
        Err(e) => return Err(e),
    };
    let m = opts.measures;
    let rho = tdl_rdm_from(&g, &spec)?;
    let h = effective_step(a_eval, opts.h);
    let entropy_at = |x: f64| slice.entropy(x);

    let s = if m.entropy { Some(vn_entropy(&rho)?) } else { None };
    let (ds_da, d2s_da2) = if m.dde {
        (
            Some(numerical_derivative(entropy_at, a_eval, 1, h, DEFAULT_RICHARDSON)?.estimate),
            Some(numerical_derivative(entropy_at, a_eval, 2, h, DEFAULT_RICHARDSON)?.estimate),
        )
    } else {
        (None, None)
    };
    let f_r = if m.rf { Some(uhlmann_fidelity(&rho, &slice.rdm(a_eval + opts.delta)?)?) } else { None };
    let (rfs_fixed_delta, rfs_second_derivative) = if m.rfs {
        let r = rfs(slice, a_eval, opts.delta, opts.h)?;
        (Some(r.fixed_delta), Some(r.second_derivative))
    } else {
        (None, None)
    };
    let fps = if m.fps {
        Some(fidelity_per_site(slice.params(a_eval), slice.params(a_eval + opts.delta))?)
    } else {
        None
    };
    let (xi_long, xi_trans) = if m.xi {
        (
            Some(correlation_length_spectral_from(&g, &spec, &SpinOperator::sz())?.xi),
            Some(correlation_length_spectral_from(&g, &spec, &SpinOperator::sx())?.xi),
        )
    } else {
        (None, None)
    };
    let string_order =
        if m.string { Some(string_order_plateau(&g, &spec, opts.theta, opts.string_r)?.value.re) } else { None };
    let fluct_zz = if m.fluct { Some(magnetization_and_fluctuation(&rho)?.fluct_zz) } else { None };

    Ok(MeasurePoint {
        a,
        s,
        ds_da,
        d2s_da2,
        f_r,
        rfs_fixed_delta,
        rfs_second_derivative,
        fidelity_per_site: fps,
        xi_long,
        xi_trans,
        string_order,
        fluct_zz,
        lambda1: spec.lambda1(),
        limit_flag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transfer::{closed_form_rdm_acritical, closed_form_rdm_critical};
    use proptest::prelude::*;

    const LOG2_5: f64 = 2.321928094887362;
    const LOG2_3: f64 = 1.584962500721156;

    fn fr_critical(a: f64, b: f64) -> f64 {
        (1.0 + a * b) / ((1.0 + a * a) * (1.0 + b * b)).sqrt()
    }

    #[test]
    fn entropy_examples() {
        assert!((vn_entropy(&closed_form_rdm_acritical(6f64.sqrt())).unwrap() - LOG2_5).abs() < 1e-12);
        assert_eq!(vn_entropy(&closed_form_rdm_critical(0.0)).unwrap(), 0.0);
        let s0 = vn_entropy(&DensityMatrix::from_diag(&[0.0, 2.0 / 7.0, 3.0 / 7.0, 2.0 / 7.0, 0.0]).unwrap()).unwrap();
        assert!((s0 - 1.556657).abs() < 1e-6);
    }

    #[test]
    fn landmark_entropies() {
        assert!((Slice::ACRITICAL.entropy(6f64.sqrt()).unwrap() - LOG2_5).abs() < 1e-9);
        assert!((Slice::CRITICAL.entropy(2f64.sqrt()).unwrap() - LOG2_3).abs() < 1e-9);
    }

    #[test]
    fn derivative_of_square() {
        for a0 in [-1.3, 0.0, 0.7, 4.0] {
            // quadratics have no truncation error, so a wide step only removes rounding
            let d = numerical_derivative(|a| Ok(a * a), a0, 2, 1e-2, 2).unwrap();
            assert!((d.estimate - 2.0).abs() < 1e-8, "{a0}: {}", d.estimate);
            let d = numerical_derivative(|a| Ok(a * a), a0, 1, DEFAULT_H, 2).unwrap();
            assert!((d.estimate - 2.0 * a0).abs() < 1e-8);
        }
    }

    #[test]
    fn richardson_improves_cubic_derivative() {
        let f = |a: f64| Ok(a.sin());
        let one = numerical_derivative(f, 0.4, 1, 0.1, 1).unwrap().estimate;
        let three = numerical_derivative(f, 0.4, 1, 0.1, 3).unwrap().estimate;
        assert!((three - 0.4f64.cos()).abs() < 1e-3 * (one - 0.4f64.cos()).abs());
    }

    #[test]
    fn entropy_stationary_at_isotropic_point() {
        let d = numerical_derivative(|a| Slice::ACRITICAL.entropy(a), 6f64.sqrt(), 1, DEFAULT_H, 2).unwrap();
        assert!(d.estimate.abs() < 1e-6);
    }

    #[test]
    fn stencil_failure_across_degenerate_point() {
        let err = numerical_derivative(|a| Slice::CRITICAL.entropy(a), 0.0, 2, DEFAULT_H, 2);
        assert!(matches!(err, Err(Error::StencilFailure { .. })));
    }

    #[test]
    fn critical_second_derivative_grows_towards_zero() {
        let d2 = |a: f64| {
            numerical_derivative(|x| Slice::CRITICAL.entropy(x), a, 2, effective_step(a, DEFAULT_H), 2)
                .unwrap()
                .estimate
                .abs()
        };
        assert!(d2(1e-3) > d2(1e-2));
    }

    #[test]
    fn uhlmann_examples() {
        let rho = closed_form_rdm_critical(1.0);
        assert!((uhlmann_fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-12);
        let p = DensityMatrix::from_diag(&[1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let q = DensityMatrix::from_diag(&[0.0, 1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(uhlmann_fidelity(&p, &q).unwrap(), 0.0);
        // rounded to seven digits, so the trace is only good to 1e-7
        let sigma = DensityMatrix::with_tolerance(
            crate::numerics::CMatrix::from_real_diag(&[0.2737557, 0.0, 0.4524887, 0.0, 0.2737557]),
            1e-6,
        )
        .unwrap();
        assert!((uhlmann_fidelity(&rho, &sigma).unwrap() - 0.998868).abs() < 1e-6);
    }

    #[test]
    fn critical_reduced_fidelity_closed_form() {
        for a in [0.5, 1.0, 2.0] {
            let f = reduced_fidelity(Slice::CRITICAL, a, 0.1).unwrap();
            assert!((f - fr_critical(a, a + 0.1)).abs() < 1e-10);
        }
        assert!((reduced_fidelity(Slice::CRITICAL, 1.0, 0.1).unwrap() - 0.998868).abs() < 1e-6);
    }

    #[test]
    fn fidelity_per_site_matches_reduced_on_critical_slice() {
        for a in [0.2, 0.9, 1.7] {
            for b in [0.0, 0.5, 2.2] {
                let c = Slice::CRITICAL;
                let f = fidelity_per_site(c.params(a), c.params(b)).unwrap_or_else(|e| panic!("{a} {b}: {e}"));
                assert!((f - fr_critical(a, b)).abs() < 1e-12, "{a} {b}");
            }
        }
        let p = Slice::ACRITICAL.params(1.3);
        assert!((fidelity_per_site(p, p).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn critical_rfs_law() {
        for a in [0.1, 0.5, 1.0, 2.0, 3.0] {
            let r = rfs(Slice::CRITICAL, a, DEFAULT_DELTA, DEFAULT_H).unwrap();
            let want = 1.0 / (1.0 + a * a).powi(2);
            assert!((r.fixed_delta / want - 1.0).abs() < 1e-3, "a={a}");
            assert!((r.second_derivative / want - 1.0).abs() < 1e-4, "a={a}: {r:?}");
            assert!(r.converged);
        }
    }

    #[test]
    fn constant_family_has_zero_rfs() {
        let rho = closed_form_rdm_critical(0.7);
        assert_eq!(2.0 * (1.0 - uhlmann_fidelity(&rho, &rho).unwrap()), 0.0);
    }

    #[test]
    fn magnetization_examples() {
        let m = magnetization_and_fluctuation(&Slice::ACRITICAL.rdm(6f64.sqrt()).unwrap()).unwrap();
        assert!((m.fluct_zz - 2.0).abs() < 1e-12);
        for a in [0.3, 1.0, 5.0] {
            let m = magnetization_and_fluctuation(&Slice::CRITICAL.rdm(a).unwrap()).unwrap();
            assert!((m.fluct_zz - 4.0 * a * a / (1.0 + a * a)).abs() < 1e-12);
        }
        let m = magnetization_and_fluctuation(&closed_form_rdm_critical(0.0)).unwrap();
        assert_eq!((m.mx, m.my, m.mz, m.fluct_zz), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn extremum_search() {
        let a = locate_extremum(|a| Ok(-(a - 1.0) * (a - 1.0)), -2.0, 3.0, Extremum::Max).unwrap();
        assert!((a - 1.0).abs() < 1e-6);
        let a = locate_extremum(|a| Ok((a - 0.3).powi(2)), 0.0, 1.0, Extremum::Min).unwrap();
        assert!((a - 0.3).abs() < 1e-6);
        assert!(matches!(locate_extremum(|a| Ok(a), 0.0, 1.0, Extremum::Max), Err(Error::NotUnimodal { .. })));
    }

    #[test]
    fn entropy_maxima() {
        let a = locate_extremum(|a| Slice::ACRITICAL.entropy(a), 1.5, 3.5, Extremum::Max).unwrap();
        assert!((a - 6f64.sqrt()).abs() < 1e-4);
        let a = locate_extremum(|a| Slice::CRITICAL.entropy(a), 0.5, 2.5, Extremum::Max).unwrap();
        assert!((a - 2f64.sqrt()).abs() < 1e-4);
    }

    #[test]
    fn point_at_degenerate_critical_point() {
        let p = evaluate_point(Slice::CRITICAL, 0.0, &MeasureOptions::default()).unwrap();
        assert!(p.limit_flag);
        assert!(p.s.unwrap() < 1e-9);
        assert_eq!(p.a, 0.0);
    }

    #[test]
    fn point_at_isotropic_point() {
        let p = evaluate_point(Slice::ACRITICAL, 6f64.sqrt(), &MeasureOptions::default()).unwrap();
        assert!(!p.limit_flag);
        assert!((p.s.unwrap() - LOG2_5).abs() < 1e-9);
        assert!((p.lambda1 - 10.0).abs() < 1e-12);
        assert!((p.xi_long.unwrap() - p.xi_trans.unwrap()).abs() < 1e-10);
        assert!((p.fluct_zz.unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn measure_selection() {
        let opts = MeasureOptions { measures: MeasureSet::parse("entropy, xi").unwrap(), ..Default::default() };
        let p = evaluate_point(Slice::CRITICAL, 1.0, &opts).unwrap();
        assert!(p.s.is_some() && p.xi_long.is_some());
        assert!(p.f_r.is_none() && p.string_order.is_none() && p.ds_da.is_none());
        assert!(MeasureSet::parse("entropy,bogus").is_err());
        assert_eq!(MeasureSet::parse("all").unwrap(), MeasureSet::ALL);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn entropy_is_even_and_bounded(a in 0.05f64..4.0) {
            for slice in [Slice::ACRITICAL, Slice::CRITICAL] {
                let s = slice.entropy(a).unwrap();
                prop_assert!((s - slice.entropy(-a).unwrap()).abs() < 1e-12);
                prop_assert!((0.0..=LOG2_5 + 1e-12).contains(&s));
            }
        }

        #[test]
        fn fidelity_symmetric(a in 0.05f64..4.0, b in 0.05f64..4.0) {
            for slice in [Slice::ACRITICAL, Slice::CRITICAL] {
                let (p, q) = (slice.rdm(a).unwrap(), slice.rdm(b).unwrap());
                let f = uhlmann_fidelity(&p, &q).unwrap();
                prop_assert!((f - uhlmann_fidelity(&q, &p).unwrap()).abs() < 1e-12);
                let diag: f64 = p.diagonal().iter().zip(q.diagonal()).map(|(x, y)| (x * y).sqrt()).sum();
                prop_assert!((f - diag).abs() < 1e-12);
                prop_assert!(f > 0.0 && f <= 1.0);
            }
        }
    }
}
