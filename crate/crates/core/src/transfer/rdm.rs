use crate::error::{Error, Result};
use crate::mpstate::{phys_index, GTensor, PHYS_DIM};
use crate::numerics::{eig_hermitian, psd_spectrum, CMatrix, C64, PSD_CLIP_TOL};

use super::{elementary_transfer, SpinOperator, TransferSpectrum};

/// Tolerance on trace, hermiticity and positivity of a density matrix.
pub const DENSITY_TOL: f64 = 1e-12;

/// One-site reduced density matrix, `rho[s][s'] = <s|rho|s'>`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        Self::with_tolerance(m, DENSITY_TOL)
    }

    pub fn with_tolerance(m: CMatrix, tol: f64) -> Result<Self> {
        if m.rows() != PHYS_DIM || m.cols() != PHYS_DIM {
            return Err(Error::DimensionMismatch { expected: PHYS_DIM, got: m.rows() });
        }
        let defect = m.hermitian_defect();
        if defect > tol {
            return Err(Error::NotHermitian(defect));
        }
        let tr = m.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > tol {
            return Err(Error::InvalidArgument(format!("density matrix trace {tr} differs from 1")));
        }
        let min = eig_hermitian(&m)?.values[0];
        if min < -tol {
            return Err(Error::NotPsd(min));
        }
        Ok(Self(m))
    }

    /// Diagonal density matrix; the weights must already sum to one.
    pub fn from_diag(weights: &[f64]) -> Result<Self> {
        Self::new(CMatrix::from_real_diag(weights))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    /// Eigenvalues ascending, negatives within tolerance clipped to zero.
    pub fn spectrum(&self) -> Result<Vec<f64>> {
        psd_spectrum(&self.0, PSD_CLIP_TOL)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.0.diag().iter().map(|z| z.re).collect()
    }

    /// `Tr(rho O)`.
    pub fn expectation(&self, op: &SpinOperator) -> C64 {
        self.0.matmul(op.matrix()).trace()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0.max_abs_diff(&other.0)
    }
}

/// Thermodynamic-limit one-site density matrix from the dominant transfer eigenpair.
pub fn tdl_one_site_rdm(g: &GTensor) -> Result<DensityMatrix> {
    let spec = TransferSpectrum::new(g)?;
    tdl_rdm_from(g, &spec)
}

pub(crate) fn tdl_rdm_from(g: &GTensor, spec: &TransferSpectrum) -> Result<DensityMatrix> {
    let mut rho = CMatrix::zeros(PHYS_DIM, PHYS_DIM);
    for s in 0..PHYS_DIM {
        for sp in 0..PHYS_DIM {
            rho[(s, sp)] = spec.dominant_expectation(&elementary_transfer(g, s, sp));
        }
    }
    DensityMatrix::new(rho)
}

/// Closed-form density matrix on the slice `x = -3, gamma = -2`.
///
/// With `D = 81 - 6a^2 + a^4` and `t = 3 - a^2 + sqrt(D)` the weights on
/// `(|-2>, |-1>, |0>, |+1>, |+2>)` are proportional to
/// `(a^2, t, 2 + t^2/9, t, a^2)`.
pub fn closed_form_rdm_acritical(a: f64) -> DensityMatrix {
    let a2 = a * a;
    let root = (81.0 - 6.0 * a2 + a2 * a2).sqrt();
    let t = 3.0 - a2 + root;
    let k = (5.0 + a2 + root) * (2.0 + t * t / 36.0);
    let w = [2.0 * a2 / k, 2.0 * t / k, 2.0 * (2.0 + t * t / 9.0) / k, 2.0 * t / k, 2.0 * a2 / k];
    DensityMatrix(CMatrix::from_real_diag(&w))
}

/// Closed-form density matrix on the slice `x = 0, gamma = 1`.
pub fn closed_form_rdm_critical(a: f64) -> DensityMatrix {
    let a2 = a * a;
    let edge = a2 / (2.0 * (1.0 + a2));
    let mut w = [0.0; PHYS_DIM];
    w[phys_index(-2)] = edge;
    w[phys_index(2)] = edge;
    w[phys_index(0)] = 1.0 / (1.0 + a2);
    DensityMatrix(CMatrix::from_real_diag(&w))
}
