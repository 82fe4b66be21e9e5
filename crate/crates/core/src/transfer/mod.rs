//! Transfer matrices on the doubled bond space.
//!
//! The composite index of a bond pair `(mu, mu')` is `3 mu + mu'`. The plain
//! transfer matrix contracts the site tensor against its conjugate,
//!
//! ```text
//! F[(mu,mu'),(nu,nu')] = sum_m A[m][mu][nu] conj(A[m][mu'][nu'])
//! ```
//!
//! so the conjugated amplitudes enter through `|x|`, never `x`.

mod correlators;
mod rdm;
mod spin;

pub use correlators::{
    connected_two_point, correlation_length_fit, correlation_length_spectral, string_order,
    string_order_at, tm_finite_correlator, two_point, CorrelationFit, SpectralLength, StringOrder,
    FIT_FLOOR, FIT_MIN_POINTS, STRING_PLATEAU_TOL, STRING_DISAGREE_TOL,
};
pub use rdm::{
    closed_form_rdm_acritical, closed_form_rdm_critical, tdl_one_site_rdm, DensityMatrix,
    DENSITY_TOL,
};
pub use spin::SpinOperator;

pub(crate) use correlators::{
    correlation_length_spectral_from, finite_correlator_from, string_order_plateau,
};
pub(crate) use rdm::tdl_rdm_from;

use crate::error::Result;
use crate::mpstate::{GTensor, BOND_DIM, PHYS_DIM};
use crate::numerics::{
    dominant_eigenpair, eig_hermitian, CMatrix, EigenPair, HermitianEigen, C64, DOMINANT_MAX_SWEEPS,
    DOMINANT_TOL, ZERO,
};

pub const TM_DIM: usize = BOND_DIM * BOND_DIM;

/// Bond charges: `A[m][mu][nu]` is non-zero only when `m = q(nu) - q(mu)`.
const BOND_CHARGE: [i32; BOND_DIM] = [0, 1, 2];

#[derive(Clone, Debug, PartialEq)]
pub enum TransferKind {
    Plain,
    Operator,
    Mixed,
}

#[derive(Clone, Debug)]
pub struct TransferMatrix {
    pub entries: CMatrix,
    pub kind: TransferKind,
}

pub const fn composite(mu: usize, mu_p: usize) -> usize {
    mu * BOND_DIM + mu_p
}

/// Magnetization sector of a composite index (conserved by the plain transfer matrix).
pub fn composite_charge(idx: usize) -> i32 {
    BOND_CHARGE[idx / BOND_DIM] - BOND_CHARGE[idx % BOND_DIM]
}

/// Composite indices of a given charge, ascending.
pub fn sector_indices(charge: i32) -> Vec<usize> {
    (0..TM_DIM).filter(|&i| composite_charge(i) == charge).collect()
}

fn contract(g: &GTensor, h: &GTensor, weight: impl Fn(usize, usize) -> C64) -> CMatrix {
    let mut f = CMatrix::zeros(TM_DIM, TM_DIM);
    for s in 0..PHYS_DIM {
        for sp in 0..PHYS_DIM {
            let w = weight(s, sp);
            if w == ZERO {
                continue;
            }
            for mu in 0..BOND_DIM {
                for nu in 0..BOND_DIM {
                    let x = g.get(s, mu, nu);
                    if x == ZERO {
                        continue;
                    }
                    for mup in 0..BOND_DIM {
                        for nup in 0..BOND_DIM {
                            let y = h.get(sp, mup, nup);
                            if y == ZERO {
                                continue;
                            }
                            f[(composite(mu, mup), composite(nu, nup))] += x * y.conj() * w;
                        }
                    }
                }
            }
        }
    }
    f
}

pub fn build_transfer(g: &GTensor) -> TransferMatrix {
    let entries = contract(g, g, |s, sp| if s == sp { C64::new(1.0, 0.0) } else { ZERO });
    TransferMatrix { entries, kind: TransferKind::Plain }
}

/// `F_O[(mu,mu'),(nu,nu')] = sum_{m,m'} A[m][mu][nu] conj(A[m'][mu'][nu']) <m'|O|m>`.
pub fn build_operator_transfer(g: &GTensor, op: &SpinOperator) -> TransferMatrix {
    let o = op.matrix();
    let entries = contract(g, g, |s, sp| o[(sp, s)]);
    TransferMatrix { entries, kind: TransferKind::Operator }
}

/// Overlap transfer matrix between two states of the family.
pub fn build_mixed_transfer(g: &GTensor, g2: &GTensor) -> TransferMatrix {
    let entries = contract(g, g2, |s, sp| if s == sp { C64::new(1.0, 0.0) } else { ZERO });
    TransferMatrix { entries, kind: TransferKind::Mixed }
}

/// Transfer matrix with an `s s'` block inserted: `A[s] (x) conj(A[s'])`.
pub(crate) fn elementary_transfer(g: &GTensor, s: usize, sp: usize) -> CMatrix {
    contract(g, g, |a, b| if a == s && b == sp { C64::new(1.0, 0.0) } else { ZERO })
}

/// Spectral data of the plain transfer matrix.
#[derive(Clone, Debug)]
pub struct TransferSpectrum {
    pub transfer: CMatrix,
    pub dominant: EigenPair,
    pub eigen: HermitianEigen,
}

impl TransferSpectrum {
    pub fn new(g: &GTensor) -> Result<Self> {
        let transfer = build_transfer(g).entries;
        let dominant = dominant_eigenpair(&transfer, DOMINANT_TOL, DOMINANT_MAX_SWEEPS)?;
        let eigen = eig_hermitian(&transfer)?;
        Ok(Self { transfer, dominant, eigen })
    }

    pub fn lambda1(&self) -> f64 {
        self.dominant.value
    }

    /// `<e1| M |e1> / lambda1`.
    pub fn dominant_expectation(&self, m: &CMatrix) -> C64 {
        let e1 = &self.dominant.vector;
        crate::numerics::inner(e1, &m.matvec(e1)) / self.dominant.value
    }
}
