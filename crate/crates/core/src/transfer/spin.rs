//! Spin-2 single-site operators in the ascending `m` basis.

use std::collections::BTreeSet;

use crate::mpstate::{magnetic_number, phys_index, PHYS_DIM};
use crate::numerics::{CMatrix, C64, ZERO};

/// A 5x5 operator acting on one spin-2 site.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinOperator(CMatrix);

impl SpinOperator {
    pub fn from_matrix(m: CMatrix) -> Self {
        assert_eq!((m.rows(), m.cols()), (PHYS_DIM, PHYS_DIM), "spin-2 operators are 5x5");
        Self(m)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn identity() -> Self {
        Self(CMatrix::identity(PHYS_DIM))
    }

    pub fn sz() -> Self {
        let d: Vec<f64> = (0..PHYS_DIM).map(|k| magnetic_number(k) as f64).collect();
        Self(CMatrix::from_real_diag(&d))
    }

    /// Raising operator, `S+ |m> = sqrt(6 - m(m+1)) |m+1>`.
    pub fn s_plus() -> Self {
        let mut m = CMatrix::zeros(PHYS_DIM, PHYS_DIM);
        for k in 0..PHYS_DIM - 1 {
            let mq = magnetic_number(k);
            m[(phys_index(mq + 1), k)] = C64::new(((6 - mq * (mq + 1)) as f64).sqrt(), 0.0);
        }
        Self(m)
    }

    pub fn s_minus() -> Self {
        Self(Self::s_plus().0.adjoint())
    }

    pub fn sx() -> Self {
        Self((&Self::s_plus().0 + &Self::s_minus().0).scale(C64::new(0.5, 0.0)))
    }

    pub fn sy() -> Self {
        Self((&Self::s_plus().0 - &Self::s_minus().0).scale(C64::new(0.0, -0.5)))
    }

    /// `exp(i theta Sz) = diag(e^{-2i theta}, .., e^{2i theta})`.
    pub fn phase(theta: f64) -> Self {
        let d: Vec<C64> =
            (0..PHYS_DIM).map(|k| C64::from_polar(1.0, theta * magnetic_number(k) as f64)).collect();
        Self(CMatrix::from_diag(&d))
    }

    /// Operator product `self * other` (other acts first).
    pub fn then(&self, other: &Self) -> Self {
        Self(self.0.matmul(&other.0))
    }

    /// Changes of magnetic number `m_out - m_in` this operator can produce.
    pub fn delta_m(&self) -> BTreeSet<i32> {
        let mut out = BTreeSet::new();
        for i in 0..PHYS_DIM {
            for j in 0..PHYS_DIM {
                if self.0[(i, j)] != ZERO {
                    out.insert(magnetic_number(i) - magnetic_number(j));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spin_algebra() {
        let (sx, sy, sz) = (SpinOperator::sx(), SpinOperator::sy(), SpinOperator::sz());
        for op in [&sx, &sy, &sz] {
            assert!(op.matrix().is_hermitian(1e-14));
        }
        let comm = &sx.then(&sy).0 - &sy.then(&sx).0;
        let want = sz.matrix().scale(C64::new(0.0, 1.0));
        assert!(comm.max_abs_diff(&want) < 1e-12);

        let casimir = &(&sx.then(&sx).0 + &sy.then(&sy).0) + &sz.then(&sz).0;
        assert!(casimir.max_abs_diff(&CMatrix::identity(5).scale(C64::new(6.0, 0.0))) < 1e-12);
    }

    #[test]
    fn ladder_elements() {
        let sp = SpinOperator::s_plus();
        // <1|S+|0> = sqrt(6)
        assert!((sp.matrix()[(phys_index(1), phys_index(0))].re - 6f64.sqrt()).abs() < 1e-15);
        // <2|S+|1> = 2
        assert!((sp.matrix()[(phys_index(2), phys_index(1))].re - 2.0).abs() < 1e-15);
    }

    #[test]
    fn phase_at_half_pi() {
        let p = SpinOperator::phase(std::f64::consts::FRAC_PI_2);
        let d = p.matrix().diag();
        assert!((d[phys_index(2)] - C64::new(-1.0, 0.0)).norm() < 1e-15);
        assert!((d[phys_index(-1)] - C64::new(0.0, -1.0)).norm() < 1e-15);
        assert_eq!(d[phys_index(0)], C64::new(1.0, 0.0));
    }

    #[test]
    fn magnetic_number_changes() {
        assert_eq!(SpinOperator::sx().delta_m().into_iter().collect::<Vec<_>>(), vec![-1, 1]);
        assert_eq!(SpinOperator::sz().delta_m().into_iter().collect::<Vec<_>>(), vec![0]);
        assert_eq!(SpinOperator::s_plus().delta_m().into_iter().collect::<Vec<_>>(), vec![1]);
    }
}
