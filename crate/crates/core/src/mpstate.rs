//! The spin-2 site tensor and exact finite periodic chains built from it.
//!
//! Physical states are ordered by ascending magnetic quantum number,
//! `|-2>, |-1>, |0>, |+1>, |+2>`, so physical index `k` carries `m = k - 2`.
//! Bond indices run over `0..3`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{CMatrix, C64, ZERO};

pub const PHYS_DIM: usize = 5;
pub const BOND_DIM: usize = 3;
/// Default cap on exact chain length (5^8 = 390625 amplitudes).
pub const DEFAULT_L_MAX: usize = 8;
/// Hard cap, only reachable with an explicit opt-in.
pub const BIG_L_MAX: usize = 10;

/// Physical index of magnetic quantum number `m` in `-2..=2`.
pub const fn phys_index(m: i32) -> usize {
    (m + 2) as usize
}

/// Magnetic quantum number of physical index `k`.
pub const fn magnetic_number(k: usize) -> i32 {
    k as i32 - 2
}

/// A point `(a, x, gamma)` of the three-parameter ground-state family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub a: f64,
    pub x: f64,
    pub gamma: f64,
}

impl ModelParams {
    pub fn new(a: f64, x: f64, gamma: f64) -> Result<Self> {
        if !(a.is_finite() && x.is_finite() && gamma.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "parameters must be finite, got a={a}, x={x}, gamma={gamma}"
            )));
        }
        Ok(Self { a, x, gamma })
    }

    pub fn with_a(self, a: f64) -> Self {
        Self { a, ..self }
    }
}

/// Site tensor `A[m][mu][nu]`: one 3x3 bond matrix per physical state.
#[derive(Clone, Debug, PartialEq)]
pub struct GTensor {
    mats: [[[C64; BOND_DIM]; BOND_DIM]; PHYS_DIM],
    params: ModelParams,
}

impl GTensor {
    pub fn params(&self) -> ModelParams {
        self.params
    }

    /// Amplitude for physical index `k` and bond indices `(mu, nu)`.
    pub fn get(&self, k: usize, mu: usize, nu: usize) -> C64 {
        self.mats[k][mu][nu]
    }

    /// Amplitude addressed by magnetic number.
    pub fn at(&self, m: i32, mu: usize, nu: usize) -> C64 {
        self.mats[phys_index(m)][mu][nu]
    }

    pub fn matrix(&self, k: usize) -> CMatrix {
        CMatrix::from_fn(BOND_DIM, BOND_DIM, |i, j| self.mats[k][i][j])
    }

    pub fn is_real(&self) -> bool {
        self.mats.iter().flatten().flatten().all(|z| z.im == 0.0)
    }

    /// Number of entries that are not exactly zero.
    pub fn nonzero_count(&self) -> usize {
        self.mats.iter().flatten().flatten().filter(|z| **z != ZERO).count()
    }

    pub(crate) fn raw(&self) -> &[[[C64; BOND_DIM]; BOND_DIM]; PHYS_DIM] {
        &self.mats
    }
}

/// `sqrt(x)` with the branch `i sqrt(|x|)` for negative `x`.
fn signed_sqrt(x: f64) -> C64 {
    if x < 0.0 {
        C64::new(0.0, (-x).sqrt())
    } else {
        C64::new(x.sqrt(), 0.0)
    }
}

/// Builds the site tensor
///
/// ```text
///     | |0>        sqrt(x)|+1>   a|+2>      |
/// g = | sqrt(x)|-1>  gamma|0>    sqrt(x)|+1> |
///     | a|-2>      sqrt(x)|-1>   |0>        |
/// ```
pub fn build_g(params: ModelParams) -> GTensor {
    let mut mats = [[[ZERO; BOND_DIM]; BOND_DIM]; PHYS_DIM];
    let r = signed_sqrt(params.x);
    let a = C64::new(params.a, 0.0);

    let zero = phys_index(0);
    mats[zero][0][0] = C64::new(1.0, 0.0);
    mats[zero][1][1] = C64::new(params.gamma, 0.0);
    mats[zero][2][2] = C64::new(1.0, 0.0);

    mats[phys_index(1)][0][1] = r;
    mats[phys_index(1)][1][2] = r;
    mats[phys_index(-1)][1][0] = r;
    mats[phys_index(-1)][2][1] = r;

    mats[phys_index(2)][0][2] = a;
    mats[phys_index(-2)][2][0] = a;

    GTensor { mats, params }
}

/// Maps the `x < 0` tensor onto the real tensor at `|x|`.
///
/// Applies the local phase `|±1> -> i|±1>` followed by the bond gauge
/// `S g S^-1` with `S = diag(1, -1, 1)`. Both are invisible to physical
/// observables (the phase is a site-local unitary commuting with `Sz`).
pub fn realify_gauge(g: &GTensor) -> Result<GTensor> {
    let p = g.params();
    if !(p.x < 0.0) {
        return Err(Error::NotNegativeX(p.x));
    }
    let sign = [1.0, -1.0, 1.0];
    let mut mats = *g.raw();
    for (k, mat) in mats.iter_mut().enumerate() {
        let phase = if magnetic_number(k).abs() == 1 { C64::new(0.0, 1.0) } else { C64::new(1.0, 0.0) };
        for (mu, row) in mat.iter_mut().enumerate() {
            for (nu, z) in row.iter_mut().enumerate() {
                *z *= phase * sign[mu] * sign[nu];
                // exact real arithmetic: i * (i r) lands on the real axis
                if z.im.abs() <= f64::EPSILON * z.re.abs() {
                    z.im = 0.0;
                }
            }
        }
    }
    Ok(GTensor { mats, params: ModelParams { x: -p.x, ..p } })
}

/// Amplitudes of a periodic chain, indexed by `(s_1, .., s_L)` in base 5
/// with `s_1` the most significant digit.
#[derive(Clone, Debug)]
pub struct StateVector {
    len: usize,
    amps: Vec<C64>,
}

impl StateVector {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm_sqr().sqrt();
        if n == 0.0 {
            return self.clone();
        }
        Self { len: self.len, amps: self.amps.iter().map(|z| z / n).collect() }
    }

    /// Flat index of a configuration given as physical indices.
    pub fn index_of(&self, config: &[usize]) -> usize {
        assert_eq!(config.len(), self.len);
        config.iter().fold(0, |acc, &k| acc * PHYS_DIM + k)
    }

    pub fn amplitude(&self, config: &[usize]) -> C64 {
        self.amps[self.index_of(config)]
    }

    /// Stride of site `i` (0-based) in the flat index.
    pub(crate) fn stride(&self, site: usize) -> usize {
        PHYS_DIM.pow((self.len - 1 - site) as u32)
    }

    /// Applies a single-site operator `op` (5x5) at 0-based `site`.
    pub fn apply_site(&self, op: &CMatrix, site: usize) -> Self {
        assert!(site < self.len);
        let stride = self.stride(site);
        let mut out = vec![ZERO; self.amps.len()];
        for (idx, slot) in out.iter_mut().enumerate() {
            let k = (idx / stride) % PHYS_DIM;
            let base = idx - k * stride;
            *slot = (0..PHYS_DIM).map(|kp| op[(k, kp)] * self.amps[base + kp * stride]).sum();
        }
        Self { len: self.len, amps: out }
    }

    pub fn inner(&self, other: &Self) -> C64 {
        assert_eq!(self.len, other.len);
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }
}

pub fn build_finite_state(g: &GTensor, len: usize) -> Result<StateVector> {
    build_finite_state_capped(g, len, DEFAULT_L_MAX)
}

/// `amplitude(s_1..s_L) = tr(A[s_1] A[s_2] ... A[s_L])`, with an explicit length cap.
pub fn build_finite_state_capped(g: &GTensor, len: usize, l_max: usize) -> Result<StateVector> {
    if len < 2 {
        return Err(Error::ChainTooShort(len));
    }
    if len > l_max.min(BIG_L_MAX) {
        return Err(Error::ChainTooLong { len, max: l_max.min(BIG_L_MAX) });
    }
    let mut amps = vec![ZERO; PHYS_DIM.pow(len as u32)];
    let mut prefix = vec![[[ZERO; BOND_DIM]; BOND_DIM]; len + 1];
    for (i, row) in prefix[0].iter_mut().enumerate() {
        row[i] = C64::new(1.0, 0.0);
    }
    fill_amplitudes(g.raw(), 0, 0, &mut prefix, &mut amps);
    Ok(StateVector { len, amps })
}

type Bond = [[C64; BOND_DIM]; BOND_DIM];

fn fill_amplitudes(
    mats: &[Bond; PHYS_DIM],
    depth: usize,
    index: usize,
    prefix: &mut [Bond],
    amps: &mut [C64],
) {
    let len = prefix.len() - 1;
    if depth == len {
        amps[index] = (0..BOND_DIM).map(|i| prefix[len][i][i]).sum();
        return;
    }
    for (k, mat) in mats.iter().enumerate() {
        let prev = prefix[depth];
        let mut next = [[ZERO; BOND_DIM]; BOND_DIM];
        let mut any = false;
        for i in 0..BOND_DIM {
            for l in 0..BOND_DIM {
                let p = prev[i][l];
                if p == ZERO {
                    continue;
                }
                for j in 0..BOND_DIM {
                    if mat[l][j] != ZERO {
                        next[i][j] += p * mat[l][j];
                        any = true;
                    }
                }
            }
        }
        let child = index * PHYS_DIM + k;
        if !any {
            // whole subtree is zero; amps already zero-initialized
            continue;
        }
        prefix[depth + 1] = next;
        fill_amplitudes(mats, depth + 1, child, prefix, amps);
    }
}

/// One-site reduced density matrix of a normalized finite chain at 1-based `site`.
///
/// `rho[s][s'] = sum_rest psi(.., s, ..) conj(psi(.., s', ..))`.
pub fn one_site_rdm_finite(psi: &StateVector, site: usize) -> Result<CMatrix> {
    if site == 0 || site > psi.len() {
        return Err(Error::SiteOutOfRange { site, len: psi.len() });
    }
    let stride = psi.stride(site - 1);
    let amps = psi.amplitudes();
    let mut rho = CMatrix::zeros(PHYS_DIM, PHYS_DIM);
    for (idx, _) in amps.iter().enumerate() {
        if (idx / stride) % PHYS_DIM != 0 {
            continue;
        }
        for s in 0..PHYS_DIM {
            let zs = amps[idx + s * stride];
            if zs == ZERO {
                continue;
            }
            for sp in 0..PHYS_DIM {
                rho[(s, sp)] += zs * amps[idx + sp * stride].conj();
            }
        }
    }
    Ok(rho)
}
