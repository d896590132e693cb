//! Dense complex operators over a composite Hilbert space.
//!
//! A [`QMatrix`] is a square matrix together with the ordered list of
//! subsystem dimensions whose product equals its side length. All builders
//! in this crate use the conventions
//!
//! * qubit basis index 0 = excited, 1 = ground, so `sigma_z = diag(+1, -1)`
//!   and the lowering operator has its single entry at (1, 0);
//! * Fock basis index = photon number.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{CoreError, Result};
use crate::lapack;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Tolerance for trace-one checks on density matrices.
pub const TRACE_TOL: f64 = 1e-10;
/// Tolerance for Hermiticity checks.
pub const HERM_TOL: f64 = 1e-10;
/// Tolerance on the minimum eigenvalue of a density matrix.
pub const POSITIVITY_TOL: f64 = 1e-8;

/// Dense complex matrix carrying its Hilbert-space factorization.
#[derive(Debug, Clone, PartialEq)]
pub struct QMatrix {
    pub data: Array2<C64>,
    pub dims: Vec<usize>,
}

impl QMatrix {
    pub fn new(data: Array2<C64>, dims: Vec<usize>) -> Result<Self> {
        let side: usize = dims.iter().product();
        if data.nrows() != side || data.ncols() != side {
            return Err(CoreError::DimMismatch(format!(
                "matrix is {}x{} but dims {:?} require side {}",
                data.nrows(),
                data.ncols(),
                dims,
                side
            )));
        }
        Ok(Self { data, dims })
    }

    pub fn zeros(dims: Vec<usize>) -> Self {
        let side: usize = dims.iter().product();
        Self { data: Array2::zeros((side, side)), dims }
    }

    pub fn identity(dims: Vec<usize>) -> Self {
        let side: usize = dims.iter().product();
        Self { data: Array2::eye(side), dims }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn dagger(&self) -> Self {
        Self { data: self.data.t().mapv(|z| z.conj()), dims: self.dims.clone() }
    }

    pub fn trace(&self) -> C64 {
        self.data.diag().sum()
    }

    /// Matrix product; the factorization is taken from `self`.
    pub fn matmul(&self, other: &QMatrix) -> QMatrix {
        QMatrix { data: lapack::matmul(&self.data, &other.data), dims: self.dims.clone() }
    }

    pub fn scale(&self, z: C64) -> QMatrix {
        QMatrix { data: self.data.mapv(|x| x * z), dims: self.dims.clone() }
    }

    pub fn add(&self, other: &QMatrix) -> QMatrix {
        QMatrix { data: &self.data + &other.data, dims: self.dims.clone() }
    }

    pub fn sub(&self, other: &QMatrix) -> QMatrix {
        QMatrix { data: &self.data - &other.data, dims: self.dims.clone() }
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for i in 0..self.dim() {
            for j in i..self.dim() {
                dev = dev.max((self.data[[i, j]] - self.data[[j, i]].conj()).norm());
            }
        }
        dev
    }

    pub fn check_hermitian(&self, tol: f64) -> Result<()> {
        let dev = self.hermiticity_deviation();
        if dev > tol {
            return Err(CoreError::NotHermitian { dev, tol });
        }
        Ok(())
    }

    /// Validate trace, Hermiticity, and positivity of a density matrix.
    pub fn check_density_matrix(&self) -> Result<()> {
        let tr = self.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(CoreError::InvalidDensityMatrix(format!("trace = {tr}")));
        }
        let dev = self.hermiticity_deviation();
        if dev > HERM_TOL {
            return Err(CoreError::InvalidDensityMatrix(format!(
                "Hermiticity deviation {dev:.3e}"
            )));
        }
        let (w, _) = lapack::eigh(&self.data)?;
        if w[0] < -POSITIVITY_TOL {
            return Err(CoreError::InvalidDensityMatrix(format!(
                "minimum eigenvalue {:.3e}",
                w[0]
            )));
        }
        Ok(())
    }

    /// Symmetrize and renormalize to trace one.
    pub fn hermitized_normalized(&self) -> QMatrix {
        let h = (&self.data + &self.data.t().mapv(|z| z.conj())).mapv(|z| z * 0.5);
        let tr = h.diag().sum().re;
        QMatrix { data: h.mapv(|z| z / tr), dims: self.dims.clone() }
    }

    /// Expectation value Tr(op rho) with `self` as the state.
    pub fn expect(&self, op: &QMatrix) -> C64 {
        let mut acc = ZERO;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                acc += op.data[[i, j]] * self.data[[j, i]];
            }
        }
        acc
    }
}

/// Kronecker product; dims concatenate.
pub fn kron(a: &QMatrix, b: &QMatrix) -> QMatrix {
    let mut dims = a.dims.clone();
    dims.extend_from_slice(&b.dims);
    QMatrix { data: kron_raw(&a.data, &b.data), dims }
}

/// Raw Kronecker product on arrays (no dims bookkeeping).
pub fn kron_raw(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    let mut out = Array2::zeros((ra * rb, ca * cb));
    for i in 0..ra {
        for j in 0..ca {
            let aij = a[[i, j]];
            if aij == ZERO {
                continue;
            }
            for k in 0..rb {
                for l in 0..cb {
                    out[[i * rb + k, j * cb + l]] = aij * b[[k, l]];
                }
            }
        }
    }
    out
}

/// Embed a single-subsystem operator at position `which` of a composite space.
pub fn embed(op: &Array2<C64>, which: usize, dims: &[usize]) -> QMatrix {
    assert!(which < dims.len(), "subsystem index out of range");
    assert_eq!(op.nrows(), dims[which], "operator does not match subsystem dimension");
    let mut acc = Array2::from_elem((1, 1), ONE);
    for (i, &d) in dims.iter().enumerate() {
        let factor = if i == which { op.clone() } else { Array2::eye(d) };
        acc = kron_raw(&acc, &factor);
    }
    QMatrix { data: acc, dims: dims.to_vec() }
}

/// Reduced density matrix over the kept subsystems (in `keep` order).
pub fn partial_trace(rho: &QMatrix, keep: &[usize]) -> Result<QMatrix> {
    let n = rho.dims.len();
    for &k in keep {
        if k >= n {
            return Err(CoreError::DimMismatch(format!(
                "keep index {k} out of range for {n} subsystems"
            )));
        }
    }
    let traced: Vec<usize> = (0..n).filter(|i| !keep.contains(i)).collect();
    let keep_dims: Vec<usize> = keep.iter().map(|&i| rho.dims[i]).collect();
    let dk: usize = keep_dims.iter().product();
    let dt: usize = traced.iter().map(|&i| rho.dims[i]).product();

    // strides of each subsystem in the composite (row-major) index
    let mut strides = vec![1usize; n];
    for i in (0..n.saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * rho.dims[i + 1];
    }

    let unrank = |mut r: usize, dims: &[usize]| -> Vec<usize> {
        let mut idx = vec![0usize; dims.len()];
        for i in (0..dims.len()).rev() {
            idx[i] = r % dims[i];
            r /= dims[i];
        }
        idx
    };
    let traced_dims: Vec<usize> = traced.iter().map(|&i| rho.dims[i]).collect();
    let mut out = Array2::zeros((dk, dk));
    for kr in 0..dk {
        let kr_idx = unrank(kr, &keep_dims);
        for kc in 0..dk {
            let kc_idx = unrank(kc, &keep_dims);
            let mut acc = ZERO;
            for t in 0..dt {
                let t_idx = unrank(t, &traced_dims);
                let mut row = 0usize;
                let mut col = 0usize;
                for (pos, &sub) in keep.iter().enumerate() {
                    row += kr_idx[pos] * strides[sub];
                    col += kc_idx[pos] * strides[sub];
                }
                for (pos, &sub) in traced.iter().enumerate() {
                    row += t_idx[pos] * strides[sub];
                    col += t_idx[pos] * strides[sub];
                }
                acc += rho.data[[row, col]];
            }
            out[[kr, kc]] = acc;
        }
    }
    Ok(QMatrix { data: out, dims: keep_dims })
}

// --- elementary operators ---

/// sigma_z = diag(+1, -1) in the (excited, ground) ordering.
pub fn sigma_z() -> Array2<C64> {
    ndarray::array![[ONE, ZERO], [ZERO, -ONE]]
}

pub fn sigma_x() -> Array2<C64> {
    ndarray::array![[ZERO, ONE], [ONE, ZERO]]
}

pub fn sigma_y() -> Array2<C64> {
    ndarray::array![[ZERO, C64::new(0.0, -1.0)], [C64::new(0.0, 1.0), ZERO]]
}

/// Lowering operator |g><e|.
pub fn sigma_minus() -> Array2<C64> {
    ndarray::array![[ZERO, ZERO], [ONE, ZERO]]
}

/// Fock-space annihilation operator truncated at `n` levels.
pub fn destroy(n: usize) -> Array2<C64> {
    let mut a = Array2::zeros((n, n));
    for k in 1..n {
        a[[k - 1, k]] = C64::new((k as f64).sqrt(), 0.0);
    }
    a
}

/// Basis column vector.
pub fn basis(dim: usize, idx: usize) -> Array1<C64> {
    let mut v = Array1::zeros(dim);
    v[idx] = ONE;
    v
}

/// |psi><psi| as a QMatrix.
pub fn ket_to_dm(psi: &Array1<C64>, dims: Vec<usize>) -> QMatrix {
    let d = psi.len();
    let mut out = Array2::zeros((d, d));
    for i in 0..d {
        for j in 0..d {
            out[[i, j]] = psi[i] * psi[j].conj();
        }
    }
    QMatrix { data: out, dims }
}

/// Trace distance (1/2)||a - b||_1 between two Hermitian matrices.
pub fn trace_distance(a: &QMatrix, b: &QMatrix) -> Result<f64> {
    let diff = a.sub(b);
    let (w, _) = lapack::eigh(&diff.data)?;
    Ok(0.5 * w.iter().map(|x| x.abs()).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn qm2(data: Array2<C64>) -> QMatrix {
        QMatrix::new(data, vec![2]).unwrap()
    }

    #[test]
    fn kron_identities() {
        let i2 = QMatrix::identity(vec![2]);
        let i4 = kron(&i2, &i2);
        assert_eq!(i4.dims, vec![2, 2]);
        assert_eq!(i4.data, Array2::eye(4));
    }

    #[test]
    fn kron_sigma_z_eigenvector() {
        // |e g> = basis index 0*2 + 1 = 1; sigma_z (x) I has eigenvalue +1 there
        let szq = qm2(sigma_z());
        let i2 = QMatrix::identity(vec![2]);
        let op = kron(&szq, &i2);
        let eg = basis(4, 1);
        let out = op.data.dot(&eg);
        for i in 0..4 {
            assert!((out[i] - eg[i]).norm() < 1e-15);
        }
    }

    #[test]
    fn kron_sigma_x_squared_is_identity() {
        let sxq = qm2(sigma_x());
        let xx = kron(&sxq, &sxq);
        let sq = xx.matmul(&xx);
        // direct 4x4 hand multiplication: (sx(x)sx)^2 = I4
        assert!(sq
            .data
            .iter()
            .zip(Array2::<C64>::eye(4).iter())
            .all(|(a, b)| (a - b).norm() < 1e-14));
    }

    #[test]
    fn partial_trace_product_state() {
        let rho_a = qm2(ndarray::array![
            [c(0.7, 0.0), c(0.1, 0.2)],
            [c(0.1, -0.2), c(0.3, 0.0)]
        ]);
        let rho_b = qm2(ndarray::array![
            [c(0.4, 0.0), c(0.0, -0.1)],
            [c(0.0, 0.1), c(0.6, 0.0)]
        ]);
        let joint = kron(&rho_a, &rho_b);
        let red = partial_trace(&joint, &[0]).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((red.data[[i, j]] - rho_a.data[[i, j]]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn partial_trace_bell_state() {
        // (|eg> - |ge>)/sqrt(2) -> reduced = I/2
        let mut psi = Array1::zeros(4);
        psi[1] = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        psi[2] = c(-std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let rho = ket_to_dm(&psi, vec![2, 2]);
        let red = partial_trace(&rho, &[0]).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 0.5 } else { 0.0 };
                assert!((red.data[[i, j]] - c(want, 0.0)).norm() < 1e-14);
            }
        }
    }

    /// Brute-force oracle: loop over full composite index tuples, summing the
    /// entries whose traced indices coincide (independent of the stride
    /// arithmetic in `partial_trace`).
    fn ptrace_oracle(rho: &QMatrix, keep: &[usize]) -> Array2<C64> {
        let dims = &rho.dims;
        let n = dims.len();
        let traced: Vec<usize> = (0..n).filter(|i| !keep.contains(i)).collect();
        let keep_dims: Vec<usize> = keep.iter().map(|&i| dims[i]).collect();
        let dk: usize = keep_dims.iter().product();
        let full: usize = dims.iter().product();
        let to_tuple = |mut x: usize| {
            let mut t = vec![0usize; n];
            for i in (0..n).rev() {
                t[i] = x % dims[i];
                x /= dims[i];
            }
            t
        };
        let mut out = Array2::zeros((dk, dk));
        for r in 0..full {
            for cidx in 0..full {
                let tr = to_tuple(r);
                let tc = to_tuple(cidx);
                if traced.iter().any(|&t| tr[t] != tc[t]) {
                    continue;
                }
                let mut kr = 0;
                let mut kc = 0;
                for &kidx in keep {
                    kr = kr * dims[kidx] + tr[kidx];
                    kc = kc * dims[kidx] + tc[kidx];
                }
                out[[kr, kc]] += rho.data[[r, cidx]];
            }
        }
        out
    }

    #[test]
    fn partial_trace_three_factor_random() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
        let dims = vec![2usize, 3, 2];
        let d: usize = dims.iter().product();
        let mut m = Array2::<C64>::zeros((d, d));
        for i in 0..d {
            for j in 0..d {
                m[[i, j]] = c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
            }
        }
        // make it a density matrix: m m^dag / tr
        let mm = lapack::matmul(&m, &m.t().mapv(|z| z.conj()).to_owned());
        let tr = mm.diag().sum();
        let rho = QMatrix::new(mm.mapv(|z| z / tr), dims).unwrap();
        let keep = [0usize, 2];
        let got = partial_trace(&rho, &keep).unwrap();
        let want = ptrace_oracle(&rho, &keep);
        for (a, b) in got.data.iter().zip(want.iter()) {
            assert!((a - b).norm() < 1e-12);
        }
        // trace preserved
        assert!((got.trace() - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn partial_trace_invalid_index() {
        let rho = QMatrix::identity(vec![2, 2]).scale(c(0.25, 0.0));
        assert!(partial_trace(&rho, &[3]).is_err());
    }

    proptest! {
        #[test]
        fn kron_associativity(seed in 0u64..500) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
            // dyadic-rational entries keep every product and sum exact, so the
            // two association orders agree bit for bit
            let mut mk = |d: usize| {
                let mut m = Array2::<C64>::zeros((d, d));
                for i in 0..d { for j in 0..d {
                    let re = rng.gen_range(-8i32..=8) as f64 / 16.0;
                    let im = rng.gen_range(-8i32..=8) as f64 / 16.0;
                    m[[i,j]] = c(re, im);
                }}
                QMatrix::new(m, vec![d]).unwrap()
            };
            let a = mk(2); let b = mk(3); let cq = mk(2);
            let left = kron(&kron(&a, &b), &cq);
            let right = kron(&a, &kron(&b, &cq));
            prop_assert_eq!(left.data, right.data);
            prop_assert_eq!(left.dims, right.dims);
        }

        #[test]
        fn ptrace_of_kron_recovers_left_factor(seed in 0u64..200) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed ^ 0xabcdef);
            let mut mk_dm = |d: usize| {
                let mut m = Array2::<C64>::zeros((d, d));
                for i in 0..d { for j in 0..d {
                    m[[i,j]] = c(rng.gen::<f64>()-0.5, rng.gen::<f64>()-0.5);
                }}
                let mm = lapack::matmul(&m, &m.t().mapv(|z| z.conj()).to_owned());
                let tr = mm.diag().sum();
                QMatrix::new(mm.mapv(|z| z / tr), vec![d]).unwrap()
            };
            let a = mk_dm(2); let b = mk_dm(3);
            let joint = kron(&a, &b);
            let red = partial_trace(&joint, &[0]).unwrap();
            for i in 0..2 { for j in 0..2 {
                prop_assert!((red.data[[i,j]] - a.data[[i,j]]).norm() < 1e-12);
            }}
        }
    }
}
