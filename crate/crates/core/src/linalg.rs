//! Dense complex linear algebra and entropy kernels.
//!
//! All entropies are in bits (log base 2), so rates downstream come out in
//! bits / qubits / ebits per channel use. Matrices are dense `DMatrix<Complex64>`;
//! the dimensions in play are at most a few hundred.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

/// Hermiticity / trace tolerance for state validation.
pub const STATE_TOL: f64 = 1e-10;
/// Eigenvalues in [-EIG_CLAMP, 0) are treated as round-off and clamped to 0;
/// anything more negative is an invalid state.
pub const EIG_CLAMP: f64 = 1e-10;
/// Probability entries in [-PROB_CLAMP, 0) are clamped to 0.
pub const PROB_CLAMP: f64 = 1e-12;

// ---------------------------------------------------------------------------
// Probability vectors and scalar entropies
// ---------------------------------------------------------------------------

/// A discrete probability distribution: non-negative entries summing to 1.
#[derive(Debug, Clone)]
pub struct ProbabilityVector {
    entries: Vec<f64>,
}

impl ProbabilityVector {
    /// Validates and clamps the entries. Entries in [-1e-12, 0) are clamped to
    /// zero; anything more negative is an error, as is a sum off 1 by > 1e-10.
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        let mut clamped = entries;
        for p in clamped.iter_mut() {
            if *p < -PROB_CLAMP {
                return Err(Error::InvalidDistribution(format!(
                    "negative probability {p}"
                )));
            }
            if *p < 0.0 {
                *p = 0.0;
            }
        }
        let sum: f64 = clamped.iter().sum();
        if (sum - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {sum}, not 1"
            )));
        }
        Ok(Self { entries: clamped })
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            entries: vec![1.0 / n as f64; n],
        }
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Binary entropy H2(mu) in bits, with 0 log 0 = 0.
pub fn binary_entropy(mu: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&mu) {
        return Err(Error::domain(format!("binary entropy needs mu in [0,1], got {mu}")));
    }
    Ok(xlog2x_pair(mu))
}

fn xlog2x_pair(mu: f64) -> f64 {
    let mut h = 0.0;
    if mu > 0.0 {
        h -= mu * mu.log2();
    }
    if mu < 1.0 {
        h -= (1.0 - mu) * (1.0 - mu).log2();
    }
    h
}

/// Shannon entropy of a probability vector, in bits.
pub fn shannon_entropy(p: &ProbabilityVector) -> f64 {
    entropy_of_spectrum(p.entries())
}

/// -sum p log2 p over the given non-negative weights (zeros skipped).
/// Uses compensated summation so that very long spectra stay accurate.
pub fn entropy_of_spectrum(spectrum: &[f64]) -> f64 {
    let mut acc = NeumaierSum::new();
    for &p in spectrum {
        if p > 0.0 {
            acc.add(-p * p.log2());
        }
    }
    acc.value()
}

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

// ---------------------------------------------------------------------------
// Density operators
// ---------------------------------------------------------------------------

/// A density operator: complex Hermitian PSD matrix with unit trace.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    mat: CMat,
}

impl DensityOperator {
    /// Validates Hermiticity, trace and positivity before wrapping.
    pub fn new(mat: CMat) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::shape(format!(
                "density operator must be square, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let herm_dev = hermiticity_deviation(&mat);
        if herm_dev > STATE_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian: max |rho - rho^dag| entry {herm_dev:.3e}"
            )));
        }
        let tr = trace(&mat);
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace is {tr}, not 1")));
        }
        let min_eig = hermitian_eigenvalues(&mat)
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -EIG_CLAMP {
            return Err(Error::InvalidState(format!(
                "not positive semidefinite: min eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(Self { mat })
    }

    /// Wraps a matrix that is Hermitian/PSD/unit-trace by construction
    /// (e.g. a partial trace of a pure state). Checked in debug builds.
    pub(crate) fn new_unchecked(mat: CMat) -> Self {
        debug_assert!(hermiticity_deviation(&mat) <= 1e-8);
        debug_assert!((trace(&mat).re - 1.0).abs() <= 1e-8);
        Self { mat }
    }

    /// Pure state |psi><psi| from a unit-norm vector.
    pub fn from_pure(psi: &CVec) -> Result<Self> {
        let n2 = psi.norm_squared();
        if (n2 - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!(
                "state vector has norm^2 {n2}, not 1"
            )));
        }
        let mat = psi * psi.adjoint();
        Ok(Self { mat })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let mat = CMat::identity(dim, dim) * Complex64::new(1.0 / dim as f64, 0.0);
        Self { mat }
    }

    /// Diagonal state from a probability vector.
    pub fn from_diagonal(p: &ProbabilityVector) -> Self {
        let d = p.len();
        let mut mat = CMat::zeros(d, d);
        for (i, &pi) in p.entries().iter().enumerate() {
            mat[(i, i)] = Complex64::new(pi, 0.0);
        }
        Self { mat }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    /// Eigenvalue spectrum, clamped to [0, inf) within the round-off window.
    pub fn spectrum(&self) -> Result<Vec<f64>> {
        clamp_spectrum(hermitian_eigenvalues(&self.mat))
    }
}

/// Von Neumann entropy H(rho) = -Tr rho log2 rho, in bits.
pub fn von_neumann_entropy(rho: &DensityOperator) -> Result<f64> {
    Ok(entropy_of_spectrum(&rho.spectrum()?))
}

fn clamp_spectrum(mut eigs: Vec<f64>) -> Result<Vec<f64>> {
    for e in eigs.iter_mut() {
        if *e < -EIG_CLAMP {
            return Err(Error::InvalidState(format!(
                "eigenvalue {e:.3e} below the round-off window"
            )));
        }
        if *e < 0.0 {
            *e = 0.0;
        }
    }
    Ok(eigs)
}

/// Partial trace of `rho` over the subsystems NOT listed in `keep`.
///
/// `dims` are the subsystem dimensions in tensor order; their product must
/// equal `rho.dim()`. The kept subsystems appear in ascending index order.
pub fn partial_trace(
    rho: &DensityOperator,
    dims: &[usize],
    keep: &[usize],
) -> Result<DensityOperator> {
    let total: usize = dims.iter().product();
    if total != rho.dim() {
        return Err(Error::shape(format!(
            "subsystem dims {dims:?} give {total}, state has dim {}",
            rho.dim()
        )));
    }
    if keep.is_empty() || keep.iter().any(|&k| k >= dims.len()) {
        return Err(Error::shape(format!(
            "keep set {keep:?} invalid for {} subsystems",
            dims.len()
        )));
    }
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();

    let kept_dims: Vec<usize> = keep_sorted.iter().map(|&k| dims[k]).collect();
    let out_dim: usize = kept_dims.iter().product();
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep_sorted.contains(i)).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
    let traced_total: usize = traced_dims.iter().product();

    // strides of each subsystem in the full index
    let mut strides = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }

    let flat_index = |multi_keep: usize, multi_tr: usize| -> usize {
        let mut idx = 0;
        let mut mk = multi_keep;
        // kept subsystems in ascending order: decode row-major
        for (pos, &k) in keep_sorted.iter().enumerate().rev() {
            let d = dims[k];
            let digit = if pos == 0 { mk } else { mk % d };
            idx += digit * strides[k];
            mk /= d;
        }
        let mut mt = multi_tr;
        for (pos, &k) in traced.iter().enumerate().rev() {
            let d = dims[k];
            let digit = if pos == 0 { mt } else { mt % d };
            idx += digit * strides[k];
            mt /= d;
        }
        idx
    };

    let mut out = CMat::zeros(out_dim, out_dim);
    for r in 0..out_dim {
        for c in 0..out_dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for t in 0..traced_total {
                acc += rho.matrix()[(flat_index(r, t), flat_index(c, t))];
            }
            out[(r, c)] = acc;
        }
    }
    Ok(DensityOperator::new_unchecked(out))
}

// ---------------------------------------------------------------------------
// Matrix helpers
// ---------------------------------------------------------------------------

pub fn trace(m: &CMat) -> Complex64 {
    m.diagonal().iter().sum()
}

pub fn hermiticity_deviation(m: &CMat) -> f64 {
    let mut dev: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// Real eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    if m.nrows() == 1 {
        return vec![m[(0, 0)].re];
    }
    if m.nrows() == 2 {
        // closed form avoids most of the round-off of the iterative path
        let a = m[(0, 0)].re;
        let d = m[(1, 1)].re;
        let b2 = m[(0, 1)].norm_sqr();
        let mean = 0.5 * (a + d);
        let disc = (0.25 * (a - d) * (a - d) + b2).sqrt();
        return vec![mean - disc, mean + disc];
    }
    // fast path for (numerically) diagonal matrices, which block-diagonal
    // channel outputs produce in bulk
    let mut offdiag: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            offdiag = offdiag.max(m[(i, j)].norm());
            if offdiag > 1e-15 {
                break;
            }
        }
        if offdiag > 1e-15 {
            break;
        }
    }
    if offdiag <= 1e-15 {
        return m.diagonal().iter().map(|z| z.re).collect();
    }
    m.clone().symmetric_eigen().eigenvalues.as_slice().to_vec()
}

/// Trace norm ||m||_1 of a Hermitian matrix (sum of |eigenvalues|).
pub fn trace_norm_hermitian(m: &CMat) -> f64 {
    hermitian_eigenvalues(m).iter().map(|e| e.abs()).sum()
}

/// Kronecker product a (x) b.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = (a.nrows(), a.ncols());
    let (br, bc) = (b.nrows(), b.ncols());
    let mut out = CMat::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[(i, j)];
            if aij.norm_sqr() == 0.0 {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn binary_entropy_reference_points() {
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert_relative_eq!(binary_entropy(0.5).unwrap(), 1.0, epsilon = 1e-15);
        // exact closed form: H2(1/4) = 2 - (3/4) log2 3
        assert_relative_eq!(
            binary_entropy(0.25).unwrap(),
            2.0 - 0.75 * 3.0f64.log2(),
            epsilon = 1e-15
        );
        assert!((binary_entropy(0.25).unwrap() - 0.811278).abs() < 1e-6);
        assert!(binary_entropy(-0.1).is_err());
        assert!(binary_entropy(1.1).is_err());
    }

    #[test]
    fn shannon_entropy_reference_points() {
        let point = ProbabilityVector::new(vec![1.0, 0.0, 0.0]).unwrap();
        assert_eq!(shannon_entropy(&point), 0.0);
        let uniform = ProbabilityVector::uniform(8);
        assert_relative_eq!(shannon_entropy(&uniform), 3.0, epsilon = 1e-12);
        let p = ProbabilityVector::new(vec![1.0 / 3.0, 2.0 / 3.0]).unwrap();
        assert!((shannon_entropy(&p) - (3.0f64.log2() - 2.0 / 3.0)).abs() < 1e-12);
        assert!((shannon_entropy(&p) - 0.918296).abs() < 1e-6);
    }

    #[test]
    fn probability_vector_clamps_and_rejects() {
        let p = ProbabilityVector::new(vec![1.0 + 0.5e-12, -0.5e-12]).unwrap();
        assert_eq!(p.entries()[1], 0.0);
        assert!(ProbabilityVector::new(vec![1.1, -0.1]).is_err());
        assert!(ProbabilityVector::new(vec![0.6, 0.6]).is_err());
    }

    #[test]
    fn von_neumann_entropy_reference_points() {
        // pure state
        let psi = CVec::from_vec(vec![c(0.6, 0.0), c(0.0, 0.8)]);
        let rho = DensityOperator::from_pure(&psi).unwrap();
        assert!(von_neumann_entropy(&rho).unwrap().abs() < 1e-12);
        // maximally mixed qubit
        let mm = DensityOperator::maximally_mixed(2);
        assert_relative_eq!(von_neumann_entropy(&mm).unwrap(), 1.0, epsilon = 1e-12);
        // diag(0.9, 0.1) -> H2(0.1)
        let p = ProbabilityVector::new(vec![0.9, 0.1]).unwrap();
        let d = DensityOperator::from_diagonal(&p);
        let h = von_neumann_entropy(&d).unwrap();
        assert_relative_eq!(h, binary_entropy(0.1).unwrap(), epsilon = 1e-12);
        assert!((h - 0.469000).abs() < 1e-5);
    }

    #[test]
    fn density_operator_validation() {
        // non-Hermitian
        let m = CMat::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.3, 0.0), c(0.1, 0.0), c(0.5, 0.0)]);
        assert!(DensityOperator::new(m).is_err());
        // wrong trace
        let m = CMat::from_row_slice(2, 2, &[c(0.9, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.3, 0.0)]);
        assert!(DensityOperator::new(m).is_err());
        // negative eigenvalue
        let m = CMat::from_row_slice(2, 2, &[c(1.2, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.2, 0.0)]);
        assert!(DensityOperator::new(m).is_err());
        // valid
        let m = CMat::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(0.5, 0.0)]);
        assert!(DensityOperator::new(m).is_ok());
    }

    #[test]
    fn partial_trace_bell_state() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi = CVec::from_vec(vec![c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)]);
        let rho = DensityOperator::from_pure(&psi).unwrap();
        let a = partial_trace(&rho, &[2, 2], &[0]).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 0.5 } else { 0.0 };
                assert!((a.matrix()[(i, j)] - c(want, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn partial_trace_product_state() {
        let p1 = ProbabilityVector::new(vec![0.7, 0.3]).unwrap();
        let p2 = ProbabilityVector::new(vec![0.2, 0.8]).unwrap();
        let ra = DensityOperator::from_diagonal(&p1);
        let rb = DensityOperator::from_diagonal(&p2);
        let prod = DensityOperator::new_unchecked(kron(ra.matrix(), rb.matrix()));
        let back = partial_trace(&prod, &[2, 2], &[0]).unwrap();
        assert!((back.matrix() - ra.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-12);
    }

    #[test]
    fn partial_trace_schmidt_purification() {
        // |psi0> = sqrt(mu)|00> + sqrt(1-mu)|11>, trace out A -> diag(mu, 1-mu)
        let mu = 0.3f64;
        let psi = CVec::from_vec(vec![c(mu.sqrt(), 0.0), c(0.0, 0.0), c(0.0, 0.0), c((1.0 - mu).sqrt(), 0.0)]);
        let rho = DensityOperator::from_pure(&psi).unwrap();
        let aprime = partial_trace(&rho, &[2, 2], &[1]).unwrap();
        assert!((aprime.matrix()[(0, 0)].re - 0.3).abs() < 1e-12);
        assert!((aprime.matrix()[(1, 1)].re - 0.7).abs() < 1e-12);
        assert!(aprime.matrix()[(0, 1)].norm() < 1e-12);
    }

    #[test]
    fn partial_trace_shape_errors() {
        let rho = DensityOperator::maximally_mixed(4);
        assert!(partial_trace(&rho, &[2, 3], &[0]).is_err());
        assert!(partial_trace(&rho, &[2, 2], &[]).is_err());
        assert!(partial_trace(&rho, &[2, 2], &[5]).is_err());
    }

    #[test]
    fn compensated_sum_handles_long_series() {
        let mut acc = NeumaierSum::new();
        let n = 1_000_000;
        for _ in 0..n {
            acc.add(0.1);
        }
        assert_relative_eq!(acc.value(), n as f64 * 0.1, epsilon = 1e-9);
    }

    // random Haar-ish vector for property tests
    fn rand_unit_vec(rng: &mut impl rand::Rng, d: usize) -> CVec {
        let mut v = CVec::zeros(d);
        for i in 0..d {
            let (g1, g2) = gauss_pair(rng);
            v[i] = c(g1, g2);
        }
        let n = v.norm();
        v / c(n, 0.0)
    }

    fn gauss_pair(rng: &mut impl rand::Rng) -> (f64, f64) {
        let u1: f64 = 1.0 - rng.random::<f64>();
        let u2: f64 = rng.random();
        let r = (-2.0 * u1.ln()).sqrt();
        let t = 2.0 * std::f64::consts::PI * u2;
        (r * t.cos(), r * t.sin())
    }

    proptest! {
        #[test]
        fn prop_reduced_states_share_entropy(seed in 0u64..500) {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
            let (da, db) = (2usize + (seed % 2) as usize, 2usize + (seed % 3) as usize);
            let psi = rand_unit_vec(&mut rng, da * db);
            let rho = DensityOperator::from_pure(&psi).unwrap();
            let ra = partial_trace(&rho, &[da, db], &[0]).unwrap();
            let rb = partial_trace(&rho, &[da, db], &[1]).unwrap();
            // Schmidt symmetry
            let (ha, hb) = (von_neumann_entropy(&ra).unwrap(), von_neumann_entropy(&rb).unwrap());
            prop_assert!((ha - hb).abs() < 1e-9);
            // reduced states satisfy all invariants
            prop_assert!(DensityOperator::new(ra.matrix().clone()).is_ok());
        }

        #[test]
        fn prop_entropy_unitary_invariant(seed in 0u64..500) {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
            let d = 3usize;
            // Haar-ish unitary from QR of a Gaussian matrix
            let mut g = CMat::zeros(d, d);
            for i in 0..d {
                for j in 0..d {
                    let (x, y) = gauss_pair(&mut rng);
                    g[(i, j)] = c(x, y);
                }
            }
            let qr = g.qr();
            let u = qr.q();
            let p = rand_unit_vec(&mut rng, d * d);
            let rho = partial_trace(&DensityOperator::from_pure(&p).unwrap(), &[d, d], &[0]).unwrap();
            let rotated = DensityOperator::new_unchecked(&u * rho.matrix() * u.adjoint());
            let h0 = von_neumann_entropy(&rho).unwrap();
            let h1 = von_neumann_entropy(&rotated).unwrap();
            prop_assert!((h0 - h1).abs() < 1e-9);
        }

        #[test]
        fn prop_shannon_bounded_by_log_dim(seed in 0u64..200) {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
            let d = 2 + (seed % 6) as usize;
            let raw: Vec<f64> = (0..d).map(|_| -(1.0f64 - rng.random::<f64>()).ln()).collect();
            let s: f64 = raw.iter().sum();
            let p = ProbabilityVector::new(raw.iter().map(|x| x / s).collect()).unwrap();
            let h = shannon_entropy(&p);
            prop_assert!(h <= (d as f64).log2() + 1e-9);
        }
    }
}
