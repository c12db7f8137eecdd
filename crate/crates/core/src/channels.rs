//! The three channel families (qubit dephasing, 1->N cloning, Unruh) as
//! Kraus/isometry objects, plus channel, complement, and degrading-map actions.
//!
//! The cloning channel is represented on the (N+1)-dimensional symmetric basis
//! {|j> = |N-j, j>} rather than on 2^N qubits. The Unruh channel is an explicit
//! weighted direct sum of cloning blocks and is never materialized as one big
//! matrix: block l carries weight p_l(z) = (1-z)^3 z^(l-2) (l-1)l/2 and holds a
//! 1->(l-1) cloning channel.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    hermiticity_deviation, kron, partial_trace, trace, trace_norm_hermitian, CMat, CVec,
    DensityOperator, STATE_TOL,
};

/// Completeness tolerance for sum K_i^dag K_i = I.
pub const CHANNEL_TOL: f64 = 1e-10;

// ---------------------------------------------------------------------------
// Families
// ---------------------------------------------------------------------------

/// The supported channel families and their parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelFamily {
    /// Qubit dephasing channel with flip weight `p` in [0,1].
    Dephasing { p: f64 },
    /// Symmetric 1->N cloning channel, N >= 1.
    Cloning { n: usize },
    /// Unruh channel with acceleration parameter `z` in [0,1); the infinite
    /// block series is truncated once the remaining weight drops below
    /// `tail_tol`.
    Unruh { z: f64, tail_tol: f64 },
}

impl ChannelFamily {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ChannelFamily::Dephasing { p } => {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::domain(format!("dephasing p must be in [0,1], got {p}")));
                }
            }
            ChannelFamily::Cloning { n } => {
                if n == 0 {
                    return Err(Error::domain("cloning N must be >= 1".to_string()));
                }
            }
            ChannelFamily::Unruh { z, tail_tol } => {
                if !(0.0..1.0).contains(&z) {
                    return Err(Error::domain(format!("Unruh z must be in [0,1), got {z}")));
                }
                if tail_tol <= 0.0 {
                    return Err(Error::domain(format!("tail_tol must be > 0, got {tail_tol}")));
                }
            }
        }
        Ok(())
    }

    /// Channel input dimension (all three families take a qubit).
    pub fn dim_in(&self) -> usize {
        2
    }
}

// ---------------------------------------------------------------------------
// Kraus channels and isometric extensions
// ---------------------------------------------------------------------------

/// A channel given by its Kraus operators (all dim_out x dim_in).
#[derive(Debug, Clone)]
pub struct KrausChannel {
    kraus: Vec<CMat>,
    dim_in: usize,
    dim_out: usize,
}

impl KrausChannel {
    pub fn new(kraus: Vec<CMat>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::InvalidChannel("no Kraus operators".to_string()));
        }
        let dim_out = kraus[0].nrows();
        let dim_in = kraus[0].ncols();
        for k in &kraus {
            if k.nrows() != dim_out || k.ncols() != dim_in {
                return Err(Error::shape("Kraus operators differ in shape".to_string()));
            }
        }
        let mut sum = CMat::zeros(dim_in, dim_in);
        for k in &kraus {
            sum += k.adjoint() * k;
        }
        let dev = (&sum - CMat::identity(dim_in, dim_in))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if dev > CHANNEL_TOL {
            return Err(Error::InvalidChannel(format!(
                "Kraus completeness violated by {dev:.3e}"
            )));
        }
        Ok(Self { kraus, dim_in, dim_out })
    }

    pub fn kraus(&self) -> &[CMat] {
        &self.kraus
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    /// Environment dimension of the canonical isometric extension.
    pub fn dim_env(&self) -> usize {
        self.kraus.len()
    }

    /// Channel action sum_i K_i sigma K_i^dag.
    pub fn apply(&self, sigma: &CMat) -> CMat {
        let mut out = CMat::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            out += k * sigma * k.adjoint();
        }
        out
    }

    /// Complementary action: rho_E[i,j] = Tr{K_i sigma K_j^dag}.
    pub fn apply_complement(&self, sigma: &CMat) -> CMat {
        let ne = self.kraus.len();
        let mut out = CMat::zeros(ne, ne);
        for i in 0..ne {
            for j in 0..ne {
                out[(i, j)] = trace(&(&self.kraus[i] * sigma * self.kraus[j].adjoint()));
            }
        }
        out
    }

    /// Tensor product with another channel (Kraus set {K_i (x) L_j}).
    pub fn tensor(&self, other: &KrausChannel) -> Result<KrausChannel> {
        let mut kraus = Vec::with_capacity(self.kraus.len() * other.kraus.len());
        for a in &self.kraus {
            for b in &other.kraus {
                kraus.push(kron(a, b));
            }
        }
        KrausChannel::new(kraus)
    }
}

/// An isometry A' -> B (x) E, stored as a (dim_b * dim_e) x dim_in matrix with
/// composite row index b * dim_e + e.
#[derive(Debug, Clone)]
pub struct Isometry {
    mat: CMat,
    dim_b: usize,
    dim_e: usize,
}

impl Isometry {
    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn dim_e(&self) -> usize {
        self.dim_e
    }

    pub fn dim_in(&self) -> usize {
        self.mat.ncols()
    }
}

/// Canonical isometric extension U = sum_i K_i (x) |i>_E of a Kraus channel.
pub fn isometric_extension(channel: &KrausChannel) -> Result<Isometry> {
    let (db, de, din) = (channel.dim_out, channel.dim_env(), channel.dim_in);
    let mut mat = CMat::zeros(db * de, din);
    for (i, k) in channel.kraus.iter().enumerate() {
        for b in 0..db {
            for a in 0..din {
                mat[(b * de + i, a)] = k[(b, a)];
            }
        }
    }
    let dev = (mat.adjoint() * &mat - CMat::identity(din, din))
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if dev > CHANNEL_TOL {
        return Err(Error::InvalidChannel(format!(
            "isometric extension fails U^dag U = I by {dev:.3e}"
        )));
    }
    Ok(Isometry { mat, dim_b: db, dim_e: de })
}

// ---------------------------------------------------------------------------
// Family constructors
// ---------------------------------------------------------------------------

fn cre(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Kraus operators {sqrt(1-p/2) I, sqrt(p/2) Z} of the qubit dephasing channel.
pub fn dephasing_kraus(p: f64) -> Result<KrausChannel> {
    ChannelFamily::Dephasing { p }.validate()?;
    let k0 = CMat::from_diagonal_element(2, 2, cre((1.0 - p / 2.0).sqrt()));
    let mut k1 = CMat::zeros(2, 2);
    k1[(0, 0)] = cre((p / 2.0).sqrt());
    k1[(1, 1)] = cre(-(p / 2.0).sqrt());
    if p == 0.0 {
        return KrausChannel::new(vec![k0]);
    }
    KrausChannel::new(vec![k0, k1])
}

/// Kraus operators of the 1->N cloning channel on the symmetric basis:
/// K_i = (sqrt(N-i)|i><0| + sqrt(i+1)|i+1><1|) / sqrt(N(N+1)/2), i = 0..N-1.
pub fn cloning_kraus(n: usize) -> Result<KrausChannel> {
    ChannelFamily::Cloning { n }.validate()?;
    let delta = (n * (n + 1) / 2) as f64;
    let mut kraus = Vec::with_capacity(n);
    for i in 0..n {
        let mut k = CMat::zeros(n + 1, 2);
        k[(i, 0)] = cre(((n - i) as f64 / delta).sqrt());
        k[(i + 1, 1)] = cre(((i + 1) as f64 / delta).sqrt());
        kraus.push(k);
    }
    KrausChannel::new(kraus)
}

/// Block weights of the Unruh channel: p_l(z) = (1-z)^3 z^(l-2) (l-1)l/2 for
/// l >= 2, truncated at the smallest prefix whose remaining weight is below
/// `tail_tol`. The residual is evaluated from the analytic tail sum.
#[derive(Debug, Clone)]
pub struct UnruhBlockWeights {
    /// (block index l, weight p_l) for l = 2..=L.
    pub blocks: Vec<(usize, f64)>,
    /// Weight 1 - sum p_l remaining past the truncation.
    pub residual: f64,
}

/// Analytic tail sum_{l > K+1} p_l(z) = (1-z)^3 sum_{k >= K} z^k (k+1)(k+2)/2.
fn unruh_tail(z: f64, k: usize) -> f64 {
    let kk = k as f64;
    0.5 * z.powi(k as i32)
        * (z * (1.0 + z) + (2.0 * kk + 3.0) * z * (1.0 - z) + (kk + 1.0) * (kk + 2.0) * (1.0 - z) * (1.0 - z))
}

pub fn unruh_block_weights(z: f64, tail_tol: f64) -> Result<UnruhBlockWeights> {
    ChannelFamily::Unruh { z, tail_tol }.validate()?;
    if z == 0.0 {
        return Ok(UnruhBlockWeights { blocks: vec![(2, 1.0)], residual: 0.0 });
    }
    const MAX_BLOCKS: usize = 1_000_000;
    let cube = (1.0 - z).powi(3);
    let mut blocks = Vec::new();
    let mut l = 2usize;
    loop {
        let delta = ((l - 1) * l / 2) as f64;
        let w = cube * z.powi((l - 2) as i32) * delta;
        blocks.push((l, w));
        let residual = unruh_tail(z, l - 1);
        if residual < tail_tol {
            return Ok(UnruhBlockWeights { blocks, residual });
        }
        l += 1;
        if l - 2 > MAX_BLOCKS {
            return Err(Error::domain(format!(
                "Unruh tail tolerance {tail_tol} not reached within {MAX_BLOCKS} blocks"
            )));
        }
    }
}

/// A constructed channel: a single Kraus channel, or the truncated block
/// decomposition of the Unruh channel.
#[derive(Debug, Clone)]
pub enum BuiltChannel {
    Single(KrausChannel),
    Unruh {
        weights: UnruhBlockWeights,
        /// One 1->(l-1) cloning channel per retained block.
        blocks: Vec<KrausChannel>,
    },
}

/// Builds the Kraus representation of a channel family.
pub fn make_channel(family: &ChannelFamily) -> Result<BuiltChannel> {
    family.validate()?;
    match *family {
        ChannelFamily::Dephasing { p } => Ok(BuiltChannel::Single(dephasing_kraus(p)?)),
        ChannelFamily::Cloning { n } => Ok(BuiltChannel::Single(cloning_kraus(n)?)),
        ChannelFamily::Unruh { z, tail_tol } => {
            let weights = unruh_block_weights(z, tail_tol)?;
            let blocks = weights
                .blocks
                .iter()
                .map(|&(l, _)| cloning_kraus(l - 1))
                .collect::<Result<Vec<_>>>()?;
            Ok(BuiltChannel::Unruh { weights, blocks })
        }
    }
}

// ---------------------------------------------------------------------------
// Channel + complement action
// ---------------------------------------------------------------------------

/// Sends `sigma` through the isometric extension and partial-traces, returning
/// (rho_B, rho_E).
pub fn channel_and_complement(
    channel: &KrausChannel,
    sigma: &DensityOperator,
) -> Result<(DensityOperator, DensityOperator)> {
    if sigma.dim() != channel.dim_in {
        return Err(Error::shape(format!(
            "input state dim {} != channel dim_in {}",
            sigma.dim(),
            channel.dim_in
        )));
    }
    let u = isometric_extension(channel)?;
    let joint = u.matrix() * sigma.matrix() * u.matrix().adjoint();
    let joint = DensityOperator::new_unchecked(joint);
    let rho_b = partial_trace(&joint, &[u.dim_b(), u.dim_e()], &[0])?;
    let rho_e = partial_trace(&joint, &[u.dim_b(), u.dim_e()], &[1])?;
    Ok((rho_b, rho_e))
}

// ---------------------------------------------------------------------------
// Degrading map (measure then prepare)
// ---------------------------------------------------------------------------

/// Max trace-norm distance, over the test states, between the measure-and-
/// prepare degrading map applied to the channel output and the complementary
/// channel output. Both families admit an exact entanglement-breaking
/// degrading map, so the deviation is round-off only.
///
/// Dephasing: measure B in the computational basis and prepare the environment
/// state read off the corresponding isometric-extension column. Cloning: the
/// B-basis slices of the isometric extension are rank two, so a basis
/// measurement cannot work; instead measure the symmetric-product POVM
/// {w (N+1) |u^(x)N><u^(x)N|} over an exact spherical cubature and prepare the
/// conjugate product state |conj(u)^(x)(N-1)> on E.
pub fn degrading_map_deviation(
    family: &ChannelFamily,
    test_states: &[DensityOperator],
) -> Result<f64> {
    family.validate()?;
    let channel = match make_channel(family)? {
        BuiltChannel::Single(c) => c,
        BuiltChannel::Unruh { .. } => {
            return Err(Error::UnsupportedFamily(
                "degrading map check covers single-block families only".to_string(),
            ))
        }
    };
    let degrade: Box<dyn Fn(&CMat) -> CMat> = match *family {
        ChannelFamily::Dephasing { .. } => {
            let u = isometric_extension(&channel)?;
            let (db, de) = (u.dim_b(), u.dim_e());
            // environment states |theta_j> from column j of U (rows j*de + e)
            let mut preps = Vec::with_capacity(db);
            for j in 0..db {
                let mut v = CVec::zeros(de);
                for e in 0..de {
                    v[e] = u.matrix()[(j * de + e, j)];
                }
                preps.push(&v * v.adjoint());
            }
            Box::new(move |rho_b: &CMat| {
                let mut out = CMat::zeros(de, de);
                for (j, prep) in preps.iter().enumerate() {
                    out += prep * rho_b[(j, j)];
                }
                out
            })
        }
        ChannelFamily::Cloning { n } => {
            let de = n;
            let povm = symmetric_povm_with_preps(n);
            Box::new(move |rho_b: &CMat| {
                let mut out = CMat::zeros(de, de);
                for (effect, prep) in &povm {
                    let prob = trace(&(effect * rho_b)).re;
                    out += prep * cre(prob);
                }
                out
            })
        }
        ChannelFamily::Unruh { .. } => unreachable!(),
    };

    let mut worst: f64 = 0.0;
    for sigma in test_states {
        if sigma.dim() != channel.dim_in {
            return Err(Error::shape(format!(
                "test state dim {} != channel dim_in {}",
                sigma.dim(),
                channel.dim_in
            )));
        }
        let out_b = channel.apply(sigma.matrix());
        let out_e = channel.apply_complement(sigma.matrix());
        let simulated = degrade(&out_b);
        let diff = &simulated - &out_e;
        debug_assert!(hermiticity_deviation(&diff) < 1e-9);
        worst = worst.max(trace_norm_hermitian(&diff));
    }
    Ok(worst)
}

/// POVM effects {w (N+1) |u^N><u^N|} with matching environment preparations
/// |conj(u)^(N-1)><...|, over a cubature that integrates every matrix element
/// exactly.
fn symmetric_povm_with_preps(n: usize) -> Vec<(CMat, CMat)> {
    let deg = n + 1;
    let n_phi = deg + 1;
    let (nodes, weights) = gauss_legendre(deg / 2 + 2);
    let mut povm = Vec::new();
    for j in 0..n_phi {
        let phi = 2.0 * std::f64::consts::PI * j as f64 / n_phi as f64;
        let phase = Complex64::new(phi.cos(), phi.sin());
        for (&x, &gw) in nodes.iter().zip(weights.iter()) {
            // x = cos(theta); weight normalized so that the full sum is 1
            let w = gw / 2.0 / n_phi as f64;
            let a = ((1.0 + x) / 2.0).sqrt();
            let b = ((1.0 - x) / 2.0).sqrt();
            let u = [cre(a), phase * b];
            let m = sym_product_state(&u, n);
            let effect = (&m * m.adjoint()) * cre(w * (n + 1) as f64);
            let uc = [u[0].conj(), u[1].conj()];
            let p = sym_product_state(&uc, n - 1);
            let prep = &p * p.adjoint();
            povm.push((effect, prep));
        }
    }
    povm
}

/// |u^(x)m> in the symmetric basis: component j is sqrt(C(m,j)) a^(m-j) b^j.
fn sym_product_state(u: &[Complex64; 2], m: usize) -> CVec {
    let mut v = CVec::zeros(m + 1);
    let mut binom = 1.0f64;
    for j in 0..=m {
        if j > 0 {
            binom *= (m - j + 1) as f64 / j as f64;
        }
        v[j] = binom.sqrt() * u[0].powi((m - j) as i32) * u[1].powi(j as i32);
    }
    v
}

/// Gauss-Legendre nodes/weights on [-1, 1] via Newton iteration.
fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(m, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(m, x);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Legendre P_m(x) and its derivative.
fn legendre(m: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0f64, x);
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ProbabilityVector;
    use rand::{Rng, SeedableRng};

    fn rand_qubit_state(rng: &mut impl Rng) -> DensityOperator {
        // mixed qubit state from a random purification
        let mut v = CVec::zeros(4);
        for i in 0..4 {
            let u1: f64 = 1.0 - rng.random::<f64>();
            let u2: f64 = rng.random();
            let r = (-2.0 * u1.ln()).sqrt();
            v[i] = Complex64::new(r * (2.0 * std::f64::consts::PI * u2).cos(),
                                  r * (2.0 * std::f64::consts::PI * u2).sin());
        }
        let norm = v.norm();
        let v = v / cre(norm);
        let rho = DensityOperator::from_pure(&v).unwrap();
        partial_trace(&rho, &[2, 2], &[1]).unwrap()
    }

    #[test]
    fn dephasing_p0_is_identity() {
        let c = dephasing_kraus(0.0).unwrap();
        assert_eq!(c.kraus().len(), 1);
        assert!((c.kraus()[0].clone() - CMat::identity(2, 2)).iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-15);
    }

    #[test]
    fn cloning_n1_is_identity() {
        let c = cloning_kraus(1).unwrap();
        assert_eq!(c.kraus().len(), 1);
        let k = &c.kraus()[0];
        assert!((k[(0, 0)].re - 1.0).abs() < 1e-15 && (k[(1, 1)].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cloning_n2_on_ground_state() {
        let c = cloning_kraus(2).unwrap();
        let mut sigma = CMat::zeros(2, 2);
        sigma[(0, 0)] = cre(1.0);
        let out = c.apply(&sigma);
        assert!((out[(0, 0)].re - 2.0 / 3.0).abs() < 1e-12);
        assert!((out[(1, 1)].re - 1.0 / 3.0).abs() < 1e-12);
        assert!(out[(2, 2)].norm() < 1e-12);
    }

    #[test]
    fn cloning_unital_on_symmetric_subspace() {
        for n in [2usize, 3, 5, 8] {
            let c = cloning_kraus(n).unwrap();
            let mm = DensityOperator::maximally_mixed(2);
            let out = c.apply(mm.matrix());
            let want = 1.0 / (n + 1) as f64;
            for i in 0..=n {
                for j in 0..=n {
                    let target = if i == j { want } else { 0.0 };
                    assert!((out[(i, j)] - cre(target)).norm() < 1e-10, "N={n}");
                }
            }
        }
    }

    #[test]
    fn isometric_extensions_are_isometries() {
        for fam in [
            ChannelFamily::Dephasing { p: 0.3 },
            ChannelFamily::Dephasing { p: 1.0 },
            ChannelFamily::Cloning { n: 2 },
            ChannelFamily::Cloning { n: 5 },
        ] {
            let c = match make_channel(&fam).unwrap() {
                BuiltChannel::Single(c) => c,
                _ => unreachable!(),
            };
            let u = isometric_extension(&c).unwrap();
            let dev = (u.matrix().adjoint() * u.matrix() - CMat::identity(2, 2))
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            assert!(dev < 1e-12);
        }
    }

    #[test]
    fn dephasing_complement_on_plus_state() {
        // sigma = |+><+| has Tr{sigma Z} = 0, so rho_E is diagonal with the
        // environment weights {1-p/2, p/2} and no off-diagonal part.
        let p = 0.4;
        let c = dephasing_kraus(p).unwrap();
        let plus = CVec::from_vec(vec![cre(std::f64::consts::FRAC_1_SQRT_2); 2]);
        let sigma = DensityOperator::from_pure(&plus).unwrap();
        let (rho_b, rho_e) = channel_and_complement(&c, &sigma).unwrap();
        assert!((trace(rho_b.matrix()).re - 1.0).abs() < 1e-12);
        assert!((trace(rho_e.matrix()).re - 1.0).abs() < 1e-12);
        let mut eigs = rho_e.spectrum().unwrap();
        eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((eigs[0] - p / 2.0).abs() < 1e-12);
        assert!((eigs[1] - (1.0 - p / 2.0)).abs() < 1e-12);
        assert!(rho_e.matrix()[(0, 1)].norm() < 1e-12);
    }

    #[test]
    fn dephasing_complement_bit_flip_invariant_spectrum() {
        let p = 0.7;
        let c = dephasing_kraus(p).unwrap();
        let sigma = DensityOperator::from_diagonal(&ProbabilityVector::new(vec![0.2, 0.8]).unwrap());
        let flipped = {
            let mut x = CMat::zeros(2, 2);
            x[(0, 1)] = cre(1.0);
            x[(1, 0)] = cre(1.0);
            DensityOperator::new_unchecked(&x * sigma.matrix() * &x)
        };
        let (_, e0) = channel_and_complement(&c, &sigma).unwrap();
        let (_, e1) = channel_and_complement(&c, &flipped).unwrap();
        let mut s0 = e0.spectrum().unwrap();
        let mut s1 = e1.spectrum().unwrap();
        s0.sort_by(|a, b| a.partial_cmp(b).unwrap());
        s1.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in s0.iter().zip(s1.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn degrading_map_simulates_complement() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(42);
        let states: Vec<DensityOperator> = (0..50).map(|_| rand_qubit_state(&mut rng)).collect();
        for fam in [
            ChannelFamily::Dephasing { p: 0.3 },
            ChannelFamily::Dephasing { p: 0.0 },
            ChannelFamily::Dephasing { p: 1.0 },
            ChannelFamily::Cloning { n: 2 },
            ChannelFamily::Cloning { n: 3 },
            ChannelFamily::Cloning { n: 4 },
        ] {
            let dev = degrading_map_deviation(&fam, &states).unwrap();
            assert!(dev <= 1e-10, "family {fam:?}: deviation {dev:.3e}");
        }
    }

    #[test]
    fn unruh_weights_match_closed_form() {
        let z = 0.5;
        let w = unruh_block_weights(z, 1e-10).unwrap();
        let cube = (1.0 - z) * (1.0 - z) * (1.0 - z);
        for &(l, p) in &w.blocks {
            let expect = cube * z.powi((l - 2) as i32) * ((l - 1) * l / 2) as f64;
            assert!((p - expect).abs() <= 1e-14 * expect.max(1e-300));
        }
        let total: f64 = w.blocks.iter().map(|&(_, p)| p).sum();
        assert!(total >= 1.0 - 1e-10);
        assert!((1.0 - total - w.residual).abs() < 1e-12);
        // weights decrease beyond the mode
        let mode = w
            .blocks
            .iter()
            .enumerate()
            .max_by(|a, b| a.1 .1.partial_cmp(&b.1 .1).unwrap())
            .unwrap()
            .0;
        for i in mode..w.blocks.len() - 1 {
            assert!(w.blocks[i].1 >= w.blocks[i + 1].1);
        }
    }

    #[test]
    fn unruh_weights_z0_single_block() {
        let w = unruh_block_weights(0.0, 1e-12).unwrap();
        assert_eq!(w.blocks, vec![(2, 1.0)]);
        assert_eq!(w.residual, 0.0);
    }

    #[test]
    fn unruh_truncation_length_z_half() {
        // frozen from the analytic tail: first prefix with residual < 1e-10
        let w = unruh_block_weights(0.5, 1e-10).unwrap();
        assert_eq!(w.blocks.last().unwrap().0, 43);
        assert!(w.residual < 1e-10);
    }

    #[test]
    fn unruh_rejects_bad_params() {
        assert!(unruh_block_weights(1.0, 1e-10).is_err());
        assert!(unruh_block_weights(-0.1, 1e-10).is_err());
        assert!(unruh_block_weights(0.5, 0.0).is_err());
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(6);
        // integral of x^k on [-1,1]
        for k in 0..=11usize {
            let got: f64 = x.iter().zip(w.iter()).map(|(&xi, &wi)| wi * xi.powi(k as i32)).sum();
            let want = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
            assert!((got - want).abs() < 1e-13, "k={k}");
        }
    }
}
