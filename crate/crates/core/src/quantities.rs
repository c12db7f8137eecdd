//! Entropic quantities of classical-quantum states, and the canonical
//! two-state ensembles that trace out the trade-off curves.
//!
//! An ensemble element is a pure state on a reference system A tensored with
//! the channel input A'. Sending A' through an isometric extension gives a
//! conditional pure state on A (x) B (x) E per classical letter, and every
//! quantity here is computed from the eigenvalue spectra of its reductions.

use num_complex::Complex64;

use crate::channels::{isometric_extension, BuiltChannel, Isometry, KrausChannel};
use crate::error::{Error, Result};
use crate::linalg::{
    entropy_of_spectrum, hermitian_eigenvalues, shannon_entropy, CMat, CVec, NeumaierSum,
    ProbabilityVector, STATE_TOL,
};

/// Largest dim_B * dim_E for which the B(x)E reduction is eigendecomposed
/// directly as a redundant purity check.
const BE_CHECK_LIMIT: usize = 64;

// ---------------------------------------------------------------------------
// Ensembles
// ---------------------------------------------------------------------------

/// A classical-quantum input: probabilities plus one pure state per letter.
///
/// Each state vector either lives on the channel input space itself (a pure
/// product input, reference system of dimension 1) or on A (x) A' where the
/// reference A purifies a mixed conditional input. Vector length must be a
/// multiple of the channel input dimension.
#[derive(Debug, Clone)]
pub struct PureStateEnsemble {
    probs: ProbabilityVector,
    states: Vec<CVec>,
    dim_in: usize,
}

impl PureStateEnsemble {
    pub fn new(probs: ProbabilityVector, states: Vec<CVec>, dim_in: usize) -> Result<Self> {
        if probs.len() != states.len() {
            return Err(Error::shape(format!(
                "{} probabilities vs {} states",
                probs.len(),
                states.len()
            )));
        }
        if states.is_empty() {
            return Err(Error::shape("empty ensemble".to_string()));
        }
        for s in &states {
            if s.len() % dim_in != 0 || s.is_empty() {
                return Err(Error::shape(format!(
                    "state of length {} is not a multiple of the input dim {dim_in}",
                    s.len()
                )));
            }
            let n2 = s.norm_squared();
            if (n2 - 1.0).abs() > STATE_TOL {
                return Err(Error::InvalidState(format!("state norm^2 {n2}, not 1")));
            }
        }
        Ok(Self { probs, states, dim_in })
    }

    pub fn probs(&self) -> &ProbabilityVector {
        &self.probs
    }

    pub fn states(&self) -> &[CVec] {
        &self.states
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }
}

/// The equiprobable two-state ensemble with conditional input spectra
/// (mu, 1-mu) and (1-mu, mu), stored as Schmidt-diagonal purifications
/// psi0 = sqrt(mu)|00> + sqrt(1-mu)|11> and psi1 with the weights swapped.
pub fn canonical_ensemble(mu: f64) -> Result<PureStateEnsemble> {
    if !(0.0..=0.5).contains(&mu) {
        return Err(Error::domain(format!("canonical ensemble needs mu in [0,1/2], got {mu}")));
    }
    let c = |x: f64| Complex64::new(x, 0.0);
    let psi0 = CVec::from_vec(vec![c(mu.sqrt()), c(0.0), c(0.0), c((1.0 - mu).sqrt())]);
    let psi1 = CVec::from_vec(vec![c((1.0 - mu).sqrt()), c(0.0), c(0.0), c(mu.sqrt())]);
    PureStateEnsemble::new(ProbabilityVector::uniform(2), vec![psi0, psi1], 2)
}

// ---------------------------------------------------------------------------
// Quantities
// ---------------------------------------------------------------------------

/// Entropic quantities of a classical-quantum state, all in bits.
#[derive(Debug, Clone, Copy)]
pub struct CqQuantities {
    pub h_b: f64,
    pub h_b_given_x: f64,
    pub h_e_given_x: f64,
    pub h_a_given_x: f64,
    /// H(BE|X) computed from the joint B(x)E reduction when small enough;
    /// equals H(A|X) for pure conditional states.
    pub h_be_given_x: Option<f64>,
    pub i_x_b: f64,
    /// Coherent information I(A>BX) = H(B|X) - H(E|X).
    pub i_coh: f64,
    /// I(AX;B) = H(A|X) + H(B) - H(E|X).
    pub i_ax_b: f64,
    pub i_a_b_given_x: f64,
    pub i_a_e_given_x: f64,
    /// Bound on the entropy error introduced by truncating an infinite block
    /// series; zero for single-block channels.
    pub entropy_error_bound: f64,
}

impl CqQuantities {
    fn from_primitives(
        h_b: f64,
        h_b_given_x: f64,
        h_e_given_x: f64,
        h_a_given_x: f64,
        h_be_given_x: Option<f64>,
        entropy_error_bound: f64,
    ) -> Self {
        let q = CqQuantities {
            h_b,
            h_b_given_x,
            h_e_given_x,
            h_a_given_x,
            h_be_given_x,
            i_x_b: h_b - h_b_given_x,
            i_coh: h_b_given_x - h_e_given_x,
            i_ax_b: h_a_given_x + h_b - h_e_given_x,
            i_a_b_given_x: h_a_given_x + h_b_given_x - h_e_given_x,
            i_a_e_given_x: h_a_given_x + h_e_given_x - h_b_given_x,
            entropy_error_bound,
        };
        if let Some(h_be) = q.h_be_given_x {
            debug_assert!(
                (h_be - q.h_a_given_x).abs() <= 1e-8 + entropy_error_bound,
                "purity identity violated: H(BE|X)={} H(A|X)={}",
                h_be,
                q.h_a_given_x
            );
        }
        q
    }
}

/// Computes all entropic quantities of the classical-quantum state obtained by
/// sending the ensemble through the channel's isometric extension.
///
/// For the Unruh channel everything is evaluated blockwise: the per-letter
/// output spectrum is the union over blocks of p_l times the block spectrum,
/// and the truncation residual is reported as an entropy error bound of
/// residual * log2(L+1).
pub fn cq_quantities(channel: &BuiltChannel, ensemble: &PureStateEnsemble) -> Result<CqQuantities> {
    match channel {
        BuiltChannel::Single(c) => single_block_quantities(c, ensemble),
        BuiltChannel::Unruh { weights, blocks } => {
            let isos: Vec<Isometry> = blocks
                .iter()
                .map(isometric_extension)
                .collect::<Result<Vec<_>>>()?;
            unruh_quantities(&weights.blocks, weights.residual, &isos, ensemble)
        }
    }
}

struct ConditionalReductions {
    rho_a: CMat,
    rho_b: CMat,
    rho_e: CMat,
    rho_be: Option<CMat>,
}

/// Applies (I_A (x) U) to a purification and reduces.
fn conditional_reductions(iso: &Isometry, psi: &CVec, with_be: bool) -> ConditionalReductions {
    let din = iso.dim_in();
    let (db, de) = (iso.dim_b(), iso.dim_e());
    let da = psi.len() / din;
    // v[a, b, e] = sum_{a'} U[(b,e), a'] psi[a, a']
    let mut v = vec![Complex64::new(0.0, 0.0); da * db * de];
    for a in 0..da {
        for be in 0..db * de {
            let mut acc = Complex64::new(0.0, 0.0);
            for ap in 0..din {
                acc += iso.matrix()[(be, ap)] * psi[a * din + ap];
            }
            v[a * db * de + be] = acc;
        }
    }
    let idx = |a: usize, b: usize, e: usize| a * db * de + b * de + e;

    let mut rho_a = CMat::zeros(da, da);
    for a in 0..da {
        for a2 in 0..da {
            let mut acc = Complex64::new(0.0, 0.0);
            for b in 0..db {
                for e in 0..de {
                    acc += v[idx(a, b, e)] * v[idx(a2, b, e)].conj();
                }
            }
            rho_a[(a, a2)] = acc;
        }
    }
    let mut rho_b = CMat::zeros(db, db);
    for b in 0..db {
        for b2 in 0..db {
            let mut acc = Complex64::new(0.0, 0.0);
            for a in 0..da {
                for e in 0..de {
                    acc += v[idx(a, b, e)] * v[idx(a, b2, e)].conj();
                }
            }
            rho_b[(b, b2)] = acc;
        }
    }
    let mut rho_e = CMat::zeros(de, de);
    for e in 0..de {
        for e2 in 0..de {
            let mut acc = Complex64::new(0.0, 0.0);
            for a in 0..da {
                for b in 0..db {
                    acc += v[idx(a, b, e)] * v[idx(a, b, e2)].conj();
                }
            }
            rho_e[(e, e2)] = acc;
        }
    }
    let rho_be = if with_be {
        let dbe = db * de;
        let mut m = CMat::zeros(dbe, dbe);
        for be in 0..dbe {
            for be2 in 0..dbe {
                let mut acc = Complex64::new(0.0, 0.0);
                for a in 0..da {
                    acc += v[a * dbe + be] * v[a * dbe + be2].conj();
                }
                m[(be, be2)] = acc;
            }
        }
        Some(m)
    } else {
        None
    };
    ConditionalReductions { rho_a, rho_b, rho_e, rho_be }
}

fn clamped_entropy(m: &CMat) -> f64 {
    let eigs = hermitian_eigenvalues(m);
    let clamped: Vec<f64> = eigs.into_iter().map(|e| e.max(0.0)).collect();
    entropy_of_spectrum(&clamped)
}

fn single_block_quantities(
    channel: &KrausChannel,
    ensemble: &PureStateEnsemble,
) -> Result<CqQuantities> {
    if ensemble.dim_in() != channel.dim_in() {
        return Err(Error::shape(format!(
            "ensemble input dim {} != channel input dim {}",
            ensemble.dim_in(),
            channel.dim_in()
        )));
    }
    let iso = isometric_extension(channel)?;
    let with_be = iso.dim_b() * iso.dim_e() <= BE_CHECK_LIMIT;

    let mut rho_b_mix = CMat::zeros(iso.dim_b(), iso.dim_b());
    let (mut h_bx, mut h_ex, mut h_ax, mut h_bex) = (0.0, 0.0, 0.0, 0.0);
    for (&px, psi) in ensemble.probs().entries().iter().zip(ensemble.states()) {
        let red = conditional_reductions(&iso, psi, with_be);
        rho_b_mix += &red.rho_b * Complex64::new(px, 0.0);
        h_bx += px * clamped_entropy(&red.rho_b);
        h_ex += px * clamped_entropy(&red.rho_e);
        h_ax += px * clamped_entropy(&red.rho_a);
        if let Some(be) = &red.rho_be {
            h_bex += px * clamped_entropy(be);
        }
    }
    let h_b = clamped_entropy(&rho_b_mix);
    Ok(CqQuantities::from_primitives(
        h_b,
        h_bx,
        h_ex,
        h_ax,
        with_be.then_some(h_bex),
        0.0,
    ))
}

fn unruh_quantities(
    blocks: &[(usize, f64)],
    residual: f64,
    isos: &[Isometry],
    ensemble: &PureStateEnsemble,
) -> Result<CqQuantities> {
    if ensemble.dim_in() != 2 {
        return Err(Error::shape("Unruh channel takes a qubit input".to_string()));
    }
    let nx = ensemble.probs().len();
    let da = ensemble.states()[0].len() / 2;

    // per-letter spectra accumulated across blocks
    let mut h_bx_acc = vec![NeumaierSum::new(); nx];
    let mut h_ex_acc = vec![NeumaierSum::new(); nx];
    let mut rho_a: Vec<CMat> = vec![CMat::zeros(da, da); nx];
    // mixture spectrum per block for H(B)
    let mut h_b_acc = NeumaierSum::new();

    for (&(_l, pl), iso) in blocks.iter().zip(isos.iter()) {
        let mut rho_b_mix = CMat::zeros(iso.dim_b(), iso.dim_b());
        for (x, (&px, psi)) in ensemble
            .probs()
            .entries()
            .iter()
            .zip(ensemble.states())
            .enumerate()
        {
            let red = conditional_reductions(iso, psi, false);
            rho_b_mix += &red.rho_b * Complex64::new(px, 0.0);
            for e in hermitian_eigenvalues(&red.rho_b) {
                let s = pl * e.max(0.0);
                if s > 0.0 {
                    h_bx_acc[x].add(-s * s.log2());
                }
            }
            for e in hermitian_eigenvalues(&red.rho_e) {
                let s = pl * e.max(0.0);
                if s > 0.0 {
                    h_ex_acc[x].add(-s * s.log2());
                }
            }
            rho_a[x] += &red.rho_a * Complex64::new(pl, 0.0);
        }
        for e in hermitian_eigenvalues(&rho_b_mix) {
            let s = pl * e.max(0.0);
            if s > 0.0 {
                h_b_acc.add(-s * s.log2());
            }
        }
    }

    let (mut h_bx, mut h_ex, mut h_ax) = (0.0, 0.0, 0.0);
    for (x, &px) in ensemble.probs().entries().iter().enumerate() {
        h_bx += px * h_bx_acc[x].value();
        h_ex += px * h_ex_acc[x].value();
        h_ax += px * clamped_entropy(&rho_a[x]);
    }
    let max_block = blocks.last().map(|&(l, _)| l).unwrap_or(2);
    let bound = residual * ((max_block + 1) as f64).log2();
    Ok(CqQuantities::from_primitives(h_b_acc.value(), h_bx, h_ex, h_ax, None, bound))
}

/// H(X) of the ensemble's classical marginal; handy for cross-checks.
pub fn classical_entropy(ensemble: &PureStateEnsemble) -> f64 {
    shannon_entropy(ensemble.probs())
}
