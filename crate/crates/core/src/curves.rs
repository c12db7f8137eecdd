//! Closed-form trade-off curve evaluation and curve sampling with
//! convexification.
//!
//! Curves are parametrized by mu in [0, 1/2], the spectral weight of the
//! canonical two-state ensemble. A sampled curve is post-processed into its
//! concave upper envelope in the beneficial direction (more C and more Q are
//! better; less E-consumption is better), which recovers any points a
//! parametrization gap could miss.

use crate::channels::{unruh_block_weights, ChannelFamily, UnruhBlockWeights};
use crate::error::{Error, Result};
use crate::linalg::{binary_entropy, NeumaierSum};

/// Collinearity tolerance of the convex hull.
const HULL_TOL: f64 = 1e-12;

/// Which trade-off a curve describes: classical-vs-quantum rate, or
/// classical rate vs entanglement consumption.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveKind {
    Cq,
    Ce,
}

/// One sampled point: classical rate `c` (bits/use) and the `second` rate
/// (qubits/use for CQ, ebits/use for CE), tagged with its generating mu.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePoint {
    pub mu: f64,
    pub c: f64,
    pub second: f64,
}

/// A sampled, convexified trade-off curve.
#[derive(Debug, Clone)]
pub struct TradeoffCurve {
    pub kind: CurveKind,
    pub family: ChannelFamily,
    /// Ordered by increasing mu.
    pub points: Vec<RatePoint>,
    pub convexified: bool,
}

// ---------------------------------------------------------------------------
// Closed forms
// ---------------------------------------------------------------------------

/// Larger eigenvalue of the dephasing environment output for the canonical
/// ensemble: gamma(mu,p) = 1/2 + 1/2 sqrt(1 - 16 (p/2)(1-p/2) mu(1-mu)).
pub fn dephasing_gamma(mu: f64, p: f64) -> Result<f64> {
    if !(0.0..=0.5).contains(&mu) {
        return Err(Error::domain(format!("gamma needs mu in [0,1/2], got {mu}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("gamma needs p in [0,1], got {p}")));
    }
    let radicand = 1.0 - 16.0 * (p / 2.0) * (1.0 - p / 2.0) * mu * (1.0 - mu);
    Ok(0.5 + 0.5 * radicand.max(0.0).sqrt())
}

/// Entropy in bits of the normalized weights {v_i / delta}, assuming
/// sum v_i = delta. Compensated so that a million-term spectrum keeps full
/// precision.
fn entropy_of_weights(weights: impl Iterator<Item = f64>, delta: f64) -> f64 {
    let mut acc = NeumaierSum::new();
    for v in weights {
        if v > 0.0 {
            acc.add(v * v.log2());
        }
    }
    delta.log2() - acc.value() / delta
}

/// Precomputed per-family evaluator so that repeated curve queries do not
/// rebuild the Unruh block weights.
#[derive(Debug, Clone)]
pub(crate) struct CurveEval {
    family: ChannelFamily,
    unruh: Option<UnruhBlockWeights>,
}

impl CurveEval {
    pub(crate) fn new(family: ChannelFamily) -> Result<Self> {
        family.validate()?;
        let unruh = match family {
            ChannelFamily::Unruh { z, tail_tol } => Some(unruh_block_weights(z, tail_tol)?),
            _ => None,
        };
        Ok(Self { family, unruh })
    }

    pub(crate) fn family(&self) -> ChannelFamily {
        self.family
    }

    /// (C, Q) on the CQ trade-off curve at mu.
    pub(crate) fn cq(&self, mu: f64) -> Result<(f64, f64)> {
        check_mu(mu)?;
        match self.family {
            ChannelFamily::Dephasing { p } => {
                let h_mu = binary_entropy(mu)?;
                let h_gamma = binary_entropy(dephasing_gamma(mu, p)?)?;
                Ok((1.0 - h_mu, h_mu - h_gamma))
            }
            ChannelFamily::Cloning { n } => {
                let (h_lambda, h_eta) = cloning_spectral_entropies(n, mu);
                Ok((((n + 1) as f64).log2() - h_lambda, h_lambda - h_eta))
            }
            ChannelFamily::Unruh { .. } => {
                let w = self.unruh.as_ref().expect("unruh weights precomputed");
                let (mut c, mut q) = (NeumaierSum::new(), NeumaierSum::new());
                c.add(1.0);
                for &(l, pl) in &w.blocks {
                    let n = l - 1;
                    let delta = (n * (n + 1) / 2) as f64;
                    let lam = block_xlog2x_lambda(n, mu);
                    let eta = block_xlog2x_eta(n, mu);
                    c.add(-pl * (n as f64).log2());
                    c.add(pl / delta * lam);
                    q.add(-pl / delta * lam);
                    q.add(pl / delta * eta);
                }
                Ok((c.value(), q.value()))
            }
        }
    }

    /// (C, E) on the CE trade-off curve at mu.
    pub(crate) fn ce(&self, mu: f64) -> Result<(f64, f64)> {
        check_mu(mu)?;
        let h_mu = binary_entropy(mu)?;
        match self.family {
            ChannelFamily::Dephasing { p } => {
                let h_gamma = binary_entropy(dephasing_gamma(mu, p)?)?;
                Ok((1.0 + h_mu - h_gamma, h_mu))
            }
            ChannelFamily::Cloning { n } => {
                let (_, h_eta) = cloning_spectral_entropies(n, mu);
                Ok((((n + 1) as f64).log2() + h_mu - h_eta, h_mu))
            }
            ChannelFamily::Unruh { .. } => {
                let w = self.unruh.as_ref().expect("unruh weights precomputed");
                let mut c = NeumaierSum::new();
                c.add(h_mu + 1.0);
                for &(l, pl) in &w.blocks {
                    let n = l - 1;
                    let delta = (n * (n + 1) / 2) as f64;
                    c.add(-pl * (n as f64).log2());
                    c.add(pl / delta * block_xlog2x_eta(n, mu));
                }
                Ok((c.value(), h_mu))
            }
        }
    }
}

fn check_mu(mu: f64) -> Result<()> {
    if !(0.0..=0.5).contains(&mu) {
        return Err(Error::domain(format!("curve parameter mu must be in [0,1/2], got {mu}")));
    }
    Ok(())
}

/// H({lambda_i/Delta_N}) and H({eta_i/Delta_N}) for the 1->N cloning channel,
/// with lambda_i = (N-2i)mu + i and eta_i = (N-1-2i)mu + i + 1.
fn cloning_spectral_entropies(n: usize, mu: f64) -> (f64, f64) {
    let delta = (n as f64) * (n as f64 + 1.0) / 2.0;
    let lam = (0..=n).map(|i| (n as f64 - 2.0 * i as f64) * mu + i as f64);
    let eta = (0..n).map(|i| (n as f64 - 1.0 - 2.0 * i as f64) * mu + i as f64 + 1.0);
    (entropy_of_weights(lam, delta), entropy_of_weights(eta, delta))
}

/// sum_i lambda_i log2 lambda_i for the order-n cloning block.
fn block_xlog2x_lambda(n: usize, mu: f64) -> f64 {
    let mut acc = NeumaierSum::new();
    for i in 0..=n {
        let v = (n as f64 - 2.0 * i as f64) * mu + i as f64;
        if v > 0.0 {
            acc.add(v * v.log2());
        }
    }
    acc.value()
}

/// sum_i eta_i log2 eta_i for the order-n cloning block.
fn block_xlog2x_eta(n: usize, mu: f64) -> f64 {
    let mut acc = NeumaierSum::new();
    for i in 0..n {
        let v = (n as f64 - 1.0 - 2.0 * i as f64) * mu + i as f64 + 1.0;
        if v > 0.0 {
            acc.add(v * v.log2());
        }
    }
    acc.value()
}

/// One point of the CQ trade-off curve.
pub fn cq_point(family: &ChannelFamily, mu: f64) -> Result<RatePoint> {
    let (c, q) = CurveEval::new(*family)?.cq(mu)?;
    Ok(RatePoint { mu, c, second: q })
}

/// One point of the CE trade-off curve.
pub fn ce_point(family: &ChannelFamily, mu: f64) -> Result<RatePoint> {
    let (c, e) = CurveEval::new(*family)?.ce(mu)?;
    Ok(RatePoint { mu, c, second: e })
}

// ---------------------------------------------------------------------------
// Sampling and convexification
// ---------------------------------------------------------------------------

/// Samples the closed form on a uniform mu-grid over [0, 1/2] and replaces the
/// point set by its concave upper envelope in the beneficial direction.
/// Endpoints are preserved exactly.
pub fn sample_curve(family: &ChannelFamily, kind: CurveKind, grid_size: usize) -> Result<TradeoffCurve> {
    if grid_size < 2 {
        return Err(Error::domain(format!("grid size must be >= 2, got {grid_size}")));
    }
    let eval = CurveEval::new(*family)?;
    let mut points = Vec::with_capacity(grid_size);
    for i in 0..grid_size {
        let mu = 0.5 * i as f64 / (grid_size - 1) as f64;
        let (c, second) = match kind {
            CurveKind::Cq => eval.cq(mu)?,
            CurveKind::Ce => eval.ce(mu)?,
        };
        points.push(RatePoint { mu, c, second });
    }
    let points = convexify(points, kind);
    Ok(TradeoffCurve { kind, family: *family, points, convexified: true })
}

/// Concave upper envelope (CQ) or convex lower envelope (CE) over the
/// (c, second) pairs, via a monotone chain that keeps collinear points.
pub(crate) fn convexify(mut points: Vec<RatePoint>, kind: CurveKind) -> Vec<RatePoint> {
    if points.len() <= 2 {
        points.sort_by(|a, b| a.mu.partial_cmp(&b.mu).unwrap());
        return points;
    }
    let c_span = points.iter().map(|p| p.c).fold(f64::NEG_INFINITY, f64::max)
        - points.iter().map(|p| p.c).fold(f64::INFINITY, f64::min);
    if c_span < HULL_TOL {
        points.sort_by(|a, b| a.mu.partial_cmp(&b.mu).unwrap());
        return points;
    }
    // beneficial direction: keep the envelope with larger Q / smaller E
    let sign = match kind {
        CurveKind::Cq => 1.0,
        CurveKind::Ce => -1.0,
    };
    points.sort_by(|a, b| a.c.partial_cmp(&b.c).unwrap());
    let mut hull: Vec<RatePoint> = Vec::with_capacity(points.len());
    for p in points {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // deviation of b below chord a->p, in second-axis units
            let span = p.c - a.c;
            if span <= 0.0 {
                break;
            }
            let t = (b.c - a.c) / span;
            let chord = a.second * (1.0 - t) + p.second * t;
            if sign * (b.second - chord) < -HULL_TOL {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull.sort_by(|a, b| a.mu.partial_cmp(&b.mu).unwrap());
    hull
}

// ---------------------------------------------------------------------------
// Capacity scalars and curve queries
// ---------------------------------------------------------------------------

/// Golden-section maximization of a unimodal function on [a, b].
pub(crate) fn golden_max(
    f: &mut dyn FnMut(f64) -> f64,
    mut a: f64,
    mut b: f64,
    xtol: f64,
) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > xtol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Maximizes `f` over mu in [0, 1/2]: dense grid scan plus golden-section
/// refinement around the grid argmax. Returns (argmax, max).
pub(crate) fn maximize_over_mu(f: &mut dyn FnMut(f64) -> f64, grid: usize, xtol: f64) -> (f64, f64) {
    let n = grid.max(8);
    let (mut best_i, mut best) = (0usize, f64::NEG_INFINITY);
    for i in 0..n {
        let mu = 0.5 * i as f64 / (n - 1) as f64;
        let v = f(mu);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let lo = if best_i == 0 { 0.0 } else { 0.5 * (best_i - 1) as f64 / (n - 1) as f64 };
    let hi = if best_i + 1 >= n { 0.5 } else { 0.5 * (best_i + 1) as f64 / (n - 1) as f64 };
    let (x, fx) = golden_max(f, lo, hi, xtol);
    if fx >= best {
        (x, fx)
    } else {
        (0.5 * best_i as f64 / (n - 1) as f64, best)
    }
}

/// Entanglement-assisted classical capacity: the maximum C-coordinate of the
/// CE trade-off curve, refined by golden section around the grid maximum.
pub fn ea_classical_capacity(family: &ChannelFamily) -> Result<f64> {
    let eval = CurveEval::new(*family)?;
    let mut f = |mu: f64| eval.ce(mu).map(|(c, _)| c).unwrap_or(f64::NEG_INFINITY);
    let (_, h) = maximize_over_mu(&mut f, 512, 1e-10);
    Ok(h)
}

/// Q on the CQ trade-off curve at a prescribed classical rate, found by
/// bisection on mu (C is non-increasing in mu).
pub fn cq_q_at_c(family: &ChannelFamily, c_target: f64) -> Result<f64> {
    let eval = CurveEval::new(*family)?;
    let (c_hi, _) = eval.cq(0.0)?;
    let (c_lo, _) = eval.cq(0.5)?;
    if c_target > c_hi + 1e-12 || c_target < c_lo - 1e-12 {
        return Err(Error::domain(format!(
            "classical rate {c_target} outside the curve range [{c_lo}, {c_hi}]"
        )));
    }
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let (c, _) = eval.cq(mid)?;
        if c > c_target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    let (_, q) = eval.cq(0.5 * (lo + hi))?;
    Ok(q)
}
