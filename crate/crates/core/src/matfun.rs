//! Matrix functions through a single eigendecomposition kernel.
//!
//! Self-adjoint inputs under the Hermitian metric go through the
//! self-adjoint solver and keep a unitary eigenbasis. β-pseudo-Hermitian
//! inputs go through the general complex solver, with the eigenbasis inverted
//! explicitly; their spectrum must be real (unbroken pseudo-Hermiticity)
//! unless the caller asks for [`decompose_complex`], which generators of
//! boson transformations need because their spectrum is imaginary.

use faer::linalg::solvers::DenseSolveCore;
use faer::{c64, Mat, Side};

use crate::blockop::{adjoint_m, BlockOperator, Layout, Metric};
use crate::error::{FwError, Result};
use crate::tolerance::relative;

const HERMITIAN_INPUT_TOL: f64 = 1e-10;
const IMAG_TOL: f64 = 1e-8;
const MAX_CONDITION: f64 = 1e8;
const POSITIVITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<c64>,
    pub vectors: Mat<c64>,
    pub inverse_vectors: Mat<c64>,
    layout: Layout,
}

impl SpectralDecomposition {
    pub fn layout(&self) -> Layout {
        self.layout
    }

    /// V·diag(f(e))·V⁻¹
    pub fn apply(&self, f: impl Fn(c64) -> c64) -> BlockOperator {
        let fe: Vec<c64> = self.eigenvalues.iter().map(|&e| f(e)).collect();
        self.with_eigenvalues(&fe)
    }

    /// V·diag(values)·V⁻¹ for replacement eigenvalues in the stored order.
    pub fn with_eigenvalues(&self, fe: &[c64]) -> BlockOperator {
        let n = self.eigenvalues.len();
        assert_eq!(fe.len(), n);
        let scaled = Mat::from_fn(n, n, |i, j| self.vectors[(i, j)] * fe[j]);
        let data = &scaled * &self.inverse_vectors;
        BlockOperator::new(data, self.layout).expect("decomposition preserves the layout")
    }

    pub fn reconstruct(&self) -> BlockOperator {
        self.apply(|e| e)
    }

    /// Largest |eigenvalue|.
    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().map(|e| e.norm()).fold(0.0, f64::max)
    }

    pub fn min_abs_eigenvalue(&self) -> f64 {
        self.eigenvalues
            .iter()
            .map(|e| e.norm())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn real_eigenvalues(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|e| e.re).collect()
    }
}

fn evd_err(e: impl std::fmt::Debug) -> FwError {
    FwError::Decomposition(format!("{e:?}"))
}

/// Ascending by real part, then imaginary part; ties keep solver order.
fn sorted_order(eigenvalues: &[c64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..eigenvalues.len()).collect();
    order.sort_by(|&a, &b| {
        let (x, y) = (eigenvalues[a], eigenvalues[b]);
        x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im))
    });
    order
}

/// Unit-normalize each column and rotate its phase so that the first
/// largest-magnitude component is real positive.
fn fix_phases(vectors: &mut Mat<c64>) {
    let n = vectors.nrows();
    for j in 0..vectors.ncols() {
        let mut norm2 = 0.0;
        let mut pivot = 0;
        let mut best = -1.0;
        for i in 0..n {
            let a = vectors[(i, j)].norm();
            norm2 += a * a;
            if a > best {
                best = a;
                pivot = i;
            }
        }
        let norm = norm2.sqrt();
        if norm == 0.0 {
            continue;
        }
        let p = vectors[(pivot, j)];
        let phase = p.conj() / (p.norm() * norm);
        for i in 0..n {
            vectors[(i, j)] *= phase;
        }
    }
}

fn permuted(vectors: &Mat<c64>, values: &[c64]) -> (Vec<c64>, Mat<c64>) {
    let order = sorted_order(values);
    let n = vectors.nrows();
    let vals = order.iter().map(|&k| values[k]).collect();
    let vecs = Mat::from_fn(n, order.len(), |i, j| vectors[(i, order[j])]);
    (vals, vecs)
}

fn decompose_hermitian(a: &BlockOperator) -> Result<SpectralDecomposition> {
    let defect = relative((a - &a.dagger()).norm_fro(), a.norm_fro());
    if defect > HERMITIAN_INPUT_TOL {
        return Err(FwError::MetricViolation(format!(
            "operator is not Hermitian (defect {defect:.3e})"
        )));
    }
    let n = a.dim();
    // symmetrize so the solver's triangle choice does not matter
    let sym = Mat::from_fn(n, n, |i, j| (a.get(i, j) + a.get(j, i).conj()) * 0.5);
    let evd = sym.self_adjoint_eigen(Side::Lower).map_err(evd_err)?;
    let values: Vec<c64> = evd
        .S()
        .column_vector()
        .iter()
        .map(|e| c64::new(e.re, 0.0))
        .collect();
    let (values, mut vectors) = permuted(&evd.U().to_owned(), &values);
    fix_phases(&mut vectors);
    let inverse_vectors = vectors.adjoint().to_owned();
    Ok(SpectralDecomposition {
        eigenvalues: values,
        vectors,
        inverse_vectors,
        layout: a.layout(),
    })
}

fn decompose_general(a: &BlockOperator, require_real: bool) -> Result<SpectralDecomposition> {
    let evd = a.data().eigen().map_err(evd_err)?;
    let mut values: Vec<c64> = evd.S().column_vector().iter().copied().collect();
    if require_real {
        let bound = IMAG_TOL * a.norm_spectral().max(f64::MIN_POSITIVE);
        let worst = values.iter().map(|e| e.im.abs()).fold(0.0, f64::max);
        if worst > bound {
            return Err(FwError::BrokenPseudoHermiticity { imag: worst, bound });
        }
        for e in values.iter_mut() {
            e.im = 0.0;
        }
    }
    let (values, mut vectors) = permuted(&evd.U().to_owned(), &values);
    fix_phases(&mut vectors);
    let sv = vectors.singular_values().map_err(evd_err)?;
    let smax = sv.first().copied().unwrap_or(0.0);
    let smin = sv.last().copied().unwrap_or(0.0);
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if cond > MAX_CONDITION {
        return Err(FwError::IllConditionedEigenbasis(cond));
    }
    let inverse_vectors = vectors.partial_piv_lu().inverse();
    Ok(SpectralDecomposition {
        eigenvalues: values,
        vectors,
        inverse_vectors,
        layout: a.layout(),
    })
}

/// Eigendecomposition under the given metric, eigenvalues ascending.
///
/// The β-pseudo-Hermitian route rejects spectra with imaginary parts above
/// 1e−8·‖A‖₂ and eigenbases with condition number above 1e8.
pub fn decompose(a: &BlockOperator, metric: Metric) -> Result<SpectralDecomposition> {
    match metric {
        Metric::Hermitian => decompose_hermitian(a),
        Metric::BetaPseudo => decompose_general(a, true),
    }
}

/// General complex eigendecomposition with no constraint on the spectrum.
pub fn decompose_complex(a: &BlockOperator) -> Result<SpectralDecomposition> {
    decompose_general(a, false)
}

/// Decomposition suited to a metric-self-adjoint operator whose spectrum
/// may leave the real axis (generators under the boson metric).
fn decompose_for_function(a: &BlockOperator, metric: Metric) -> Result<SpectralDecomposition> {
    match metric {
        Metric::Hermitian => decompose_hermitian(a),
        Metric::BetaPseudo => decompose_complex(a),
    }
}

/// Apply a scalar function through the eigenbasis of `a`.
pub fn map_spectrum(
    a: &BlockOperator,
    metric: Metric,
    f: impl Fn(c64) -> c64,
) -> Result<BlockOperator> {
    Ok(decompose_for_function(a, metric)?.apply(f))
}

fn spectral_scale(a: &BlockOperator, d: &SpectralDecomposition, metric: Metric) -> f64 {
    match metric {
        Metric::Hermitian => d.spectral_radius(),
        Metric::BetaPseudo => a.norm_spectral(),
    }
}

/// λ = H/(H²)^{1/2}.
///
/// Fails with a gap violation when some eigenvalue lies within
/// `gap_tol·‖H‖₂` of zero.
pub fn sign_of(h: &BlockOperator, metric: Metric, gap_tol: f64) -> Result<BlockOperator> {
    let d = decompose(h, metric)?;
    let threshold = gap_tol * spectral_scale(h, &d, metric);
    let min_abs = d.min_abs_eigenvalue();
    if min_abs <= threshold {
        return Err(FwError::SpectralGap {
            min_abs,
            threshold,
            hint: String::new(),
        });
    }
    Ok(d.apply(|e| c64::new(e.re.signum(), 0.0)))
}

/// Principal square root and its inverse for an operator with positive real
/// spectrum, from one decomposition.
pub fn sqrt_spd_pair(a: &BlockOperator, metric: Metric) -> Result<(BlockOperator, BlockOperator)> {
    let d = decompose(a, metric)?;
    let scale = spectral_scale(a, &d, metric);
    let min_eig = d.eigenvalues.iter().map(|e| e.re).fold(f64::INFINITY, f64::min);
    if min_eig <= POSITIVITY_TOL * scale {
        return Err(FwError::NotPositiveDefinite { min_eig });
    }
    let root = d.apply(|e| c64::new(e.re.sqrt(), 0.0));
    let inv_root = d.apply(|e| c64::new(1.0 / e.re.sqrt(), 0.0));
    Ok((root, inv_root))
}

/// Principal square root of an operator with positive real spectrum.
pub fn sqrt_spd(a: &BlockOperator, metric: Metric) -> Result<BlockOperator> {
    sqrt_spd_pair(a, metric).map(|(root, _)| root)
}

/// Result of a matrix arcsin; `clamped` counts eigenvalues pulled back from
/// the clamp band outside [−1, 1].
#[derive(Debug, Clone)]
pub struct Arcsin {
    pub value: BlockOperator,
    pub clamped: usize,
}

/// Principal arcsin under the given metric.
///
/// Real eigenvalues must lie in [−1−ε, 1+ε]; those inside the band are
/// clamped to ±1. Under the boson metric the spectrum may be complex, in
/// which case the principal complex arcsin is used per eigenvalue.
pub fn arcsin_m(m: &BlockOperator, metric: Metric, eps_clamp: f64) -> Result<Arcsin> {
    let d = decompose_for_function(m, metric)?;
    let imag_floor = 1e-12 * d.spectral_radius().max(1.0);
    let mut clamped = 0;
    let mut mapped = Vec::with_capacity(d.eigenvalues.len());
    for &e in &d.eigenvalues {
        if e.im.abs() <= imag_floor {
            let x = e.re;
            if x.abs() > 1.0 + eps_clamp {
                return Err(FwError::ArcsinDomain { eig: x });
            }
            let x = if x.abs() > 1.0 {
                clamped += 1;
                x.signum()
            } else {
                x
            };
            mapped.push(c64::new(x.asin(), 0.0));
        } else {
            mapped.push(e.asin());
        }
    }
    Ok(Arcsin {
        value: d.with_eigenvalues(&mapped),
        clamped,
    })
}

/// Eigenvalue-wise principal arcsin of a Hermitian operator.
pub fn arcsin_herm(m: &BlockOperator, eps_clamp: f64) -> Result<BlockOperator> {
    arcsin_m(m, Metric::Hermitian, eps_clamp).map(|a| a.value)
}

/// exp(iS) for metric-self-adjoint S.
pub fn exp_i(s: &BlockOperator, metric: Metric) -> Result<BlockOperator> {
    map_spectrum(s, metric, |e| (c64::new(0.0, 1.0) * e).exp())
}

/// ‖U·U‡ − I‖_F / √n
pub fn metric_unitarity_defect(u: &BlockOperator, metric: Metric) -> f64 {
    let prod = u * &adjoint_m(u, metric);
    let id = BlockOperator::identity(u.layout());
    relative((&prod - &id).norm_fro(), (u.dim() as f64).sqrt())
}
