//! ℋ(t) − i∂/∂t on a truncated Floquet space.
//!
//! For ℋ(t) = Σₙ Hₙ e^{−inωt} and states Σₘ ψₘ e^{−imωt}, the operator acts as
//! the block matrix K_{mn} = H_{m−n} − mω·δ_{mn}, m, n ∈ [−N_f, N_f]. The
//! ladder −mω is a multiple of the identity in every copy, so it commutes
//! with the extended β and belongs to the even part together with ℰ.
//!
//! Two sign operators live on this space: Λ = K/√(K²), and the adiabatic
//! λ(t) = ℋ(t)/√(ℋ(t)²) lifted to a block-Toeplitz matrix from its Fourier
//! coefficients. Only Λ block-diagonalizes K exactly.

use std::collections::BTreeMap;

use faer::c64;
use faer::linalg::solvers::DenseSolveCore;

use crate::blockop::{BetaMatrix, BlockOperator, Layout, Metric};
use crate::eriksen::{eriksen_unitary, eriksen_unitary_unchecked, lambda_sq_defect, transform_with_sign, FwResult};
use crate::error::{FwError, Result};
use crate::expgen::{generator_from_lambda, verify_exp_equivalence, verify_trig_identities, GeneratorResult};
use crate::matfun::{decompose, decompose_complex, sign_of};
use crate::models::TimePeriodicHamiltonian;
use crate::tolerance::{relative, Tolerances};

/// Odd norms below this are rounding noise of the transformation itself and
/// are not ordered against each other when checking convergence in N_f.
pub const DECAY_NOISE_FLOOR: f64 = 1e-13;

/// Required ratio between the adiabatic-λ and Λ odd norms.
pub const SEPARATION_FACTOR: f64 = 10.0;

#[derive(Debug, Clone)]
pub struct ExtendedOperator {
    pub op: BlockOperator,
    pub omega: f64,
    pub nf: usize,
    pub metric: Metric,
}

impl ExtendedOperator {
    pub fn internal_dim(&self) -> usize {
        self.op.layout().internal_dim
    }

    pub fn beta(&self) -> BetaMatrix {
        BetaMatrix::for_layout(self.op.layout())
    }

    /// Fourier index m of Floquet copy `copy`.
    pub fn harmonic(&self, copy: usize) -> i64 {
        copy as i64 - self.nf as i64
    }
}

fn copies(nf: usize) -> usize {
    2 * nf + 1
}

/// Block-Toeplitz operator with blocks `coeff(m − n)`.
fn toeplitz(layout: Layout, nf: usize, coeff: impl Fn(i64) -> Option<Block>) -> BlockOperator {
    let d = layout.internal_dim;
    let mut cache: BTreeMap<i64, Option<Block>> = BTreeMap::new();
    for diff in -(2 * nf as i64)..=(2 * nf as i64) {
        cache.insert(diff, coeff(diff));
    }
    BlockOperator::from_fn(layout, |i, j| {
        let (a, b) = (i / d, j / d);
        match &cache[&(a as i64 - b as i64)] {
            Some(block) => block[(i % d) * d + (j % d)],
            None => c64::new(0.0, 0.0),
        }
    })
}

/// Row-major d×d block.
type Block = Vec<c64>;

fn block_of(op: &BlockOperator) -> Block {
    let d = op.dim();
    (0..d * d).map(|k| op.get(k / d, k % d)).collect()
}

/// K_{mn} = H_{m−n} − mω·δ_{mn} over m, n ∈ [−nf, nf].
pub fn build_extended(model: &TimePeriodicHamiltonian, nf: usize) -> Result<ExtendedOperator> {
    if nf < 1 {
        return Err(FwError::Structure("Floquet truncation nf must be >= 1".into()));
    }
    let top = model.max_harmonic();
    if top as usize > 2 * nf {
        return Err(FwError::TruncationTooSmall {
            mode: top,
            needed: (top as usize).div_ceil(2),
            nf,
        });
    }
    let d = model.layout().internal_dim;
    let layout = Layout::new(d, copies(nf))?;
    let mut k = toeplitz(layout, nf, |diff| model.mode(diff as i32).map(block_of));
    for copy in 0..copies(nf) {
        let m = copy as i64 - nf as i64;
        let shift = -(m as f64) * model.omega();
        let base = copy * d;
        let mut data = k.clone().into_data();
        for i in 0..d {
            data[(base + i, base + i)] += c64::new(shift, 0.0);
        }
        k = BlockOperator::new(data, layout)?;
    }
    Ok(ExtendedOperator {
        op: k,
        omega: model.omega(),
        nf,
        metric: model.metric(),
    })
}

/// Λ = K/√(K²). A zero eigenvalue of K is a quasienergy resonance and makes
/// Λ undefined.
pub fn lambda_capital(k: &ExtendedOperator, gap_tol: f64) -> Result<BlockOperator> {
    sign_of(&k.op, k.metric, gap_tol).map_err(|e| match e {
        FwError::SpectralGap { min_abs, threshold, .. } => FwError::SpectralGap {
            min_abs,
            threshold,
            hint: " (quasienergy resonance: adjust omega or add detuning)".into(),
        },
        other => other,
    })
}

/// Adiabatic sign λ(t) = ℋ(t)/√(ℋ(t)²) sampled at 4(2nf+1) points over one
/// period and lifted to the block-Toeplitz operator of its Fourier
/// coefficients λₙ = (1/N)Σₖ λ(tₖ)e^{inωtₖ}, |n| ≤ 2nf.
pub fn lambda_naive(model: &TimePeriodicHamiltonian, nf: usize, gap_tol: f64) -> Result<BlockOperator> {
    if nf < 1 {
        return Err(FwError::Structure("Floquet truncation nf must be >= 1".into()));
    }
    let samples = 4 * copies(nf);
    let period = model.period();
    let mut signs = Vec::with_capacity(samples);
    for s in 0..samples {
        let t = period * s as f64 / samples as f64;
        let lam = sign_of(&model.at(t), model.metric(), gap_tol).map_err(|e| {
            if e.is_gap_violation() {
                FwError::AdiabaticSignUndefined { t }
            } else {
                e
            }
        })?;
        signs.push((t, lam));
    }
    let inner = model.layout();
    let coeff = |n: i64| -> Option<Block> {
        let mut acc = BlockOperator::zeros(inner);
        for (t, lam) in &signs {
            let phase = c64::from_polar(1.0 / samples as f64, n as f64 * model.omega() * t);
            acc = &acc + &lam.scale(phase);
        }
        Some(block_of(&acc))
    };
    let layout = Layout::new(inner.internal_dim, copies(nf))?;
    Ok(toeplitz(layout, nf, coeff))
}

/// Relative odd-part norm of the central `2·window+1` Floquet copies.
pub fn window_odd_norm(a: &BlockOperator, nf: usize, window: usize) -> Result<f64> {
    if window > nf {
        return Err(FwError::Structure(format!("window {window} exceeds truncation nf = {nf}")));
    }
    let central = a.copy_window(nf - window, 2 * window + 1)?;
    Ok(crate::blockop::relative_odd_norm(&central))
}

fn spectrum_defect_general(k: &ExtendedOperator, transformed: &BlockOperator) -> Result<f64> {
    let reference = decompose(&k.op, k.metric)?;
    let other = decompose_complex(transformed)?;
    let worst = reference
        .eigenvalues
        .iter()
        .zip(&other.eigenvalues)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max);
    Ok(relative(worst, reference.spectral_radius()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FloquetReport {
    pub nf: usize,
    pub window: usize,
    /// Central-window odd norm of U(λ_naive)·K·U(λ_naive)⁻¹.
    pub odd_norm_lambda_naive: f64,
    /// Central-window odd norm of U(Λ)·K·U(Λ)‡.
    pub odd_norm_lambda_capital: f64,
    /// (N_f, central-window odd norm with Λ), N_f strictly increasing.
    pub decay_table: Vec<(usize, f64)>,
    /// Largest entry of λ_naive outside its diagonal Floquet blocks.
    pub naive_offdiag_max: f64,
    pub naive_sq_defect: f64,
    pub spectrum_defect_naive: f64,
    pub spectrum_defect_capital: f64,
}

impl FloquetReport {
    pub fn separation_holds(&self) -> bool {
        self.odd_norm_lambda_naive > SEPARATION_FACTOR * self.odd_norm_lambda_capital
    }

    /// Nonincreasing in N_f, treating values under the noise floor as equal.
    pub fn decay_monotone(&self) -> bool {
        self.decay_table
            .windows(2)
            .all(|w| w[1].1 <= w[0].1 || w[1].1 <= DECAY_NOISE_FLOOR)
    }

    /// The adiabatic sign has no time dependence (no Toeplitz bands).
    pub fn naive_is_static(&self, tol: f64) -> bool {
        self.naive_offdiag_max <= tol
    }
}

fn capital_odd_norm(model: &TimePeriodicHamiltonian, nf: usize, window: usize, gap_tol: f64) -> Result<(f64, f64)> {
    let k = build_extended(model, nf)?;
    let beta = k.beta();
    let cap = lambda_capital(&k, gap_tol)?;
    let u = eriksen_unitary(&cap, &beta, k.metric)?;
    let u_inv = crate::blockop::adjoint_m(&u, k.metric);
    let kt = &(&u * &k.op) * &u_inv;
    let odd = window_odd_norm(&kt, nf, window)?;
    let spec = crate::eriksen::spectrum_defect(&k.op, &kt, k.metric)?;
    Ok((odd, spec))
}

/// Transform K once with the Eriksen operator of the adiabatic λ and once
/// with that of Λ, and compare central-window odd norms. `decay_nfs` lists
/// further truncation orders for the Λ convergence table.
pub fn demonstrate_nonevenness(
    model: &TimePeriodicHamiltonian,
    nf: usize,
    window: usize,
    decay_nfs: &[usize],
    gap_tol: f64,
) -> Result<FloquetReport> {
    let k = build_extended(model, nf)?;
    let beta = k.beta();

    let naive = lambda_naive(model, nf, gap_tol)?;
    let u_naive = eriksen_unitary_unchecked(&naive, &beta, k.metric)?;
    // λ_naive² ≠ I on the truncated space, so U is not unitary: invert exactly
    let u_naive_inv = BlockOperator::new(u_naive.data().partial_piv_lu().inverse(), u_naive.layout())?;
    let k_naive = &(&u_naive * &k.op) * &u_naive_inv;
    let odd_naive = window_odd_norm(&k_naive, nf, window)?;
    let spectrum_defect_naive = spectrum_defect_general(&k, &k_naive)?;

    let (odd_capital, spectrum_defect_capital) = capital_odd_norm(model, nf, window, gap_tol)?;

    let mut nfs: Vec<usize> = decay_nfs.to_vec();
    nfs.sort_unstable();
    nfs.dedup();
    let mut decay_table = Vec::with_capacity(nfs.len());
    for n in nfs {
        let (odd, _) = capital_odd_norm(model, n, window, gap_tol)?;
        decay_table.push((n, odd));
    }

    Ok(FloquetReport {
        nf,
        window,
        odd_norm_lambda_naive: odd_naive,
        odd_norm_lambda_capital: odd_capital,
        decay_table,
        naive_offdiag_max: naive.off_block_max(),
        naive_sq_defect: lambda_sq_defect(&naive),
        spectrum_defect_naive,
        spectrum_defect_capital,
    })
}

/// Exact transformation of the extended operator with Λ, plus the Λ-based
/// exponential generator.
#[derive(Debug, Clone)]
pub struct NonstationaryResult {
    pub extended: ExtendedOperator,
    pub fw: FwResult,
    pub generator: GeneratorResult,
    pub window: usize,
}

pub fn default_window(nf: usize) -> usize {
    nf / 2
}

pub fn transform_nonstationary(model: &TimePeriodicHamiltonian, nf: usize, tol: &Tolerances) -> Result<NonstationaryResult> {
    let k = build_extended(model, nf)?;
    let beta = k.beta();
    let cap = lambda_capital(&k, tol.gap_tol)?;
    let mut fw = transform_with_sign(&k.op, &cap, k.metric)?;
    let window = default_window(nf);
    fw.diagnostics
        .insert("odd_norm_window".into(), window_odd_norm(&fw.h_fw, nf, window)?);
    let mut generator = generator_from_lambda(&cap, &beta, k.metric, tol.eps_clamp)?;
    let trig = verify_trig_identities(&generator, &cap, &beta)?;
    generator.diagnostics.extend(trig);
    let exp_defect = verify_exp_equivalence(&generator, &fw.u, k.metric)?;
    generator.diagnostics.insert("exp_equivalence_defect".into(), exp_defect);
    Ok(NonstationaryResult {
        extended: k,
        fw,
        generator,
        window,
    })
}
