//! The exact one-step transformation U = (1+βλ)/√(2+βλ+λβ), its alternative
//! form (1+βλ)/√((1+βλ)‡(1+βλ)), and the identity checks that certify it.
//!
//! All identity defects are Frobenius norms divided by ‖I‖_F = √n, since every
//! operator involved (β, λ, U) has unit scale.

use std::collections::BTreeMap;

use crate::blockop::{
    adjoint_m, anticommutator, commutator, relative_odd_norm, BetaMatrix, BlockOperator, Metric,
    SplitHamiltonian,
};
use crate::error::{FwError, Result};
use crate::matfun::{decompose, sign_of, sqrt_spd_pair};
use crate::tolerance::relative;

const SIGN_PRECONDITION: f64 = 1e-8;

/// Bundle produced by a transformation: λ (or Λ), U, U⁻¹, the transformed
/// operator, and diagnostic norms.
#[derive(Debug, Clone)]
pub struct FwResult {
    pub lambda: BlockOperator,
    pub u: BlockOperator,
    pub u_inverse: BlockOperator,
    pub h_fw: BlockOperator,
    pub metric: Metric,
    pub diagnostics: BTreeMap<String, f64>,
}

fn unit_scale(a: &BlockOperator) -> f64 {
    (a.dim() as f64).sqrt()
}

/// ‖λ² − I‖_F / √n
pub fn lambda_sq_defect(lambda: &BlockOperator) -> f64 {
    let id = BlockOperator::identity(lambda.layout());
    relative((&(lambda * lambda) - &id).norm_fro(), unit_scale(lambda))
}

/// 2 + βλ + λβ
pub fn eriksen_denominator(lambda: &BlockOperator, beta: &BetaMatrix) -> BlockOperator {
    anticommutator(&beta.to_operator(), lambda).shift(2.0)
}

/// 1 + βλ
pub fn eriksen_numerator(lambda: &BlockOperator, beta: &BetaMatrix) -> BlockOperator {
    beta.left(lambda).shift(1.0)
}

fn degenerate(e: FwError) -> FwError {
    match e {
        FwError::NotPositiveDefinite { min_eig } => FwError::EriksenDenominatorDegenerate { min_eig },
        other => other,
    }
}

/// U = (1+βλ)·(2+βλ+λβ)^{−1/2} without checking λ² = I.
///
/// Used for approximate sign operators (the adiabatic λ of a driven
/// system), where U is still well defined but no longer unitary.
pub fn eriksen_unitary_unchecked(
    lambda: &BlockOperator,
    beta: &BetaMatrix,
    metric: Metric,
) -> Result<BlockOperator> {
    let (_, inv_root) = sqrt_spd_pair(&eriksen_denominator(lambda, beta), metric).map_err(degenerate)?;
    Ok(&eriksen_numerator(lambda, beta) * &inv_root)
}

fn check_sign(lambda: &BlockOperator) -> Result<()> {
    let defect = lambda_sq_defect(lambda);
    if defect > SIGN_PRECONDITION {
        return Err(FwError::NotASignOperator { defect });
    }
    Ok(())
}

/// U = (1+βλ)/√(2+βλ+λβ). Requires λ² = I to 1e−8.
pub fn eriksen_unitary(lambda: &BlockOperator, beta: &BetaMatrix, metric: Metric) -> Result<BlockOperator> {
    check_sign(lambda)?;
    eriksen_unitary_unchecked(lambda, beta, metric)
}

/// U = (1+βλ)·[(1+βλ)‡(1+βλ)]^{−1/2}, the manifestly (pseudo)unitary form.
pub fn eriksen_unitary_alt(lambda: &BlockOperator, beta: &BetaMatrix, metric: Metric) -> Result<BlockOperator> {
    check_sign(lambda)?;
    let num = eriksen_numerator(lambda, beta);
    let gram = &adjoint_m(&num, metric) * &num;
    let (_, inv_root) = sqrt_spd_pair(&gram, metric).map_err(degenerate)?;
    Ok(&num * &inv_root)
}

/// Defects of the identities that make λ and U an exact FW pair:
/// λ² = I, [βλ, λβ] = 0, [β, βλ+λβ] = 0, βU = U‡β, U·U‡ = I, and the
/// spinor-cancelling action (1+βλ)P± = (1±β)P± with P± = (1±λ)/2.
///
/// Under the boson metric `eriksen_defect` uses the metric adjoint; the
/// plain-adjoint version is added as `eriksen_defect_raw`.
pub fn verify_eriksen_identities(result: &FwResult, beta: &BetaMatrix, metric: Metric) -> BTreeMap<String, f64> {
    let lambda = &result.lambda;
    let u = &result.u;
    let n = unit_scale(lambda);
    let beta_op = beta.to_operator();
    let id = BlockOperator::identity(lambda.layout());
    let bl = beta.left(lambda);
    let lb = beta.right(lambda);

    let mut d = BTreeMap::new();
    d.insert("lambda_sq_defect".into(), lambda_sq_defect(lambda));
    d.insert(
        "lambda_commutator_defect".into(),
        relative(commutator(&bl, &lb).norm_fro(), n),
    );
    d.insert(
        "beta_even_defect".into(),
        relative(commutator(&beta_op, &(&bl + &lb)).norm_fro(), n),
    );
    let u_adj = adjoint_m(u, metric);
    d.insert(
        "eriksen_defect".into(),
        relative((&beta.left(u) - &beta.right(&u_adj)).norm_fro(), n),
    );
    if metric == Metric::BetaPseudo {
        d.insert(
            "eriksen_defect_raw".into(),
            relative((&beta.left(u) - &beta.right(&u.dagger())).norm_fro(), n),
        );
    }
    d.insert(
        "unitarity_defect".into(),
        relative((&(u * &u_adj) - &id).norm_fro(), n),
    );
    d.insert(
        "inverse_defect".into(),
        relative((&(u * &result.u_inverse) - &id).norm_fro(), n),
    );

    let numerator = bl.shift(1.0);
    let mut projector = 0.0f64;
    for s in [1.0, -1.0] {
        let p = lambda.scale_re(s).shift(1.0).scale_re(0.5);
        let lhs = &numerator * &p;
        let rhs = &beta_op.scale_re(s).shift(1.0) * &p;
        projector = projector.max(relative((&lhs - &rhs).norm_fro(), n));
        projector = projector.max(relative((&(&p * &p) - &p).norm_fro(), n));
    }
    d.insert("projector_defect".into(), projector);
    d
}

/// Relative odd-part norm of a transformed operator.
pub fn verify_even_transformed(h_fw: &BlockOperator, beta: &BetaMatrix) -> f64 {
    debug_assert_eq!(h_fw.layout(), beta.layout());
    relative_odd_norm(h_fw)
}

/// max |Δeigenvalue| / max |eigenvalue| between two operators' spectra,
/// both taken under `metric` and sorted ascending.
pub fn spectrum_defect(a: &BlockOperator, b: &BlockOperator, metric: Metric) -> Result<f64> {
    let ea = decompose(a, metric)?;
    let eb = decompose(b, metric)?;
    let scale = ea.spectral_radius();
    let worst = ea
        .eigenvalues
        .iter()
        .zip(&eb.eigenvalues)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max);
    Ok(relative(worst, scale))
}

/// Transform `h` with the Eriksen operator built from the sign operator
/// `lambda`, taking U⁻¹ = U‡. Fills every diagnostic.
pub fn transform_with_sign(h: &BlockOperator, lambda: &BlockOperator, metric: Metric) -> Result<FwResult> {
    let beta = BetaMatrix::for_layout(h.layout());
    let u = eriksen_unitary(lambda, &beta, metric)?;
    let u_alt = eriksen_unitary_alt(lambda, &beta, metric)?;
    let u_inverse = adjoint_m(&u, metric);
    let h_fw = &(&u * h) * &u_inverse;

    let mut result = FwResult {
        lambda: lambda.clone(),
        u,
        u_inverse,
        h_fw,
        metric,
        diagnostics: BTreeMap::new(),
    };
    let mut d = verify_eriksen_identities(&result, &beta, metric);
    d.insert("odd_norm".into(), verify_even_transformed(&result.h_fw, &beta));
    d.insert(
        "alt_form_defect".into(),
        relative((&u_alt - &result.u).norm_fro(), result.u.norm_fro()),
    );
    d.insert(
        "lambda_h_commutator".into(),
        relative(commutator(lambda, h).norm_fro(), h.norm_fro()),
    );
    let num = eriksen_numerator(lambda, &beta);
    let den = eriksen_denominator(lambda, &beta);
    d.insert(
        "numerator_denominator_commutator".into(),
        relative(commutator(&num, &den).norm_fro(), unit_scale(lambda)),
    );
    d.insert("spectrum_defect".into(), spectrum_defect(h, &result.h_fw, metric)?);
    result.diagnostics = d;
    Ok(result)
}

/// Exact FW transformation of a stationary Hamiltonian: λ = ℋ/√(ℋ²),
/// U from λ, ℋ_FW = UℋU⁻¹.
pub fn transform_stationary(split: &SplitHamiltonian, gap_tol: f64) -> Result<FwResult> {
    let h = split.hamiltonian();
    let lambda = sign_of(&h, split.metric, gap_tol)?;
    transform_with_sign(&h, &lambda, split.metric)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blockop::Layout;
    use crate::models::{free_dirac, feshbach_villars};
    use faer::c64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn beta4() -> BetaMatrix {
        BetaMatrix::for_layout(Layout::new(4, 1).unwrap())
    }

    #[test]
    fn lambda_equal_beta_gives_identity() {
        let beta = beta4();
        let u = eriksen_unitary(&beta.to_operator(), &beta, Metric::Hermitian).unwrap();
        assert!((&u - &BlockOperator::identity(u.layout())).norm_fro() < 1e-15);
        let alt = eriksen_unitary_alt(&beta.to_operator(), &beta, Metric::Hermitian).unwrap();
        assert!((&alt - &u).norm_fro() < 1e-15);
    }

    #[test]
    fn lambda_minus_beta_is_degenerate() {
        let beta = beta4();
        let err = eriksen_unitary(&beta.to_operator().scale_re(-1.0), &beta, Metric::Hermitian).unwrap_err();
        assert!(matches!(err, FwError::EriksenDenominatorDegenerate { .. }), "{err}");
    }

    #[test]
    fn rejects_non_sign_operator() {
        let beta = beta4();
        let err = eriksen_unitary(&beta.to_operator().scale_re(0.5), &beta, Metric::Hermitian).unwrap_err();
        assert!(matches!(err, FwError::NotASignOperator { .. }));
    }

    #[test]
    fn mass_term_is_left_untouched() {
        let s = free_dirac(1.3, [0.0; 3]).unwrap();
        let r = transform_stationary(&s, 1e-8).unwrap();
        assert!((&r.u - &BlockOperator::identity(r.u.layout())).norm_fro() < 1e-15);
        assert!((&r.h_fw - &s.hamiltonian()).norm_fro() < 1e-14);
        for (k, v) in &r.diagnostics {
            assert!(*v < 1e-14, "{k} = {v}");
        }
    }

    #[test]
    fn free_dirac_becomes_beta_times_energy() {
        let s = free_dirac(1.0, [0.0, 0.0, 0.75]).unwrap();
        let r = transform_stationary(&s, 1e-8).unwrap();
        let want = s.beta.to_operator().scale_re(1.25);
        assert!((&r.h_fw - &want).norm_fro() / 1.25 < 1e-12);
        for (k, v) in &r.diagnostics {
            assert!(*v < 1e-12, "{k} = {v}");
        }
    }

    #[test]
    fn momentum_sweep_satisfies_identities() {
        for i in 1..=20 {
            let p = 0.1 * i as f64;
            let s = free_dirac(1.0, [0.3 * p, -0.2 * p, p]).unwrap();
            let r = transform_stationary(&s, 1e-8).unwrap();
            for (k, v) in &r.diagnostics {
                assert!(*v <= 1e-10, "p={p}: {k} = {v}");
            }
        }
    }

    #[test]
    fn corrupted_unitary_is_detected() {
        let s = free_dirac(1.0, [0.0, 0.0, 0.75]).unwrap();
        let mut r = transform_stationary(&s, 1e-8).unwrap();
        let n = r.u.dim();
        let bump = BlockOperator::from_fn(r.u.layout(), |_, _| c64::new(1e-3, 0.0));
        r.u = &r.u + &bump;
        let d = verify_eriksen_identities(&r, &s.beta, Metric::Hermitian);
        // oracle: the uniform bump B = 1e-3·J contributes βB − Bβ to the defect
        let beta = s.beta.to_operator();
        let expected = commutator(&beta, &bump).norm_fro() / (n as f64).sqrt();
        let got = d["eriksen_defect"];
        assert!((got - expected).abs() < 1e-9, "{got} vs {expected}");
        assert!(got > 5e-4 && got < 5e-3);
    }

    #[test]
    fn random_hermitian_forms_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let layout = Layout::new(6, 1).unwrap();
        for _ in 0..10 {
            let a = BlockOperator::from_fn(layout, |_, _| {
                c64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            // mass-dominated so that 2+βλ+λβ stays positive
            let h = &(&a + &a.dagger()).scale_re(0.25) + &BetaMatrix::for_layout(layout).to_operator().scale_re(2.0);
            let r = transform_with_sign(&h, &sign_of(&h, Metric::Hermitian, 1e-8).unwrap(), Metric::Hermitian).unwrap();
            assert!(r.diagnostics["alt_form_defect"] < 1e-10);
            assert!(r.diagnostics["odd_norm"] < 1e-10);
            assert!(r.diagnostics["spectrum_defect"] < 1e-10);
        }
    }

    #[test]
    fn feshbach_villars_pseudo_unitary() {
        let s = feshbach_villars(1.0, 0.75).unwrap();
        let r = transform_stationary(&s, 1e-8).unwrap();
        let want = s.beta.to_operator().scale_re(1.25);
        assert!((&r.h_fw - &want).norm_fro() < 1e-12);
        assert!(r.diagnostics["unitarity_defect"] < 1e-12);
        assert!(r.diagnostics["eriksen_defect"] < 1e-12);
        assert!(r.diagnostics["alt_form_defect"] < 1e-12);
        // U is a boost, not a unitary: the plain-adjoint relation fails
        assert!(r.diagnostics["eriksen_defect_raw"] > 1e-3);
        assert!(metric_plain_unitarity(&r.u) > 1e-3);
    }

    fn metric_plain_unitarity(u: &BlockOperator) -> f64 {
        crate::matfun::metric_unitarity_defect(u, Metric::Hermitian)
    }

    #[test]
    fn odd_norm_of_even_and_odd_inputs() {
        let beta = beta4();
        assert_eq!(verify_even_transformed(&beta.to_operator(), &beta), 0.0);
        let odd = crate::models::alpha_dot([0.0, 0.0, 1.0]);
        assert!((verify_even_transformed(&odd, &beta) - 1.0).abs() < 1e-15);
    }
}
