//! The exact exponential generator S with U = exp(iS).
//!
//! Three routes are computed from λ (or Λ):
//!
//! * form A: S = −arcsin[ i(βλ−λβ) / (2√(2+βλ+λβ)) ], i.e. sin S directly;
//! * form B: S = −½·arcsin[ i(βλ−λβ)/2 ], i.e. sin 2S;
//! * β-factored series: S = −(β/2)·X·g(−X²) with X = i(λ−βλβ)/2 and
//!   g(y) = arcsin(√y)/√y. This is the odd arcsin series of form B with β
//!   carried through every power, using (βX)² = −X² for odd X.
//!
//! Form B (and the series, which equals it) only reaches the principal
//! branch 2S ∈ [−π/2, π/2], so it is exact only while cos 2S = (βλ+λβ)/2 is
//! positive semidefinite. Form A has no such restriction. The canonical S is
//! form B when its branch is valid and form A otherwise.
//!
//! Generator defects are Frobenius norms divided by √n.

use std::collections::BTreeMap;

use faer::c64;

use crate::blockop::{adjoint_m, anticommutator, commutator, BetaMatrix, BlockOperator, Metric};
use crate::eriksen::{eriksen_denominator, lambda_sq_defect};
use crate::error::{FwError, Result};
use crate::matfun::{arcsin_m, decompose, exp_i, map_spectrum};
use crate::tolerance::relative;

const SIGN_PRECONDITION: f64 = 1e-8;
const BRANCH_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct GeneratorResult {
    /// Canonical generator.
    pub s: BlockOperator,
    pub s_form_a: BlockOperator,
    pub s_form_b: BlockOperator,
    pub s_series: BlockOperator,
    pub metric: Metric,
    pub diagnostics: BTreeMap<String, f64>,
}

impl GeneratorResult {
    pub fn form_b_branch_valid(&self) -> bool {
        self.diagnostics.get("form_b_branch_valid").copied() == Some(1.0)
    }
}

fn unit(a: &BlockOperator) -> f64 {
    (a.dim() as f64).sqrt()
}

fn i_times(a: &BlockOperator) -> BlockOperator {
    a.scale(c64::new(0.0, 1.0))
}

/// arcsin(√y)/√y, continued analytically (y < 0 gives arcsinh(√−y)/√−y).
fn arcsin_ratio(y: c64) -> c64 {
    if y.norm() < 1e-8 {
        return c64::new(1.0, 0.0) + y / 6.0 + y * y * (3.0 / 40.0);
    }
    let r = y.sqrt();
    r.asin() / r
}

/// β-factored series route.
fn series_generator(lambda: &BlockOperator, beta: &BetaMatrix, metric: Metric, eps_clamp: f64) -> Result<BlockOperator> {
    let odd = (lambda - &beta.sandwich(lambda)).scale_re(0.5);
    let x = i_times(&odd);
    let q = &odd * &odd;
    let d = match metric {
        Metric::Hermitian => decompose(&q, metric)?,
        Metric::BetaPseudo => crate::matfun::decompose_complex(&q)?,
    };
    let upper = (1.0 + eps_clamp) * (1.0 + eps_clamp);
    let mut mapped = Vec::with_capacity(d.eigenvalues.len());
    for &y in &d.eigenvalues {
        let y = if y.im.abs() <= 1e-12 && y.re > 1.0 {
            if y.re > upper {
                return Err(FwError::ArcsinDomain { eig: y.re.sqrt() });
            }
            c64::new(1.0, 0.0)
        } else {
            y
        };
        mapped.push(arcsin_ratio(y));
    }
    let g = d.with_eigenvalues(&mapped);
    Ok(beta.left(&(&x * &g)).scale_re(-0.5))
}

/// Build S from a sign operator by all three routes and record how well
/// they agree, together with oddness and metric self-adjointness of S.
pub fn generator_from_lambda(
    lambda: &BlockOperator,
    beta: &BetaMatrix,
    metric: Metric,
    eps_clamp: f64,
) -> Result<GeneratorResult> {
    let sq = lambda_sq_defect(lambda);
    if sq > SIGN_PRECONDITION {
        return Err(FwError::NotASignOperator { defect: sq });
    }
    let n = unit(lambda);
    let bl = beta.left(lambda);
    let lb = beta.right(lambda);
    let diff = &bl - &lb;
    let sum = &bl + &lb;

    // form B
    let sin2s = i_times(&diff).scale_re(0.5);
    let b = arcsin_m(&sin2s, metric, eps_clamp)?;
    let s_form_b = b.value.scale_re(-0.5);

    // form A, with the denominator split symmetrically around the numerator
    let den = eriksen_denominator(lambda, beta);
    let dd = decompose(&den, metric)?;
    let min_eig = dd.eigenvalues.iter().map(|e| e.re).fold(f64::INFINITY, f64::min);
    if min_eig <= 1e-12 * dd.spectral_radius() {
        return Err(FwError::EriksenDenominatorDegenerate { min_eig });
    }
    let half = dd.apply(|e| c64::new(1.0 / (2.0 * e.re.sqrt()).sqrt(), 0.0));
    let sin_s = &(&half * &i_times(&diff)) * &half;
    let a = arcsin_m(&sin_s, metric, eps_clamp)?;
    let s_form_a = a.value.scale_re(-1.0);

    let s_series = series_generator(lambda, beta, metric, eps_clamp)?;

    // cos 2S = (βλ+λβ)/2 must be PSD for the principal branch of form B
    let cos_spec = decompose(&sum, metric)?;
    let cos_min = cos_spec.eigenvalues.iter().map(|e| e.re).fold(f64::INFINITY, f64::min);
    let branch_valid = cos_min >= -BRANCH_TOL * cos_spec.spectral_radius().max(1.0);

    let s = if branch_valid { s_form_b.clone() } else { s_form_a.clone() };

    let mut d = BTreeMap::new();
    let beta_op = beta.to_operator();
    d.insert("oddness_defect".into(), relative(anticommutator(&beta_op, &s).norm_fro(), n));
    d.insert(
        "hermiticity_defect".into(),
        relative((&s - &adjoint_m(&s, metric)).norm_fro(), n),
    );
    d.insert(
        "form_agreement_defect".into(),
        relative((&s_form_a - &s_form_b).norm_fro(), n),
    );
    d.insert(
        "series_agreement_defect".into(),
        relative((&s_series - &s_form_b).norm_fro(), n),
    );
    d.insert(
        "series_form_a_defect".into(),
        relative((&s_series - &s_form_a).norm_fro(), n),
    );
    d.insert(
        "form_a_commutator".into(),
        relative(commutator(&diff, &den).norm_fro(), n),
    );
    d.insert("arcsin_clamped".into(), (a.clamped + b.clamped) as f64);
    d.insert("form_b_branch_valid".into(), if branch_valid { 1.0 } else { 0.0 });
    d.insert("s_norm_2".into(), s.norm_spectral());

    Ok(GeneratorResult {
        s,
        s_form_a,
        s_form_b,
        s_series,
        metric,
        diagnostics: d,
    })
}

/// Defects of sin 2S = −i(βλ−λβ)/2 and cos 2S = (βλ+λβ)/2, with sin and cos
/// evaluated in the eigenbasis of the canonical S.
pub fn verify_trig_identities(
    g: &GeneratorResult,
    lambda: &BlockOperator,
    beta: &BetaMatrix,
) -> Result<BTreeMap<String, f64>> {
    let n = unit(lambda);
    let bl = beta.left(lambda);
    let lb = beta.right(lambda);
    let sin2 = map_spectrum(&g.s, g.metric, |e| (e * 2.0).sin())?;
    let cos2 = map_spectrum(&g.s, g.metric, |e| (e * 2.0).cos())?;
    let sin_target = i_times(&(&bl - &lb)).scale_re(-0.5);
    let cos_target = (&bl + &lb).scale_re(0.5);
    let mut d = BTreeMap::new();
    d.insert("sin2s_defect".into(), relative((&sin2 - &sin_target).norm_fro(), n));
    d.insert("cos2s_defect".into(), relative((&cos2 - &cos_target).norm_fro(), n));
    Ok(d)
}

/// ‖exp(iS) − U‖_F / ‖U‖_F for the canonical S.
pub fn verify_exp_equivalence(g: &GeneratorResult, u: &BlockOperator, metric: Metric) -> Result<f64> {
    let e = exp_i(&g.s, metric)?;
    Ok(relative((&e - u).norm_fro(), u.norm_fro()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eriksen::transform_stationary;
    use crate::models::{feshbach_villars, free_dirac};

    fn generator_for(p: f64) -> (GeneratorResult, crate::eriksen::FwResult, BetaMatrix) {
        let s = free_dirac(1.0, [0.0, 0.0, p]).unwrap();
        let r = transform_stationary(&s, 1e-8).unwrap();
        let g = generator_from_lambda(&r.lambda, &s.beta, Metric::Hermitian, 1e-10).unwrap();
        (g, r, s.beta)
    }

    #[test]
    fn lambda_beta_gives_zero_generator() {
        let beta = BetaMatrix::for_layout(crate::Layout::new(4, 1).unwrap());
        let g = generator_from_lambda(&beta.to_operator(), &beta, Metric::Hermitian, 1e-10).unwrap();
        assert_eq!(g.s.norm_fro(), 0.0);
        let t = verify_trig_identities(&g, &beta.to_operator(), &beta).unwrap();
        assert!(t["sin2s_defect"] < 1e-15 && t["cos2s_defect"] < 1e-15);
        let u = BlockOperator::identity(beta.layout());
        assert!(verify_exp_equivalence(&g, &u, Metric::Hermitian).unwrap() < 1e-15);
    }

    #[test]
    fn free_dirac_generator_norm() {
        let (g, r, beta) = generator_for(0.75);
        // sin 2S has eigenvalues ±|p|/E = ±0.6
        let want = 0.5 * 0.6f64.asin();
        assert!((g.s.norm_spectral() - want).abs() < 1e-12);
        assert!((want - 0.321_750_554_396_642_2).abs() < 1e-15);
        for (k, v) in &g.diagnostics {
            if k.ends_with("_defect") || k == "form_a_commutator" {
                assert!(*v < 1e-12, "{k} = {v}");
            }
        }
        let t = verify_trig_identities(&g, &r.lambda, &beta).unwrap();
        assert!(t["sin2s_defect"] < 1e-12 && t["cos2s_defect"] < 1e-12);
        assert!(verify_exp_equivalence(&g, &r.u, Metric::Hermitian).unwrap() < 1e-12);
    }

    #[test]
    fn small_momentum_limit() {
        let (g, _, _) = generator_for(1e-6);
        // leading order ½·arcsin(p/E) ≈ p/2
        let got = g.s.norm_spectral();
        assert!((got - 5e-7).abs() < 1e-15, "{got}");
    }

    #[test]
    fn corrupted_generator_is_detected() {
        let (mut g, r, _) = generator_for(0.75);
        let bump = BlockOperator::identity(g.s.layout()).scale_re(1e-4);
        g.s = &g.s + &bump;
        // exp(i(S+εI)) = e^{iε}U, so the defect is |e^{iε} − 1| ≈ ε
        let d = verify_exp_equivalence(&g, &r.u, Metric::Hermitian).unwrap();
        let want = (c64::new(0.0, 1e-4).exp() - c64::new(1.0, 0.0)).norm();
        assert!((d - want).abs() < 1e-12, "{d}");
    }

    #[test]
    fn boson_generator() {
        let s = feshbach_villars(1.0, 0.75).unwrap();
        let r = transform_stationary(&s, 1e-8).unwrap();
        let g = generator_from_lambda(&r.lambda, &s.beta, Metric::BetaPseudo, 1e-10).unwrap();
        assert!(g.form_b_branch_valid());
        for key in ["oddness_defect", "hermiticity_defect", "form_agreement_defect", "series_agreement_defect"] {
            assert!(g.diagnostics[key] < 1e-12, "{key} = {}", g.diagnostics[key]);
        }
        // closed form: S = −(i/2)·arcsinh(b/E)·τ₁ with b = p²/2m
        let b = 0.75f64 * 0.75 / 2.0;
        let theta = 0.5 * (b / 1.25).asinh();
        assert!((g.s.get(0, 1) - c64::new(0.0, -theta)).norm() < 1e-12);
        assert!((g.s.get(1, 0) - c64::new(0.0, -theta)).norm() < 1e-12);
        assert!(verify_exp_equivalence(&g, &r.u, Metric::BetaPseudo).unwrap() < 1e-12);
        let t = verify_trig_identities(&g, &r.lambda, &s.beta).unwrap();
        assert!(t["sin2s_defect"] < 1e-12 && t["cos2s_defect"] < 1e-12);
    }

    #[test]
    fn arcsin_ratio_series_matches_closed_form() {
        for y in [1e-9, -1e-9, 0.3, -0.4, 0.99] {
            let r = arcsin_ratio(c64::new(y, 0.0));
            let want = if y > 0.0 {
                y.sqrt().asin() / y.sqrt()
            } else {
                (-y).sqrt().asinh() / (-y).sqrt()
            };
            assert!((r.re - want).abs() < 1e-14 && r.im.abs() < 1e-14, "{y}");
        }
    }
}
