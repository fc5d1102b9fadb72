//! Concrete finite-dimensional Hamiltonians.
//!
//! Spin-1/2 models use the standard Dirac–Pauli representation
//! β = diag(1, 1, −1, −1), αᵢ = offdiag(σᵢ, σᵢ). The spin-0 model is the
//! two-component Feshbach–Villars form with β = τ₃ and the boson metric.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use faer::c64;

use crate::blockop::{adjoint_m, split, BetaMatrix, BlockOperator, Layout, Metric, SplitHamiltonian};
use crate::error::{FwError, Result};

fn c(re: f64, im: f64) -> c64 {
    c64::new(re, im)
}

const ZERO: c64 = c64 { re: 0.0, im: 0.0 };

fn pauli(k: usize) -> [[c64; 2]; 2] {
    match k {
        0 => [[ZERO, c(1.0, 0.0)], [c(1.0, 0.0), ZERO]],
        1 => [[ZERO, c(0.0, -1.0)], [c(0.0, 1.0), ZERO]],
        2 => [[c(1.0, 0.0), ZERO], [ZERO, c(-1.0, 0.0)]],
        _ => unreachable!("Pauli index out of range"),
    }
}

/// αₖ in the Dirac–Pauli basis, k ∈ {0, 1, 2} for x, y, z.
pub fn dirac_alpha(k: usize) -> [[c64; 4]; 4] {
    let s = pauli(k);
    let mut a = [[ZERO; 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            a[i][j + 2] = s[i][j];
            a[i + 2][j] = s[i][j];
        }
    }
    a
}

fn spinor_layout() -> Layout {
    Layout::stationary(4).expect("4 is a valid internal dimension")
}

fn from_4x4(m: [[c64; 4]; 4]) -> BlockOperator {
    BlockOperator::from_fn(spinor_layout(), |i, j| m[i][j])
}

/// α·p
pub fn alpha_dot(p: [f64; 3]) -> BlockOperator {
    let mut out = [[ZERO; 4]; 4];
    for (k, &pk) in p.iter().enumerate() {
        let a = dirac_alpha(k);
        for i in 0..4 {
            for j in 0..4 {
                out[i][j] += a[i][j] * pk;
            }
        }
    }
    from_4x4(out)
}

fn require_mass(m: f64) -> Result<()> {
    if m > 0.0 && m.is_finite() {
        Ok(())
    } else {
        Err(FwError::InvalidModel(format!("mass must be positive, got {m}")))
    }
}

/// ℋ = βm + α·p with ℳ = mI, ℰ = 0, 𝒪 = α·p.
pub fn free_dirac(m: f64, p: [f64; 3]) -> Result<SplitHamiltonian> {
    require_mass(m)?;
    let layout = spinor_layout();
    Ok(SplitHamiltonian {
        mass: BlockOperator::identity(layout).scale_re(m),
        even: BlockOperator::zeros(layout),
        odd: alpha_dot(p),
        beta: BetaMatrix::for_layout(layout),
        metric: Metric::Hermitian,
    })
}

/// Grid momenta of the N-point periodic box in FFT order, Nyquist mode set
/// to zero so that the derivative matrix stays Hermitian and real-preserving.
pub fn grid_momenta(n: usize, l: f64) -> Vec<f64> {
    (0..n)
        .map(|j| {
            let idx = if j <= n / 2 { j as i64 } else { j as i64 - n as i64 };
            if n.is_multiple_of(2) && j == n / 2 {
                0.0
            } else {
                2.0 * PI * idx as f64 / l
            }
        })
        .collect()
}

/// Spectral representation of −i d/dx on the uniform periodic grid
/// x_j = jL/N.
pub fn spectral_momentum(n: usize, l: f64) -> Vec<Vec<c64>> {
    let ks = grid_momenta(n, l);
    let dx = l / n as f64;
    let mut p = vec![vec![ZERO; n]; n];
    for (j, row) in p.iter_mut().enumerate() {
        for (k, entry) in row.iter_mut().enumerate() {
            let sep = (j as f64 - k as f64) * dx;
            let mut acc = ZERO;
            for &kn in &ks {
                acc += c64::from_polar(kn, kn * sep);
            }
            *entry = acc / n as f64;
        }
    }
    p
}

/// One-dimensional Dirac Hamiltonian on a periodic grid along x.
///
/// The basis is spinor-major: index = 4-spinor component × N + grid point,
/// so the internal dimension is 4N and β = diag(I_{2N}, −I_{2N}).
/// 𝒪 = α_x ⊗ P with P the spectral momentum, ℰ = I₄ ⊗ diag(V(x_j)), ℳ = mI.
pub fn dirac_1d(m: f64, n: usize, l: f64, v: impl Fn(f64) -> f64) -> Result<SplitHamiltonian> {
    require_mass(m)?;
    if n < 8 || !n.is_multiple_of(2) {
        return Err(FwError::InvalidModel(format!(
            "grid size must be even and >= 8, got {n}"
        )));
    }
    if !(l > 0.0 && l.is_finite()) {
        return Err(FwError::InvalidModel(format!("box length must be positive, got {l}")));
    }
    let potential: Vec<f64> = (0..n).map(|j| v(j as f64 * l / n as f64)).collect();
    if let Some(bad) = potential.iter().find(|x| !x.is_finite()) {
        return Err(FwError::MetricViolation(format!(
            "potential must be real and finite, got {bad}"
        )));
    }
    let layout = Layout::stationary(4 * n)?;
    let p = spectral_momentum(n, l);
    let ax = dirac_alpha(0);
    let odd = BlockOperator::from_fn(layout, |i, j| {
        let (s, x) = (i / n, i % n);
        let (t, y) = (j / n, j % n);
        ax[s][t] * p[x][y]
    });
    let even = BlockOperator::from_fn(layout, |i, j| {
        if i == j {
            c(potential[i % n], 0.0)
        } else {
            ZERO
        }
    });
    Ok(SplitHamiltonian {
        mass: BlockOperator::identity(layout).scale_re(m),
        even,
        odd,
        beta: BetaMatrix::for_layout(layout),
        metric: Metric::Hermitian,
    })
}

/// Spin-0 Feshbach–Villars Hamiltonian
/// ℋ = τ₃(m + p²/2m) + iτ₂·p²/2m under the β = τ₃ metric.
pub fn feshbach_villars(m: f64, p: f64) -> Result<SplitHamiltonian> {
    require_mass(m)?;
    let layout = Layout::stationary(2)?;
    let kin = p * p / (2.0 * m);
    let odd = BlockOperator::from_fn(layout, |i, j| match (i, j) {
        (0, 1) => c(kin, 0.0),
        (1, 0) => c(-kin, 0.0),
        _ => ZERO,
    });
    Ok(SplitHamiltonian {
        mass: BlockOperator::identity(layout).scale_re(m + kin),
        even: BlockOperator::zeros(layout),
        odd,
        beta: BetaMatrix::for_layout(layout),
        metric: Metric::BetaPseudo,
    })
}

/// ℋ(t) = Σₙ Hₙ e^{−inωt}.
#[derive(Debug, Clone)]
pub struct TimePeriodicHamiltonian {
    modes: BTreeMap<i32, BlockOperator>,
    omega: f64,
    layout: Layout,
    metric: Metric,
}

impl TimePeriodicHamiltonian {
    /// Validates H₋ₙ = Hₙ‡ and self-adjointness of ℋ(t) on a time grid.
    pub fn new(modes: BTreeMap<i32, BlockOperator>, omega: f64, metric: Metric) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(FwError::InvalidModel(format!("omega must be positive, got {omega}")));
        }
        let layout = modes
            .values()
            .next()
            .map(|h| h.layout())
            .ok_or_else(|| FwError::InvalidModel("no Fourier modes".into()))?;
        if layout.floquet_copies != 1 {
            return Err(FwError::Structure("modes must be stationary operators".into()));
        }
        for (&n, h) in &modes {
            if h.layout() != layout {
                return Err(FwError::ShapeMismatch {
                    left: h.layout().to_string(),
                    right: layout.to_string(),
                });
            }
            let partner = modes.get(&-n).ok_or_else(|| {
                FwError::MetricViolation(format!("mode {n} has no partner mode {}", -n))
            })?;
            let defect = (&adjoint_m(h, metric) - partner).norm_fro();
            if defect > 1e-12 * h.norm_fro().max(1.0) {
                return Err(FwError::MetricViolation(format!(
                    "mode {} is not the adjoint of mode {n} (defect {defect:.3e})",
                    -n
                )));
            }
        }
        let out = Self {
            modes,
            omega,
            layout,
            metric,
        };
        let period = out.period();
        for k in 0..16 {
            let h = out.at(period * k as f64 / 16.0);
            let defect = (&h - &adjoint_m(&h, metric)).norm_fro();
            if defect > 1e-12 * h.norm_fro().max(1.0) {
                return Err(FwError::MetricViolation(format!(
                    "H(t) is not self-adjoint at sample {k} (defect {defect:.3e})"
                )));
            }
        }
        Ok(out)
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn modes(&self) -> &BTreeMap<i32, BlockOperator> {
        &self.modes
    }

    pub fn mode(&self, n: i32) -> Option<&BlockOperator> {
        self.modes.get(&n)
    }

    pub fn max_harmonic(&self) -> i32 {
        self.modes.keys().map(|n| n.abs()).max().unwrap_or(0)
    }

    pub fn is_static(&self) -> bool {
        self.max_harmonic() == 0
    }

    pub fn at(&self, t: f64) -> BlockOperator {
        let mut acc = BlockOperator::zeros(self.layout);
        for (&n, h) in &self.modes {
            let phase = c64::from_polar(1.0, -(n as f64) * self.omega * t);
            acc = &acc + &h.scale(phase);
        }
        acc
    }
}

fn dirac_drive(m: f64, p: [f64; 3], drive: Option<BlockOperator>, omega: f64) -> Result<TimePeriodicHamiltonian> {
    let base = free_dirac(m, p)?.hamiltonian();
    let mut modes = BTreeMap::new();
    modes.insert(0, base);
    if let Some(h1) = drive {
        modes.insert(-1, h1.dagger());
        modes.insert(1, h1);
    }
    TimePeriodicHamiltonian::new(modes, omega, Metric::Hermitian)
}

/// ℋ(t) = α·p + βm + V₁cos(ωt)·I, so H₀ = α·p + βm and H±₁ = (V₁/2)·I.
pub fn floquet_dirac_scalar(m: f64, p: [f64; 3], v1: f64, omega: f64) -> Result<TimePeriodicHamiltonian> {
    let drive = (v1 != 0.0).then(|| BlockOperator::identity(spinor_layout()).scale_re(v1 / 2.0));
    dirac_drive(m, p, drive, omega)
}

/// ℋ(t) = α·(p − A₁cos(ωt) ẑ) + βm, so H±₁ = −(A₁/2)·α_z.
pub fn floquet_dirac_vector(m: f64, p: [f64; 3], a1: f64, omega: f64) -> Result<TimePeriodicHamiltonian> {
    let drive = (a1 != 0.0).then(|| alpha_dot([0.0, 0.0, -a1 / 2.0]));
    dirac_drive(m, p, drive, omega)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    FreeDirac,
    Dirac1D,
    FeshbachVillars,
    FloquetDiracScalar,
    FloquetDiracVector,
}

/// One entry of a model's parameter schema.
#[derive(Debug, Clone, Copy)]
pub struct ParamInfo {
    pub name: &'static str,
    pub default: f64,
    pub description: &'static str,
}

const fn param(name: &'static str, default: f64, description: &'static str) -> ParamInfo {
    ParamInfo {
        name,
        default,
        description,
    }
}

const FREE_DIRAC_PARAMS: &[ParamInfo] = &[
    param("m", 1.0, "mass"),
    param("px", 0.0, "momentum x"),
    param("py", 0.0, "momentum y"),
    param("pz", 0.75, "momentum z"),
];
const DIRAC_1D_PARAMS: &[ParamInfo] = &[
    param("m", 1.0, "mass"),
    param("n", 32.0, "grid points (power of two >= 8)"),
    param("l", 2.0 * PI, "box length"),
    param("v0", 0.0, "constant potential"),
    param("v1", 0.2, "amplitude of v1*cos(2*pi*x/l)"),
];
const FV_PARAMS: &[ParamInfo] = &[param("m", 1.0, "mass"), param("p", 0.75, "momentum")];
const SCALAR_PARAMS: &[ParamInfo] = &[
    param("m", 1.0, "mass"),
    param("px", 0.0, "momentum x"),
    param("py", 0.0, "momentum y"),
    param("pz", 0.5, "momentum z"),
    param("v1", 0.2, "scalar drive amplitude, V(t) = v1*cos(omega*t)"),
    param("omega", 0.1, "drive frequency"),
    param("nf", 8.0, "Floquet truncation order"),
];
const VECTOR_PARAMS: &[ParamInfo] = &[
    param("m", 1.0, "mass"),
    param("px", 0.0, "momentum x"),
    param("py", 0.0, "momentum y"),
    param("pz", 0.5, "momentum z"),
    param("a1", 0.2, "vector potential amplitude, A(t) = a1*cos(omega*t) along z"),
    param("omega", 0.06, "drive frequency"),
    param("nf", 8.0, "Floquet truncation order"),
];

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::FreeDirac,
        ModelKind::Dirac1D,
        ModelKind::FeshbachVillars,
        ModelKind::FloquetDiracScalar,
        ModelKind::FloquetDiracVector,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::FreeDirac => "free-dirac",
            ModelKind::Dirac1D => "dirac-1d",
            ModelKind::FeshbachVillars => "feshbach-villars",
            ModelKind::FloquetDiracScalar => "floquet-dirac-scalar",
            ModelKind::FloquetDiracVector => "floquet-dirac-vector",
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            ModelKind::FreeDirac => "spin-1/2 free Dirac, 4x4, H = alpha.p + beta*m",
            ModelKind::Dirac1D => "spin-1/2 Dirac on a periodic grid in x with potential V(x)",
            ModelKind::FeshbachVillars => "spin-0 Feshbach-Villars, 2x2, beta-pseudo-Hermitian",
            ModelKind::FloquetDiracScalar => "free Dirac plus time-periodic scalar potential",
            ModelKind::FloquetDiracVector => "free Dirac plus time-periodic vector potential along z",
        }
    }

    pub fn params(&self) -> &'static [ParamInfo] {
        match self {
            ModelKind::FreeDirac => FREE_DIRAC_PARAMS,
            ModelKind::Dirac1D => DIRAC_1D_PARAMS,
            ModelKind::FeshbachVillars => FV_PARAMS,
            ModelKind::FloquetDiracScalar => SCALAR_PARAMS,
            ModelKind::FloquetDiracVector => VECTOR_PARAMS,
        }
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self, ModelKind::FloquetDiracScalar | ModelKind::FloquetDiracVector)
    }

    pub fn parse(name: &str) -> Result<Self> {
        let norm = name.to_ascii_lowercase().replace('_', "-");
        Self::ALL
            .into_iter()
            .find(|k| k.name() == norm)
            .ok_or_else(|| FwError::InvalidModel(format!("unknown model '{name}'")))
    }
}

/// A model name with parameter overrides; unspecified parameters take the
/// catalog defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub params: BTreeMap<String, f64>,
}

/// A built model, ready for transformation.
#[derive(Debug, Clone)]
pub enum Model {
    Stationary(SplitHamiltonian),
    Periodic {
        hamiltonian: TimePeriodicHamiltonian,
        nf: usize,
    },
}

fn as_count(name: &str, v: f64) -> Result<usize> {
    if v.fract() != 0.0 || v < 0.0 || !v.is_finite() {
        return Err(FwError::InvalidModel(format!("{name} must be a non-negative integer, got {v}")));
    }
    Ok(v as usize)
}

impl ModelSpec {
    pub fn new(kind: ModelKind) -> Self {
        Self {
            kind,
            params: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    /// Every schema parameter with overrides applied.
    pub fn resolved(&self) -> Result<BTreeMap<String, f64>> {
        let schema = self.kind.params();
        for key in self.params.keys() {
            if !schema.iter().any(|p| p.name == key) {
                return Err(FwError::InvalidModel(format!(
                    "unknown parameter '{key}' for model {}",
                    self.kind.name()
                )));
            }
        }
        let mut out = BTreeMap::new();
        for p in schema {
            let v = self.params.get(p.name).copied().unwrap_or(p.default);
            if !v.is_finite() {
                return Err(FwError::InvalidModel(format!("parameter {} is not finite", p.name)));
            }
            out.insert(p.name.to_string(), v);
        }
        Ok(out)
    }

    pub fn build(&self) -> Result<Model> {
        let p = self.resolved()?;
        let g = |k: &str| p[k];
        let momentum = || [g("px"), g("py"), g("pz")];
        match self.kind {
            ModelKind::FreeDirac => Ok(Model::Stationary(free_dirac(g("m"), momentum())?)),
            ModelKind::Dirac1D => {
                let n = as_count("n", g("n"))?;
                if n < 8 || !n.is_power_of_two() {
                    return Err(FwError::InvalidModel(format!(
                        "grid size must be a power of two >= 8, got {n}"
                    )));
                }
                let (l, v0, v1) = (g("l"), g("v0"), g("v1"));
                let split = dirac_1d(g("m"), n, l, |x| v0 + v1 * (2.0 * PI * x / l).cos())?;
                Ok(Model::Stationary(split))
            }
            ModelKind::FeshbachVillars => Ok(Model::Stationary(feshbach_villars(g("m"), g("p"))?)),
            ModelKind::FloquetDiracScalar | ModelKind::FloquetDiracVector => {
                let nf = as_count("nf", g("nf"))?;
                if nf < 1 {
                    return Err(FwError::InvalidModel("nf must be >= 1".into()));
                }
                let hamiltonian = if self.kind == ModelKind::FloquetDiracScalar {
                    floquet_dirac_scalar(g("m"), momentum(), g("v1"), g("omega"))?
                } else {
                    floquet_dirac_vector(g("m"), momentum(), g("a1"), g("omega"))?
                };
                Ok(Model::Periodic { hamiltonian, nf })
            }
        }
    }
}

/// Re-split a Hamiltonian against its declared mass operator, checking the
/// even/odd structure at `tol`.
pub fn validated(split_h: &SplitHamiltonian, tol: f64) -> Result<SplitHamiltonian> {
    split(
        &split_h.hamiltonian(),
        &split_h.mass,
        &split_h.beta,
        split_h.metric,
        tol,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blockop::{even_part, odd_part};
    use crate::matfun::decompose;

    fn sorted(mut v: Vec<f64>) -> Vec<f64> {
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn free_dirac_at_rest_is_beta() {
        let h = free_dirac(1.0, [0.0; 3]).unwrap().hamiltonian();
        assert_eq!(h, BetaMatrix::for_layout(h.layout()).to_operator());
        let h2 = free_dirac(2.0, [0.0; 3]).unwrap().hamiltonian();
        assert_eq!(h2, BetaMatrix::for_layout(h.layout()).to_operator().scale_re(2.0));
    }

    #[test]
    fn free_dirac_spectrum() {
        let s = free_dirac(1.0, [0.0, 0.0, 0.75]).unwrap();
        let e = decompose(&s.hamiltonian(), Metric::Hermitian).unwrap().real_eigenvalues();
        for (got, want) in e.iter().zip([-1.25, -1.25, 1.25, 1.25]) {
            assert!((got - want).abs() < 1e-12, "{e:?}");
        }
        // oblique momentum
        let s = free_dirac(0.8, [0.3, -0.4, 0.2]).unwrap();
        let want = (0.64f64 + 0.09 + 0.16 + 0.04).sqrt();
        let e = decompose(&s.hamiltonian(), Metric::Hermitian).unwrap().real_eigenvalues();
        assert!((e[3] - want).abs() < 1e-12 && (e[0] + want).abs() < 1e-12);
    }

    #[test]
    fn models_reject_nonpositive_mass() {
        assert!(free_dirac(0.0, [0.0; 3]).is_err());
        assert!(feshbach_villars(-1.0, 0.5).is_err());
    }

    #[test]
    fn catalog_models_pass_structure_validation() {
        for s in [
            free_dirac(1.0, [0.1, 0.2, 0.3]).unwrap(),
            feshbach_villars(1.0, 0.75).unwrap(),
            dirac_1d(1.0, 16, 2.0 * PI, |x| 0.2 * x.cos()).unwrap(),
        ] {
            validated(&s, 1e-12).unwrap();
        }
    }

    #[test]
    fn grid_free_spectrum_matches_dispersion() {
        let (n, l, m) = (8, 2.0 * PI, 1.0);
        let s = dirac_1d(m, n, l, |_| 0.0).unwrap();
        let e = decompose(&s.hamiltonian(), Metric::Hermitian).unwrap().real_eigenvalues();
        // analytic oracle: ±√(m²+k²), each twice (spin), per grid momentum
        let mut want = Vec::new();
        for k in grid_momenta(n, l) {
            let w = (m * m + k * k).sqrt();
            want.extend([w, w, -w, -w]);
        }
        let want = sorted(want);
        for (a, b) in e.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn grid_constant_potential_shifts_spectrum() {
        let free = dirac_1d(1.0, 8, 3.0, |_| 0.0).unwrap().hamiltonian();
        let shifted = dirac_1d(1.0, 8, 3.0, |_| 0.3).unwrap().hamiltonian();
        let a = decompose(&free, Metric::Hermitian).unwrap().real_eigenvalues();
        let b = decompose(&shifted, Metric::Hermitian).unwrap().real_eigenvalues();
        for (x, y) in a.iter().zip(&b) {
            assert!((x + 0.3 - y).abs() < 1e-12);
        }
    }

    #[test]
    fn grid_cosine_potential_structure() {
        let s = dirac_1d(1.0, 32, 2.0 * PI, |x| 0.2 * x.cos()).unwrap();
        let h = s.hamiltonian();
        assert!((&h - &h.dagger()).norm_fro() < 1e-12 * h.norm_fro());
        let beta = &s.beta;
        assert!(odd_part(&s.even, beta).unwrap().norm_fro() < 1e-12);
        assert!(even_part(&s.odd, beta).unwrap().norm_fro() < 1e-12);
        // ℰ is the sampled potential on every spinor component
        assert!((s.even.get(0, 0).re - 0.2).abs() < 1e-15);
        assert!((s.even.get(32 + 16, 32 + 16).re + 0.2).abs() < 1e-15);
    }

    #[test]
    fn spectral_momentum_differentiates_plane_waves() {
        let (n, l) = (16, 2.0);
        let p = spectral_momentum(n, l);
        let k = 2.0 * PI * 3.0 / l;
        let f: Vec<c64> = (0..n).map(|j| c64::from_polar(1.0, k * j as f64 * l / n as f64)).collect();
        for (j, row) in p.iter().enumerate() {
            let pf: c64 = row.iter().zip(&f).map(|(a, b)| a * b).sum();
            assert!((pf - f[j] * k).norm() < 1e-12);
        }
    }

    #[test]
    fn feshbach_villars_structure_and_spectrum() {
        let s = feshbach_villars(1.0, 0.0).unwrap();
        assert_eq!(s.hamiltonian(), BetaMatrix::for_layout(s.layout()).to_operator());

        let s = feshbach_villars(1.0, 0.75).unwrap();
        let h = s.hamiltonian();
        let e = decompose(&h, Metric::BetaPseudo).unwrap().real_eigenvalues();
        assert!((e[0] + 1.25).abs() < 1e-12 && (e[1] - 1.25).abs() < 1e-12);
        assert!((&adjoint_m(&h, Metric::BetaPseudo) - &h).norm_fro() < 1e-15);
        assert!((&h.dagger() - &h).norm_fro() > 0.1);
    }

    #[test]
    fn scalar_drive_modes() {
        let h = floquet_dirac_scalar(1.0, [0.0, 0.0, 0.5], 0.0, 0.3).unwrap();
        assert!(h.is_static());
        assert_eq!(h.modes().len(), 1);

        let h = floquet_dirac_scalar(1.0, [0.0, 0.0, 0.5], 0.2, 0.3).unwrap();
        assert_eq!(h.modes().len(), 3);
        let h1 = h.mode(1).unwrap();
        let want = BlockOperator::identity(h1.layout()).scale_re(0.1);
        assert!((h1 - &want).norm_fro() < 1e-16);
        let at0 = h.at(0.0);
        let want0 = free_dirac(1.0, [0.0, 0.0, 0.5]).unwrap().hamiltonian().shift(0.2);
        assert!((&at0 - &want0).norm_fro() < 1e-15);
    }

    #[test]
    fn vector_drive_modes_and_hermiticity() {
        let h = floquet_dirac_vector(1.0, [0.0, 0.0, 0.5], 0.0, 0.3).unwrap();
        assert!(h.is_static());
        let h = floquet_dirac_vector(1.0, [0.0, 0.0, 0.5], 0.4, 0.3).unwrap();
        let want = alpha_dot([0.0, 0.0, -0.2]);
        assert!((h.mode(-1).unwrap() - &want).norm_fro() < 1e-16);
        for k in 0..7 {
            let ht = h.at(0.37 * k as f64);
            assert!((&ht - &ht.dagger()).norm_fro() < 1e-12);
        }
        let quarter = h.at(h.period() / 4.0);
        let want = free_dirac(1.0, [0.0, 0.0, 0.5]).unwrap().hamiltonian();
        assert!((&quarter - &want).norm_fro() < 1e-12);
    }

    #[test]
    fn spec_parsing_and_validation() {
        assert_eq!(ModelKind::parse("free_dirac").unwrap(), ModelKind::FreeDirac);
        assert!(ModelKind::parse("klein-gordon").is_err());
        let bad = ModelSpec::new(ModelKind::FreeDirac).with("q", 1.0);
        assert!(bad.build().is_err());
        let bad_grid = ModelSpec::new(ModelKind::Dirac1D).with("n", 24.0);
        assert!(bad_grid.build().is_err());
        let bad_nf = ModelSpec::new(ModelKind::FloquetDiracScalar).with("nf", 0.0);
        assert!(bad_nf.build().is_err());
        let bad_omega = ModelSpec::new(ModelKind::FloquetDiracVector).with("omega", 0.0);
        assert!(bad_omega.build().is_err());
        assert!(matches!(
            ModelSpec::new(ModelKind::FloquetDiracScalar).build().unwrap(),
            Model::Periodic { nf: 8, .. }
        ));
    }
}
