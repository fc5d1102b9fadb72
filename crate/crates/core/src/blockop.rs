//! Block-operator algebra over the two spinor-like blocks.
//!
//! Every operator carries its [`Layout`]: an internal dimension split into an
//! upper and a lower half of equal size, replicated over `floquet_copies`
//! Fourier blocks. β is fixed by the layout, so even/odd projections and the
//! boson metric never need a separately supplied matrix to agree with.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use faer::{c64, Mat, Scale};

use crate::error::{FwError, Result};
use crate::tolerance::relative;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Layout {
    pub internal_dim: usize,
    pub floquet_copies: usize,
}

impl Layout {
    pub fn new(internal_dim: usize, floquet_copies: usize) -> Result<Self> {
        if internal_dim < 2 || !internal_dim.is_multiple_of(2) {
            return Err(FwError::Structure(format!(
                "internal dimension must be even and >= 2, got {internal_dim}"
            )));
        }
        if floquet_copies == 0 {
            return Err(FwError::Structure("floquet_copies must be >= 1".into()));
        }
        Ok(Self {
            internal_dim,
            floquet_copies,
        })
    }

    pub fn stationary(internal_dim: usize) -> Result<Self> {
        Self::new(internal_dim, 1)
    }

    pub fn side(&self) -> usize {
        self.internal_dim * self.floquet_copies
    }

    /// β eigenvalue (+1 upper, −1 lower) of basis index `i`.
    pub fn beta_sign(&self, i: usize) -> f64 {
        if i % self.internal_dim < self.internal_dim / 2 {
            1.0
        } else {
            -1.0
        }
    }
}

impl fmt::Display for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}x{} (internal_dim={}, floquet_copies={})",
            self.side(),
            self.side(),
            self.internal_dim,
            self.floquet_copies
        )
    }
}

/// Square complex matrix tagged with its β block structure.
#[derive(Clone, PartialEq)]
pub struct BlockOperator {
    data: Mat<c64>,
    layout: Layout,
}

impl fmt::Debug for BlockOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BlockOperator")
            .field("layout", &self.layout)
            .field("data", &self.data)
            .finish()
    }
}

impl BlockOperator {
    pub fn new(data: Mat<c64>, layout: Layout) -> Result<Self> {
        if data.nrows() != layout.side() || data.ncols() != layout.side() {
            return Err(FwError::ShapeMismatch {
                left: format!("{}x{}", data.nrows(), data.ncols()),
                right: layout.to_string(),
            });
        }
        Ok(Self { data, layout })
    }

    pub fn from_fn(layout: Layout, f: impl FnMut(usize, usize) -> c64) -> Self {
        let n = layout.side();
        Self {
            data: Mat::from_fn(n, n, f),
            layout,
        }
    }

    pub fn zeros(layout: Layout) -> Self {
        let n = layout.side();
        Self {
            data: Mat::zeros(n, n),
            layout,
        }
    }

    pub fn identity(layout: Layout) -> Self {
        let n = layout.side();
        Self {
            data: Mat::identity(n, n),
            layout,
        }
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn dim(&self) -> usize {
        self.layout.side()
    }

    pub fn data(&self) -> &Mat<c64> {
        &self.data
    }

    pub fn into_data(self) -> Mat<c64> {
        self.data
    }

    pub fn get(&self, i: usize, j: usize) -> c64 {
        self.data[(i, j)]
    }

    /// Reinterpret the same matrix under another layout of equal side.
    pub fn with_layout(self, layout: Layout) -> Result<Self> {
        Self::new(self.data, layout)
    }

    pub fn check_same_layout(&self, other: &Self) -> Result<()> {
        if self.layout != other.layout {
            return Err(FwError::ShapeMismatch {
                left: self.layout.to_string(),
                right: other.layout.to_string(),
            });
        }
        Ok(())
    }

    pub fn scale(&self, c: c64) -> Self {
        Self {
            data: Scale(c) * &self.data,
            layout: self.layout,
        }
    }

    pub fn scale_re(&self, c: f64) -> Self {
        self.scale(c64::new(c, 0.0))
    }

    /// `self + c·I`
    pub fn shift(&self, c: f64) -> Self {
        let mut out = self.clone();
        for i in 0..self.dim() {
            out.data[(i, i)] += c64::new(c, 0.0);
        }
        out
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self {
            data: self.data.adjoint().to_owned(),
            layout: self.layout,
        }
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.norm_l2()
    }

    /// Largest singular value.
    pub fn norm_spectral(&self) -> f64 {
        if self.dim() == 0 {
            return 0.0;
        }
        match self.data.singular_values() {
            Ok(s) => s.first().copied().unwrap_or(0.0),
            Err(_) => self.norm_fro(),
        }
    }

    pub fn trace(&self) -> c64 {
        (0..self.dim()).map(|i| self.data[(i, i)]).sum()
    }

    /// Copy of the `(row_copy, col_copy)` Floquet block.
    pub fn floquet_block(&self, row_copy: usize, col_copy: usize) -> Mat<c64> {
        let d = self.layout.internal_dim;
        self.data
            .submatrix(row_copy * d, col_copy * d, d, d)
            .to_owned()
    }

    /// Principal submatrix made of the Floquet copies `first..first+count`.
    pub fn copy_window(&self, first: usize, count: usize) -> Result<Self> {
        if count == 0 || first + count > self.layout.floquet_copies {
            return Err(FwError::Structure(format!(
                "window {first}..{} outside {} Floquet copies",
                first + count,
                self.layout.floquet_copies
            )));
        }
        let d = self.layout.internal_dim;
        let data = self
            .data
            .submatrix(first * d, first * d, count * d, count * d)
            .to_owned();
        Self::new(data, Layout::new(d, count)?)
    }

    /// Largest |entry| outside the diagonal Floquet blocks.
    pub fn off_block_max(&self) -> f64 {
        let d = self.layout.internal_dim;
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for j in 0..n {
            for i in 0..n {
                if i / d != j / d {
                    worst = worst.max(self.data[(i, j)].norm());
                }
            }
        }
        worst
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same_layout(other)?;
        Ok(Self {
            data: &self.data + &other.data,
            layout: self.layout,
        })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_same_layout(other)?;
        Ok(Self {
            data: &self.data - &other.data,
            layout: self.layout,
        })
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_same_layout(other)?;
        Ok(Self {
            data: &self.data * &other.data,
            layout: self.layout,
        })
    }
}

// Operator sugar for internal arithmetic between operators already known to
// share a layout. Mismatches are programming errors and panic.

impl Add for &BlockOperator {
    type Output = BlockOperator;
    fn add(self, rhs: &BlockOperator) -> BlockOperator {
        self.try_add(rhs).expect("layout mismatch in operator addition")
    }
}

impl Sub for &BlockOperator {
    type Output = BlockOperator;
    fn sub(self, rhs: &BlockOperator) -> BlockOperator {
        self.try_sub(rhs).expect("layout mismatch in operator subtraction")
    }
}

impl Mul for &BlockOperator {
    type Output = BlockOperator;
    fn mul(self, rhs: &BlockOperator) -> BlockOperator {
        self.try_mul(rhs).expect("layout mismatch in operator product")
    }
}

impl Neg for &BlockOperator {
    type Output = BlockOperator;
    fn neg(self) -> BlockOperator {
        self.scale_re(-1.0)
    }
}

/// `AB − BA`
pub fn commutator(a: &BlockOperator, b: &BlockOperator) -> BlockOperator {
    &(a * b) - &(b * a)
}

/// `AB + BA`
pub fn anticommutator(a: &BlockOperator, b: &BlockOperator) -> BlockOperator {
    &(a * b) + &(b * a)
}

/// The grading operator diag(+I, −I) per internal block, replicated over the
/// Floquet copies. Stored as its diagonal so that products with it are exact
/// sign flips.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaMatrix {
    layout: Layout,
    signs: Vec<f64>,
}

impl BetaMatrix {
    pub fn for_layout(layout: Layout) -> Self {
        let signs = (0..layout.side()).map(|i| layout.beta_sign(i)).collect();
        Self { layout, signs }
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn signs(&self) -> &[f64] {
        &self.signs
    }

    pub fn to_operator(&self) -> BlockOperator {
        BlockOperator::from_fn(self.layout, |i, j| {
            if i == j {
                c64::new(self.signs[i], 0.0)
            } else {
                c64::new(0.0, 0.0)
            }
        })
    }

    fn check(&self, a: &BlockOperator) -> Result<()> {
        if a.layout != self.layout {
            return Err(FwError::ShapeMismatch {
                left: a.layout.to_string(),
                right: self.layout.to_string(),
            });
        }
        Ok(())
    }

    /// βA
    pub fn left(&self, a: &BlockOperator) -> BlockOperator {
        BlockOperator::from_fn(a.layout, |i, j| a.data[(i, j)] * self.signs[i])
    }

    /// Aβ
    pub fn right(&self, a: &BlockOperator) -> BlockOperator {
        BlockOperator::from_fn(a.layout, |i, j| a.data[(i, j)] * self.signs[j])
    }

    /// βAβ
    pub fn sandwich(&self, a: &BlockOperator) -> BlockOperator {
        BlockOperator::from_fn(a.layout, |i, j| {
            a.data[(i, j)] * (self.signs[i] * self.signs[j])
        })
    }
}

/// Construct β for `internal_dim` (even) replicated over `floquet_copies`.
pub fn beta_matrix(internal_dim: usize, floquet_copies: usize) -> Result<BetaMatrix> {
    Ok(BetaMatrix::for_layout(Layout::new(
        internal_dim,
        floquet_copies,
    )?))
}

/// (A + βAβ)/2. Entries of βAβ are ±A exactly, so the result is the
/// block-diagonal part of A with no rounding.
pub fn even_part(a: &BlockOperator, beta: &BetaMatrix) -> Result<BlockOperator> {
    beta.check(a)?;
    Ok(BlockOperator::from_fn(a.layout, |i, j| {
        let s = beta.signs[i] * beta.signs[j];
        (a.data[(i, j)] + a.data[(i, j)] * s) * 0.5
    }))
}

/// (A − βAβ)/2, the block-antidiagonal part of A.
pub fn odd_part(a: &BlockOperator, beta: &BetaMatrix) -> Result<BlockOperator> {
    beta.check(a)?;
    Ok(BlockOperator::from_fn(a.layout, |i, j| {
        let s = beta.signs[i] * beta.signs[j];
        (a.data[(i, j)] - a.data[(i, j)] * s) * 0.5
    }))
}

/// ‖odd_part(A)‖_F / ‖A‖_F
pub fn relative_odd_norm(a: &BlockOperator) -> f64 {
    let beta = BetaMatrix::for_layout(a.layout);
    let odd = odd_part(a, &beta).expect("β built from the operator's own layout");
    relative(odd.norm_fro(), a.norm_fro())
}

/// Adjoint convention of the state space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    /// A‡ = A†
    Hermitian,
    /// A‡ = βA†β (bosons)
    BetaPseudo,
}

impl Metric {
    pub fn as_str(&self) -> &'static str {
        match self {
            Metric::Hermitian => "hermitian",
            Metric::BetaPseudo => "beta-pseudo",
        }
    }
}

/// Metric-aware adjoint. β is taken from the operator's layout.
pub fn adjoint_m(a: &BlockOperator, metric: Metric) -> BlockOperator {
    let dag = a.dagger();
    match metric {
        Metric::Hermitian => dag,
        Metric::BetaPseudo => BetaMatrix::for_layout(a.layout).sandwich(&dag),
    }
}

/// ‖A − A‡‖_F / ‖A‖_F
pub fn self_adjoint_defect(a: &BlockOperator, metric: Metric) -> f64 {
    relative((a - &adjoint_m(a, metric)).norm_fro(), a.norm_fro())
}

/// ℋ = βℳ + ℰ + 𝒪 with its declared mass operator.
#[derive(Debug, Clone)]
pub struct SplitHamiltonian {
    pub mass: BlockOperator,
    pub even: BlockOperator,
    pub odd: BlockOperator,
    pub beta: BetaMatrix,
    pub metric: Metric,
}

impl SplitHamiltonian {
    pub fn hamiltonian(&self) -> BlockOperator {
        &(&self.beta.left(&self.mass) + &self.even) + &self.odd
    }

    pub fn layout(&self) -> Layout {
        self.mass.layout
    }

    /// Check the commutation structure and metric self-adjointness at
    /// `tol` relative to ‖ℋ‖_F.
    pub fn validate(&self, tol: f64) -> Result<()> {
        for op in [&self.mass, &self.even, &self.odd] {
            self.beta.check(op)?;
        }
        let h = self.hamiltonian();
        let scale = h.norm_fro().max(1.0);
        let mass_odd = odd_part(&self.mass, &self.beta)?.norm_fro() / scale;
        if mass_odd > tol {
            return Err(FwError::Structure(format!(
                "mass operator is not even (odd part {mass_odd:.3e})"
            )));
        }
        let even_odd = odd_part(&self.even, &self.beta)?.norm_fro() / scale;
        if even_odd > tol {
            return Err(FwError::Structure(format!(
                "even operator has an odd part {even_odd:.3e}"
            )));
        }
        let odd_even = even_part(&self.odd, &self.beta)?.norm_fro() / scale;
        if odd_even > tol {
            return Err(FwError::Structure(format!(
                "odd operator has an even part {odd_even:.3e}"
            )));
        }
        let sa = (&h - &adjoint_m(&h, self.metric)).norm_fro() / scale;
        if sa > tol {
            return Err(FwError::MetricViolation(format!(
                "Hamiltonian is not {}-self-adjoint (defect {sa:.3e})",
                self.metric.as_str()
            )));
        }
        Ok(())
    }
}

/// Split ℋ against a declared even mass operator ℳ:
/// ℰ = even_part(ℋ) − βℳ, 𝒪 = odd_part(ℋ).
pub fn split(
    h: &BlockOperator,
    mass: &BlockOperator,
    beta: &BetaMatrix,
    metric: Metric,
    tol: f64,
) -> Result<SplitHamiltonian> {
    beta.check(h)?;
    beta.check(mass)?;
    let scale = h.norm_fro().max(1.0);
    let mass_odd = odd_part(mass, beta)?.norm_fro() / scale;
    if mass_odd > tol {
        return Err(FwError::Structure(format!(
            "mass operator is not even (odd part {mass_odd:.3e})"
        )));
    }
    let sa = (h - &adjoint_m(h, metric)).norm_fro() / scale;
    if sa > tol {
        return Err(FwError::MetricViolation(format!(
            "Hamiltonian is not {}-self-adjoint (defect {sa:.3e})",
            metric.as_str()
        )));
    }
    let even = &even_part(h, beta)? - &beta.left(mass);
    let odd = odd_part(h, beta)?;
    let out = SplitHamiltonian {
        mass: mass.clone(),
        even,
        odd,
        beta: beta.clone(),
        metric,
    };
    out.validate(tol)?;
    Ok(out)
}
